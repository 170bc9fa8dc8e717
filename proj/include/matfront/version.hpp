#pragma once

namespace matfront {
inline constexpr const char* kVersion = "frontier-lab 0.1.0";
}
