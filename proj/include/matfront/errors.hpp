#pragma once

#include <stdexcept>
#include <string>

namespace matfront {

// Thrown when an iterative numerical routine exhausts its iteration budget.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a local design matrix cannot be inverted (bandwidth too small
// for the local data, or a degenerate design).
struct SingularDesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace matfront
