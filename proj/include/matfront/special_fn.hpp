#pragma once

#include <cstddef>

namespace matfront::special_fn {

// Upper incomplete gamma function Gamma(shape, x) = int_x^inf z^{shape-1} e^{-z} dz.
// Requires shape > 0, x >= 0, both finite. Relative error <= 1e-12.
double upper_inc_gamma(double shape, double x);

// Lower incomplete gamma function gamma(shape, x) = int_0^x z^{shape-1} e^{-z} dz.
double lower_inc_gamma(double shape, double x);

// Inverse of the upper incomplete gamma function in its second argument:
// returns x such that Gamma(shape, x) = y, for y in (0, Gamma(shape)).
// Safeguarded Newton iteration, budget 200; throws ConvergenceError on failure.
double inv_upper_inc_gamma(double shape, double y);

// Regularized versions P(shape, x) = gamma(shape,x)/Gamma(shape) and
// Q(shape, x) = Gamma(shape,x)/Gamma(shape); useful when Gamma(shape)
// would overflow the unnormalized values.
double reg_lower_inc_gamma(double shape, double x);
double reg_upper_inc_gamma(double shape, double x);

}  // namespace matfront::special_fn
