#include "matfront/special_fn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "matfront/errors.hpp"

namespace matfront::special_fn {

namespace {

constexpr int kMaxTerms = 500;
constexpr double kEps = 1e-16;
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;

void check_args(double shape, double x) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw std::domain_error("incomplete gamma: shape must be positive and finite, got " +
                                std::to_string(shape));
    }
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::domain_error("incomplete gamma: x must be non-negative and finite, got " +
                                std::to_string(x));
    }
}

// Regularized lower incomplete gamma by its power series, for x < shape + 1.
double gamma_p_series(double a, double x) {
    if (x == 0.0) return 0.0;
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < kMaxTerms; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw ConvergenceError("incomplete gamma series failed to converge");
}

// Regularized upper incomplete gamma by modified Lentz continued fraction,
// for x >= shape + 1.
double gamma_q_contfrac(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxTerms; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw ConvergenceError("incomplete gamma continued fraction failed to converge");
}

}  // namespace

double reg_lower_inc_gamma(double shape, double x) {
    check_args(shape, x);
    if (x < shape + 1.0) return gamma_p_series(shape, x);
    return 1.0 - gamma_q_contfrac(shape, x);
}

double reg_upper_inc_gamma(double shape, double x) {
    check_args(shape, x);
    if (x < shape + 1.0) return 1.0 - gamma_p_series(shape, x);
    return gamma_q_contfrac(shape, x);
}

double upper_inc_gamma(double shape, double x) {
    return std::tgamma(shape) * reg_upper_inc_gamma(shape, x);
}

double lower_inc_gamma(double shape, double x) {
    return std::tgamma(shape) * reg_lower_inc_gamma(shape, x);
}

double inv_upper_inc_gamma(double shape, double y) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw std::domain_error("inv_upper_inc_gamma: shape must be positive and finite");
    }
    const double total = std::tgamma(shape);
    if (!(y > 0.0) || !(y < total)) {
        throw std::domain_error("inv_upper_inc_gamma: y must lie in (0, Gamma(shape)), got " +
                                std::to_string(y));
    }
    const double q = y / total;  // target for Q(shape, .), decreasing in x

    // Bracket the root: Q(shape, 0) = 1, Q decreases to 0.
    double lo = 0.0;
    double hi = shape + 1.0;
    int guard = 0;
    while (reg_upper_inc_gamma(shape, hi) > q) {
        hi *= 2.0;
        if (++guard > 200) throw ConvergenceError("inv_upper_inc_gamma: bracket expansion failed");
    }

    double x = 0.5 * (lo + hi);
    const double lg = std::lgamma(shape);
    for (int it = 0; it < 200; ++it) {
        const double qx = reg_upper_inc_gamma(shape, x);
        const double resid = qx - q;
        if (std::fabs(resid) <= 1e-14 * std::max(q, 1e-300)) return x;
        if (resid > 0.0) {
            lo = x;  // Q too large => x too small
        } else {
            hi = x;
        }
        // Newton step on Q(shape, x) - q; dQ/dx = -x^{shape-1} e^{-x} / Gamma(shape).
        double next = x;
        if (x > 0.0) {
            const double deriv = -std::exp((shape - 1.0) * std::log(x) - x - lg);
            if (deriv != 0.0 && std::isfinite(deriv)) next = x - resid / deriv;
        }
        if (!(next > lo) || !(next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);  // bisection fallback
        }
        if (next == x) return x;
        x = next;
    }
    // Accept the bracket midpoint if it already meets the tolerance.
    const double qx = reg_upper_inc_gamma(shape, x);
    if (std::fabs(qx - q) <= 1e-12) return x;
    throw ConvergenceError("inv_upper_inc_gamma: iteration budget exceeded");
}

}  // namespace matfront::special_fn
