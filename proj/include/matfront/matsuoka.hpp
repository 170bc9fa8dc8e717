#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace matfront::matsuoka {

// Shape parameter of the M(p) distribution on (0,1),
// f_p(x) = 2 sqrt(-p^3 ln(x) / pi) x^{p-1}.
// Equivalently, -ln(X) ~ Gamma(3/2, 1/p) in shape/scale form.
struct Params {
    double p;
    explicit Params(double p_);
};

// Density. Returns 0 outside (0,1), including the endpoints; note the density
// is unbounded near 0 when p < 1. Evaluated in log space for stability.
double pdf(Params params, double x);

// Distribution function: (2/sqrt(pi)) * Gamma(3/2, -p ln x) on (0,1).
double cdf(Params params, double x);

// Quantile function, the exact inverse of cdf on [0,1].
double quantile(Params params, double q);

// n i.i.d. draws, X = exp(-G) with G ~ Gamma(3/2, 1/p). Deterministic given seed;
// all outputs strictly inside (0,1).
std::vector<double> sample(Params params, std::size_t n, std::uint64_t seed);

// E(X^k) = (p/(p+k))^{3/2}, for k > -p.
double raw_moment(Params params, double k);

double mean(Params params);
double variance(Params params);
double skewness(Params params);
double kurtosis(Params params);

// Interior mode e^{-1/(2(p-1))} for p > 1; nullopt when p <= 1 (J-shaped
// density, increasing mass toward the lower boundary, supremum at the edge).
std::optional<double> mode(Params params);

// Moment generating function via its absolutely convergent series.
double mgf(Params params, double t);

// k-th incomplete moment m_k(y) = int_0^y x^k f_p(x) dx, for k > -p, y in (0,1).
double incomplete_moment(Params params, double k, double y);

struct MeanDeviations {
    double about_mean;    // E|X - mu|
    double about_median;  // E|X - M|
};
MeanDeviations mean_deviations(Params params);

// alpha-expectile: bracketed bisection on the fixed-point equation, tolerance
// 1e-10, budget 200 iterations. expectile(1/2) equals the mean.
double expectile(Params params, double alpha);

// int_0^1 f_p(x)^alpha dx. Requires alpha > 0 and alpha (p-1) + 1 > 0.
double density_power_integral(Params params, double alpha);

struct PowerIntegralDiagnostics {
    double closed_form;              // quadrature-verified closed form (used everywhere)
    double exponential_family_form;  // alternative exponential-family route; disagrees
                                     // with direct quadrature, kept for transparency
};
PowerIntegralDiagnostics density_power_integral_diagnostics(Params params, double alpha);

double shannon_entropy(Params params);                               // 3/(2p)
double renyi_entropy(Params params, double alpha);                   // ln(M_a)/(1-a)
double tsallis_entropy(Params params, double alpha);                 // (M_a - 1)/(1-a)
double sharma_mittal_entropy(Params params, double alpha, double beta);

// P(X > Y) for independent X ~ M(p), Y ~ M(q):
// (2/pi) [ (2s-1) sqrt(s(1-s)) + arcsin(sqrt(s)) ], s = p/(p+q).
double reliability(double p, double q);

// Density and distribution of the r-th order statistic of an i.i.d. sample
// of size n.
double order_stat_pdf(Params params, int n, int r, double x);
double order_stat_cdf(Params params, int n, int r, double x);

struct FitResult {
    double mle;    // -3n / (2 sum ln x_i)
    double umvue;  // -(3n-2) / (2 sum ln x_i)
};
// Closed-form estimators of p from an i.i.d. sample; requires n >= 2 and all
// observations strictly inside (0,1).
FitResult fit_mle(std::span<const double> sample);

}  // namespace matfront::matsuoka
