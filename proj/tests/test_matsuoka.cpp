#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "matfront/errors.hpp"
#include "matfront/matsuoka.hpp"
#include "test_util.hpp"

using namespace matfront::matsuoka;

namespace {

// Direct density formula, independent of the library implementation.
double pdf_formula(double p, double x) {
    if (!(x > 0.0) || !(x < 1.0)) return 0.0;
    return 2.0 * std::sqrt(-p * p * p * std::log(x) / M_PI) * std::pow(x, p - 1.0);
}

// With t = -ln x the density transforms to (2/sqrt(pi)) p^{3/2} sqrt(t) e^{-p t};
// E(X^k) integrals become ordinary gamma-type integrals in t, which keeps the
// quadrature oracle away from the x -> 0 singularity when p < 1.
double t_integrand(double p, double k, double t) {
    return 2.0 / std::sqrt(M_PI) * std::pow(p, 1.5) * std::sqrt(t) * std::exp(-(p + k) * t);
}

double quad_partial_moment(double p, double k, double t_lo, double t_hi) {
    return testutil::integrate([&](double t) { return t_integrand(p, k, t); }, t_lo, t_hi,
                               1e-13);
}

double mc_se(const std::vector<double>& v, double mean) {
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);
    return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("params validation") {
    CHECK_THROWS_AS(Params(0.0), std::domain_error);
    CHECK_THROWS_AS(Params(-2.0), std::domain_error);
    CHECK_NOTHROW(Params(0.1));
}

TEST_CASE("pdf point values") {
    CHECK(pdf(Params(2.0), 1.5) == 0.0);
    CHECK(pdf(Params(2.0), 0.0) == 0.0);
    CHECK(pdf(Params(2.0), 1.0) == 0.0);
    // Mode height sqrt(2 p^3 e^{-1} / (pi (p-1))) at the mode for p = 2.
    const double mode_x = std::exp(-0.5);
    CHECK(pdf(Params(2.0), mode_x) ==
          doctest::Approx(std::sqrt(2.0 * 8.0 * std::exp(-1.0) / M_PI)).epsilon(1e-12));
    CHECK(pdf(Params(1.0), 0.25) ==
          doctest::Approx(2.0 * std::sqrt(std::log(4.0) / M_PI)).epsilon(1e-12));
    CHECK(pdf(Params(8.0), 0.37) == doctest::Approx(pdf_formula(8.0, 0.37)).epsilon(1e-12));
}

TEST_CASE("pdf integrates to one") {
    for (double p : {0.1, 0.5, 1.0, 1.0 + 1.0 / (2.0 * std::log(2.0)), 2.0, 8.0, 50.0}) {
        const double total = quad_partial_moment(p, 0.0, 0.0, 90.0 / p + 5.0);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("cdf values and oracle") {
    CHECK(cdf(Params(3.0), 1.0) == 1.0);
    CHECK(cdf(Params(3.0), 0.0) == 0.0);
    CHECK(cdf(Params(3.0), 2.0) == 1.0);
    CHECK(cdf(Params(3.0), -1.0) == 0.0);
    // P(X <= 0.5) = integral over t >= ln 2 of the transformed density.
    const double oracle = quad_partial_moment(2.0, 0.0, std::log(2.0), 50.0);
    CHECK(cdf(Params(2.0), 0.5) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("quantile endpoints and inverse property") {
    CHECK(quantile(Params(2.0), 0.0) == 0.0);
    CHECK(quantile(Params(2.0), 1.0) == 1.0);
    const double x = quantile(Params(3.0), 0.5);
    CHECK(std::fabs(cdf(Params(3.0), x) - 0.5) <= 1e-9);
    CHECK_THROWS_AS(quantile(Params(2.0), -0.1), std::domain_error);
    CHECK_THROWS_AS(quantile(Params(2.0), 1.1), std::domain_error);
    for (double p : {0.5, 2.0, 8.0}) {
        for (int i = 1; i < 100; ++i) {
            const double q = static_cast<double>(i) / 100.0;
            CHECK(cdf(Params(p), quantile(Params(p), q)) == doctest::Approx(q).epsilon(1e-9));
        }
    }
}

TEST_CASE("sampling: moments, KS and determinism") {
    const auto s = sample(Params(2.0), 1000000, 1);
    for (double v : s) {
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
    }
    const double mean_hat = std::accumulate(s.begin(), s.end(), 0.0) / 1e6;
    const double target = std::pow(2.0 / 3.0, 1.5);
    CHECK(std::fabs(mean_hat - target) <= 3.0 * mc_se(s, mean_hat));

    const auto s1 = sample(Params(1.0), 1000000, 7);
    const double d = testutil::ks_statistic(s1, [](double x) { return cdf(Params(1.0), x); });
    CHECK(d < 1.63 / std::sqrt(1e6));  // 1% critical value

    const auto a = sample(Params(0.5), 1000, 99);
    const auto b = sample(Params(0.5), 1000, 99);
    CHECK(a == b);

    // -sum ln X_i ~ Gamma(3n/2, 1/p): check the mean of -ln X.
    double t = 0.0;
    for (double v : s) t -= std::log(v);
    const double se = std::sqrt(3.0 / (2.0 * 4.0) / 1e6);
    CHECK(std::fabs(t / 1e6 - 0.75) <= 3.0 * se);
}

TEST_CASE("raw moments") {
    CHECK(raw_moment(Params(1.0), 1.0) == doctest::Approx(std::pow(0.5, 1.5)).epsilon(1e-14));
    CHECK(raw_moment(Params(7.0), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(raw_moment(Params(2.0), -1.0) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    // quadrature oracle for E(X^{-1}) at p = 2
    const double oracle = quad_partial_moment(2.0, -1.0, 0.0, 120.0);
    CHECK(raw_moment(Params(2.0), -1.0) == doctest::Approx(oracle).epsilon(1e-10));
    CHECK_THROWS_AS(raw_moment(Params(2.0), -2.0), std::domain_error);
}

TEST_CASE("mean, variance, skewness, kurtosis") {
    CHECK(mean(Params(1.0)) == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-14));
    for (double p : {0.2, 1.0, 3.0, 20.0}) CHECK(variance(Params(p)) > 0.0);

    const double p = 8.0;
    const double mu = quad_partial_moment(p, 1.0, 0.0, 40.0);
    auto central = [&](int order) {
        return testutil::integrate(
            [&](double t) {
                const double x = std::exp(-t);
                return 2.0 / std::sqrt(M_PI) * std::pow(p, 1.5) * std::sqrt(t) *
                       std::exp(-p * t) * std::pow(x - mu, order);
            },
            0.0, 40.0, 1e-14);
    };
    const double m2 = central(2), m3 = central(3), m4 = central(4);
    CHECK(variance(Params(p)) == doctest::Approx(m2).epsilon(1e-8));
    CHECK(skewness(Params(p)) == doctest::Approx(m3 / std::pow(m2, 1.5)).epsilon(1e-8));
    CHECK(kurtosis(Params(p)) == doctest::Approx(m4 / (m2 * m2)).epsilon(1e-8));
}

TEST_CASE("mode and shape") {
    REQUIRE(mode(Params(2.0)).has_value());
    CHECK(*mode(Params(2.0)) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK_FALSE(mode(Params(1.0)).has_value());
    CHECK_FALSE(mode(Params(0.3)).has_value());

    // Grid argmax oracle for p = 3.
    double best_x = 0.0, best_v = -1.0;
    for (int i = 1; i < 1000000; ++i) {
        const double x = static_cast<double>(i) / 1000000.0;
        const double v = pdf(Params(3.0), x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    CHECK(std::fabs(best_x - *mode(Params(3.0))) <= 1e-5);

    // J-shape iff p <= 1: strictly decreasing density on a grid.
    for (double p : {0.4, 1.0}) {
        double prev = pdf(Params(p), 1e-4);
        for (int i = 2; i <= 10000; ++i) {
            const double x = static_cast<double>(i) / 10001.0;
            const double v = pdf(Params(p), x);
            REQUIRE(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("mgf") {
    CHECK(mgf(Params(3.0), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mgf(Params(2.0), 1.0) <= std::exp(1.0));
    const auto s = sample(Params(2.0), 1000000, 11);
    std::vector<double> ex(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) ex[i] = std::exp(0.5 * s[i]);
    const double mc = std::accumulate(ex.begin(), ex.end(), 0.0) / 1e6;
    CHECK(std::fabs(mgf(Params(2.0), 0.5) - mc) <= 3.0 * mc_se(ex, mc));
}

TEST_CASE("incomplete moments") {
    CHECK(incomplete_moment(Params(2.0), 1.0, 1.0 - 1e-12) ==
          doctest::Approx(raw_moment(Params(2.0), 1.0)).epsilon(1e-8));
    CHECK(incomplete_moment(Params(2.0), 0.0, 0.5) ==
          doctest::Approx(cdf(Params(2.0), 0.5)).epsilon(1e-12));
    // quadrature over x in (0, 0.3] in t-space: t from -ln 0.3 upward.
    const double oracle = quad_partial_moment(1.0, 1.0, -std::log(0.3), 80.0);
    CHECK(incomplete_moment(Params(1.0), 1.0, 0.3) == doctest::Approx(oracle).epsilon(1e-10));
    CHECK_THROWS_AS(incomplete_moment(Params(2.0), 1.0, 1.5), std::domain_error);
}

TEST_CASE("mean deviations") {
    for (double p : {0.5, 1.0, 2.0, 8.0}) {
        const auto d = mean_deviations(Params(p));
        CHECK(d.about_mean >= 0.0);
        CHECK(d.about_median >= 0.0);
    }
    const auto s = sample(Params(2.0), 1000000, 21);
    const double mu = mean(Params(2.0));
    const double med = quantile(Params(2.0), 0.5);
    std::vector<double> dm(s.size()), dd(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        dm[i] = std::fabs(s[i] - mu);
        dd[i] = std::fabs(s[i] - med);
    }
    const double m1 = std::accumulate(dm.begin(), dm.end(), 0.0) / 1e6;
    const double m2 = std::accumulate(dd.begin(), dd.end(), 0.0) / 1e6;
    const auto d = mean_deviations(Params(2.0));
    CHECK(std::fabs(d.about_mean - m1) <= 3.0 * mc_se(dm, m1));
    CHECK(std::fabs(d.about_median - m2) <= 3.0 * mc_se(dd, m2));
}

TEST_CASE("expectiles") {
    CHECK(expectile(Params(2.0), 0.5) == doctest::Approx(mean(Params(2.0))).epsilon(1e-10));
    double prev = 0.0;
    for (double a : {0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95}) {
        const double e = expectile(Params(1.0), a);
        CHECK(e > prev);
        prev = e;
    }
    // First-order-condition oracle: the alpha-expectile solves
    // alpha E(X - e)_+ = (1 - alpha) E(e - X)_+; bisect it with quadrature.
    const double p = 2.0, alpha = 0.8;
    auto foc = [&](double e) {
        const double up = testutil::integrate(
            [&](double x) { return (x - e) * pdf_formula(p, x); }, e, 1.0, 1e-13);
        const double down = testutil::integrate(
            [&](double x) { return (e - x) * pdf_formula(p, x); }, 1e-12, e, 1e-13);
        return alpha * up - (1.0 - alpha) * down;
    };
    double lo = 0.01, hi = 0.999;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (foc(mid) > 0.0 ? lo : hi) = mid;
    }
    CHECK(expectile(Params(p), alpha) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-8));
}

TEST_CASE("density power integral and entropies") {
    CHECK(density_power_integral(Params(2.0), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    const double quad2 = testutil::integrate(
        [](double x) { return std::pow(pdf_formula(2.0, x), 2.0); }, 1e-14, 1.0, 1e-13);
    CHECK(density_power_integral(Params(2.0), 2.0) == doctest::Approx(quad2).epsilon(1e-8));
    CHECK_THROWS_AS(density_power_integral(Params(0.5), 3.0), std::domain_error);

    const auto diag = density_power_integral_diagnostics(Params(2.0), 2.0);
    CHECK(diag.closed_form == doctest::Approx(quad2).epsilon(1e-8));
    CHECK(diag.exponential_family_form > 0.0);

    CHECK(shannon_entropy(Params(3.0)) == doctest::Approx(0.5).epsilon(1e-14));
    // The alpha -> 1 Renyi limit is the differential entropy -int f ln f,
    // which differs from the -E(ln X) = 3/(2p) functional exposed as
    // shannon_entropy. Oracle: quadrature of -f ln f (in t = -ln x).
    const double h_diff = testutil::integrate(
        [](double t) {
            if (t <= 0.0) return 0.0;
            const double dens = 2.0 / std::sqrt(M_PI) * std::pow(2.0, 1.5) * std::sqrt(t) *
                                std::exp(-2.0 * t);
            const double logf = std::log(2.0 / std::sqrt(M_PI)) + 1.5 * std::log(2.0) +
                                0.5 * std::log(t) - 1.0 * t;
            return -dens * logf;
        },
        0.0, 60.0, 1e-13);
    CHECK(renyi_entropy(Params(2.0), 1.0 + 1e-6) == doctest::Approx(h_diff).epsilon(1e-4));
    CHECK(renyi_entropy(Params(2.0), 1.0 - 1e-6) == doctest::Approx(h_diff).epsilon(1e-4));
    CHECK(tsallis_entropy(Params(2.0), 2.0) == doctest::Approx((quad2 - 1.0) / -1.0).epsilon(1e-8));
    // Sharma-Mittal contains Tsallis at beta = alpha.
    CHECK(sharma_mittal_entropy(Params(2.0), 2.0, 2.0) ==
          doctest::Approx(tsallis_entropy(Params(2.0), 2.0)).epsilon(1e-10));
}

TEST_CASE("reliability") {
    CHECK(reliability(3.0, 3.0) == doctest::Approx(0.5).epsilon(1e-12));
    for (double p : {0.3, 1.0, 2.5, 9.0}) {
        for (double q : {0.6, 1.0, 4.0}) {
            CHECK(reliability(p, q) + reliability(q, p) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // Monte Carlo oracle for P(X > Y), p = 2, q = 0.5.
    const auto xs = sample(Params(2.0), 1000000, 31);
    const auto ys = sample(Params(0.5), 1000000, 32);
    double wins = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) wins += xs[i] > ys[i] ? 1.0 : 0.0;
    const double phat = wins / 1e6;
    const double se = std::sqrt(phat * (1.0 - phat) / 1e6);
    CHECK(std::fabs(reliability(2.0, 0.5) - phat) <= 3.0 * se);
    // Monotone approach to 1 as p grows.
    double prev = 0.0;
    for (double p : {1.0, 2.0, 5.0, 10.0, 50.0}) {
        const double r = reliability(p, 1.0);
        CHECK(r > prev);
        prev = r;
    }
    CHECK(prev < 1.0);
}

TEST_CASE("order statistics") {
    const Params params(2.0);
    for (double x : {0.1, 0.4, 0.9}) {
        CHECK(order_stat_pdf(params, 1, 1, x) == doctest::Approx(pdf(params, x)).epsilon(1e-12));
        CHECK(order_stat_cdf(params, 1, 1, x) == doctest::Approx(cdf(params, x)).epsilon(1e-12));
        CHECK(order_stat_cdf(params, 5, 5, x) ==
              doctest::Approx(std::pow(cdf(params, x), 5.0)).epsilon(1e-12));
    }
    // pdf of the 3rd of 10 integrates to 1.
    const double total = testutil::integrate(
        [&](double x) { return order_stat_pdf(params, 10, 3, x); }, 1e-12, 1.0, 1e-12);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    // Simulated minima of samples of 10 vs the r=1 distribution (KS at 1%).
    const auto s = sample(params, 1000000, 41);
    std::vector<double> minima(100000);
    for (std::size_t i = 0; i < minima.size(); ++i) {
        double m = 1.0;
        for (int j = 0; j < 10; ++j) m = std::min(m, s[i * 10 + j]);
        minima[i] = m;
    }
    const double d = testutil::ks_statistic(
        minima, [&](double x) { return order_stat_cdf(params, 10, 1, x); });
    CHECK(d < 1.63 / std::sqrt(1e5));
    CHECK_THROWS_AS(order_stat_pdf(params, 5, 0, 0.5), std::domain_error);
    CHECK_THROWS_AS(order_stat_pdf(params, 5, 6, 0.5), std::domain_error);
}

TEST_CASE("closed-form estimators") {
    // n = 3, sum ln x = -4.5
    std::vector<double> xs(3, std::exp(-1.5));
    const auto r = fit_mle(xs);
    CHECK(r.mle == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.umvue == doctest::Approx(7.0 / 9.0).epsilon(1e-14));
    CHECK_THROWS_AS(fit_mle(std::vector<double>{0.5}), std::domain_error);
    CHECK_THROWS_AS(fit_mle(std::vector<double>{0.5, 1.5}), std::domain_error);
}
