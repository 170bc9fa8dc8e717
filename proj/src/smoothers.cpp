#include "matfront/smoothers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "matfront/errors.hpp"

namespace matfront::smoothers {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double trapezoid(std::span<const double> y, double dx) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) s += 0.5 * (y[i] + y[i + 1]);
    return s * dx;
}

std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) {
        g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return g;
}

// Linear interpolation on an ascending uniform-or-not grid.
double interp(std::span<const double> gx, std::span<const double> gy, double z) {
    // Points a few ulp past an endpoint (linspace round-off) snap to it.
    const double slack = 1e-12 * std::max(1.0, std::fabs(gx.back() - gx.front()));
    if (z < gx.front() - slack || z > gx.back() + slack) {
        throw std::domain_error("evaluation point " + std::to_string(z) +
                                " outside fitted range [" + std::to_string(gx.front()) + ", " +
                                std::to_string(gx.back()) + "]");
    }
    z = std::clamp(z, gx.front(), gx.back());
    auto it = std::lower_bound(gx.begin(), gx.end(), z);
    if (it == gx.begin()) return gy.front();
    const std::size_t hi = static_cast<std::size_t>(it - gx.begin());
    const std::size_t lo = hi - 1;
    const double t = (z - gx[lo]) / (gx[hi] - gx[lo]);
    return gy[lo] + t * (gy[hi] - gy[lo]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

Kernel Kernel::epanechnikov() {
    Kernel k;
    k.kind_ = Kind::Epanechnikov;
    return k;
}

Kernel Kernel::gaussian() {
    Kernel k;
    k.kind_ = Kind::Gaussian;
    return k;
}

Kernel Kernel::from_table(std::vector<double> u, std::vector<double> k) {
    if (u.size() != k.size() || u.size() < 3) {
        throw std::domain_error("table kernel: need matching abscissae/values, length >= 3");
    }
    if (!std::is_sorted(u.begin(), u.end())) {
        throw std::domain_error("table kernel: abscissae must be ascending");
    }
    Kernel ker;
    ker.kind_ = Kind::Table;
    ker.table_u_ = std::move(u);
    ker.table_k_ = std::move(k);
    // Symmetry check at the tabulated abscissae.
    for (std::size_t i = 0; i < ker.table_u_.size(); ++i) {
        const double mirrored = interp(ker.table_u_, ker.table_k_,
                                       std::clamp(-ker.table_u_[i], ker.table_u_.front(),
                                                  ker.table_u_.back()));
        if (std::fabs(mirrored - ker.table_k_[i]) > 1e-8) {
            throw std::domain_error("table kernel: not symmetric at u = " +
                                    std::to_string(ker.table_u_[i]));
        }
    }
    ker.table_cum_.assign(ker.table_u_.size(), 0.0);
    for (std::size_t i = 1; i < ker.table_u_.size(); ++i) {
        ker.table_cum_[i] = ker.table_cum_[i - 1] +
                            0.5 * (ker.table_k_[i] + ker.table_k_[i - 1]) *
                                (ker.table_u_[i] - ker.table_u_[i - 1]);
    }
    if (std::fabs(ker.table_cum_.back() - 1.0) > 1e-6) {
        throw std::domain_error("table kernel: does not integrate to 1 (got " +
                                std::to_string(ker.table_cum_.back()) + ")");
    }
    return ker;
}

double Kernel::operator()(double u) const {
    switch (kind_) {
        case Kind::Epanechnikov:
            return std::fabs(u) >= 1.0 ? 0.0 : 0.75 * (1.0 - u * u);
        case Kind::Gaussian:
            return 0.3989422804014327 * std::exp(-0.5 * u * u);
        case Kind::Table:
            if (u < table_u_.front() || u > table_u_.back()) return 0.0;
            return interp(table_u_, table_k_, u);
    }
    return 0.0;
}

double Kernel::integral_to(double t) const {
    switch (kind_) {
        case Kind::Epanechnikov:
            if (t <= -1.0) return 0.0;
            if (t >= 1.0) return 1.0;
            return 0.5 + 0.75 * (t - t * t * t / 3.0);
        case Kind::Gaussian:
            return 0.5 * std::erfc(-t * 0.7071067811865476);
        case Kind::Table: {
            if (t <= table_u_.front()) return 0.0;
            if (t >= table_u_.back()) return table_cum_.back();
            return interp(table_u_, table_cum_, t);
        }
    }
    return 0.0;
}

double Kernel::support_radius() const {
    switch (kind_) {
        case Kind::Epanechnikov:
            return 1.0;
        case Kind::Gaussian:
            return kInf;
        case Kind::Table:
            return std::max(std::fabs(table_u_.front()), std::fabs(table_u_.back()));
    }
    return kInf;
}

std::string Kernel::name() const {
    switch (kind_) {
        case Kind::Epanechnikov: return "epanechnikov";
        case Kind::Gaussian: return "gaussian";
        case Kind::Table: return "table";
    }
    return "?";
}

std::string method_name(Method m) {
    switch (m) {
        case Method::LocLin: return "loclin";
        case Method::Cbs: return "cbs";
        case Method::Sbs: return "sbs";
    }
    return "?";
}

double ComponentCurve::operator()(double z) const { return interp(x, y, z); }

double SmootherFit::evaluate(std::span<const double> xp) const {
    if (xp.size() != components.size()) {
        throw std::domain_error("evaluate: expected " + std::to_string(components.size()) +
                                " coordinates, got " + std::to_string(xp.size()));
    }
    double v = intercept;
    for (std::size_t j = 0; j < components.size(); ++j) v += components[j](xp[j]);
    return v;
}

// ---------------------------------------------------------------------------
// Local linear
// ---------------------------------------------------------------------------

LocalLinearPoint local_linear_point(std::span<const double> X, std::span<const double> Z,
                                    const Kernel& kernel, double h, double z) {
    if (X.size() != Z.size() || X.size() < 3) {
        throw std::domain_error("local linear: need matching X/Z with n >= 3");
    }
    if (!(h > 0.0)) throw std::domain_error("local linear: bandwidth must be positive");
    const std::size_t n = X.size();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
    std::vector<double> kw(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = X[i] - z;
        const double w = kernel(d / h) / h;
        if (w == 0.0) continue;
        kw[i] = w;
        s0 += w;
        s1 += w * d;
        s2 += w * d * d;
        t0 += w * Z[i];
        t1 += w * d * Z[i];
    }
    const double denom = s0 * s2 - s1 * s1;
    if (!(denom > 1e-12 * (s0 * s2 + s1 * s1 + 1e-300))) {
        throw SingularDesignError(
            "local linear design singular at evaluation point " + std::to_string(z) +
            " (bandwidth too small for the local data)");
    }
    LocalLinearPoint out;
    out.weights.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (kw[i] == 0.0) continue;
        const double d = X[i] - z;
        out.weights[i] = kw[i] * (s2 - s1 * d) / denom;
        out.value += out.weights[i] * Z[i];
    }
    return out;
}

namespace {

// Value and self-leverage of the local linear fit at z = X[self]; avoids
// materializing the weight vector.  With a compact kernel only a sorted
// window contributes; callers pass X sorted ascending.
struct PointFit {
    double value;
    double leverage;
};

PointFit loclin_value_leverage_sorted(std::span<const double> Xs, std::span<const double> Zs,
                                      const Kernel& kernel, double h, std::size_t self) {
    const double z = Xs[self];
    const double radius = kernel.support_radius() * h;
    std::size_t lo = 0, hi = Xs.size();
    if (std::isfinite(radius)) {
        lo = static_cast<std::size_t>(
            std::lower_bound(Xs.begin(), Xs.end(), z - radius) - Xs.begin());
        hi = static_cast<std::size_t>(
            std::upper_bound(Xs.begin(), Xs.end(), z + radius) - Xs.begin());
    }
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double d = Xs[i] - z;
        const double w = kernel(d / h) / h;
        s0 += w;
        s1 += w * d;
        s2 += w * d * d;
        t0 += w * Zs[i];
        t1 += w * d * Zs[i];
    }
    const double denom = s0 * s2 - s1 * s1;
    if (!(denom > 1e-12 * (s0 * s2 + s1 * s1 + 1e-300))) {
        throw SingularDesignError("local linear design singular at evaluation point " +
                                  std::to_string(z));
    }
    PointFit out;
    out.value = (s2 * t0 - s1 * t1) / denom;
    out.leverage = kernel(0.0) / h * s2 / denom;
    return out;
}

}  // namespace

SmootherFit local_linear_fit(std::span<const double> X, std::span<const double> Z,
                             const Kernel& kernel, double h,
                             std::span<const double> curve_points) {
    const std::size_t n = X.size();
    SmootherFit fit;
    fit.method = Method::LocLin;
    fit.kernel = kernel;
    fit.bandwidths = {h};
    fit.fitted.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fit.fitted[i] = local_linear_point(X, Z, kernel, h, X[i]).value;
    }
    std::vector<double> grid;
    if (curve_points.empty()) {
        const auto [mn, mx] = std::minmax_element(X.begin(), X.end());
        grid = linspace(*mn, *mx, 101);
        curve_points = grid;
    }
    ComponentCurve curve;
    curve.x.assign(curve_points.begin(), curve_points.end());
    curve.y.resize(curve.x.size());
    for (std::size_t g = 0; g < curve.x.size(); ++g) {
        curve.y[g] = local_linear_point(X, Z, kernel, h, curve.x[g]).value;
    }
    fit.components.push_back(std::move(curve));
    return fit;
}

// ---------------------------------------------------------------------------
// Classical backfitting
// ---------------------------------------------------------------------------

namespace {

// Local linear smoother matrix: rows are equivalent kernels at the
// observation points. The centered version S* = (I - 11'/n) S used by CBS is
// obtained by removing column means (or by centering matvec results).
Eigen::MatrixXd smoother_matrix(std::span<const double> X, const Kernel& kernel, double h) {
    const std::size_t n = X.size();
    Eigen::MatrixXd S(n, n);
    std::vector<double> dummy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto pt = local_linear_point(X, dummy, kernel, h, X[i]);
        for (std::size_t j = 0; j < n; ++j) S(i, j) = pt.weights[j];
    }
    return S;
}

double spectral_norm_estimate(const Eigen::MatrixXd& M) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(M.cols()).normalized();
    double norm = 0.0;
    for (int it = 0; it < 60; ++it) {
        Eigen::VectorXd w = M.transpose() * (M * v);
        const double wn = w.norm();
        if (wn == 0.0) return 0.0;
        v = w / wn;
        norm = std::sqrt(wn);
    }
    return norm;
}

struct CbsCore {
    std::vector<double> x1, x2;
    double zbar = 0.0;
    Eigen::VectorXd zc;       // centered responses
    Eigen::VectorXd g1, g2;   // component values at observations (mean zero)
    Eigen::VectorXd r1, r2;   // partial residuals zc - g2, zc - g1
    double c1 = 0.0, c2 = 0.0;  // centering constants of the component updates
    int iterations = 0;
    double final_update = 0.0;
    double product_norm = -1.0;

    // Off-sample evaluation of component j from the converged partial residual.
    double component(int j, double z, const Kernel& kernel, double h) const {
        const auto& x = (j == 1) ? x1 : x2;
        const auto& r = (j == 1) ? r1 : r2;
        const double c = (j == 1) ? c1 : c2;
        const auto pt = local_linear_point(x, std::span<const double>(r.data(), r.size()),
                                           kernel, h, z);
        return pt.value - c;
    }
};

CbsCore cbs_core(std::span<const double> X1, std::span<const double> X2,
                 std::span<const double> Z, const Kernel& kernel, double h1, double h2,
                 CbsMode mode) {
    const std::size_t n = Z.size();
    if (X1.size() != n || X2.size() != n || n < 5) {
        throw std::domain_error("cbs: need matching X1/X2/Z with n >= 5");
    }
    CbsCore core;
    core.x1.assign(X1.begin(), X1.end());
    core.x2.assign(X2.begin(), X2.end());
    core.zbar = std::accumulate(Z.begin(), Z.end(), 0.0) / static_cast<double>(n);
    core.zc.resize(n);
    for (std::size_t i = 0; i < n; ++i) core.zc(i) = Z[i] - core.zbar;

    const Eigen::MatrixXd S1r = smoother_matrix(X1, kernel, h1);
    const Eigen::MatrixXd S2r = smoother_matrix(X2, kernel, h2);
    // Centered matvec: S* v = S v - mean(S v) 1. Records the subtracted mean,
    // which is exactly the centering constant of the component update.
    auto centered_apply = [](const Eigen::MatrixXd& S, const Eigen::VectorXd& v, double& c) {
        Eigen::VectorXd u = S * v;
        c = u.mean();
        u.array() -= c;
        return u;
    };

    if (mode == CbsMode::Explicit) {
        Eigen::MatrixXd S1 = S1r;
        S1.rowwise() -= S1r.colwise().mean().eval();
        Eigen::MatrixXd S2 = S2r;
        S2.rowwise() -= S2r.colwise().mean().eval();
        const Eigen::MatrixXd S12 = S1 * S2;
        core.product_norm = spectral_norm_estimate(S12);
        if (!(core.product_norm < 1.0)) {
            throw SingularDesignError(
                "cbs explicit mode: ||S1* S2*|| = " + std::to_string(core.product_norm) +
                " >= 1, unique backfitting solution not guaranteed");
        }
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(I - S12);
        if (!lu.isInvertible()) {
            throw SingularDesignError("cbs explicit mode: (I - S1* S2*) numerically singular");
        }
        const Eigen::MatrixXd W1 = I - lu.solve(I - S1);
        Eigen::FullPivLU<Eigen::MatrixXd> lu2(I - S2 * S1);
        if (!lu2.isInvertible()) {
            throw SingularDesignError("cbs explicit mode: (I - S2* S1*) numerically singular");
        }
        const Eigen::MatrixXd W2 = I - lu2.solve(I - S2);
        core.g1 = W1 * core.zc;
        core.g2 = W2 * core.zc;
    } else {
        core.g1 = Eigen::VectorXd::Zero(n);
        core.g2 = Eigen::VectorXd::Zero(n);
        double update = kInf;
        int it = 0;
        for (; it < 500; ++it) {
            const Eigen::VectorXd g1n = centered_apply(S1r, core.zc - core.g2, core.c1);
            const Eigen::VectorXd g2n = centered_apply(S2r, core.zc - g1n, core.c2);
            update = std::max((g1n - core.g1).lpNorm<Eigen::Infinity>(),
                              (g2n - core.g2).lpNorm<Eigen::Infinity>());
            core.g1 = g1n;
            core.g2 = g2n;
            if (update < 1e-10) break;
        }
        core.iterations = it + 1;
        core.final_update = update;
        if (!(update < 1e-10)) {
            throw ConvergenceError("cbs iterative mode failed to converge within 500 sweeps "
                                   "(last update " + std::to_string(update) + ")");
        }
    }
    core.r1 = core.zc - core.g2;
    core.r2 = core.zc - core.g1;
    // Centering constants at the fixed point: the raw smoother values of the
    // partial residuals minus these reproduce the mean-zero components.
    core.c1 = (S1r * core.r1).mean();
    core.c2 = (S2r * core.r2).mean();
    return core;
}

}  // namespace

SmootherFit cbs_fit(std::span<const double> X1, std::span<const double> X2,
                    std::span<const double> Z, const Kernel& kernel, double h1, double h2,
                    CbsMode mode) {
    const CbsCore core = cbs_core(X1, X2, Z, kernel, h1, h2, mode);
    const std::size_t n = Z.size();

    SmootherFit fit;
    fit.method = Method::Cbs;
    fit.kernel = kernel;
    fit.bandwidths = {h1, h2};
    fit.intercept = core.zbar;
    fit.iterations = core.iterations;
    fit.final_update = core.final_update;
    fit.smoother_product_norm = core.product_norm;
    fit.fitted.resize(n);
    for (std::size_t i = 0; i < n; ++i) fit.fitted[i] = core.zbar + core.g1(i) + core.g2(i);

    const double hs[2] = {h1, h2};
    for (int j = 1; j <= 2; ++j) {
        const auto& x = (j == 1) ? core.x1 : core.x2;
        const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
        ComponentCurve curve;
        curve.x = linspace(*mn, *mx, 101);
        curve.y.resize(curve.x.size());
        for (std::size_t g = 0; g < curve.x.size(); ++g) {
            curve.y[g] = core.component(j, curve.x[g], kernel, hs[j - 1]);
        }
        fit.components.push_back(std::move(curve));
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Smooth backfitting
// ---------------------------------------------------------------------------

namespace {

struct SbsAxis {
    double lo = 0.0, hi = 1.0;        // original-scale range, affine map to [0,1]
    double h = 0.1;                   // bandwidth on the rescaled scale
    std::vector<double> xs;           // rescaled covariate values
    std::vector<double> w;            // grid_size x n normalized kernel weights
};

struct SbsWork {
    int grid_size = 101;
    std::size_t n = 0;
    double dx = 0.0;
    std::vector<double> grid;  // uniform on [0,1]
    SbsAxis axis[2];
    std::vector<double> z;

    double& wref(int j, int g, std::size_t i) { return axis[j].w[g * n + i]; }
    double wval(int j, int g, std::size_t i) const { return axis[j].w[g * n + i]; }
};

SbsWork sbs_prepare(std::span<const double> X1, std::span<const double> X2,
                    std::span<const double> Z, const Kernel& kernel, double h1, double h2,
                    int grid_size) {
    const std::size_t n = Z.size();
    if (X1.size() != n || X2.size() != n || n < 5) {
        throw std::domain_error("sbs: need matching X1/X2/Z with n >= 5");
    }
    if (grid_size < 32) throw std::domain_error("sbs: grid_size must be >= 32");
    SbsWork w;
    w.grid_size = grid_size;
    w.n = n;
    w.grid = linspace(0.0, 1.0, grid_size);
    w.dx = 1.0 / static_cast<double>(grid_size - 1);
    w.z.assign(Z.begin(), Z.end());
    const std::span<const double> cols[2] = {X1, X2};
    const double hs[2] = {h1, h2};
    for (int j = 0; j < 2; ++j) {
        auto& ax = w.axis[j];
        const auto [mn, mx] = std::minmax_element(cols[j].begin(), cols[j].end());
        ax.lo = *mn;
        ax.hi = *mx;
        if (!(ax.hi > ax.lo)) throw std::domain_error("sbs: covariate is constant");
        ax.h = hs[j] / (ax.hi - ax.lo);
        if (!(ax.h > 0.0)) throw std::domain_error("sbs: bandwidth must be positive");
        ax.xs.resize(n);
        for (std::size_t i = 0; i < n; ++i) ax.xs[i] = (cols[j][i] - ax.lo) / (ax.hi - ax.lo);
        ax.w.assign(static_cast<std::size_t>(grid_size) * n, 0.0);
        for (int g = 0; g < grid_size; ++g) {
            const double t = w.grid[g];
            // Renormalize so each kernel integrates to 1 over [0,1].
            const double den = kernel.integral_to(t / ax.h) -
                               kernel.integral_to((t - 1.0) / ax.h);
            for (std::size_t i = 0; i < n; ++i) {
                w.wref(j, g, i) = kernel((t - ax.xs[i]) / ax.h) / (ax.h * den);
            }
        }
    }
    return w;
}

struct SbsSolution {
    double zbar = 0.0;
    std::vector<double> g[2];  // component values on the grid
    int iterations = 0;
    double final_update = 0.0;
};

// Iterated backfitting on the grid; `exclude` drops one observation from all
// empirical sums (used by leave-one-out CV).
SbsSolution sbs_solve(const SbsWork& w, std::ptrdiff_t exclude = -1) {
    const int G = w.grid_size;
    const double nn = static_cast<double>(w.n - (exclude >= 0 ? 1 : 0));

    SbsSolution sol;
    double zsum = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) {
        if (static_cast<std::ptrdiff_t>(i) == exclude) continue;
        zsum += w.z[i];
    }
    sol.zbar = zsum / nn;

    // Marginal density and Nadaraya-Watson numerator on the grid.
    std::vector<double> fhat[2], nw[2];
    for (int j = 0; j < 2; ++j) {
        fhat[j].assign(G, 0.0);
        nw[j].assign(G, 0.0);
        for (int g = 0; g < G; ++g) {
            double fs = 0.0, ns = 0.0;
            for (std::size_t i = 0; i < w.n; ++i) {
                if (static_cast<std::ptrdiff_t>(i) == exclude) continue;
                const double kv = w.wval(j, g, i);
                fs += kv;
                ns += kv * w.z[i];
            }
            fhat[j][g] = fs / nn;
            if (fhat[j][g] < 1e-12) {
                throw SingularDesignError("sbs: estimated marginal density degenerate at grid "
                                          "point " + std::to_string(w.grid[g]) +
                                          " on axis " + std::to_string(j + 1));
            }
            nw[j][g] = ns / (nn * fhat[j][g]);
        }
    }
    const double fint[2] = {trapezoid(fhat[0], w.dx), trapezoid(fhat[1], w.dx)};

    sol.g[0].assign(G, 0.0);
    sol.g[1].assign(G, 0.0);
    std::vector<double> q(w.n), cross(G), prod(G);
    double update = kInf;
    int it = 0;
    for (; it < 500; ++it) {
        update = 0.0;
        for (int j = 0; j < 2; ++j) {
            const int k = 1 - j;
            // q_i = int ghat_k(x) K_{h_k}(x, X_{i,k}) dx
            for (std::size_t i = 0; i < w.n; ++i) {
                if (static_cast<std::ptrdiff_t>(i) == exclude) { q[i] = 0.0; continue; }
                double s = 0.0;
                for (int g = 0; g < G; ++g) {
                    const double v = sol.g[k][g] * w.wval(k, g, i);
                    s += (g == 0 || g == G - 1) ? 0.5 * v : v;
                }
                q[i] = s * w.dx;
            }
            for (int g = 0; g < G; ++g) {
                double s = 0.0;
                for (std::size_t i = 0; i < w.n; ++i) {
                    if (static_cast<std::ptrdiff_t>(i) == exclude) continue;
                    s += w.wval(j, g, i) * q[i];
                }
                cross[g] = s / (nn * fhat[j][g]);
            }
            // Update, then re-impose the density-weighted centering.
            for (int g = 0; g < G; ++g) prod[g] = nw[j][g] - cross[g] - sol.zbar;
            std::vector<double> wgt(G);
            for (int g = 0; g < G; ++g) wgt[g] = prod[g] * fhat[j][g];
            const double c = trapezoid(wgt, w.dx) / fint[j];
            for (int g = 0; g < G; ++g) {
                const double next = prod[g] - c;
                update = std::max(update, std::fabs(next - sol.g[j][g]));
                sol.g[j][g] = next;
            }
        }
        if (update < 1e-8) break;
    }
    sol.iterations = it + 1;
    sol.final_update = update;
    if (!(update < 1e-8)) {
        throw ConvergenceError("sbs failed to converge within 500 sweeps (last update " +
                               std::to_string(update) + ")");
    }
    return sol;
}

}  // namespace

SmootherFit sbs_fit(std::span<const double> X1, std::span<const double> X2,
                    std::span<const double> Z, const Kernel& kernel, double h1, double h2,
                    int grid_size) {
    const SbsWork w = sbs_prepare(X1, X2, Z, kernel, h1, h2, grid_size);
    const SbsSolution sol = sbs_solve(w);
    const std::size_t n = Z.size();

    SmootherFit fit;
    fit.method = Method::Sbs;
    fit.kernel = kernel;
    fit.bandwidths = {h1, h2};
    fit.intercept = sol.zbar;
    fit.iterations = sol.iterations;
    fit.final_update = sol.final_update;

    for (int j = 0; j < 2; ++j) {
        ComponentCurve curve;
        curve.x.resize(w.grid.size());
        for (std::size_t g = 0; g < w.grid.size(); ++g) {
            curve.x[g] = w.axis[j].lo + w.grid[g] * (w.axis[j].hi - w.axis[j].lo);
        }
        curve.y = sol.g[j];
        fit.components.push_back(std::move(curve));
    }
    fit.fitted.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fit.fitted[i] = sol.zbar + interp(w.grid, sol.g[0], w.axis[0].xs[i]) +
                        interp(w.grid, sol.g[1], w.axis[1].xs[i]);
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Leave-one-out bandwidth selection
// ---------------------------------------------------------------------------

double cv_score_loclin(std::span<const double> X, std::span<const double> Z,
                       const Kernel& kernel, double h) {
    const std::size_t n = X.size();
    if (n < 4) throw std::domain_error("cv: need n >= 4");
    // Sort once so compact kernels only touch a window.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return X[a] < X[b]; });
    std::vector<double> xs(n), zs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = X[order[i]];
        zs[i] = Z[order[i]];
    }
    // Leave-one-out residuals accumulated in the original index order so the
    // score is independent of any execution schedule.
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto pt = loclin_value_leverage_sorted(xs, zs, kernel, h, i);
        const double denom = 1.0 - pt.leverage;
        if (!(denom > 1e-12)) {
            throw SingularDesignError("cv: leverage 1 at x = " + std::to_string(xs[i]) +
                                      " (bandwidth too small)");
        }
        resid[order[i]] = zs[i] - (pt.value - pt.leverage * zs[i]) / denom;
    }
    double score = 0.0;
    for (std::size_t i = 0; i < n; ++i) score += resid[i] * resid[i];
    return score / static_cast<double>(n);
}

double cv_score_bivariate(std::span<const double> X1, std::span<const double> X2,
                          std::span<const double> Z, const Kernel& kernel, Method method,
                          double h1, double h2, int sbs_grid_size) {
    const std::size_t n = Z.size();
    if (n < 6) throw std::domain_error("cv: need n >= 6");
    double score = 0.0;
    if (method == Method::Sbs) {
        const SbsWork w = sbs_prepare(X1, X2, Z, kernel, h1, h2, sbs_grid_size);
        for (std::size_t i = 0; i < n; ++i) {
            const SbsSolution sol = sbs_solve(w, static_cast<std::ptrdiff_t>(i));
            const double pred = sol.zbar +
                                interp(w.grid, sol.g[0],
                                       std::clamp(w.axis[0].xs[i], 0.0, 1.0)) +
                                interp(w.grid, sol.g[1],
                                       std::clamp(w.axis[1].xs[i], 0.0, 1.0));
            const double r = Z[i] - pred;
            score += r * r;
        }
    } else if (method == Method::Cbs) {
        std::vector<double> x1s(n - 1), x2s(n - 1), zsub(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t k = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                x1s[k] = X1[j];
                x2s[k] = X2[j];
                zsub[k] = Z[j];
                ++k;
            }
            const CbsCore core = cbs_core(x1s, x2s, zsub, kernel, h1, h2, CbsMode::Iterative);
            const double pred = core.zbar + core.component(1, X1[i], kernel, h1) +
                                core.component(2, X2[i], kernel, h2);
            const double r = Z[i] - pred;
            score += r * r;
        }
    } else {
        throw std::domain_error("cv_score_bivariate: method must be cbs or sbs");
    }
    return score / static_cast<double>(n);
}

CvResult cv_bandwidth_loclin(std::span<const double> X, std::span<const double> Z,
                             const Kernel& kernel, std::span<const double> h_grid) {
    if (h_grid.empty()) throw std::domain_error("cv: empty bandwidth grid");
    std::vector<double> sorted(h_grid.begin(), h_grid.end());
    std::sort(sorted.begin(), sorted.end());
    CvResult best;
    bool found = false;
    for (double h : sorted) {
        double score;
        try {
            score = cv_score_loclin(X, Z, kernel, h);
        } catch (const SingularDesignError&) {
            ++best.failed_candidates;
            continue;
        }
        // Ascending iteration + "<=" breaks ties toward the larger bandwidth.
        if (!found || score <= best.score) {
            best.score = score;
            best.bandwidths = {h};
            found = true;
        }
    }
    if (!found) throw ConvergenceError("cv: all bandwidth candidates failed");
    return best;
}

CvResult cv_bandwidth_bivariate(std::span<const double> X1, std::span<const double> X2,
                                std::span<const double> Z, const Kernel& kernel, Method method,
                                std::span<const double> h1_grid,
                                std::span<const double> h2_grid, int sbs_grid_size) {
    if (h1_grid.empty() || h2_grid.empty()) throw std::domain_error("cv: empty bandwidth grid");
    std::vector<double> g1(h1_grid.begin(), h1_grid.end());
    std::vector<double> g2(h2_grid.begin(), h2_grid.end());
    std::sort(g1.begin(), g1.end());
    std::sort(g2.begin(), g2.end());
    CvResult best;
    bool found = false;
    for (double h1 : g1) {
        for (double h2 : g2) {
            double score;
            try {
                score = cv_score_bivariate(X1, X2, Z, kernel, method, h1, h2, sbs_grid_size);
            } catch (const SingularDesignError&) {
                ++best.failed_candidates;
                continue;
            } catch (const ConvergenceError&) {
                ++best.failed_candidates;
                continue;
            }
            if (!found || score < best.score ||
                (score == best.score && h1 * h2 > best.bandwidths[0] * best.bandwidths[1])) {
                best.score = score;
                best.bandwidths = {h1, h2};
                found = true;
            }
        }
    }
    if (!found) throw ConvergenceError("cv: all bandwidth candidates failed");
    return best;
}

std::vector<double> default_bandwidth_grid(std::span<const double> X, int count) {
    if (count < 1) throw std::domain_error("default_bandwidth_grid: count must be >= 1");
    const std::size_t n = X.size();
    const double mean = std::accumulate(X.begin(), X.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double x : X) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    const auto [mn, mx] = std::minmax_element(X.begin(), X.end());
    const double lo = 0.1 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2);
    const double hi = 2.0 * (*mx - *mn);
    if (!(lo > 0.0) || !(hi > lo)) {
        throw std::domain_error("default_bandwidth_grid: degenerate design");
    }
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = std::sqrt(lo * hi);
        return grid;
    }
    const double step = std::log(hi / lo) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i) grid[i] = lo * std::exp(step * i);
    return grid;
}

}  // namespace matfront::smoothers
