#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace matfront::smoothers {

// Univariate smoothing kernel. Symmetric, integrates to 1; custom table
// kernels are validated at construction.
class Kernel {
public:
    enum class Kind { Epanechnikov, Gaussian, Table };

    static Kernel epanechnikov();
    static Kernel gaussian();
    // Piecewise-linear kernel given by values on an ascending grid of abscissae.
    // Checked for symmetry and unit integral (trapezoid quadrature, 1e-6).
    static Kernel from_table(std::vector<double> u, std::vector<double> k);

    double operator()(double u) const;
    // int_{-inf}^{t} K(u) du
    double integral_to(double t) const;
    // Radius beyond which K vanishes; +inf for the Gaussian kernel.
    double support_radius() const;
    Kind kind() const { return kind_; }
    std::string name() const;

private:
    Kernel() = default;
    Kind kind_ = Kind::Epanechnikov;
    std::vector<double> table_u_, table_k_, table_cum_;
};

enum class Method { LocLin, Cbs, Sbs };
std::string method_name(Method m);

// One additive component tabulated on a grid; evaluated by linear
// interpolation. Throws std::domain_error outside the grid range.
struct ComponentCurve {
    std::vector<double> x;
    std::vector<double> y;
    double operator()(double z) const;
};

struct SmootherFit {
    Method method = Method::LocLin;
    Kernel kernel = Kernel::epanechnikov();
    std::vector<double> bandwidths;
    double intercept = 0.0;                  // Zbar for m > 1, 0 for loclin
    std::vector<double> fitted;              // ghat at the n observation points
    std::vector<ComponentCurve> components;  // per-covariate curves (loclin: the full ghat curve)
    int iterations = 0;
    double final_update = 0.0;
    double smoother_product_norm = -1.0;     // CBS: spectral norm estimate of S1* S2*

    // ghat at a new point (m coordinates); intercept plus interpolated components.
    double evaluate(std::span<const double> x) const;
};

// Local linear value and equivalent-kernel row at a single point.
struct LocalLinearPoint {
    double value = 0.0;
    std::vector<double> weights;  // sum to 1, orthogonal to (X - z)
};
LocalLinearPoint local_linear_point(std::span<const double> X, std::span<const double> Z,
                                    const Kernel& kernel, double h, double z);

// Univariate local linear fit. Fitted values computed exactly at the
// observation points; `curve_points` (default: 101 equispaced points across
// the design range) tabulate the curve for off-sample evaluation.
SmootherFit local_linear_fit(std::span<const double> X, std::span<const double> Z,
                             const Kernel& kernel, double h,
                             std::span<const double> curve_points = {});

enum class CbsMode { Explicit, Iterative };

// Classical backfitting for two covariates built on centered local linear
// smoother matrices. Explicit mode forms W_j = I - (I - S1* S2*)^{-1}(I - S1*)
// and requires ||S1* S2*|| < 1; iterative mode converges to the same fixed
// point (budget 500 sweeps, update norm 1e-10).
SmootherFit cbs_fit(std::span<const double> X1, std::span<const double> X2,
                    std::span<const double> Z, const Kernel& kernel, double h1, double h2,
                    CbsMode mode = CbsMode::Explicit);

// Nadaraya-Watson smooth backfitting for two covariates on a uniform grid
// over the rescaled support [0,1]^2, with boundary-renormalized kernels.
// Components satisfy the density-weighted centering constraint.
SmootherFit sbs_fit(std::span<const double> X1, std::span<const double> X2,
                    std::span<const double> Z, const Kernel& kernel, double h1, double h2,
                    int grid_size = 101);

struct CvResult {
    std::vector<double> bandwidths;
    double score = 0.0;
    int failed_candidates = 0;
};

// Leave-one-out cross-validation score for a single bandwidth (m = 1,
// local linear). Uses the exact leverage shortcut.
double cv_score_loclin(std::span<const double> X, std::span<const double> Z,
                       const Kernel& kernel, double h);

// Leave-one-out score for a bandwidth pair with CBS or SBS (true refits on
// each leave-one-out subsample).
double cv_score_bivariate(std::span<const double> X1, std::span<const double> X2,
                          std::span<const double> Z, const Kernel& kernel, Method method,
                          double h1, double h2, int sbs_grid_size = 101);

// argmin of CV over a candidate grid; ties broken toward the larger
// bandwidth. Candidates that fail on some subsample are skipped and counted.
CvResult cv_bandwidth_loclin(std::span<const double> X, std::span<const double> Z,
                             const Kernel& kernel, std::span<const double> h_grid);

// Cartesian search over per-axis grids for the bivariate methods.
CvResult cv_bandwidth_bivariate(std::span<const double> X1, std::span<const double> X2,
                                std::span<const double> Z, const Kernel& kernel, Method method,
                                std::span<const double> h1_grid, std::span<const double> h2_grid,
                                int sbs_grid_size = 101);

// Default candidate grid: `count` log-spaced values spanning
// [0.1 sigma_X n^{-1/5}, 2 range(X)].
std::vector<double> default_bandwidth_grid(std::span<const double> X, int count = 20);

}  // namespace matfront::smoothers
