#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "matfront/smoothers.hpp"

namespace matfront::frontier {

// Observed production units. Y is the output, X holds m covariate columns
// (m in {1,2}), Z = -ln Y is derived at construction.
struct Dataset {
    std::vector<double> y;
    std::vector<std::vector<double>> x;  // column-major: x[j][i]
    std::vector<double> z;

    static Dataset create(std::vector<double> y, std::vector<std::vector<double>> x);
    std::size_t n() const { return y.size(); }
    std::size_t m() const { return x.size(); }
};

// Bandwidth resolution: leave-one-out CV over a default log-spaced grid, or
// user-fixed values (one per covariate). `cv_grid_count` overrides the number
// of candidates per axis (0 keeps the built-in default).
struct BandwidthSpec {
    bool use_cv = true;
    std::vector<double> fixed;
    int cv_grid_count = 0;

    static BandwidthSpec cv(int grid_count = 0);
    static BandwidthSpec fixed_h(std::vector<double> h);
};

struct FrontierModel {
    smoothers::SmootherFit fit;
    double p_hat = 0.0;
    std::vector<double> residuals;   // Z_i - ghat(X_i)
    std::vector<double> efficiency;  // Y_i / fhat(X_i)
    std::vector<std::pair<double, double>> train_range;  // per covariate
    bool bandwidth_from_cv = false;
    double cv_score = 0.0;
    int cv_failed_candidates = 0;

    // Regression function and frontier at a new point; throws
    // std::domain_error outside the training covariate range.
    double g_at(std::span<const double> x) const;
    double f_at(std::span<const double> x) const;

    nlohmann::json to_json() const;
    static FrontierModel from_json(const nlohmann::json& doc);
};

// Three-step estimator: (1) fit ghat by the requested smoother, (2) set
// p_hat = sqrt(3n / (2 sum residual^2)), (3) frontier fhat = exp(3/(2 p_hat) - ghat).
// m=1 requires loclin; m=2 requires cbs or sbs.
FrontierModel fit_frontier(const Dataset& data, smoothers::Method method,
                           const smoothers::Kernel& kernel, const BandwidthSpec& bandwidth,
                           int sbs_grid_size = 101);

struct EfficiencyReport {
    std::vector<double> scores;
    int above_one = 0;  // finite-sample frontier crossings, reported, never clipped
};
EfficiencyReport efficiency_scores(const FrontierModel& model);

// Infeasible method-of-moments estimator from known errors.
double fit_p_oracle(std::span<const double> residuals);

}  // namespace matfront::frontier
