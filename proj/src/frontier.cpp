#include "matfront/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "matfront/errors.hpp"

namespace matfront::frontier {

using smoothers::Kernel;
using smoothers::Method;

Dataset Dataset::create(std::vector<double> y, std::vector<std::vector<double>> x) {
    const std::size_t n = y.size();
    if (n < 10) throw std::domain_error("dataset: need n >= 10 observations");
    if (x.empty() || x.size() > 2) throw std::domain_error("dataset: m must be 1 or 2");
    for (const auto& col : x) {
        if (col.size() != n) throw std::domain_error("dataset: covariate column length mismatch");
        for (double v : col) {
            if (!std::isfinite(v)) throw std::domain_error("dataset: non-finite covariate");
        }
    }
    Dataset d;
    d.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
            throw std::domain_error("dataset: Y must be strictly positive (row " +
                                    std::to_string(i + 1) + ")");
        }
        d.z[i] = -std::log(y[i]);
    }
    d.y = std::move(y);
    d.x = std::move(x);
    return d;
}

BandwidthSpec BandwidthSpec::cv(int grid_count) {
    BandwidthSpec s;
    s.use_cv = true;
    s.cv_grid_count = grid_count;
    return s;
}

BandwidthSpec BandwidthSpec::fixed_h(std::vector<double> h) {
    BandwidthSpec s;
    s.use_cv = false;
    s.fixed = std::move(h);
    return s;
}

double FrontierModel::g_at(std::span<const double> x) const { return fit.evaluate(x); }

double FrontierModel::f_at(std::span<const double> x) const {
    return std::exp(1.5 / p_hat - g_at(x));
}

FrontierModel fit_frontier(const Dataset& data, Method method, const Kernel& kernel,
                           const BandwidthSpec& bandwidth, int sbs_grid_size) {
    const std::size_t n = data.n();
    const std::size_t m = data.m();
    if (m == 1 && method != Method::LocLin) {
        throw std::domain_error("fit_frontier: one covariate requires the loclin method");
    }
    if (m == 2 && method == Method::LocLin) {
        throw std::domain_error("fit_frontier: two covariates require cbs or sbs");
    }

    FrontierModel model;
    std::vector<double> h;
    if (bandwidth.use_cv) {
        model.bandwidth_from_cv = true;
        if (m == 1) {
            const int count = bandwidth.cv_grid_count > 0 ? bandwidth.cv_grid_count : 20;
            const auto grid = smoothers::default_bandwidth_grid(data.x[0], count);
            const auto cv = smoothers::cv_bandwidth_loclin(data.x[0], data.z, kernel, grid);
            h = cv.bandwidths;
            model.cv_score = cv.score;
            model.cv_failed_candidates = cv.failed_candidates;
        } else {
            // Per-axis candidate count kept small: the bivariate CV refits the
            // whole backfitting estimator n times per candidate pair.
            const int count = bandwidth.cv_grid_count > 0 ? bandwidth.cv_grid_count : 5;
            const auto g1 = smoothers::default_bandwidth_grid(data.x[0], count);
            const auto g2 = smoothers::default_bandwidth_grid(data.x[1], count);
            const auto cv = smoothers::cv_bandwidth_bivariate(data.x[0], data.x[1], data.z,
                                                              kernel, method, g1, g2,
                                                              sbs_grid_size);
            h = cv.bandwidths;
            model.cv_score = cv.score;
            model.cv_failed_candidates = cv.failed_candidates;
        }
    } else {
        h = bandwidth.fixed;
        if (h.size() != m) {
            throw std::domain_error("fit_frontier: expected " + std::to_string(m) +
                                    " fixed bandwidths, got " + std::to_string(h.size()));
        }
        for (double hv : h) {
            if (!(hv > 0.0)) throw std::domain_error("fit_frontier: bandwidths must be positive");
        }
    }

    if (m == 1) {
        model.fit = smoothers::local_linear_fit(data.x[0], data.z, kernel, h[0]);
    } else if (method == Method::Cbs) {
        model.fit = smoothers::cbs_fit(data.x[0], data.x[1], data.z, kernel, h[0], h[1],
                                       smoothers::CbsMode::Explicit);
    } else {
        model.fit = smoothers::sbs_fit(data.x[0], data.x[1], data.z, kernel, h[0], h[1],
                                       sbs_grid_size);
    }

    model.residuals.resize(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        model.residuals[i] = data.z[i] - model.fit.fitted[i];
        ss += model.residuals[i] * model.residuals[i];
    }
    double zscale = 1.0;
    for (double z : data.z) zscale = std::max(zscale, std::fabs(z));
    const double floor = static_cast<double>(n) * std::pow(1e-12 * zscale, 2);
    if (!(ss > floor)) {
        throw std::domain_error("fit_frontier: residual sum of squares is zero "
                                "(degenerate perfect fit)");
    }
    model.p_hat = std::sqrt(3.0 * static_cast<double>(n) / (2.0 * ss));

    model.train_range.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto [mn, mx] = std::minmax_element(data.x[j].begin(), data.x[j].end());
        model.train_range[j] = {*mn, *mx};
    }
    model.efficiency.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fhat = std::exp(1.5 / model.p_hat - model.fit.fitted[i]);
        model.efficiency[i] = data.y[i] / fhat;
    }
    return model;
}

EfficiencyReport efficiency_scores(const FrontierModel& model) {
    EfficiencyReport rep;
    rep.scores = model.efficiency;
    for (double s : rep.scores) {
        if (s > 1.0) ++rep.above_one;
    }
    return rep;
}

double fit_p_oracle(std::span<const double> residuals) {
    if (residuals.empty()) throw std::domain_error("fit_p_oracle: empty residual vector");
    double ss = 0.0;
    for (double e : residuals) ss += e * e;
    if (!(ss > 0.0)) throw std::domain_error("fit_p_oracle: residual sum of squares is zero");
    return std::sqrt(3.0 * static_cast<double>(residuals.size()) / (2.0 * ss));
}

nlohmann::json FrontierModel::to_json() const {
    if (fit.kernel.kind() == Kernel::Kind::Table) {
        throw std::domain_error("model serialization supports only named kernels");
    }
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["method"] = smoothers::method_name(fit.method);
    doc["kernel"] = fit.kernel.name();
    doc["bandwidths"] = fit.bandwidths;
    doc["intercept"] = fit.intercept;
    doc["p_hat"] = p_hat;
    doc["components"] = nlohmann::json::array();
    for (const auto& c : fit.components) {
        doc["components"].push_back({{"x", c.x}, {"y", c.y}});
    }
    doc["train_range"] = nlohmann::json::array();
    for (const auto& [lo, hi] : train_range) {
        doc["train_range"].push_back({{"lo", lo}, {"hi", hi}});
    }
    return doc;
}

FrontierModel FrontierModel::from_json(const nlohmann::json& doc) {
    if (!doc.contains("schema_version") || doc.at("schema_version").get<int>() != 1) {
        throw std::domain_error("model JSON: unsupported schema_version");
    }
    FrontierModel model;
    const std::string method = doc.at("method").get<std::string>();
    if (method == "loclin") {
        model.fit.method = Method::LocLin;
    } else if (method == "cbs") {
        model.fit.method = Method::Cbs;
    } else if (method == "sbs") {
        model.fit.method = Method::Sbs;
    } else {
        throw std::domain_error("model JSON: unknown method '" + method + "'");
    }
    const std::string kernel = doc.at("kernel").get<std::string>();
    if (kernel == "epanechnikov") {
        model.fit.kernel = Kernel::epanechnikov();
    } else if (kernel == "gaussian") {
        model.fit.kernel = Kernel::gaussian();
    } else {
        throw std::domain_error("model JSON: unknown kernel '" + kernel + "'");
    }
    model.fit.bandwidths = doc.at("bandwidths").get<std::vector<double>>();
    model.fit.intercept = doc.at("intercept").get<double>();
    model.p_hat = doc.at("p_hat").get<double>();
    if (!(model.p_hat > 0.0)) throw std::domain_error("model JSON: p_hat must be positive");
    for (const auto& c : doc.at("components")) {
        smoothers::ComponentCurve curve;
        curve.x = c.at("x").get<std::vector<double>>();
        curve.y = c.at("y").get<std::vector<double>>();
        if (curve.x.size() != curve.y.size() || curve.x.size() < 2) {
            throw std::domain_error("model JSON: malformed component grid");
        }
        model.fit.components.push_back(std::move(curve));
    }
    if (model.fit.components.empty()) throw std::domain_error("model JSON: no components");
    for (const auto& r : doc.at("train_range")) {
        model.train_range.emplace_back(r.at("lo").get<double>(), r.at("hi").get<double>());
    }
    if (model.train_range.size() != model.fit.components.size()) {
        throw std::domain_error("model JSON: train_range/component mismatch");
    }
    return model;
}

}  // namespace matfront::frontier
