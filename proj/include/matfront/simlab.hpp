#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "matfront/frontier.hpp"
#include "matfront/smoothers.hpp"

namespace matfront::simlab {

enum class DgpKind { I, II };
std::string dgp_name(DgpKind k);

// dgp i:  f(x) = -x^2 + 4x,                 X ~ U(1,2)
// dgp ii: f = exp(-f1(x1) - f2(x2)),        X1, X2 ~ U(1,2) independent
//         f1(x) = -1.5x^2 + 3x - 1,  f2(x) = -(ln x + 1)/2 + ln 2
double dgp_i_frontier(double x);
double dgp_ii_f1(double x);
double dgp_ii_f2(double x);

struct DgpSpec {
    DgpKind kind = DgpKind::I;
    double p = 2.0;
    std::size_t n = 100;
    std::uint64_t seed = 0;
};

// One synthetic dataset plus the latent truth at the design points.
struct SimData {
    frontier::Dataset data;
    std::vector<double> true_f;   // frontier at the design points
    std::vector<double> true_g;   // regression function 3/(2p) - ln f
    std::vector<double> true_g1;  // additive components (dgp ii only)
    std::vector<double> true_g2;
};
SimData generate(const DgpSpec& spec);

// Average squared error n^{-1} sum (estimate - truth)^2.
double ase(std::span<const double> estimate, std::span<const double> truth);

// Type-7 (linear interpolation) empirical quantile of an unsorted sample.
double quantile_type7(std::vector<double> sample, double q);

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t cell, std::uint64_t replica);

struct StudyConfig {
    DgpKind dgp = DgpKind::I;
    double p = 2.0;
    std::size_t n = 100;
    std::size_t replicas = 100;
    smoothers::Method method = smoothers::Method::LocLin;
    smoothers::Kernel kernel = smoothers::Kernel::epanechnikov();
    frontier::BandwidthSpec bandwidth = frontier::BandwidthSpec::cv();
    std::uint64_t base_seed = 0;
    std::uint64_t cell_index = 0;  // distinguishes cells of a {p x n} grid
    int sbs_grid_size = 101;
    int threads = 1;  // replicas are independent; aggregation stays in index order
};

struct ReplicaRecord {
    std::size_t r = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double ase_g = 0.0;
    double ase_f = 0.0;
    double ase_g1 = 0.0;  // dgp ii only
    double ase_g2 = 0.0;
    double p_hat = 0.0;
};

struct SimReport {
    StudyConfig config;
    std::vector<ReplicaRecord> replicas;
    std::size_t failures = 0;
    double mase_g = 0.0;
    double mase_f = 0.0;
    double mase_g1 = 0.0;
    double mase_g2 = 0.0;
    double mean_p_hat = 0.0;
    double var_p_hat = 0.0;
    double q05_p_hat = 0.0;
    double q95_p_hat = 0.0;
    double wall_seconds = 0.0;
};

// Runs one {dgp, p, n} cell: replica r uses derive_seed(base_seed, cell_index, r),
// then generate -> fit_frontier -> record. Failed replicas are excluded from
// the aggregates; more than 1% failures aborts the run.
SimReport run_study(const StudyConfig& config);

// CSV emission; '#' provenance comment lines precede the header row.
void write_replica_csv(const SimReport& report, std::ostream& out);
void write_aggregate_csv(const SimReport& report, std::ostream& out);
void write_phat_csv(const SimReport& report, std::ostream& out);

}  // namespace matfront::simlab
