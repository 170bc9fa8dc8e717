#include "matfront/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "matfront/errors.hpp"
#include "matfront/matsuoka.hpp"
#include "matfront/version.hpp"

namespace matfront::simlab {

std::string dgp_name(DgpKind k) { return k == DgpKind::I ? "i" : "ii"; }

double dgp_i_frontier(double x) { return -x * x + 4.0 * x; }
double dgp_ii_f1(double x) { return -1.5 * x * x + 3.0 * x - 1.0; }
double dgp_ii_f2(double x) { return -(std::log(x) + 1.0) / 2.0 + std::log(2.0); }

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string bandwidth_desc(const frontier::BandwidthSpec& b) {
    if (b.use_cv) {
        return b.cv_grid_count > 0 ? "cv(" + std::to_string(b.cv_grid_count) + ")" : "cv";
    }
    std::string s;
    for (std::size_t j = 0; j < b.fixed.size(); ++j) {
        if (j > 0) s += ",";
        s += fmt_double(b.fixed[j]);
    }
    return s;
}

void write_provenance(const StudyConfig& c, std::ostream& out) {
    out << "# " << kVersion << "\n";
    out << "# config: dgp=" << dgp_name(c.dgp) << " p=" << fmt_double(c.p) << " n=" << c.n
        << " replicas=" << c.replicas << " seed=" << c.base_seed << " cell=" << c.cell_index
        << " method=" << smoothers::method_name(c.method) << " kernel=" << c.kernel.name()
        << " bandwidth=" << bandwidth_desc(c.bandwidth) << " sbs_grid=" << c.sbs_grid_size
        << " threads=" << c.threads << "\n";
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t cell, std::uint64_t replica) {
    std::uint64_t state = base_seed;
    std::uint64_t h = splitmix64(state);
    state = h ^ (cell * 0xD6E8FEB86659FD93ULL);
    h = splitmix64(state);
    state = h ^ (replica * 0xA3B195354A39B70DULL);
    return splitmix64(state);
}

SimData generate(const DgpSpec& spec) {
    if (!(spec.p > 0.0)) throw std::domain_error("generate: p must be positive");
    const std::size_t n = spec.n;
    std::uint64_t stream = spec.seed;
    const std::uint64_t seed_x = splitmix64(stream);
    const std::uint64_t seed_r = splitmix64(stream);

    std::mt19937_64 rng(seed_x);
    std::uniform_real_distribution<double> unif(1.0, 2.0);
    const auto r = matsuoka::sample(matsuoka::Params(spec.p), n, seed_r);

    SimData sd;
    sd.true_f.resize(n);
    sd.true_g.resize(n);
    const double g0 = 1.5 / spec.p;
    std::vector<double> y(n);
    if (spec.kind == DgpKind::I) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = unif(rng);
        for (std::size_t i = 0; i < n; ++i) {
            sd.true_f[i] = dgp_i_frontier(x[i]);
            sd.true_g[i] = g0 - std::log(sd.true_f[i]);
            y[i] = sd.true_f[i] * r[i];
        }
        sd.data = frontier::Dataset::create(std::move(y), {std::move(x)});
    } else {
        std::vector<double> x1(n), x2(n);
        for (std::size_t i = 0; i < n; ++i) {
            x1[i] = unif(rng);
            x2[i] = unif(rng);
        }
        sd.true_g1.resize(n);
        sd.true_g2.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            sd.true_g1[i] = dgp_ii_f1(x1[i]);
            sd.true_g2[i] = dgp_ii_f2(x2[i]);
            sd.true_f[i] = std::exp(-sd.true_g1[i] - sd.true_g2[i]);
            sd.true_g[i] = g0 + sd.true_g1[i] + sd.true_g2[i];
            y[i] = sd.true_f[i] * r[i];
        }
        sd.data = frontier::Dataset::create(std::move(y), {std::move(x1), std::move(x2)});
    }
    return sd;
}

double ase(std::span<const double> estimate, std::span<const double> truth) {
    if (estimate.size() != truth.size() || estimate.empty()) {
        throw std::domain_error("ase: length mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        const double d = estimate[i] - truth[i];
        s += d * d;
    }
    return s / static_cast<double>(estimate.size());
}

double quantile_type7(std::vector<double> sample, double q) {
    if (sample.empty()) throw std::domain_error("quantile: empty sample");
    if (!(q >= 0.0) || !(q <= 1.0)) throw std::domain_error("quantile: q must be in [0,1]");
    std::sort(sample.begin(), sample.end());
    const double h = (static_cast<double>(sample.size()) - 1.0) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sample.size()) return sample.back();
    return sample[lo] + (h - static_cast<double>(lo)) * (sample[lo + 1] - sample[lo]);
}

namespace {

// Centered ASE for additive components: both curves are identified only up to
// a constant, so compare after removing the empirical mean at the design points.
double centered_ase(std::span<const double> estimate, std::span<const double> truth) {
    const double n = static_cast<double>(estimate.size());
    const double me = std::accumulate(estimate.begin(), estimate.end(), 0.0) / n;
    const double mt = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
    double s = 0.0;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        const double d = (estimate[i] - me) - (truth[i] - mt);
        s += d * d;
    }
    return s / n;
}

ReplicaRecord run_replica(const StudyConfig& c, std::size_t r) {
    ReplicaRecord rec;
    rec.r = r;
    rec.seed = derive_seed(c.base_seed, c.cell_index, r);
    try {
        const SimData sd = generate({c.dgp, c.p, c.n, rec.seed});
        const auto model = frontier::fit_frontier(sd.data, c.method, c.kernel, c.bandwidth,
                                                  c.sbs_grid_size);
        rec.p_hat = model.p_hat;
        rec.ase_g = ase(model.fit.fitted, sd.true_g);
        std::vector<double> fhat(c.n);
        for (std::size_t i = 0; i < c.n; ++i) {
            fhat[i] = std::exp(1.5 / model.p_hat - model.fit.fitted[i]);
        }
        rec.ase_f = ase(fhat, sd.true_f);
        if (c.dgp == DgpKind::II) {
            std::vector<double> e1(c.n), e2(c.n);
            for (std::size_t i = 0; i < c.n; ++i) {
                e1[i] = model.fit.components[0](sd.data.x[0][i]);
                e2[i] = model.fit.components[1](sd.data.x[1][i]);
            }
            rec.ase_g1 = centered_ase(e1, sd.true_g1);
            rec.ase_g2 = centered_ase(e2, sd.true_g2);
        }
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

}  // namespace

SimReport run_study(const StudyConfig& config) {
    if (config.replicas < 1) throw std::domain_error("run_study: need at least one replica");
    const auto t0 = std::chrono::steady_clock::now();

    SimReport report;
    report.config = config;
    report.replicas.resize(config.replicas);

    const int workers = std::max(1, config.threads);
    if (workers == 1) {
        for (std::size_t r = 0; r < config.replicas; ++r) {
            report.replicas[r] = run_replica(config, r);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t r = next.fetch_add(1);
                if (r >= config.replicas) return;
                report.replicas[r] = run_replica(config, r);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Aggregate in replica index order.
    std::vector<double> phat;
    double sg = 0.0, sf = 0.0, s1 = 0.0, s2 = 0.0;
    std::string first_error;
    for (const auto& rec : report.replicas) {
        if (!rec.ok) {
            ++report.failures;
            if (first_error.empty()) first_error = rec.error;
            continue;
        }
        phat.push_back(rec.p_hat);
        sg += rec.ase_g;
        sf += rec.ase_f;
        s1 += rec.ase_g1;
        s2 += rec.ase_g2;
    }
    if (report.failures * 100 > config.replicas) {
        throw ConvergenceError("run_study: " + std::to_string(report.failures) + "/" +
                               std::to_string(config.replicas) +
                               " replicas failed (> 1%); first error: " + first_error);
    }
    const double k = static_cast<double>(phat.size());
    report.mase_g = sg / k;
    report.mase_f = sf / k;
    report.mase_g1 = s1 / k;
    report.mase_g2 = s2 / k;
    report.mean_p_hat = std::accumulate(phat.begin(), phat.end(), 0.0) / k;
    double var = 0.0;
    for (double v : phat) var += (v - report.mean_p_hat) * (v - report.mean_p_hat);
    report.var_p_hat = phat.size() > 1 ? var / (k - 1.0) : 0.0;
    report.q05_p_hat = quantile_type7(phat, 0.05);
    report.q95_p_hat = quantile_type7(phat, 0.95);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

void write_replica_csv(const SimReport& report, std::ostream& out) {
    write_provenance(report.config, out);
    const bool bivar = report.config.dgp == DgpKind::II;
    out << "r,seed,ok,ase_g,ase_f";
    if (bivar) out << ",ase_g1,ase_g2";
    out << ",p_hat,error\n";
    for (const auto& rec : report.replicas) {
        out << rec.r << "," << rec.seed << "," << (rec.ok ? 1 : 0) << ","
            << fmt_double(rec.ase_g) << "," << fmt_double(rec.ase_f);
        if (bivar) out << "," << fmt_double(rec.ase_g1) << "," << fmt_double(rec.ase_g2);
        std::string err = rec.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << "," << fmt_double(rec.p_hat) << "," << err << "\n";
    }
}

void write_aggregate_csv(const SimReport& report, std::ostream& out) {
    write_provenance(report.config, out);
    const bool bivar = report.config.dgp == DgpKind::II;
    out << "dgp,p,n,replicas,failures,method,L_g,L_f";
    if (bivar) out << ",L_g1,L_g2";
    // wall_seconds stays out of the CSV so repeated runs are byte-identical;
    // the CLI reports it on stdout instead.
    out << ",mean_p_hat,var_p_hat,q05_p_hat,q95_p_hat\n";
    out << dgp_name(report.config.dgp) << "," << fmt_double(report.config.p) << ","
        << report.config.n << "," << report.config.replicas << "," << report.failures << ","
        << smoothers::method_name(report.config.method) << "," << fmt_double(report.mase_g)
        << "," << fmt_double(report.mase_f);
    if (bivar) out << "," << fmt_double(report.mase_g1) << "," << fmt_double(report.mase_g2);
    out << "," << fmt_double(report.mean_p_hat) << "," << fmt_double(report.var_p_hat) << ","
        << fmt_double(report.q05_p_hat) << "," << fmt_double(report.q95_p_hat) << "\n";
}

void write_phat_csv(const SimReport& report, std::ostream& out) {
    write_provenance(report.config, out);
    out << "r,p_hat\n";
    for (const auto& rec : report.replicas) {
        if (!rec.ok) continue;
        out << rec.r << "," << fmt_double(rec.p_hat) << "\n";
    }
}

}  // namespace matfront::simlab
