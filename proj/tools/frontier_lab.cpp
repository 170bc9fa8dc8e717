// frontier-lab: Matsuoka distribution queries, three-step frontier fitting
// from CSV data, and Monte Carlo simulation studies.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "matfront/errors.hpp"
#include "matfront/frontier.hpp"
#include "matfront/matsuoka.hpp"
#include "matfront/simlab.hpp"
#include "matfront/smoothers.hpp"
#include "matfront/version.hpp"

namespace {

using matfront::frontier::BandwidthSpec;
using matfront::smoothers::Kernel;
using matfront::smoothers::Method;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

void print_value(double v) { std::printf("%.17g\n", v); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Kernel parse_kernel(const std::string& name) {
    if (name == "epanechnikov") return Kernel::epanechnikov();
    if (name == "gaussian") return Kernel::gaussian();
    throw std::domain_error("unknown kernel '" + name + "' (epanechnikov|gaussian)");
}

Method parse_method(const std::string& name) {
    if (name == "loclin") return Method::LocLin;
    if (name == "cbs") return Method::Cbs;
    if (name == "sbs") return Method::Sbs;
    throw std::domain_error("unknown method '" + name + "' (loclin|cbs|sbs)");
}

BandwidthSpec parse_bandwidth(const std::string& spec) {
    if (spec == "cv") return BandwidthSpec::cv();
    if (spec.rfind("cv:", 0) == 0) {
        const int count = std::stoi(spec.substr(3));
        if (count < 1) throw std::domain_error("bandwidth: cv grid count must be positive");
        return BandwidthSpec::cv(count);
    }
    std::vector<double> h;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size() || !(v > 0.0)) {
            throw std::domain_error("bandwidth: expected 'cv', 'cv:<count>' or positive "
                                    "h1[,h2], got '" + spec + "'");
        }
        h.push_back(v);
    }
    if (h.empty()) throw std::domain_error("bandwidth: empty specification");
    return BandwidthSpec::fixed_h(std::move(h));
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == name) return j;
        }
        throw std::domain_error("column '" + name + "' not found in CSV header");
    }

    std::vector<double> numeric(const std::string& name) const {
        const std::size_t j = column(name);
        std::vector<double> out(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::string& cell = rows[i][j];
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &pos);
            } catch (...) {
                pos = 0;
            }
            if (pos != cell.size() || !std::isfinite(v)) {
                throw std::domain_error("non-numeric cell in column '" + name + "', data row " +
                                        std::to_string(i + 1));
            }
            out[i] = v;
        }
        return out;
    }
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Csv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("io: cannot open '" + path + "'");
    Csv csv;
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) cells.push_back(trim(tok));
        if (line.back() == ',') cells.push_back("");
        if (!have_header) {
            csv.header = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != csv.header.size()) {
            throw std::domain_error("CSV row at line " + std::to_string(lineno) + " has " +
                                    std::to_string(cells.size()) + " cells, header has " +
                                    std::to_string(csv.header.size()));
        }
        csv.rows.push_back(std::move(cells));
    }
    if (!have_header) throw std::domain_error("CSV '" + path + "' has no header row");
    return csv;
}

// ---------------------------------------------------------------------------
// dist
// ---------------------------------------------------------------------------

struct DistArgs {
    double p = 2.0, q_shape = 2.0, x = 0.5, q = 0.5, k = 1.0, alpha = 0.5, beta = 2.0;
    std::optional<double> upper;
    std::size_t n = 1;
    std::optional<std::uint64_t> seed;
    std::string entropy_kind = "shannon";
    std::string input;
};

void setup_dist(CLI::App& app, DistArgs& a, int& action) {
    auto* dist = app.add_subcommand("dist", "Matsuoka distribution queries");
    dist->require_subcommand(1);
    auto add_p = [&](CLI::App* cmd) {
        cmd->add_option("--p", a.p, "shape parameter p > 0")->required();
    };
    enum { Pdf, Cdf, Quantile, Sample, Moment, Expectile, Entropy, Reliability, Fit };

    auto* pdf = dist->add_subcommand("pdf", "density at x");
    add_p(pdf);
    pdf->add_option("--x", a.x)->required();
    pdf->callback([&action] { action = Pdf; });

    auto* cdf = dist->add_subcommand("cdf", "distribution function at x");
    add_p(cdf);
    cdf->add_option("--x", a.x)->required();
    cdf->callback([&action] { action = Cdf; });

    auto* qu = dist->add_subcommand("quantile", "quantile at probability q");
    add_p(qu);
    qu->add_option("--q", a.q)->required();
    qu->callback([&action] { action = Quantile; });

    auto* sample = dist->add_subcommand("sample", "i.i.d. draws, one per line");
    add_p(sample);
    sample->add_option("--n", a.n)->required();
    sample->add_option("--seed", a.seed, "RNG seed (default: random, printed)");
    sample->callback([&action] { action = Sample; });

    auto* mom = dist->add_subcommand("moment", "raw moment E(X^k), or incomplete with --upper");
    add_p(mom);
    mom->add_option("--k", a.k)->required();
    mom->add_option("--upper", a.upper, "upper limit y of the incomplete moment");
    mom->callback([&action] { action = Moment; });

    auto* exp = dist->add_subcommand("expectile", "alpha-expectile");
    add_p(exp);
    exp->add_option("--alpha", a.alpha)->required();
    exp->callback([&action] { action = Expectile; });

    auto* ent = dist->add_subcommand("entropy", "entropy functionals");
    add_p(ent);
    ent->add_option("--kind", a.entropy_kind, "shannon|renyi|tsallis|sharma-mittal");
    ent->add_option("--alpha", a.alpha);
    ent->add_option("--beta", a.beta);
    ent->callback([&action] { action = Entropy; });

    auto* rel = dist->add_subcommand("reliability", "P(X > Y), X ~ M(p), Y ~ M(q)");
    add_p(rel);
    rel->add_option("--q", a.q_shape, "shape of the stress distribution")->required();
    rel->callback([&action] { action = Reliability; });

    auto* fit = dist->add_subcommand("fit", "closed-form p estimates from a one-column CSV");
    fit->add_option("--input", a.input, "CSV with header; first column used")->required();
    fit->callback([&action] { action = Fit; });
}

int run_dist(const DistArgs& a, int action) {
    using namespace matfront::matsuoka;
    switch (action) {
        case 0: print_value(pdf(Params(a.p), a.x)); break;
        case 1: print_value(cdf(Params(a.p), a.x)); break;
        case 2: print_value(quantile(Params(a.p), a.q)); break;
        case 3: {
            std::uint64_t seed;
            if (a.seed) {
                seed = *a.seed;
            } else {
                seed = std::random_device{}();
                std::printf("# seed: %llu\n", static_cast<unsigned long long>(seed));
            }
            for (double v : sample(Params(a.p), a.n, seed)) print_value(v);
            break;
        }
        case 4:
            if (a.upper) {
                print_value(incomplete_moment(Params(a.p), a.k, *a.upper));
            } else {
                print_value(raw_moment(Params(a.p), a.k));
            }
            break;
        case 5: print_value(expectile(Params(a.p), a.alpha)); break;
        case 6: {
            const Params params(a.p);
            if (a.entropy_kind == "shannon") {
                print_value(shannon_entropy(params));
            } else if (a.entropy_kind == "renyi") {
                print_value(renyi_entropy(params, a.alpha));
            } else if (a.entropy_kind == "tsallis") {
                print_value(tsallis_entropy(params, a.alpha));
            } else if (a.entropy_kind == "sharma-mittal") {
                print_value(sharma_mittal_entropy(params, a.alpha, a.beta));
            } else {
                throw std::domain_error("unknown entropy kind '" + a.entropy_kind + "'");
            }
            break;
        }
        case 7: print_value(reliability(a.p, a.q_shape)); break;
        case 8: {
            const Csv csv = read_csv(a.input);
            if (csv.header.empty()) throw std::domain_error("empty CSV");
            const auto xs = csv.numeric(csv.header[0]);
            const auto r = fit_mle(xs);
            std::printf("p_mle,%.17g\np_umvue,%.17g\n", r.mle, r.umvue);
            break;
        }
        default:
            throw std::domain_error("dist: no subaction selected");
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string input;
    std::string output_col = "y";
    std::vector<std::string> input_cols{"x"};
    std::string method = "loclin";
    std::string kernel = "epanechnikov";
    std::string bandwidth = "cv";
    std::string model_out;
    std::string scores_out;
    std::string components_out;
};

int run_fit(const FitArgs& a) {
    const Csv csv = read_csv(a.input);
    const auto y = csv.numeric(a.output_col);
    std::vector<std::vector<double>> x;
    for (const auto& col : a.input_cols) x.push_back(csv.numeric(col));
    if (x.empty() || x.size() > 2) throw std::domain_error("expected 1 or 2 input columns");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) {
            throw std::domain_error("output column '" + a.output_col +
                                    "' must be strictly positive, data row " +
                                    std::to_string(i + 1));
        }
    }
    const auto data = matfront::frontier::Dataset::create(y, x);
    const auto method = parse_method(a.method);
    const auto kernel = parse_kernel(a.kernel);
    const auto bw = parse_bandwidth(a.bandwidth);
    const auto model = matfront::frontier::fit_frontier(data, method, kernel, bw);

    const std::string config = "input=" + a.input + " output-col=" + a.output_col +
                               " method=" + a.method + " kernel=" + a.kernel +
                               " bandwidth=" + a.bandwidth;
    if (!a.model_out.empty()) {
        nlohmann::json doc = model.to_json();
        doc["version"] = matfront::kVersion;
        doc["config"] = config;
        std::ofstream out(a.model_out);
        if (!out) throw std::runtime_error("io: cannot write '" + a.model_out + "'");
        out << doc.dump(2) << "\n";
    }
    if (!a.scores_out.empty()) {
        std::ofstream out(a.scores_out);
        if (!out) throw std::runtime_error("io: cannot write '" + a.scores_out + "'");
        out << "# " << matfront::kVersion << "\n# config: " << config << "\n";
        out << "id," << a.output_col;
        for (const auto& col : a.input_cols) out << "," << col;
        out << ",g_hat,f_hat,efficiency\n";
        for (std::size_t i = 0; i < data.n(); ++i) {
            const double ghat = model.fit.fitted[i];
            const double fhat = std::exp(1.5 / model.p_hat - ghat);
            out << (i + 1) << "," << fmt(data.y[i]);
            for (const auto& col : data.x) out << "," << fmt(col[i]);
            out << "," << fmt(ghat) << "," << fmt(fhat) << "," << fmt(model.efficiency[i])
                << "\n";
        }
    }
    if (!a.components_out.empty()) {
        std::ofstream out(a.components_out);
        if (!out) throw std::runtime_error("io: cannot write '" + a.components_out + "'");
        out << "# " << matfront::kVersion << "\n# config: " << config << "\n";
        out << "component,x,g\n";
        for (std::size_t j = 0; j < model.fit.components.size(); ++j) {
            const auto& c = model.fit.components[j];
            for (std::size_t g = 0; g < c.x.size(); ++g) {
                out << (j + 1) << "," << fmt(c.x[g]) << "," << fmt(c.y[g]) << "\n";
            }
        }
    }
    std::printf("p_hat,%.17g\n", model.p_hat);
    for (std::size_t j = 0; j < model.fit.bandwidths.size(); ++j) {
        std::printf("h%zu,%.17g\n", j + 1, model.fit.bandwidths[j]);
    }
    const auto eff = matfront::frontier::efficiency_scores(model);
    std::printf("scores_above_one,%d\n", eff.above_one);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimArgs {
    std::string dgp = "i";
    double p = 2.0;
    std::size_t n = 100;
    std::size_t replicas = 100;
    std::uint64_t seed = 0;
    std::string method;
    std::string kernel = "epanechnikov";
    std::string bandwidth = "cv";
    std::string out_dir = ".";
    int threads = 1;
};

int run_simulate(const SimArgs& a) {
    matfront::simlab::StudyConfig cfg;
    if (a.dgp == "i") {
        cfg.dgp = matfront::simlab::DgpKind::I;
    } else if (a.dgp == "ii") {
        cfg.dgp = matfront::simlab::DgpKind::II;
    } else {
        throw std::domain_error("unknown dgp '" + a.dgp + "' (i|ii)");
    }
    cfg.p = a.p;
    cfg.n = a.n;
    cfg.replicas = a.replicas;
    cfg.base_seed = a.seed;
    cfg.method = parse_method(a.method.empty() ? (a.dgp == "i" ? "loclin" : "cbs") : a.method);
    cfg.kernel = parse_kernel(a.kernel);
    cfg.bandwidth = parse_bandwidth(a.bandwidth);
    cfg.threads = a.threads;

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw std::runtime_error("io: cannot create '" + a.out_dir + "'");
    const fs::path rep_path = fs::path(a.out_dir) / "replicas.csv";
    const fs::path agg_path = fs::path(a.out_dir) / "aggregate.csv";
    const fs::path phat_path = fs::path(a.out_dir) / "phat.csv";

    try {
        const auto report = matfront::simlab::run_study(cfg);
        auto emit = [](const fs::path& path, auto&& writer) {
            std::ofstream out(path);
            if (!out) throw std::runtime_error("io: cannot write '" + path.string() + "'");
            writer(out);
        };
        emit(rep_path, [&](std::ostream& o) { write_replica_csv(report, o); });
        emit(agg_path, [&](std::ostream& o) { write_aggregate_csv(report, o); });
        emit(phat_path, [&](std::ostream& o) { write_phat_csv(report, o); });
        std::printf("dgp=%s p=%.17g n=%zu replicas=%zu failures=%zu method=%s\n",
                    a.dgp.c_str(), cfg.p, cfg.n, cfg.replicas, report.failures,
                    matfront::smoothers::method_name(cfg.method).c_str());
        std::printf("L_g,%.17g\nL_f,%.17g\n", report.mase_g, report.mase_f);
        if (cfg.dgp == matfront::simlab::DgpKind::II) {
            std::printf("L_g1,%.17g\nL_g2,%.17g\n", report.mase_g1, report.mase_g2);
        }
        std::printf("mean_p_hat,%.17g\nvar_p_hat,%.17g\nq05_p_hat,%.17g\nq95_p_hat,%.17g\n",
                    report.mean_p_hat, report.var_p_hat, report.q05_p_hat, report.q95_p_hat);
        std::printf("wall_seconds,%.6g\n", report.wall_seconds);
    } catch (...) {
        fs::remove(rep_path, ec);
        fs::remove(agg_path, ec);
        fs::remove(phat_path, ec);
        throw;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(matfront::kVersion)};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(matfront::kVersion));

    DistArgs dist_args;
    int dist_action = -1;
    setup_dist(app, dist_args, dist_action);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "three-step frontier estimation from CSV data");
    fit->add_option("--input", fit_args.input, "input CSV (header row required)")->required();
    fit->add_option("--output-col", fit_args.output_col, "name of the output (Y) column");
    fit->add_option("--input-cols", fit_args.input_cols, "input (X) column names (1 or 2)")
        ->delimiter(',');
    fit->add_option("--method", fit_args.method, "loclin|cbs|sbs");
    fit->add_option("--kernel", fit_args.kernel, "epanechnikov|gaussian");
    fit->add_option("--bandwidth", fit_args.bandwidth, "cv, cv:<count>, or h1[,h2]");
    fit->add_option("--model-out", fit_args.model_out, "model JSON path");
    fit->add_option("--scores-out", fit_args.scores_out, "per-unit scores CSV path");
    fit->add_option("--components-out", fit_args.components_out, "component grid CSV path");

    SimArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo study of the three-step estimator");
    sim->add_option("--dgp", sim_args.dgp, "i|ii")->required();
    sim->add_option("--p", sim_args.p, "true shape parameter")->required();
    sim->add_option("--n", sim_args.n, "sample size")->required();
    sim->add_option("--replicas", sim_args.replicas, "number of replicas")->required();
    sim->add_option("--seed", sim_args.seed, "base seed (required for determinism)")->required();
    sim->add_option("--method", sim_args.method, "loclin|cbs|sbs (default by dgp)");
    sim->add_option("--kernel", sim_args.kernel, "epanechnikov|gaussian");
    sim->add_option("--bandwidth", sim_args.bandwidth, "cv, cv:<count>, or h1[,h2]");
    sim->add_option("--out-dir", sim_args.out_dir, "output directory for CSV artifacts");
    sim->add_option("--threads", sim_args.threads, "worker cap")
        ->envname("FRONTIER_LAB_THREADS");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand("dist")) return run_dist(dist_args, dist_action);
        if (app.got_subcommand("fit")) return run_fit(fit_args);
        return run_simulate(sim_args);
    } catch (const matfront::ConvergenceError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const matfront::SingularDesignError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    }
}
