#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "matfront/errors.hpp"
#include "matfront/simlab.hpp"

using namespace matfront::simlab;

TEST_CASE("dgp function values") {
    CHECK(dgp_i_frontier(1.0) == doctest::Approx(3.0));
    CHECK(dgp_i_frontier(2.0) == doctest::Approx(4.0));
    CHECK(dgp_ii_f1(1.0) == doctest::Approx(0.5));
    CHECK(dgp_ii_f2(1.0) == doctest::Approx(std::log(2.0) - 0.5));
    CHECK(std::exp(-dgp_ii_f1(1.0) - dgp_ii_f2(1.0)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("error variance of the generated model") {
    // var(eps) = 3/(2 p^2): 1.5 at p=1, 3/128 at p=8.
    for (auto [p, target] : {std::pair{1.0, 1.5}, std::pair{8.0, 3.0 / 128.0}}) {
        const DgpSpec spec{DgpKind::I, p, 200000, 17};
        const auto sd = generate(spec);
        double var = 0.0;
        for (std::size_t i = 0; i < sd.data.n(); ++i) {
            const double eps = sd.data.z[i] - sd.true_g[i];
            var += eps * eps;
        }
        var /= static_cast<double>(sd.data.n());
        CHECK(var == doctest::Approx(target).epsilon(0.02));
    }
}

TEST_CASE("generate is deterministic and internally consistent") {
    const DgpSpec spec{DgpKind::II, 2.0, 100, 99};
    const auto a = generate(spec);
    const auto b = generate(spec);
    CHECK(a.data.y == b.data.y);
    CHECK(a.data.x[0] == b.data.x[0]);
    CHECK(a.data.x[1] == b.data.x[1]);
    for (std::size_t i = 0; i < a.data.n(); ++i) {
        CHECK(a.true_f[i] ==
              doctest::Approx(std::exp(-a.true_g1[i] - a.true_g2[i])).epsilon(1e-12));
        CHECK(a.true_g[i] ==
              doctest::Approx(0.75 + a.true_g1[i] + a.true_g2[i]).epsilon(1e-12));
        CHECK(a.data.y[i] / a.true_f[i] < 1.0);  // efficiency in (0,1)
        CHECK(a.data.y[i] > 0.0);
    }
}

TEST_CASE("ase") {
    const std::vector<double> t{1.0, 2.0, 3.0};
    CHECK(ase(t, t) == 0.0);
    std::vector<double> off(t);
    for (auto& v : off) v += 0.5;
    CHECK(ase(off, t) == doctest::Approx(0.25).epsilon(1e-14));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(7), b(7);
    for (int i = 0; i < 7; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
    }
    double naive = 0.0;
    for (int i = 0; i < 7; ++i) naive += (a[i] - b[i]) * (a[i] - b[i]);
    naive /= 7.0;
    CHECK(ase(a, b) == doctest::Approx(naive).epsilon(1e-14));
    CHECK_THROWS_AS(ase(a, std::vector<double>{1.0}), std::domain_error);
}

TEST_CASE("type-7 quantiles") {
    const std::vector<double> s{5.0, 1.0, 3.0, 2.0, 4.0};
    CHECK(quantile_type7(s, 0.0) == 1.0);
    CHECK(quantile_type7(s, 1.0) == 5.0);
    CHECK(quantile_type7(s, 0.5) == 3.0);
    CHECK(quantile_type7(s, 0.25) == doctest::Approx(2.0));
    CHECK(quantile_type7(s, 0.1) == doctest::Approx(1.4));
}

TEST_CASE("derived seeds separate replicas and cells") {
    const auto s00 = derive_seed(42, 0, 0);
    CHECK(derive_seed(42, 0, 0) == s00);
    CHECK(derive_seed(42, 0, 1) != s00);
    CHECK(derive_seed(42, 1, 0) != s00);
    CHECK(derive_seed(43, 0, 0) != s00);
}

TEST_CASE("run_study determinism and degenerate aggregation") {
    StudyConfig cfg;
    cfg.dgp = DgpKind::I;
    cfg.p = 2.0;
    cfg.n = 60;
    cfg.replicas = 3;
    cfg.base_seed = 7;
    cfg.bandwidth = matfront::frontier::BandwidthSpec::fixed_h({0.3});
    const auto a = run_study(cfg);
    const auto b = run_study(cfg);
    REQUIRE(a.replicas.size() == 3);
    CHECK(a.failures == 0);
    std::ostringstream csv_a, csv_b;
    write_replica_csv(a, csv_a);
    write_replica_csv(b, csv_b);
    CHECK(csv_a.str() == csv_b.str());

    // N = 1: aggregates equal the single replica.
    cfg.replicas = 1;
    const auto one = run_study(cfg);
    REQUIRE(one.replicas.size() == 1);
    CHECK(one.mase_g == one.replicas[0].ase_g);
    CHECK(one.mase_f == one.replicas[0].ase_f);
    CHECK(one.mean_p_hat == one.replicas[0].p_hat);
    CHECK(one.q05_p_hat == one.replicas[0].p_hat);
    CHECK(one.q95_p_hat == one.replicas[0].p_hat);
}

TEST_CASE("aggregates recomputable from the stored records") {
    StudyConfig cfg;
    cfg.dgp = DgpKind::I;
    cfg.p = 2.0;
    cfg.n = 60;
    cfg.replicas = 8;
    cfg.base_seed = 21;
    cfg.bandwidth = matfront::frontier::BandwidthSpec::fixed_h({0.3});
    const auto rep = run_study(cfg);
    double sg = 0.0, sf = 0.0, sp = 0.0;
    std::vector<double> phat;
    for (const auto& r : rep.replicas) {
        REQUIRE(r.ok);
        sg += r.ase_g;
        sf += r.ase_f;
        sp += r.p_hat;
        phat.push_back(r.p_hat);
    }
    CHECK(rep.mase_g == doctest::Approx(sg / 8.0).epsilon(1e-12));
    CHECK(rep.mase_f == doctest::Approx(sf / 8.0).epsilon(1e-12));
    CHECK(rep.mean_p_hat == doctest::Approx(sp / 8.0).epsilon(1e-12));
    CHECK(rep.q05_p_hat == doctest::Approx(quantile_type7(phat, 0.05)).epsilon(1e-12));
    CHECK(rep.q95_p_hat == doctest::Approx(quantile_type7(phat, 0.95)).epsilon(1e-12));
    CHECK(rep.q05_p_hat < rep.mean_p_hat);
    CHECK(rep.mean_p_hat < rep.q95_p_hat);
}

TEST_CASE("failure policy aborts the run") {
    StudyConfig cfg;
    cfg.dgp = DgpKind::I;
    cfg.p = 2.0;
    cfg.n = 60;
    cfg.replicas = 5;
    cfg.base_seed = 9;
    // Absurdly small fixed bandwidth: every replica hits a singular design.
    cfg.bandwidth = matfront::frontier::BandwidthSpec::fixed_h({1e-9});
    CHECK_THROWS_AS(run_study(cfg), matfront::ConvergenceError);
}

TEST_CASE("csv shapes") {
    StudyConfig cfg;
    cfg.dgp = DgpKind::II;
    cfg.p = 2.0;
    cfg.n = 40;
    cfg.replicas = 2;
    cfg.base_seed = 13;
    cfg.method = matfront::smoothers::Method::Cbs;
    cfg.bandwidth = matfront::frontier::BandwidthSpec::fixed_h({0.4, 0.4});
    const auto rep = run_study(cfg);
    std::ostringstream r_csv, a_csv, p_csv;
    write_replica_csv(rep, r_csv);
    write_aggregate_csv(rep, a_csv);
    write_phat_csv(rep, p_csv);
    CHECK(r_csv.str().find("ase_g1") != std::string::npos);
    CHECK(a_csv.str().find("L_g1") != std::string::npos);
    CHECK(r_csv.str().rfind("# ", 0) == 0);
    CHECK(p_csv.str().find("r,p_hat") != std::string::npos);
}
