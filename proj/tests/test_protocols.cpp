#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "test_helpers.hpp"
#include "wgsv/protocols.hpp"

using namespace wgsv;
using wgsv::testing::random_cover;
using wgsv::testing::random_graph;

namespace {

StateVector minus_state() {
    Eigen::VectorXcd v(2);
    v << complex(1 / std::sqrt(2.0), 0), complex(-1 / std::sqrt(2.0), 0);
    return StateVector(1, std::move(v));
}

double trace_with(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& op) {
    return (rho * op).trace().real();
}

}  // namespace

TEST_CASE("proposition2_bound") {
    CHECK(proposition2_bound(19, 0.05) == Catch::Approx(1.0));
    CHECK(proposition2_bound(100, 0.5) == Catch::Approx(0.01));
    CHECK_THROWS_AS(proposition2_bound(10, 0.05), config_error);  // beta < 1/(N+1)
    CHECK_THROWS_AS(proposition2_bound(0, 0.5), config_error);
    CHECK_THROWS_AS(proposition2_bound(10, 1.5), config_error);
}

TEST_CASE("withholding one of N+1 copies: deterministic bad-copy counts") {
    // With t copies that fail with certainty, the accept probability is 1
    // (t = 0), 1/(N+1) (t = 1, tested elsewhere), 0 (t >= 2).
    Rng rng(40);
    WeightedGraph lonely(1);
    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::adaptive_exact;
    cfg.N = 5;
    cfg.beta = 0.5;
    cfg.cover = IndependenceCover{{{1}}};

    StateVector plus = build_weighted_graph_state(lonely);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<StateVector> seq(6, plus);
        seq[1] = minus_state();
        seq[4] = minus_state();
        StateSource src = StateSource::make_sequence(std::move(seq), false);
        CHECK_FALSE(run_random_sampling_test(src, lonely, cfg, rng).accepted);
    }
}

TEST_CASE("proposition2_bound vs exhaustive enumeration") {
    // For a deterministic assignment of N+1 bits with t ones, enumerate the
    // withheld position: Pr{all sampled zero} = q and
    // Pr{withheld = 1 | all sampled zero} never exceeds the bound whenever
    // q >= beta.
    for (int N = 1; N <= 12; ++N) {
        for (int t = 0; t <= N + 1; ++t) {
            int all_zero = 0, withheld_one = 0;
            for (int w = 0; w < N + 1; ++w) {
                // ones occupy the first t slots; by symmetry this covers every
                // assignment with t ones
                const bool sampled_all_zero = (t == 0) || (t == 1 && w == 0);
                all_zero += sampled_all_zero;
                withheld_one += sampled_all_zero && w < t;
            }
            const double q = all_zero / double(N + 1);
            const double conditional = all_zero == 0 ? 0.0 : withheld_one / double(all_zero);
            for (double beta : {1.0 / (N + 1), 0.3, 0.5, 0.9, 1.0}) {
                if (beta < 1.0 / (N + 1) || q < beta) continue;
                CHECK(conditional <= proposition2_bound(N, beta) + 1e-12);
            }
        }
    }
}

TEST_CASE("iid sources below the certificate fidelity are rejected at level beta") {
    // For i.i.d. sigma, acceptance probability is (Tr sigma Omega)^N; whenever
    // F(sigma, G) is strictly below the certificate bound this stays <= beta.
    Rng rng(39);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = uniform_int(rng, 2, 5);
        WeightedGraph g = random_graph(rng, n, 0.5);
        IndependenceCover cover = random_cover(rng, g);
        const int m = cover.num_parts();
        const int N = uniform_int(rng, m, 4 * m);
        const double numin = 1.0 / m;
        const double beta = 1.0 / (N * numin + 1.0) + uniform01(rng) * (1.0 - 1.0 / (N * numin + 1.0));

        ProtocolConfig cfg;
        cfg.kind = ProtocolKind::adaptive_exact;
        cfg.N = N;
        cfg.beta = beta;
        cfg.cover = cover;
        const double bound = certificate_bound(cfg, g);

        StateVector gs = build_weighted_graph_state(g);
        Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(gs.dim(), gs.dim());
        for (int c = 0; c < 3; ++c) {
            StateVector psi = wgsv::testing::random_pure_state(rng, n);
            sigma += (psi.amps * psi.amps.adjoint()) / 3.0;
        }
        const double fid = (gs.amps.adjoint() * sigma * gs.amps)(0, 0).real();
        const double accept =
            std::pow((sigma * build_omega_adaptive(g, cover).matrix).trace().real(), N);
        if (fid < bound) CHECK(accept <= beta + 1e-9);
    }
}

TEST_CASE("copies_required") {
    CHECK(copies_required(PlanKind::ms, 10, 0.1, 0.05).N == 15200);
    CHECK(copies_required(PlanKind::iqp, 10, 0.1, 0.05).N == 3800);

    auto na = copies_required(PlanKind::nonadaptive_h, 10, 0.1, 0.5);
    CHECK(na.N == 31416);
    CHECK(na.b == Catch::Approx(pi / 0.2));
    CHECK(na.h == 160);

    auto ad = copies_required(PlanKind::adaptive_h, 10, 0.1, 0.5, 10.0);
    CHECK(ad.N == 466);
    CHECK(ad.h == 100);

    CHECK_THROWS_AS(copies_required(PlanKind::adaptive_h, 10, 0.05, 0.5, 10.0), config_error);
    CHECK_THROWS_AS(copies_required(PlanKind::adaptive_h, 10, 0.1, 0.5, 0.0), config_error);
    CHECK_THROWS_AS(copies_required(PlanKind::ms, 0, 0.1, 0.5), config_error);
    CHECK_THROWS_AS(copies_required(PlanKind::ms, 5, 1.5, 0.5), config_error);
    CHECK_THROWS_AS(copies_required(PlanKind::ms, 5, 0.1, 0.0), config_error);
}

TEST_CASE("certificate_bound examples") {
    WeightedGraph g2(2);  // only n enters the h-kind formulas
    ProtocolConfig cfg;
    cfg.cover = IndependenceCover{{{1}, {2}}};
    cfg.N = 100;
    cfg.beta = 0.05;

    cfg.kind = ProtocolKind::adaptive_exact;
    CHECK(certificate_bound(cfg, g2) == Catch::Approx(0.62));

    cfg.kind = ProtocolKind::nonadaptive_e;
    cfg.bases = {{0.0, 1.0}, {0.0, 2.0}};  // max e = 2
    CHECK(certificate_bound(cfg, g2) == Catch::Approx(0.24));

    WeightedGraph g1(1);
    ProtocolConfig ch;
    ch.cover = IndependenceCover{{{1}}};
    ch.N = 20;
    ch.beta = 0.5;
    ch.h = 2;
    ch.kind = ProtocolKind::adaptive_h;
    CHECK(certificate_bound(ch, g1) == Catch::Approx(1.0 - 0.05 - 0.3826834323650898));
    ch.kind = ProtocolKind::nonadaptive_h;
    CHECK(certificate_bound(ch, g1) == Catch::Approx(1.0 - 0.1 - 0.3826834323650898));
}

TEST_CASE("planned copy counts make the certificate meet the target") {
    // N = a*n and h = b*n keep the bound above 1 - eps even with m as large
    // as n.
    const int n = 1000;
    const double eps = 0.1, beta = 0.5, b = 10.0;
    auto plan = copies_required(PlanKind::adaptive_h, n, eps, beta, b);

    std::vector<std::vector<int>> parts;
    for (int k = 1; k <= n; ++k) parts.push_back({k});
    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::adaptive_h;
    cfg.cover = IndependenceCover{std::move(parts)};
    cfg.N = static_cast<int>(plan.N);
    cfg.beta = beta;
    cfg.h = plan.h;
    const double bound = certificate_bound(cfg, WeightedGraph(n));
    CHECK(bound >= 1.0 - eps - 1e-9);
    CHECK(bound < 1.0);
}

TEST_CASE("derive_candidate_bases") {
    WeightedGraph lonely(1);
    auto b1 = derive_candidate_bases(lonely);
    REQUIRE(b1.size() == 1);
    CHECK(b1[0] == std::vector<double>{0.0});

    WeightedGraph pair(2);
    pair.add_edge(1, 2, pi / 4);
    auto b2 = derive_candidate_bases(pair);
    REQUIRE(b2[1].size() == 2);
    CHECK(b2[1][0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(b2[1][1] == Catch::Approx(pi / 4));

    // Sums 0, pi/2, pi/2, pi collapse to {0, pi/2} mod pi.
    WeightedGraph path(3);
    path.add_edge(1, 2, pi / 2);
    path.add_edge(2, 3, pi / 2);
    auto b3 = derive_candidate_bases(path);
    CHECK(b3[1].size() == 2);

    validate_candidate_bases(path, b3);
    auto broken = b3;
    broken[1].pop_back();
    CHECK_THROWS_AS(validate_candidate_bases(path, broken), config_error);
    CHECK_THROWS_AS(validate_candidate_bases(path, {{0.0}}), config_error);
}

TEST_CASE("honest source always passes the exact-match protocols") {
    Rng rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = uniform_int(rng, 1, 6);
        WeightedGraph g = random_graph(rng, n, 0.5);
        IndependenceCover cover = random_cover(rng, g);
        ProtocolConfig cfg;
        cfg.beta = 0.9;
        cfg.cover = cover;
        cfg.kind = trial % 2 == 0 ? ProtocolKind::adaptive_exact : ProtocolKind::nonadaptive_e;
        if (cfg.kind == ProtocolKind::nonadaptive_e) cfg.bases = derive_candidate_bases(g);
        // keep beta >= 1/(N*nu + 1) for whatever gap this instance has
        cfg.N = std::max(6, static_cast<int>(std::ceil((1.0 / cfg.beta - 1.0) / cfg.gap())) + 1);

        StateSource src = make_source(SourceSpec{}, g, cfg.N);
        auto rep = run_random_sampling_test(src, g, cfg, rng);
        CHECK(rep.accepted);
        REQUIRE(rep.certificate.has_value());
        CHECK(rep.completeness == 1.0);
        CHECK(static_cast<int>(rep.transcript.size()) == cfg.N);
        CHECK(rep.withheld_index >= 1);
        CHECK(rep.withheld_index <= cfg.N + 1);
        for (const auto& rec : rep.transcript) CHECK(rec.copy_index != rep.withheld_index);
        CHECK(rep.remaining_copy.n == n);
    }
}

TEST_CASE("orthogonal single-vertex source always fails") {
    Rng rng(42);
    WeightedGraph lonely(1);
    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::adaptive_exact;
    cfg.N = 3;
    cfg.beta = 0.5;
    cfg.cover = IndependenceCover{{{1}}};
    for (int trial = 0; trial < 50; ++trial) {
        StateSource src =
            StateSource::make_ensemble({{1.0, minus_state()}}, cfg.N + 1);
        auto rep = run_random_sampling_test(src, lonely, cfg, rng);
        CHECK_FALSE(rep.accepted);
        CHECK_FALSE(rep.certificate.has_value());
    }
}

TEST_CASE("per-copy pass rate matches the test operator expectation") {
    Rng rng(43);
    WeightedGraph g(4);
    g.add_edge(1, 2, 0.9);
    g.add_edge(2, 3, 2.1);
    g.add_edge(3, 4, pi / 3);
    g.add_edge(1, 4, 5.0);
    IndependenceCover cover{{{1, 3}, {2, 4}}};
    StateVector gs = build_weighted_graph_state(g);
    const double p = 0.4;
    const int h = 3;
    const int trials = 4000;

    Eigen::MatrixXcd rho =
        StateSource::make_depolarized(gs, p, 1).iid_density().rho;
    auto bases = derive_candidate_bases(g);
    std::vector<int> evec;
    for (const auto& b : bases) evec.push_back(static_cast<int>(b.size()));

    struct Case {
        const char* name;
        double expected;
        std::function<bool(const StateVector&, Rng&)> run;
    };
    std::vector<Case> cases = {
        {"adaptive_exact", trace_with(rho, build_omega_adaptive(g, cover).matrix),
         [&](const StateVector& s, Rng& r) { return test_copy_adaptive_exact(s, g, cover, r); }},
        {"adaptive_h", trace_with(rho, build_omega_adaptive_h(g, cover, h).matrix),
         [&](const StateVector& s, Rng& r) { return test_copy_adaptive_h(s, g, cover, h, r); }},
        {"nonadaptive_e", trace_with(rho, build_omega_nonadaptive(g, cover, evec).matrix),
         [&](const StateVector& s, Rng& r) {
             return test_copy_nonadaptive_e(s, g, cover, bases, r);
         }},
        {"nonadaptive_h", trace_with(rho, build_omega_nonadaptive_h(g, cover, h).matrix),
         [&](const StateVector& s, Rng& r) {
             return test_copy_nonadaptive_h(s, g, cover, h, false, r);
         }},
    };

    for (const auto& c : cases) {
        StateSource src = StateSource::make_depolarized(gs, p, trials);
        int passes = 0;
        for (int t = 0; t < trials; ++t) passes += c.run(src.next(rng), rng);
        const double rate = passes / double(trials);
        const double sigma = std::sqrt(c.expected * (1 - c.expected) / trials);
        INFO(c.name << ": rate " << rate << " expected " << c.expected);
        CHECK(std::fabs(rate - c.expected) < 3 * sigma + 1e-6);
    }
}

TEST_CASE("single vertex with h = 1 passes with certainty") {
    // The only grid basis is pi, the snapped target is 0; the minus outcome
    // in the pi basis names the 0 state, so the honest copy always passes.
    Rng rng(44);
    WeightedGraph lonely(1);
    IndependenceCover cover{{{1}}};
    StateVector plus = build_weighted_graph_state(lonely);
    for (int t = 0; t < 200; ++t) {
        CHECK(test_copy_nonadaptive_h(plus, lonely, cover, 1, false, rng));
        CHECK(test_copy_adaptive_h(plus, lonely, cover, 1, rng));
    }
    auto omega = build_omega_nonadaptive_h(lonely, cover, 1);
    CHECK((plus.amps.adjoint() * omega.matrix * plus.amps)(0, 0).real() ==
          Catch::Approx(1.0));
}

TEST_CASE("honest acceptance stays above the completeness bound") {
    Rng rng(45);
    WeightedGraph g(3);
    g.add_edge(1, 2, 1.3);
    g.add_edge(2, 3, 0.4);
    IndependenceCover cover{{{1, 3}, {2}}};
    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::adaptive_h;
    cfg.N = 5;
    cfg.beta = 0.5;
    cfg.h = 2;
    cfg.cover = cover;

    const double bound = completeness_bound(cfg, cover);
    const int trials = 400;
    int accepted = 0;
    for (int t = 0; t < trials; ++t) {
        StateSource src = make_source(SourceSpec{}, g, cfg.N);
        auto rep = run_random_sampling_test(src, g, cfg, rng);
        CHECK(rep.completeness == Catch::Approx(bound));
        accepted += rep.accepted;
    }
    const double sigma = std::sqrt(bound * (1 - bound) / trials);
    CHECK(accepted / double(trials) >= bound - 3 * sigma);
}

TEST_CASE("planted bad copy escapes testing with probability 1/(N+1)") {
    Rng rng(46);
    WeightedGraph lonely(1);
    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::adaptive_exact;
    cfg.N = 9;
    cfg.beta = 0.5;
    cfg.cover = IndependenceCover{{{1}}};

    SourceSpec spec;
    spec.kind = SourceSpec::planted_bad;
    spec.position = 3;
    spec.bad = std::make_shared<SourceSpec>();
    spec.bad->kind = SourceSpec::rotated;
    spec.bad->axis = 'z';
    spec.bad->delta = pi;  // |+> -> |-> up to phase

    const int trials = 3000;
    int accepted = 0;
    for (int t = 0; t < trials; ++t) {
        StateSource src = make_source(spec, lonely, cfg.N);
        accepted += run_random_sampling_test(src, lonely, cfg, rng).accepted;
    }
    const double want = 1.0 / (cfg.N + 1);
    const double sigma = std::sqrt(want * (1 - want) / trials);
    CHECK(std::fabs(accepted / double(trials) - want) < 3 * sigma + 1e-6);
}

TEST_CASE("withheld index is uniform") {
    Rng rng(47);
    WeightedGraph lonely(1);
    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::adaptive_exact;
    cfg.N = 4;
    cfg.beta = 0.5;
    cfg.cover = IndependenceCover{{{1}}};
    const int trials = 5000;
    std::vector<int> counts(static_cast<std::size_t>(cfg.N + 1), 0);
    for (int t = 0; t < trials; ++t) {
        StateSource src = make_source(SourceSpec{}, lonely, cfg.N);
        auto rep = run_random_sampling_test(src, lonely, cfg, rng);
        ++counts[static_cast<std::size_t>(rep.withheld_index - 1)];
    }
    const double want = 1.0 / (cfg.N + 1);
    const double sigma = std::sqrt(want * (1 - want) / trials);
    for (int c : counts) CHECK(std::fabs(c / double(trials) - want) < 4 * sigma);
}

TEST_CASE("wider weight errors lower the operator expectation") {
    WeightedGraph g(2);
    g.add_edge(1, 2, pi / 2);
    IndependenceCover cover{{{1}, {2}}};
    auto omega = build_omega_adaptive(g, cover);
    double prev = 1.0;
    for (double dtheta : {0.2, 0.4, 0.8}) {
        SourceSpec spec;
        spec.kind = SourceSpec::wrong_weight;
        spec.edge = {1, 2};
        spec.dtheta = dtheta;
        StateSource src = make_source(spec, g, 1);
        Eigen::MatrixXcd rho = src.iid_density().rho;
        const double val = trace_with(rho, omega.matrix);
        CHECK(val < prev - 1e-6);
        prev = val;
    }
}

TEST_CASE("config validation") {
    WeightedGraph g(3);
    g.add_edge(1, 2, 0.5);
    g.add_edge(2, 3, 0.7);
    IndependenceCover cover{{{1, 3}, {2}}};
    Rng rng(48);

    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::adaptive_exact;
    cfg.N = 10;
    cfg.beta = 0.1;  // below 1/(N*nu+1) = 1/6
    cfg.cover = cover;
    CHECK_THROWS_AS(cfg.validate(g), config_error);
    cfg.beta = 0.5;
    CHECK_NOTHROW(cfg.validate(g));

    cfg.N = 0;
    CHECK_THROWS_AS(cfg.validate(g), config_error);
    cfg.N = 10;
    cfg.beta = 1.5;
    CHECK_THROWS_AS(cfg.validate(g), config_error);
    cfg.beta = 0.5;

    cfg.cover = IndependenceCover{{{1, 2}, {3}}};
    CHECK_THROWS_AS(cfg.validate(g), config_error);
    cfg.cover = cover;

    cfg.kind = ProtocolKind::adaptive_h;
    cfg.h = 0;
    CHECK_THROWS_AS(cfg.validate(g), config_error);
    cfg.h = 4;
    CHECK_NOTHROW(cfg.validate(g));
    cfg.beta = 0.05;  // below 1/(N+1)
    CHECK_THROWS_AS(cfg.validate(g), config_error);
    cfg.beta = 0.5;

    cfg.kind = ProtocolKind::nonadaptive_e;
    cfg.bases = {{0.0}, {0.0}, {0.0}};  // misses achievable angles
    CHECK_THROWS_AS(cfg.validate(g), config_error);
    cfg.bases = derive_candidate_bases(g);
    CHECK_NOTHROW(cfg.validate(g));

    CHECK_THROWS_AS(protocol_from_string("bogus"), input_error);
    CHECK(protocol_from_string("nonadaptive_h") == ProtocolKind::nonadaptive_h);
}

TEST_CASE("state sources") {
    Rng rng(49);
    WeightedGraph g(2);
    g.add_edge(1, 2, 1.1);
    StateVector gs = build_weighted_graph_state(g);

    StateSource src = make_source(SourceSpec{}, g, 2);  // 3 copies
    for (int i = 0; i < 3; ++i) CHECK_NOTHROW(src.next(rng));
    CHECK_THROWS_AS(src.next(rng), source_error);

    StateSource depol = StateSource::make_depolarized(gs, 1.0, 4);
    CHECK(fidelity(depol.iid_density(), gs) == Catch::Approx(0.25));

    SourceSpec perm;
    perm.kind = SourceSpec::permuted_iid;
    SourceSpec rot;
    rot.kind = SourceSpec::rotated;
    rot.axis = 'x';
    rot.delta = 0.4;
    perm.pool = {SourceSpec{}, rot};
    StateSource ps = make_source(perm, g, 5);
    CHECK_FALSE(ps.iid());
    CHECK_THROWS_AS(ps.iid_density(), input_error);
    StateVector rotated = detail::pure_state_for(rot, g);
    int honest_seen = 0;
    for (int i = 0; i < 6; ++i) {
        StateVector s = ps.next(rng);
        const double fh = fidelity(s, gs), fr = fidelity(s, rotated);
        CHECK(std::max(fh, fr) == Catch::Approx(1.0));
        honest_seen += fh > 1.0 - 1e-9;
    }
    CHECK(honest_seen == 3);

    SourceSpec ww;
    ww.kind = SourceSpec::wrong_weight;
    ww.edge = {1, 3};
    CHECK_THROWS_AS(make_source(ww, g, 1), input_error);
}

TEST_CASE("shared-F drawing can deviate from the product-form statistics") {
    // Informational only: with one F per copy the per-vertex match events are
    // correlated, so the pass rate need not equal the operator expectation.
    Rng rng(50);
    WeightedGraph g(3);
    g.add_edge(1, 2, pi / 2);
    g.add_edge(2, 3, pi / 2);
    IndependenceCover cover{{{1, 3}, {2}}};
    StateVector gs = build_weighted_graph_state(g);
    const int h = 2, trials = 20000;
    StateSource src_i = StateSource::make_depolarized(gs, 0.5, trials);
    StateSource src_s = StateSource::make_depolarized(gs, 0.5, trials);
    int ind = 0, shared = 0;
    for (int t = 0; t < trials; ++t) {
        ind += test_copy_nonadaptive_h(src_i.next(rng), g, cover, h, false, rng);
        shared += test_copy_nonadaptive_h(src_s.next(rng), g, cover, h, true, rng);
    }
    const Eigen::MatrixXcd rho = src_i.iid_density().rho;
    const double expected =
        (rho * build_omega_nonadaptive_h(g, cover, h).matrix).trace().real();
    WARN("independent-F rate " << ind / double(trials) << ", shared-F rate "
                               << shared / double(trials) << ", operator expectation "
                               << expected);
    const double sigma = std::sqrt(expected * (1 - expected) / trials);
    CHECK(std::fabs(ind / double(trials) - expected) < 4 * sigma + 1e-6);
}

TEST_CASE("small N makes the certificate uninformative but still reported") {
    Rng rng(51);
    WeightedGraph g(2);
    g.add_edge(1, 2, 0.8);
    ProtocolConfig cfg;
    cfg.kind = ProtocolKind::adaptive_exact;
    cfg.N = 2;
    cfg.beta = 0.9;
    cfg.cover = IndependenceCover{{{1}, {2}}};
    StateSource src = make_source(SourceSpec{}, g, cfg.N);
    auto rep = run_random_sampling_test(src, g, cfg, rng);
    REQUIRE(rep.accepted);
    REQUIRE(rep.certificate.has_value());
    CHECK(*rep.certificate == Catch::Approx(1.0 - 2 * 0.1 / (2 * 0.9)));
    CHECK(rep.certificate_informative == (*rep.certificate > 0.0));
}
