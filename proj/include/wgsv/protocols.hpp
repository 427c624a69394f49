#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wgsv/common.hpp"
#include "wgsv/rng.hpp"
#include "wgsv/sources.hpp"
#include "wgsv/state_engine.hpp"
#include "wgsv/test_operators.hpp"
#include "wgsv/weighted_graph.hpp"

namespace wgsv {

enum class ProtocolKind { adaptive_exact, adaptive_h, nonadaptive_e, nonadaptive_h };

inline const char* to_string(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::adaptive_exact: return "adaptive_exact";
        case ProtocolKind::adaptive_h: return "adaptive_h";
        case ProtocolKind::nonadaptive_e: return "nonadaptive_e";
        case ProtocolKind::nonadaptive_h: return "nonadaptive_h";
    }
    return "?";
}

inline ProtocolKind protocol_from_string(const std::string& s) {
    if (s == "adaptive_exact") return ProtocolKind::adaptive_exact;
    if (s == "adaptive_h") return ProtocolKind::adaptive_h;
    if (s == "nonadaptive_e") return ProtocolKind::nonadaptive_e;
    if (s == "nonadaptive_h") return ProtocolKind::nonadaptive_h;
    throw input_error("unknown protocol kind '" + s + "'");
}

// Candidate-basis enumeration walks every neighbor-outcome combination, so
// it is capped by vertex degree.
inline constexpr int kCandidateDegreeLimit = 20;

/// All values alpha_k(z) can take, reduced mod pi, for each vertex k.
/// This is the auto-derived candidate list the non-adaptive exact protocol
/// draws from; its length is e(k).
inline std::vector<std::vector<double>> derive_candidate_bases(const WeightedGraph& g,
                                                               double tol = 1e-9) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(g.num_vertices()));
    for (int k = 1; k <= g.num_vertices(); ++k) {
        const auto& nbrs = g.neighbors(k);
        if (static_cast<int>(nbrs.size()) > kCandidateDegreeLimit)
            throw capability_error("candidate enumeration capped at degree " +
                                   std::to_string(kCandidateDegreeLimit));
        std::vector<double> vals;
        const std::size_t combos = std::size_t(1) << nbrs.size();
        for (std::size_t mask = 0; mask < combos; ++mask) {
            double alpha = 0.0;
            for (std::size_t b = 0; b < nbrs.size(); ++b)
                if ((mask >> b) & 1) alpha += g.weight(nbrs[b], k);
            const double v = reduce_pi(alpha);
            bool seen = false;
            for (double w : vals)
                if (std::fabs(w - v) < tol || std::fabs(std::fabs(w - v) - pi) < tol) {
                    seen = true;
                    break;
                }
            if (!seen) vals.push_back(v);
        }
        std::sort(vals.begin(), vals.end());
        out[static_cast<std::size_t>(k - 1)] = std::move(vals);
    }
    return out;
}

/// Rejects candidate lists that miss an achievable adaptive angle.
inline void validate_candidate_bases(const WeightedGraph& g,
                                     const std::vector<std::vector<double>>& bases,
                                     double tol = 1e-9) {
    if (static_cast<int>(bases.size()) != g.num_vertices())
        throw config_error("candidate lists must cover every vertex");
    const auto achievable = derive_candidate_bases(g, tol);
    for (int k = 1; k <= g.num_vertices(); ++k) {
        for (double a : achievable[static_cast<std::size_t>(k - 1)]) {
            bool found = false;
            for (double b : bases[static_cast<std::size_t>(k - 1)])
                if (same_basis_angle(a, b, tol)) {
                    found = true;
                    break;
                }
            if (!found)
                throw config_error("vertex " + std::to_string(k) +
                                   ": achievable angle missing from candidate list");
        }
    }
}

struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::adaptive_exact;
    int N = 0;
    double beta = 0.0;
    IndependenceCover cover;
    int h = 0;                               // adaptive_h / nonadaptive_h
    std::vector<std::vector<double>> bases;  // nonadaptive_e candidate lists
    std::uint64_t seed = 0;
    bool strict_paper_f = false;  // nonadaptive_h: one shared F per copy

    int max_e() const {
        std::size_t e = 0;
        for (const auto& b : bases) e = std::max(e, b.size());
        return static_cast<int>(e);
    }

    /// Spectral gap of the matching test operator (exact-match kinds only).
    double gap() const {
        const int m = cover.num_parts();
        switch (kind) {
            case ProtocolKind::adaptive_exact: return 1.0 / m;
            case ProtocolKind::nonadaptive_e: return 1.0 / (m * double(std::max(max_e(), 1)));
            default: throw config_error("gap formula applies to exact-match kinds only");
        }
    }

    void validate(const WeightedGraph& g) const {
        if (N < 1) throw config_error("N must be >= 1");
        if (beta <= 0.0 || beta > 1.0) throw config_error("beta must be in (0,1]");
        if (!cover_ok(g, cover)) throw config_error("cover is not a valid independence cover");
        switch (kind) {
            case ProtocolKind::adaptive_exact:
            case ProtocolKind::nonadaptive_e: {
                if (kind == ProtocolKind::nonadaptive_e) validate_candidate_bases(g, bases);
                const double nu = gap();
                if (beta < 1.0 / (N * nu + 1.0))
                    throw config_error("beta must be >= 1/(N*nu+1)");
                break;
            }
            case ProtocolKind::adaptive_h:
            case ProtocolKind::nonadaptive_h:
                if (h < 1) throw config_error("h must be >= 1");
                if (beta < 1.0 / (N + 1.0)) throw config_error("beta must be >= 1/(N+1)");
                break;
        }
    }
};

struct CopyRecord {
    int copy_index = 0;  // 1-based position in the stream
    int color = 0;       // chosen l
    std::vector<double> bases_used;  // plane angles on A_l, in part order
    std::string outcomes;            // one char per A_l vertex: '+', '-', or '.' (unmatched)
    bool pass = false;
};

/// One copy of the adaptive perfect-match test: Z on A_l^c, then each
/// k in A_l in the exact adaptive basis. Pass iff every outcome is +.
inline bool test_copy_adaptive_exact(const StateVector& copy, const WeightedGraph& g,
                                     const IndependenceCover& cover, Rng& rng,
                                     CopyRecord* rec = nullptr) {
    const int l = uniform_int(rng, 1, cover.num_parts());
    if (rec) rec->color = l;
    StateVector s = copy;
    std::map<int, int> z;
    for (int j : cover.complement(l, g.num_vertices())) {
        auto [zj, next] = measure_z(s, j, rng);
        z[j] = zj;
        s = std::move(next);
    }
    bool pass = true;
    for (int k : cover.part(l)) {
        const double alpha = alpha_expected(g, k, z);
        auto [plus, next] = measure_plane(s, k, PlaneBasis(alpha), rng);
        s = std::move(next);
        pass = pass && plus;
        if (rec) {
            rec->bases_used.push_back(alpha);
            rec->outcomes += plus ? '+' : '-';
        }
    }
    if (rec) rec->pass = pass;
    return pass;
}

/// Adaptive imperfect-match test: the adaptive angle is snapped to the
/// h-grid before measuring.
inline bool test_copy_adaptive_h(const StateVector& copy, const WeightedGraph& g,
                                 const IndependenceCover& cover, int h, Rng& rng,
                                 CopyRecord* rec = nullptr) {
    const int l = uniform_int(rng, 1, cover.num_parts());
    if (rec) rec->color = l;
    StateVector s = copy;
    std::map<int, int> z;
    for (int j : cover.complement(l, g.num_vertices())) {
        auto [zj, next] = measure_z(s, j, rng);
        z[j] = zj;
        s = std::move(next);
    }
    bool pass = true;
    for (int k : cover.part(l)) {
        const double alpha_h = discretize_angle(alpha_expected(g, k, z), h);
        auto [plus, next] = measure_plane(s, k, PlaneBasis(alpha_h), rng);
        s = std::move(next);
        pass = pass && plus;
        if (rec) {
            rec->bases_used.push_back(alpha_h);
            rec->outcomes += plus ? '+' : '-';
        }
    }
    if (rec) rec->pass = pass;
    return pass;
}

/// Non-adaptive exact test: per-vertex bases are drawn from candidate lists
/// before any outcome is known. A vertex whose drawn basis turns out correct
/// (mod pi) is "matched" and must yield the outcome on the |alpha_k(Z_l)>
/// side (compared mod 2*pi); unmatched vertices always pass.
inline bool test_copy_nonadaptive_e(const StateVector& copy, const WeightedGraph& g,
                                    const IndependenceCover& cover,
                                    const std::vector<std::vector<double>>& bases, Rng& rng,
                                    CopyRecord* rec = nullptr) {
    const int l = uniform_int(rng, 1, cover.num_parts());
    if (rec) rec->color = l;
    const auto& part = cover.part(l);
    std::vector<double> chosen(part.size());
    for (std::size_t i = 0; i < part.size(); ++i) {
        const auto& list = bases.at(static_cast<std::size_t>(part[i] - 1));
        if (list.empty()) throw config_error("empty candidate list");
        chosen[i] = list[static_cast<std::size_t>(
            uniform_int(rng, 0, static_cast<int>(list.size()) - 1))];
    }
    StateVector s = copy;
    std::map<int, int> z;
    for (int j : cover.complement(l, g.num_vertices())) {
        auto [zj, next] = measure_z(s, j, rng);
        z[j] = zj;
        s = std::move(next);
    }
    bool pass = true;
    for (std::size_t i = 0; i < part.size(); ++i) {
        const int k = part[i];
        const double correct = alpha_expected(g, k, z);
        if (rec) rec->bases_used.push_back(chosen[i]);
        if (!same_basis_angle(chosen[i], correct)) {
            if (rec) rec->outcomes += '.';
            continue;
        }
        auto [plus, next] = measure_plane(s, k, PlaneBasis(chosen[i]), rng);
        s = std::move(next);
        const double outcome_angle = plus ? chosen[i] : chosen[i] + pi;
        const bool ok = same_state_angle(outcome_angle, correct);
        pass = pass && ok;
        if (rec) rec->outcomes += ok ? '+' : '-';
    }
    if (rec) rec->pass = pass;
    return pass;
}

/// Non-adaptive imperfect-match test over the h grid bases. Default mode
/// draws an independent F per vertex, which realizes the product-form test
/// operator exactly; shared_f draws one F per copy (the paper's literal
/// procedure), whose statistics can differ when grid angles coincide.
inline bool test_copy_nonadaptive_h(const StateVector& copy, const WeightedGraph& g,
                                    const IndependenceCover& cover, int h, bool shared_f,
                                    Rng& rng, CopyRecord* rec = nullptr) {
    if (h < 1) throw config_error("h must be >= 1");
    const int l = uniform_int(rng, 1, cover.num_parts());
    if (rec) rec->color = l;
    const auto& part = cover.part(l);
    std::vector<double> chosen(part.size());
    const int shared = uniform_int(rng, 1, h);
    for (std::size_t i = 0; i < part.size(); ++i) {
        const int f = shared_f ? shared : uniform_int(rng, 1, h);
        chosen[i] = f * pi / h;
    }
    StateVector s = copy;
    std::map<int, int> z;
    for (int j : cover.complement(l, g.num_vertices())) {
        auto [zj, next] = measure_z(s, j, rng);
        z[j] = zj;
        s = std::move(next);
    }
    bool pass = true;
    for (std::size_t i = 0; i < part.size(); ++i) {
        const int k = part[i];
        const double alpha_h = discretize_angle(alpha_expected(g, k, z), h);
        if (rec) rec->bases_used.push_back(chosen[i]);
        if (!same_basis_angle(chosen[i], alpha_h)) {
            if (rec) rec->outcomes += '.';
            continue;
        }
        auto [plus, next] = measure_plane(s, k, PlaneBasis(chosen[i]), rng);
        s = std::move(next);
        const double outcome_angle = plus ? chosen[i] : chosen[i] + pi;
        const bool ok = same_state_angle(outcome_angle, alpha_h);
        pass = pass && ok;
        if (rec) rec->outcomes += ok ? '+' : '-';
    }
    if (rec) rec->pass = pass;
    return pass;
}

/// Theorem-specific fidelity lower bound attached to an accepted run.
inline double certificate_bound(const ProtocolConfig& cfg, const WeightedGraph& g) {
    const int m = cfg.cover.num_parts();
    const double n = g.num_vertices();
    switch (cfg.kind) {
        case ProtocolKind::adaptive_exact:
            return 1.0 - m * (1.0 - cfg.beta) / (cfg.N * cfg.beta);
        case ProtocolKind::adaptive_h:
            return 1.0 - (m * (1.0 - cfg.beta) / (cfg.beta * cfg.N) +
                          n * std::sin(pi / (4.0 * cfg.h)));
        case ProtocolKind::nonadaptive_e:
            return 1.0 - m * (1.0 - cfg.beta) * std::max(cfg.max_e(), 1) / (cfg.N * cfg.beta);
        case ProtocolKind::nonadaptive_h:
            return 1.0 - (m * double(cfg.h) * (1.0 - cfg.beta) / (cfg.beta * cfg.N) +
                          n * std::sin(pi / (4.0 * cfg.h)));
    }
    throw config_error("unknown protocol kind");
}

/// Predicted honest acceptance probability over all N tested copies.
inline double completeness_bound(const ProtocolConfig& cfg, const IndependenceCover& cover) {
    const int amax = cover.max_part_size();
    const double s = cfg.h >= 1 ? std::sin(pi / (4.0 * cfg.h)) : 0.0;
    switch (cfg.kind) {
        case ProtocolKind::adaptive_exact:
        case ProtocolKind::nonadaptive_e:
            return 1.0;
        case ProtocolKind::adaptive_h:
            return std::pow(1.0 - s * s, double(cfg.N) * amax);
        case ProtocolKind::nonadaptive_h:
            return std::pow(1.0 - s * s / cfg.h, double(cfg.N) * amax);
    }
    throw config_error("unknown protocol kind");
}

struct ProtocolReport {
    bool accepted = false;
    int withheld_index = 0;  // 1-based position of the untested copy
    std::vector<CopyRecord> transcript;
    std::optional<double> certificate;   // present iff accepted
    bool certificate_informative = false;  // certificate > 0
    double completeness = 1.0;           // predicted honest acceptance probability
    StateVector remaining_copy;
};

/// The N-random sampling test: withhold one of N+1 copies uniformly at
/// random, run the per-copy test on the rest, accept iff all pass.
inline ProtocolReport run_random_sampling_test(StateSource& src, const WeightedGraph& g,
                                               const ProtocolConfig& cfg, Rng& rng) {
    cfg.validate(g);
    ProtocolReport rep;
    rep.withheld_index = uniform_int(rng, 1, cfg.N + 1);
    rep.completeness = completeness_bound(cfg, cfg.cover);
    rep.accepted = true;
    for (int i = 1; i <= cfg.N + 1; ++i) {
        StateVector copy = src.next(rng);
        if (i == rep.withheld_index) {
            rep.remaining_copy = std::move(copy);
            continue;
        }
        CopyRecord rec;
        rec.copy_index = i;
        bool pass = false;
        switch (cfg.kind) {
            case ProtocolKind::adaptive_exact:
                pass = test_copy_adaptive_exact(copy, g, cfg.cover, rng, &rec);
                break;
            case ProtocolKind::adaptive_h:
                pass = test_copy_adaptive_h(copy, g, cfg.cover, cfg.h, rng, &rec);
                break;
            case ProtocolKind::nonadaptive_e:
                pass = test_copy_nonadaptive_e(copy, g, cfg.cover, cfg.bases, rng, &rec);
                break;
            case ProtocolKind::nonadaptive_h:
                pass = test_copy_nonadaptive_h(copy, g, cfg.cover, cfg.h, cfg.strict_paper_f,
                                               rng, &rec);
                break;
        }
        rep.transcript.push_back(std::move(rec));
        rep.accepted = rep.accepted && pass;
    }
    if (rep.accepted) {
        const double bound = certificate_bound(cfg, g);
        rep.certificate = bound;
        rep.certificate_informative = bound > 0.0;
    }
    return rep;
}

/// Statistical core of Theorems 2 and 4: with all N sampled binary values
/// zero, Pr{withheld value = 1} <= (1-beta)/(beta N) at significance beta.
inline double proposition2_bound(int N, double beta) {
    if (N < 1) throw config_error("N must be >= 1");
    if (beta < 1.0 / (N + 1.0) || beta > 1.0)
        throw config_error("beta must satisfy 1/(N+1) <= beta <= 1");
    return (1.0 - beta) / (beta * N);
}

enum class PlanKind { adaptive_h, nonadaptive_h, ms, iqp };

struct CopyPlan {
    long long N = 0;
    int h = 0;      // grid resolution, when the plan fixes one
    double b = 0.0; // asymptotic h = b*n scaling, when applicable
};

/// Sufficient copy counts for target fidelity error eps at significance beta.
///   adaptive_h:    N = a*n with a = (1-beta)/beta * (eps - pi/(4b))^{-1}
///   nonadaptive_h: optimum b = pi/(2 eps), N = pi (1-beta) n^2 / (beta eps^2)
///   ms:            N = 8n(1-beta)/(eps beta)
///   iqp:           N = 2n(1-beta)/(eps beta)
inline CopyPlan copies_required(PlanKind kind, int n, double eps, double beta, double b = 0.0) {
    if (n < 1) throw config_error("n must be >= 1");
    if (eps <= 0.0 || eps >= 1.0) throw config_error("eps must be in (0,1)");
    if (beta <= 0.0 || beta >= 1.0) throw config_error("beta must be in (0,1)");
    CopyPlan plan;
    switch (kind) {
        case PlanKind::adaptive_h: {
            if (b <= 0.0) throw config_error("adaptive_h plan needs b > 0");
            if (eps <= pi / (4.0 * b))
                throw config_error("infeasible eps: need eps > pi/(4b)");
            const double a = (1.0 - beta) / beta / (eps - pi / (4.0 * b));
            plan.N = static_cast<long long>(std::ceil(a * n));
            plan.h = static_cast<int>(std::ceil(b * n));
            plan.b = b;
            break;
        }
        case PlanKind::nonadaptive_h: {
            plan.b = pi / (2.0 * eps);
            plan.N = static_cast<long long>(std::ceil(pi * (1.0 - beta) * double(n) * n /
                                                      (beta * eps * eps)));
            plan.h = static_cast<int>(std::ceil(plan.b)) * n;
            break;
        }
        case PlanKind::ms:
            plan.N = static_cast<long long>(std::ceil(8.0 * n * (1.0 - beta) / (eps * beta)));
            break;
        case PlanKind::iqp:
            plan.N = static_cast<long long>(std::ceil(2.0 * n * (1.0 - beta) / (eps * beta)));
            break;
    }
    return plan;
}

}  // namespace wgsv
