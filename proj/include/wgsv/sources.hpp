#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wgsv/common.hpp"
#include "wgsv/rng.hpp"
#include "wgsv/state_engine.hpp"
#include "wgsv/weighted_graph.hpp"

namespace wgsv {

/// Adversary / noise models used to exercise completeness and soundness.
struct SourceSpec {
    enum Kind { honest, depolarized, rotated, wrong_weight, planted_bad, permuted_iid };
    Kind kind = honest;

    double p = 0.0;                  // depolarized: depolarizing probability
    char axis = 'z';                 // rotated: x, y, or z
    double delta = 0.0;              // rotated: rotation angle on every qubit
    std::pair<int, int> edge{0, 0};  // wrong_weight
    double dtheta = 0.0;             // wrong_weight: weight perturbation
    int position = 0;                // planted_bad: 1-based slot of the bad copy
    std::shared_ptr<SourceSpec> bad; // planted_bad: pure spec; null = orthogonal to |G>
    std::vector<SourceSpec> pool;    // permuted_iid: pure specs, cycled to length N+1
};

namespace detail {

inline Eigen::Matrix2cd rotation_gate(char axis, double delta) {
    const complex c(std::cos(delta / 2.0), 0.0);
    const complex s(0.0, -std::sin(delta / 2.0));
    Eigen::Matrix2cd u;
    switch (axis) {
        case 'x': u << c, s, s, c; break;
        case 'y': u << c, -std::sin(delta / 2.0), std::sin(delta / 2.0), c; break;
        case 'z': u << c + s, complex(0), complex(0), c - s; break;
        default: throw input_error(std::string("unknown rotation axis '") + axis + "'");
    }
    return u;
}

inline WeightedGraph perturb_weight(const WeightedGraph& g, std::pair<int, int> edge,
                                    double dtheta) {
    if (!g.has_edge(edge.first, edge.second))
        throw input_error("wrong_weight: (" + std::to_string(edge.first) + "," +
                          std::to_string(edge.second) + ") is not an edge");
    WeightedGraph out(g.num_vertices());
    const std::pair<int, int> key{std::min(edge.first, edge.second),
                                  std::max(edge.first, edge.second)};
    for (const auto& [e, theta] : g.edges()) {
        double w = theta;
        if (e == key) w += dtheta;
        if (w != 0.0) out.add_edge(e.first, e.second, w);
    }
    return out;
}

/// A deterministic state orthogonal to |G>: |0...0> with its |G> component
/// projected out. <G|0...0> = 2^{-n/2} != 0, so the residual never vanishes.
inline StateVector orthogonal_state(const StateVector& gstate) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(gstate.dim());
    v[0] = 1.0;
    v -= gstate.amps.dot(v) * gstate.amps;
    v.normalize();
    return StateVector(gstate.n, std::move(v));
}

}  // namespace detail

/// Untrusted (N+1)-copy state stream. Trajectory sampling only: mixed models
/// emit pure states drawn from an ensemble realizing the density matrix;
/// iid_density() exposes that matrix for dense-oracle cross-checks.
class StateSource {
  public:
    /// i.i.d. ensemble source: each copy is an independent draw.
    static StateSource make_ensemble(std::vector<std::pair<double, StateVector>> ensemble,
                                     int copies) {
        if (ensemble.empty()) throw input_error("empty ensemble");
        double total = 0.0;
        for (auto& [w, s] : ensemble) {
            if (w < 0.0) throw input_error("negative ensemble weight");
            total += w;
        }
        if (std::fabs(total - 1.0) > 1e-9) throw input_error("ensemble weights must sum to 1");
        StateSource src;
        src.mode_ = Mode::ensemble;
        src.ensemble_ = std::move(ensemble);
        src.copies_ = copies;
        return src;
    }

    /// i.i.d. depolarized source; the maximally-mixed branch is sampled as a
    /// uniformly random computational-basis state.
    static StateSource make_depolarized(StateVector gstate, double p, int copies) {
        if (p < 0.0 || p > 1.0) throw input_error("depolarizing probability must be in [0,1]");
        StateSource src;
        src.mode_ = Mode::depolarized;
        src.pure_ = std::move(gstate);
        src.p_ = p;
        src.copies_ = copies;
        return src;
    }

    /// Fixed sequence of copies, optionally emitted in a random permutation.
    static StateSource make_sequence(std::vector<StateVector> states, bool permute) {
        if (states.empty()) throw input_error("empty state sequence");
        StateSource src;
        src.mode_ = permute ? Mode::permuted : Mode::sequence;
        src.sequence_ = std::move(states);
        src.copies_ = static_cast<int>(src.sequence_.size());
        return src;
    }

    StateVector next(Rng& rng) {
        if (emitted_ >= copies_)
            throw source_error("source exhausted after " + std::to_string(copies_) + " copies");
        const int i = emitted_++;
        switch (mode_) {
            case Mode::ensemble: {
                double r = uniform01(rng);
                for (const auto& [w, s] : ensemble_) {
                    r -= w;
                    if (r < 0.0) return s;
                }
                return ensemble_.back().second;
            }
            case Mode::depolarized: {
                if (uniform01(rng) >= p_) return pure_;
                const Eigen::Index dim = pure_.dim();
                Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
                v[std::uniform_int_distribution<Eigen::Index>(0, dim - 1)(rng)] = 1.0;
                return StateVector(pure_.n, std::move(v));
            }
            case Mode::sequence:
                return sequence_[static_cast<std::size_t>(i)];
            case Mode::permuted: {
                if (perm_.empty()) {
                    perm_.resize(sequence_.size());
                    std::iota(perm_.begin(), perm_.end(), 0);
                    std::shuffle(perm_.begin(), perm_.end(), rng);
                }
                return sequence_[perm_[static_cast<std::size_t>(i)]];
            }
        }
        throw state_error("unreachable");
    }

    int emitted() const { return emitted_; }
    int copies() const { return copies_; }

    bool iid() const { return mode_ == Mode::ensemble || mode_ == Mode::depolarized; }

    /// Dense density matrix of one copy; i.i.d. sources only, small n only.
    DensityMatrix iid_density() const {
        if (!iid()) throw input_error("source is not i.i.d.");
        if (mode_ == Mode::depolarized) {
            const Eigen::Index dim = pure_.dim();
            if (pure_.n > kOracleQubitLimit)
                throw capability_error("density oracle capped at n = " +
                                       std::to_string(kOracleQubitLimit));
            Eigen::MatrixXcd rho = (1.0 - p_) * (pure_.amps * pure_.amps.adjoint());
            rho += p_ / double(dim) * Eigen::MatrixXcd::Identity(dim, dim);
            return DensityMatrix(pure_.n, std::move(rho));
        }
        const int n = ensemble_.front().second.n;
        if (n > kOracleQubitLimit)
            throw capability_error("density oracle capped at n = " +
                                   std::to_string(kOracleQubitLimit));
        const Eigen::Index dim = ensemble_.front().second.dim();
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto& [w, s] : ensemble_) rho += w * (s.amps * s.amps.adjoint());
        return DensityMatrix(n, std::move(rho));
    }

  private:
    enum class Mode { ensemble, depolarized, sequence, permuted };
    Mode mode_ = Mode::ensemble;
    std::vector<std::pair<double, StateVector>> ensemble_;
    StateVector pure_;
    double p_ = 0.0;
    std::vector<StateVector> sequence_;
    std::vector<std::size_t> perm_;
    int copies_ = 0;
    int emitted_ = 0;
};

namespace detail {

/// Deterministic pure state for a non-random spec kind.
inline StateVector pure_state_for(const SourceSpec& spec, const WeightedGraph& g) {
    switch (spec.kind) {
        case SourceSpec::honest:
            return build_weighted_graph_state(g);
        case SourceSpec::rotated: {
            StateVector s = build_weighted_graph_state(g);
            const Eigen::Matrix2cd u = rotation_gate(spec.axis, spec.delta);
            return apply_local_phase_frame(
                s, std::vector<Eigen::Matrix2cd>(static_cast<std::size_t>(s.n), u));
        }
        case SourceSpec::wrong_weight:
            return build_weighted_graph_state(perturb_weight(g, spec.edge, spec.dtheta));
        default:
            throw input_error("spec kind does not name a deterministic pure state");
    }
}

}  // namespace detail

/// Instantiates a source emitting N+1 copies of the target's n-qubit space.
inline StateSource make_source(const SourceSpec& spec, const WeightedGraph& g, int N) {
    if (N < 1) throw input_error("N must be >= 1");
    const int copies = N + 1;
    switch (spec.kind) {
        case SourceSpec::honest:
        case SourceSpec::rotated:
        case SourceSpec::wrong_weight:
            return StateSource::make_ensemble({{1.0, detail::pure_state_for(spec, g)}}, copies);
        case SourceSpec::depolarized:
            return StateSource::make_depolarized(build_weighted_graph_state(g), spec.p, copies);
        case SourceSpec::planted_bad: {
            if (spec.position < 1 || spec.position > copies)
                throw input_error("planted_bad position must be in [1, N+1]");
            const StateVector honest = build_weighted_graph_state(g);
            const StateVector bad = spec.bad ? detail::pure_state_for(*spec.bad, g)
                                             : detail::orthogonal_state(honest);
            std::vector<StateVector> seq(static_cast<std::size_t>(copies), honest);
            seq[static_cast<std::size_t>(spec.position - 1)] = bad;
            return StateSource::make_sequence(std::move(seq), false);
        }
        case SourceSpec::permuted_iid: {
            if (spec.pool.empty()) throw input_error("permuted_iid needs a non-empty pool");
            std::vector<StateVector> seq;
            seq.reserve(static_cast<std::size_t>(copies));
            for (int i = 0; i < copies; ++i)
                seq.push_back(detail::pure_state_for(spec.pool[i % spec.pool.size()], g));
            return StateSource::make_sequence(std::move(seq), true);
        }
    }
    throw input_error("unknown source kind");
}

}  // namespace wgsv
