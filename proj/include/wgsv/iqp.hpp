#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wgsv/common.hpp"
#include "wgsv/protocols.hpp"
#include "wgsv/state_engine.hpp"
#include "wgsv/weighted_graph.hpp"

namespace wgsv {

/// IQP circuit instance: diagonal part built from T and controlled-Z(pi/2)
/// powers, w_jk and v_l in {0..7}.
struct IqpInstance {
    int n = 0;
    std::map<std::pair<int, int>, int> w;  // keys (j,k), j < k
    std::vector<int> v;                    // v[l-1]

    void validate() const {
        if (n < 1) throw input_error("IQP instance needs n >= 1");
        if (static_cast<int>(v.size()) != n) throw input_error("v must have one entry per qubit");
        for (int vl : v)
            if (vl < 0 || vl > 7) throw input_error("v entries must be in {0..7}");
        for (const auto& [e, wjk] : w) {
            if (e.first < 1 || e.second > n || e.first >= e.second)
                throw input_error("w keys must satisfy 1 <= j < k <= n");
            if (wjk < 0 || wjk > 7) throw input_error("w entries must be in {0..7}");
        }
    }
};

/// Molmer-Sorensen graph-state instance, theta_ij in {pi/8, pi/4}.
struct MsInstance {
    int n = 0;
    std::map<std::pair<int, int>, double> edges;

    void validate() const {
        if (n < 1) throw input_error("MS instance needs n >= 1");
        for (const auto& [e, theta] : edges) {
            if (e.first < 1 || e.second > n || e.first >= e.second)
                throw input_error("edge keys must satisfy 1 <= j < k <= n");
            if (std::fabs(theta - pi / 8) > kAmplitudeTol &&
                std::fabs(theta - pi / 4) > kAmplitudeTol)
                throw input_error("MS weights must be pi/8 or pi/4");
        }
    }
};

/// Weighted graph plus the per-vertex unitaries mapping its graph state into
/// the target frame: target = frame applied to |G_weighted>.
struct FramedState {
    WeightedGraph graph;
    std::vector<Eigen::Matrix2cd> frame;
};

namespace detail {

/// Phase gate diag(1, e^{i phi}).
inline Eigen::Matrix2cd phase_gate(double phi) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
    m(1, 1) = std::polar(1.0, phi);
    return m;
}

inline Eigen::Matrix2cd hadamard() {
    Eigen::Matrix2cd h;
    const double s = 1.0 / std::sqrt(2.0);
    h << s, s, s, -s;
    return h;
}

}  // namespace detail

/// Decomposes prod e^{-i theta Z x Z} |+>^n into a weighted graph state and a
/// local frame, using e^{-i theta Z_j Z_k} =
/// e^{-i theta} R_j(2 theta) R_k(2 theta) Lambda_jk(-4 theta)
/// with R(phi) = diag(1, e^{i phi}). The edge weight becomes -4 theta and the
/// accumulated global phase rides on the vertex-1 unitary.
inline FramedState build_ms_state(const MsInstance& inst) {
    inst.validate();
    if (inst.n > kDenseQubitLimit)
        throw capability_error("dense statevector capped at n = " +
                               std::to_string(kDenseQubitLimit));
    WeightedGraph g(inst.n);
    std::vector<double> vertex_phase(static_cast<std::size_t>(inst.n), 0.0);
    double global_phase = 0.0;
    for (const auto& [e, theta] : inst.edges) {
        g.add_edge(e.first, e.second, reduce_2pi(-4.0 * theta));
        vertex_phase[static_cast<std::size_t>(e.first - 1)] += 2.0 * theta;
        vertex_phase[static_cast<std::size_t>(e.second - 1)] += 2.0 * theta;
        global_phase -= theta;
    }
    std::vector<Eigen::Matrix2cd> frame;
    frame.reserve(static_cast<std::size_t>(inst.n));
    for (int i = 0; i < inst.n; ++i) frame.push_back(detail::phase_gate(vertex_phase[i]));
    frame[0] *= std::polar(1.0, global_phase);
    return FramedState{std::move(g), std::move(frame)};
}

/// |G_IQP> = (prod H_l T_l^{v_l}) [prod T_j^{dag w} T_k^{dag w} Lambda(w pi/2)]
/// |+>^n. The graph carries theta_jk = w_jk pi/2 (edges with w = 4 reduce to
/// identity and are dropped); all diagonal single-qubit factors fold into the
/// frame U_l = H T^{v_l} T^{dag sum_k w_lk}.
inline FramedState build_iqp_state(const IqpInstance& inst) {
    inst.validate();
    if (inst.n > kDenseQubitLimit)
        throw capability_error("dense statevector capped at n = " +
                               std::to_string(kDenseQubitLimit));
    WeightedGraph g(inst.n);
    std::vector<int> tdag_power(static_cast<std::size_t>(inst.n), 0);
    for (const auto& [e, wjk] : inst.w) {
        if (wjk % 4 != 0) g.add_edge(e.first, e.second, wjk * pi / 2.0);
        tdag_power[static_cast<std::size_t>(e.first - 1)] += wjk;
        tdag_power[static_cast<std::size_t>(e.second - 1)] += wjk;
    }
    std::vector<Eigen::Matrix2cd> frame;
    frame.reserve(static_cast<std::size_t>(inst.n));
    for (int l = 1; l <= inst.n; ++l) {
        const double phi = (inst.v[static_cast<std::size_t>(l - 1)] -
                            tdag_power[static_cast<std::size_t>(l - 1)]) * pi / 4.0;
        frame.push_back(detail::hadamard() * detail::phase_gate(phi));
    }
    return FramedState{std::move(g), std::move(frame)};
}

struct VerificationParams {
    long long N = 0;
    int e_bound = 0;  // per-vertex candidate-basis count bound
};

/// Copy count for verifying an IQP output state with the non-adaptive exact
/// protocol: weights are multiples of pi/2, so alpha mod pi takes at most 2
/// values per vertex, and N = 2n(1-beta)/(eps beta) suffices.
inline VerificationParams verification_params_iqp(int n, double eps, double beta) {
    return VerificationParams{copies_required(PlanKind::iqp, n, eps, beta).N, 2};
}

/// MS variant: angles are multiples of pi/8, giving e(k) <= 8 and
/// N = 8n(1-beta)/(eps beta).
inline VerificationParams verification_params_ms(int n, double eps, double beta) {
    return VerificationParams{copies_required(PlanKind::ms, n, eps, beta).N, 8};
}

/// Z-basis output distribution p_z = |amplitude(z)|^2.
inline Eigen::VectorXd output_distribution(const StateVector& s) {
    return s.amps.cwiseAbs2();
}

/// Z-basis output distribution of a mixed state: the diagonal of rho.
inline Eigen::VectorXd output_distribution(const DensityMatrix& rho) {
    return rho.rho.diagonal().real();
}

inline double l1_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size()) throw input_error("l1_distance: length mismatch");
    if (std::fabs(p.sum() - 1.0) > 1e-9 || std::fabs(q.sum() - 1.0) > 1e-9)
        throw input_error("l1_distance: inputs must be probability vectors");
    return (p - q).cwiseAbs().sum();
}

/// l1 error between Z-output distributions of two states at fidelity F is at
/// most 2 sqrt(1-F).
inline double fidelity_to_l1_bound(double fid) {
    if (fid < 0.0 || fid > 1.0 + kAmplitudeTol) throw input_error("fidelity must be in [0,1]");
    return 2.0 * std::sqrt(std::max(0.0, 1.0 - fid));
}

/// Z_R = sum_{z in {+-1}^n} exp(i pi/8 (sum_{j<k} w_jk z_j z_k + sum_l v_l z_l)),
/// by exact brute force.
inline complex compute_Z_R(const IqpInstance& inst) {
    inst.validate();
    if (inst.n > kZrTermLimit)
        throw capability_error("Z_R brute force capped at n = " + std::to_string(kZrTermLimit));
    const std::size_t terms = std::size_t(1) << inst.n;
    complex sum = 0.0;
    for (std::size_t mask = 0; mask < terms; ++mask) {
        // bit b set means z_{b+1} = -1
        double arg = 0.0;
        for (const auto& [e, wjk] : inst.w) {
            const int zj = (mask >> (e.first - 1)) & 1 ? -1 : 1;
            const int zk = (mask >> (e.second - 1)) & 1 ? -1 : 1;
            arg += wjk * zj * zk;
        }
        for (int l = 1; l <= inst.n; ++l)
            arg += inst.v[static_cast<std::size_t>(l - 1)] * ((mask >> (l - 1)) & 1 ? -1 : 1);
        sum += std::polar(1.0, pi / 8.0 * arg);
    }
    return sum;
}

/// IQP instance file: lines "n <count>", "w <j> <k> <value>", "v <l> <value>";
/// '#' starts a comment. Unset w/v entries default to 0.
inline IqpInstance parse_iqp_instance(std::istream& in) {
    IqpInstance inst;
    std::string line;
    int lineno = 0;
    std::vector<std::tuple<int, int, int>> ws;
    std::vector<std::pair<int, int>> vs;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word == "n") {
            if (inst.n != 0) throw input_error("line " + std::to_string(lineno) + ": duplicate n");
            if (!(ls >> inst.n) || inst.n < 1)
                throw input_error("line " + std::to_string(lineno) + ": bad qubit count");
        } else if (word == "w") {
            int j, k, val;
            if (!(ls >> j >> k >> val))
                throw input_error("line " + std::to_string(lineno) + ": bad w directive");
            ws.emplace_back(j, k, val);
        } else if (word == "v") {
            int l, val;
            if (!(ls >> l >> val))
                throw input_error("line " + std::to_string(lineno) + ": bad v directive");
            vs.emplace_back(l, val);
        } else {
            throw input_error("line " + std::to_string(lineno) + ": unknown directive '" +
                              word + "'");
        }
    }
    if (inst.n == 0) throw input_error("instance file missing 'n' directive");
    inst.v.assign(static_cast<std::size_t>(inst.n), 0);
    for (auto [j, k, val] : ws) {
        if (j < 1 || k > inst.n || j >= k) throw input_error("w indices out of range");
        auto key = std::make_pair(j, k);
        if (inst.w.count(key)) throw input_error("duplicate w entry");
        inst.w[key] = val;
    }
    for (auto [l, val] : vs) {
        if (l < 1 || l > inst.n) throw input_error("v index out of range");
        inst.v[static_cast<std::size_t>(l - 1)] = val;
    }
    inst.validate();
    return inst;
}

inline IqpInstance load_iqp_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open instance file '" + path + "'");
    return parse_iqp_instance(in);
}

}  // namespace wgsv
