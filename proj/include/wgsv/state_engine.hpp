#pragma once

#include <Eigen/Dense>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "wgsv/common.hpp"
#include "wgsv/rng.hpp"
#include "wgsv/weighted_graph.hpp"

namespace wgsv {

/// Equatorial single-qubit basis {|alpha>, |alpha+pi>} with
/// |alpha> = (|0> + e^{i alpha}|1>)/sqrt(2).
struct PlaneBasis {
    double alpha;

    explicit PlaneBasis(double a) : alpha(reduce_2pi(a)) {}

    Eigen::Vector2cd ket() const {
        return Eigen::Vector2cd(complex(1.0 / std::sqrt(2.0), 0.0),
                                std::polar(1.0 / std::sqrt(2.0), alpha));
    }
    Eigen::Vector2cd ket_antipodal() const { return PlaneBasis(alpha + pi).ket(); }
};

/// Dense n-qubit statevector. Vertex k maps to bit k-1 of the amplitude
/// index (little-endian). Measured qubits stay in the register, pinned to
/// their post-measurement state, so vertex indexing survives a protocol round.
struct StateVector {
    int n = 0;
    Eigen::VectorXcd amps;
    std::vector<bool> measured;

    StateVector() = default;
    StateVector(int n_, Eigen::VectorXcd a)
        : n(n_), amps(std::move(a)), measured(static_cast<std::size_t>(n_), false) {
        if (n < 1) throw input_error("qubit count must be positive");
        if (n > kDenseQubitLimit)
            throw capability_error("dense statevector capped at n = " +
                                   std::to_string(kDenseQubitLimit));
        if (amps.size() != (Eigen::Index(1) << n))
            throw input_error("amplitude vector has wrong dimension");
    }

    Eigen::Index dim() const { return amps.size(); }

    double norm_error() const { return std::fabs(amps.squaredNorm() - 1.0); }

    void check_vertex(int k) const {
        if (k < 1 || k > n) throw input_error("vertex " + std::to_string(k) + " out of range");
    }
};

/// |G> = [prod Lambda_jk(theta_jk)] |+>^n: amplitude of bit string z is
/// 2^{-n/2} exp(i sum_{(j,k) in E} theta_jk z_j z_k).
inline StateVector build_weighted_graph_state(const WeightedGraph& g) {
    const int n = g.num_vertices();
    if (n > kDenseQubitLimit)
        throw capability_error("dense statevector capped at n = " +
                               std::to_string(kDenseQubitLimit));
    const Eigen::Index dim = Eigen::Index(1) << n;
    const double scale = std::pow(2.0, -0.5 * n);
    Eigen::VectorXcd amps(dim);
    for (Eigen::Index z = 0; z < dim; ++z) {
        double phase = 0.0;
        for (const auto& [edge, theta] : g.edges()) {
            const auto [j, k] = edge;
            if (((z >> (j - 1)) & 1) && ((z >> (k - 1)) & 1)) phase += theta;
        }
        amps[z] = std::polar(scale, phase);
    }
    return StateVector(n, std::move(amps));
}

/// alpha_k(Z_l) = sum_{j in C_k} theta_jk z_j, reduced to [0, 2*pi).
/// Every neighbor of k must have an assigned outcome.
inline double alpha_expected(const WeightedGraph& g, int k, const std::map<int, int>& z) {
    g.check_vertex(k);
    double alpha = 0.0;
    for (int j : g.neighbors(k)) {
        auto it = z.find(j);
        if (it == z.end())
            throw input_error("no Z outcome for neighbor " + std::to_string(j) +
                              " of vertex " + std::to_string(k));
        if (it->second != 0 && it->second != 1) throw input_error("Z outcome must be 0 or 1");
        alpha += g.weight(j, k) * it->second;
    }
    return reduce_2pi(alpha);
}

namespace detail {

/// Collapse s onto the rank-1 projector |phi><phi| on qubit k (phi a 2-vector),
/// sampling the complementary outcome with probability 1 - <phi|rho_k|phi>.
/// Returns (hit, collapsed state).
inline std::pair<bool, StateVector> measure_rank1(const StateVector& s, int k,
                                                  const Eigen::Vector2cd& phi,
                                                  const Eigen::Vector2cd& phi_perp, Rng& rng) {
    s.check_vertex(k);
    if (s.measured[static_cast<std::size_t>(k - 1)])
        throw state_error("vertex " + std::to_string(k) + " already measured");
    const Eigen::Index bit = Eigen::Index(1) << (k - 1);
    const Eigen::Index dim = s.dim();

    double p_hit = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & bit) continue;
        const complex a0 = s.amps[i], a1 = s.amps[i | bit];
        const complex proj = std::conj(phi[0]) * a0 + std::conj(phi[1]) * a1;
        p_hit += std::norm(proj);
    }
    const bool hit = uniform01(rng) < p_hit;
    const Eigen::Vector2cd& out = hit ? phi : phi_perp;
    const double p = hit ? p_hit : 1.0 - p_hit;
    if (p <= 0.0) throw state_error("measurement collapsed onto a zero-probability branch");

    Eigen::VectorXcd amps(dim);
    const double inv = 1.0 / std::sqrt(p);
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & bit) continue;
        const complex a0 = s.amps[i], a1 = s.amps[i | bit];
        const complex proj = (std::conj(out[0]) * a0 + std::conj(out[1]) * a1) * inv;
        amps[i] = proj * out[0];
        amps[i | bit] = proj * out[1];
    }
    StateVector collapsed(s.n, std::move(amps));
    collapsed.measured = s.measured;
    collapsed.measured[static_cast<std::size_t>(k - 1)] = true;
    return {hit, std::move(collapsed)};
}

}  // namespace detail

/// Z-basis measurement; outcome 1 corresponds to |1>.
inline std::pair<int, StateVector> measure_z(const StateVector& s, int k, Rng& rng) {
    auto [hit, collapsed] = detail::measure_rank1(
        s, k, Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(0.0, 1.0), rng);
    return {hit ? 0 : 1, std::move(collapsed)};
}

/// Plane measurement; outcome true ("+") projects onto |alpha>, false onto
/// |alpha+pi>.
inline std::pair<bool, StateVector> measure_plane(const StateVector& s, int k,
                                                  const PlaneBasis& b, Rng& rng) {
    return detail::measure_rank1(s, k, b.ket(), b.ket_antipodal(), rng);
}

/// |<b|a>|^2 for two pure states.
inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.n != b.n) throw input_error("fidelity: qubit counts differ");
    return std::norm(b.amps.dot(a.amps));
}

/// Dense density matrix for mixed-state oracle checks.
struct DensityMatrix {
    int n = 0;
    Eigen::MatrixXcd rho;

    DensityMatrix() = default;
    DensityMatrix(int n_, Eigen::MatrixXcd r) : n(n_), rho(std::move(r)) {
        const Eigen::Index dim = Eigen::Index(1) << n;
        if (rho.rows() != dim || rho.cols() != dim)
            throw input_error("density matrix has wrong dimension");
    }

    void validate() const {
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kOperatorTol)
            throw input_error("density matrix not Hermitian");
        if (std::fabs(rho.trace().real() - 1.0) > kOperatorTol ||
            std::fabs(rho.trace().imag()) > kOperatorTol)
            throw input_error("density matrix trace is not 1");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kOperatorTol)
            throw input_error("density matrix not positive semidefinite");
    }

    static DensityMatrix from_pure(const StateVector& s) {
        return DensityMatrix(s.n, s.amps * s.amps.adjoint());
    }
};

/// <b|rho|b> for mixed rho.
inline double fidelity(const DensityMatrix& rho, const StateVector& b) {
    if (rho.n != b.n) throw input_error("fidelity: qubit counts differ");
    return (b.amps.adjoint() * rho.rho * b.amps)(0, 0).real();
}

/// Applies one 2x2 unitary on vertex k.
inline StateVector apply_single_qubit(const StateVector& s, int k, const Eigen::Matrix2cd& u) {
    s.check_vertex(k);
    if ((u * u.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > kOperatorTol)
        throw input_error("matrix on vertex " + std::to_string(k) + " is not unitary");
    const Eigen::Index bit = Eigen::Index(1) << (k - 1);
    Eigen::VectorXcd amps(s.dim());
    for (Eigen::Index i = 0; i < s.dim(); ++i) {
        if (i & bit) continue;
        const complex a0 = s.amps[i], a1 = s.amps[i | bit];
        amps[i] = u(0, 0) * a0 + u(0, 1) * a1;
        amps[i | bit] = u(1, 0) * a0 + u(1, 1) * a1;
    }
    StateVector out(s.n, std::move(amps));
    out.measured = s.measured;
    return out;
}

/// Tensor product of per-vertex unitaries (one per vertex, in vertex order).
inline StateVector apply_local_phase_frame(const StateVector& s,
                                           const std::vector<Eigen::Matrix2cd>& frame) {
    if (static_cast<int>(frame.size()) != s.n)
        throw input_error("frame must supply one unitary per vertex");
    StateVector out = s;
    for (int k = 1; k <= s.n; ++k) out = apply_single_qubit(out, k, frame[k - 1]);
    return out;
}

/// Text dump: one "index re im" line per amplitude, in index order.
inline void dump_state(const StateVector& s, std::ostream& os) {
    char buf[80];
    for (Eigen::Index i = 0; i < s.dim(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld %.17g %.17g\n", static_cast<long long>(i),
                      s.amps[i].real(), s.amps[i].imag());
        os << buf;
    }
}

}  // namespace wgsv
