#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wgsv {

using complex = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

// Tolerances used across the library. Amplitude-level identities are held
// to 1e-12, operator-level (eigendecomposition) certificates to 1e-10.
inline constexpr double kAmplitudeTol = 1e-12;
inline constexpr double kOperatorTol = 1e-10;

// Hard caps on problem size.
inline constexpr int kDenseQubitLimit = 24;   // pure-state operations
inline constexpr int kOracleQubitLimit = 10;  // dense 2^n x 2^n operators
inline constexpr int kChromaticLimit = 12;    // exhaustive coloring search
inline constexpr int kZrTermLimit = 20;       // 2^n-term exponential sums

// Invalid arguments or malformed data supplied by the caller.
struct input_error : std::invalid_argument {
    explicit input_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Request exceeds a documented size cap.
struct capability_error : std::runtime_error {
    explicit capability_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Protocol configuration violates a precondition (e.g. beta too small).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation applied to a state in the wrong phase of its lifecycle.
struct state_error : std::runtime_error {
    explicit state_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Copy stream ran dry before the protocol finished.
struct source_error : std::runtime_error {
    explicit source_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Reduce an angle to the canonical interval [0, 2*pi).
inline double reduce_2pi(double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a < 0.0) a += 2.0 * pi;
    if (a >= 2.0 * pi) a = 0.0;  // fmod rounding at the seam
    return a;
}

/// Reduce an angle to [0, pi). Plane bases are invariant under alpha -> alpha+pi.
inline double reduce_pi(double a) {
    a = std::fmod(a, pi);
    if (a < 0.0) a += pi;
    if (a >= pi) a = 0.0;
    return a;
}

/// True if two angles name the same plane-basis state (compared mod 2*pi).
inline bool same_state_angle(double a, double b, double tol = 1e-9) {
    double d = std::fabs(reduce_2pi(a) - reduce_2pi(b));
    return d < tol || std::fabs(d - 2.0 * pi) < tol;
}

/// True if two angles name the same plane basis (compared mod pi).
inline bool same_basis_angle(double a, double b, double tol = 1e-9) {
    double d = std::fabs(reduce_pi(a) - reduce_pi(b));
    return d < tol || std::fabs(d - pi) < tol;
}

}  // namespace wgsv
