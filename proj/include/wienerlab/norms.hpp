#pragma once

#include <limits>
#include <string>

#include <json.hpp>

#include "wienerlab/field.hpp"
#include "wienerlab/wiener.hpp"

namespace wienerlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// (sum |u|^p dx^d)^{1/p}; p = infinity is the grid maximum, a lower proxy for
/// the continuum sup norm. Frequency-space input is transformed first.
double lp_norm(const Field& field, double p);

/// ||<nabla>^s u||_{L^2} through the multiplier (1 + |xi|^2)^{s/2}.
double sobolev_norm(const Field& field, double s);

/// || <n>^s ||psi(D - n) u||_{L^p} ||_{l^q} over the retained cubes. Warns when
/// more than 1e-10 of the spectral mass lies outside them.
double modulation_norm(const Field& field, double p, double q, double s, const PartitionOfUnity& psi);

/// || 2^{js} ||phi_j(D) u||_{L^p} ||_{l^q_j} with the dyadic blocks of lp_symbol.
double besov_norm(const Field& field, double p, double q, double s);

/// ||u||_{L^q_t L^r_x([0, T])}: trapezoid in time over frames with t <= T (a
/// partial last interval is interpolated); q = infinity takes the frame max.
double spacetime_norm(const SpacetimeField& u, double q, double r, double T);

/// Temporal taper used by xsb_norm: raised-cosine ramps over the first and last
/// `fraction` of the frames, 1 in between.
std::vector<double> tukey_taper(std::size_t frames, double fraction = 0.1);

/// Discrete X^{s,b} proxy: || <xi>^s <tau + 4 pi^2 |xi|^2>^b u_hat(tau, xi) ||_{L^2}
/// after tapering the frames. tau is angular (e^{-i t tau}), so S(t) phi
/// concentrates on tau = -4 pi^2 |xi|^2, and the tau-measure is d tau / (2 pi)
/// so that s = b = 0 reproduces the space-time L^2 norm of the tapered field.
/// Only meaningful for relative comparisons. Needs at least 16 frames.
double xsb_norm(const SpacetimeField& u, double s, double b, double taper_fraction = 0.1);

/// d/2 - 2/(p - 1).
double critical_index(int d, double p_nonlinear);

/// 2/q + d/r = d/2 with 2 <= q, r <= infinity and (q, r, d) != (2, infinity, 2).
bool is_admissible(double q, double r, int d);

enum class NormKind { lp, hs, modulation, besov, spacetime, xsb };

NormKind norm_kind_from_string(const std::string& name);
std::string to_string(NormKind kind);

struct NormSpec {
    NormKind kind = NormKind::lp;
    double p = 2.0;
    double q = 2.0;
    double r = 2.0;
    double s = 0.0;
    double b = 0.0;
    double T = 0.0;  // spacetime window

    void validate() const;
    nlohmann::json to_json() const;
};

/// Parses exponents, accepting "inf" / "infinity".
double parse_exponent(const std::string& text);

}  // namespace wienerlab
