#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wienerlab/field.hpp"
#include "wienerlab/randomize.hpp"
#include "wienerlab/stats.hpp"

namespace wienerlab {

/// i u_t + Delta u = sign * mu |u|^2 u; defocusing is +1.
enum class Sign { defocusing = 1, focusing = -1 };

Sign sign_from_string(const std::string& name);
std::string to_string(Sign sign);
inline double sign_value(Sign s) { return s == Sign::defocusing ? 1.0 : -1.0; }

struct PicardConfig {
    double T = 0.01;
    std::size_t steps = 128;  // dt = T / steps
    std::size_t max_iters = 100;
    Sign sign = Sign::defocusing;
    double sigma = 1.1;
    double b = 0.55;
    double tol = 1e-10;
    double divergence_cap = 10.0;  // ||v|| > cap * ||z|| in C_t H^sigma
    std::size_t stall_limit = 3;   // consecutive rho >= 1 counted as divergence
    double strength = 1.0;         // mu; 0 gives the linear flow
    bool track_xsb = false;

    double dt() const { return T / static_cast<double>(steps); }
    /// sigma > 1, 1/2 < b <= 3/4, steps >= 64, positive T, tol, cap.
    void validate() const;
    nlohmann::json to_json() const;
};

struct PicardResult {
    bool converged = false;
    bool diverged = false;
    std::string stop_reason;
    std::size_t iterations = 0;
    std::vector<double> rho;          // C_t H^sigma contraction factors
    std::vector<double> rho_xsb;      // X^{sigma,b} proxy factors (when tracked)
    std::vector<double> update_norms; // ||v_{k+1} - v_k||_{C_t H^sigma}
    std::vector<double> v_norms;      // ||v_k||_{C_t H^sigma}
    double z_norm = 0.0;              // ||z||_{C_t H^sigma}
    /// Relative residual of the discrete Duhamel equation for the returned v,
    /// in the interaction picture, max over intervals in H^sigma.
    double residual = 0.0;
    /// ||Gamma(v) - v|| / ||v|| in C_t H^sigma from one extra application.
    double fixed_point_error = 0.0;
    /// Relative residual of i v_t + Delta v - N(z + v) with centered differences
    /// in t (an O(dt^2) consistency diagnostic, not a convergence test).
    double physical_residual = 0.0;
    SpacetimeField v;  // frequency-space frames on [0, T]

    nlohmann::json to_json() const;
};

/// t_k = k T / steps for k = 0..steps.
std::vector<double> uniform_times(double T, std::size_t steps);

/// Frames S(t_k) phi in phi's space. Times must be uniformly spaced.
SpacetimeField linear_part(const Field& phi, std::span<const double> times);

/// -sign * i * int_0^t S(t - t') F(t') dt' by the trapezoid rule on
/// w(t') = S(-t') F(t'), followed by S(t). t must be a frame time of F.
/// Result is in frequency space.
Field duhamel(const SpacetimeField& F, double t, Sign sign = Sign::defocusing);

/// Picard iteration v_{k+1} = Gamma(v_k) on [0, T] from v_0 = 0 (or `initial`).
/// Divergence yields converged = false; NaN raises NumericalFault.
PicardResult picard_solve(const Field& phi_omega, const PicardConfig& cfg,
                          const SpacetimeField* initial = nullptr);

/// Strang splitting for the full solution u with the same dt; physical-space frames.
SpacetimeField splitstep_reference(const Field& phi_omega, const PicardConfig& cfg);

struct GapOptions {
    double lo_fraction = 0.45;  // fit window as fractions of the retained band edge
    double hi_fraction = 0.9;
    std::size_t bins = 8;
};

struct GapReport {
    bool defined = false;
    bool low_confidence = false;
    std::string note;
    double slope_v = 0.0;  // d log RMS|v_hat| / d log <xi>
    double slope_z = 0.0;
    double gap = 0.0;      // slope_z - slope_v: extra decay of v over z
    double hs_ratio = 0.0; // ||v(T)||_{H^sigma} / ||z(T)||_{H^sigma}
    double window_lo = 0.0;
    double window_hi = 0.0;

    nlohmann::json to_json() const;
};

struct SlopeFit {
    bool defined = false;
    double slope = 0.0;  // d log RMS|u_hat| / d log <xi>
    double r2 = 0.0;
    std::size_t bins = 0;
};

/// RMS |u_hat| in `bins` equal radial bins of |xi| over [lo, hi), regressed
/// in log-log against <xi>. Undefined if a populated bin carries no mass or
/// fewer than three bins are populated.
SlopeFit spectral_slope(const Field& field, double lo, double hi, std::size_t bins);

/// Spectral decay slopes of v(T) and z(T) from radially binned RMS amplitudes.
GapReport smoothness_gap(const PicardResult& result, const Field& z_T, double sigma = 1.1,
                         const PartitionOfUnity& psi = PartitionOfUnity(), const GapOptions& opt = {});

struct LwpRow {
    double T = 0.0;
    std::size_t runs = 0;
    std::size_t successes = 0;
    double failure = 0.0;
    double ci_lo = 0.0;  // Wilson interval on the failure fraction
    double ci_hi = 0.0;
};

struct LwpTable {
    std::vector<LwpRow> rows;  // ascending T
    bool monotone = true;      // failures non-increasing as T decreases, up to CI overlap
    double gamma = 1.0;
    std::optional<LinearFit> fit;  // log(failure) vs T^{-gamma}, rows with failures only

    nlohmann::json to_json() const;
};

/// Success fraction of Picard runs for phi^omega over `seeds` draws (streams
/// 0..seeds-1 of master_seed, shared across T) at each T in the ascending list.
LwpTable lwp_probability(const Field& phi, const CoeffDistribution& dist, const PartitionOfUnity& psi,
                         std::span<const double> T_list, std::size_t seeds, std::uint64_t master_seed,
                         const PicardConfig& base, double gamma = 1.0);

}  // namespace wienerlab
