#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wienerlab/field.hpp"
#include "wienerlab/manifest.hpp"
#include "wienerlab/randomize.hpp"
#include "wienerlab/stats.hpp"

namespace wienerlab {

/// How the fixed function phi is produced before randomization.
struct DataSpec {
    std::string generator = "rough";  // rough | gaussian | one_cube | file
    RoughDataSpec rough;
    double width = 1.0;  // gaussian
    double amplitude = 1.0;
    std::string path;    // file
    bool decay_check = true;  // file: require decay at the box edge on load
};

/// one_cube: product bump supported where psi(. - 0) = 1, so phi^omega = g_0 phi.
Field make_data(const TorusGrid& grid, const DataSpec& spec, const PartitionOfUnity& psi);

enum class StatKind { hs, lp, local_strichartz, global_strichartz };

StatKind stat_kind_from_string(const std::string& name);
std::string to_string(StatKind kind);

struct StatisticSpec {
    StatKind kind = StatKind::hs;
    double s = 0.0;
    double p = 4.0;
    double q = 6.0;
    double r = 6.0;
    double T = 0.1;            // window [0, T]; T_max for global_strichartz
    std::size_t frames = 65;   // time samples on [0, T]
};

/// Everything needed to reproduce a probe run bit for bit.
struct ExperimentManifest {
    int d = 1;
    int M = 128;
    double L = 1.0;
    double psi_width = 0.25;
    CoeffKind dist = CoeffKind::complex_gaussian;
    DataSpec data;
    StatisticSpec stat;
    std::string lambda = "auto";  // "auto" or "start:stop:count", in units of the reference norm
    std::size_t trials = 20000;
    std::uint64_t seed = 0;
    std::string version = kCodeVersion;

    Manifest to_manifest() const;
    static ExperimentManifest from_manifest(const Manifest& m);
};

inline constexpr double kTailBandLo = 1e-3;
inline constexpr double kTailBandHi = 0.5;

/// Empirical P(X > lambda) with Wilson intervals and the fit
/// log P = log C - c lambda^2 over the band [1e-3, 0.5].
struct TailCurve {
    std::vector<double> lambda;
    std::vector<double> exceed;
    std::vector<double> ci_lo;
    std::vector<double> ci_hi;
    std::size_t n_trials = 0;
    double C_hat = 0.0;
    double c_hat = 0.0;
    double fit_r2 = 0.0;
    std::size_t fit_points = 0;
    double reference_norm = 1.0;
    std::string statistic;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
    /// lambda,p_hat,ci_lo,ci_hi with a header line.
    std::string to_csv() const;
};

/// "auto" gives 128 points on [0, max_value]; "a:b:n" gives n points on [a, b].
std::vector<double> resolve_lambda_grid(const std::string& spec, double max_value);

/// Rejects empty samples, non-ascending grids, and fits with fewer than three
/// grid points inside the band.
TailCurve build_tail_curve(std::span<const double> samples, std::span<const double> lambda);

struct TailSamples {
    std::vector<double> values;  // statistic / reference norm, one per trial
    double reference_norm = 0.0;
    /// global_strichartz only: median of norm on [0, T/2] over norm on [0, T].
    double half_window_ratio = 0.0;
};

/// Trial t uses coefficient stream t of the master seed.
TailSamples tail_samples(const StatisticSpec& stat, const ExperimentManifest& man);

/// Needs at least 1000 trials; refuses coefficient laws failing the subgaussian check.
TailCurve tail_experiment(const StatisticSpec& stat, const ExperimentManifest& man);

struct KhintchineRow {
    double p = 0.0;
    double ratio = 0.0;     // ||sum g_n c_n||_{L^p(Omega)} / ||c||_2
    double se = 0.0;
    bool flagged = false;   // relative standard error above 10%
};

struct KhintchineTable {
    std::vector<KhintchineRow> rows;
    double alpha = 0.0;     // ratio ~ p^alpha
    double alpha_se = 0.0;

    nlohmann::json to_json() const;
};

/// p in [2, 64], trials >= 1e5.
KhintchineTable khintchine_moments(const CoeffDistribution& dist, std::span<const Complex> c,
                                   std::span<const double> p_list, std::size_t trials, std::uint64_t seed = 0);

struct ScalingRow {
    double T = 0.0;
    double C_hat = 0.0;
    double c_hat = 0.0;
    double fit_r2 = 0.0;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    double slope = 0.0;
    double slope_se = 0.0;
    double expected = 0.0;  // -2/q

    nlohmann::json to_json() const;
};

/// Local Strichartz tails at each T; regresses log c_hat on log T. q, r finite,
/// T_list spanning at least one decade.
ScalingReport strichartz_T_scaling(double q, double r, std::span<const double> T_list, const ExperimentManifest& man);

/// ||S(t) phi||_{L^q([0,T]; L^r)} / ||phi||_2 over `frames` uniform samples.
double deterministic_strichartz(const Field& phi, double q, double r, double T, std::size_t frames = 257,
                                bool allow_nonadmissible = false);

struct LpDemoRow {
    int M = 0;
    double deterministic = 0.0;
    double randomized_median = 0.0;
};

struct LpDemoReport {
    std::vector<LpDemoRow> rows;
    double deterministic_exponent = 0.0;  // slope of log norm vs log M
    double randomized_exponent = 0.0;

    nlohmann::json to_json() const;
};

struct LpDemoOptions {
    int d = 1;
    double L = 1.0;
    std::size_t trials = 200;
    CoeffKind dist = CoeffKind::complex_gaussian;
    std::uint64_t seed = 0;
    double psi_width = 0.25;
};

/// Aligned-phase rough data refined over M_list: deterministic L^p norm vs the
/// median over randomizations.
LpDemoReport lp_improvement_demo(double s_decay, double p, std::span<const int> M_list, const LpDemoOptions& opt = {});

}  // namespace wienerlab
