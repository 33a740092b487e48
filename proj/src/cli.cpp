#include "wienerlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wienerlab/errors.hpp"
#include "wienerlab/field_io.hpp"
#include "wienerlab/manifest.hpp"
#include "wienerlab/nls.hpp"
#include "wienerlab/norms.hpp"
#include "wienerlab/probe.hpp"
#include "wienerlab/spectral.hpp"

namespace wienerlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// A command-line option that writes into one manifest key when given.
struct Binding {
    std::string key;
    std::string value;
    bool flag_value = false;
    bool is_flag = false;
    bool seen = false;
    CLI::Option* opt = nullptr;
};

class Flags {
public:
    void option(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        auto b = std::make_unique<Binding>();
        b->key = key;
        b->opt = app->add_option(name, b->value, help + " [" + key + "]");
        items_.push_back(std::move(b));
    }
    void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help,
              bool value = true) {
        auto b = std::make_unique<Binding>();
        b->key = key;
        b->is_flag = true;
        b->flag_value = value;
        b->opt = app->add_flag(name, b->seen, help + " [" + key + "]");
        items_.push_back(std::move(b));
    }
    void apply(Manifest& m) const {
        for (const auto& b : items_) {
            if (b->opt->count() == 0) continue;
            if (b->is_flag) {
                m.set(b->key, b->flag_value);
            } else {
                m.set(b->key, b->value);
            }
        }
    }

private:
    std::vector<std::unique_ptr<Binding>> items_;
};

struct Common {
    std::string config;
    std::string manifest_out;
    std::string out_dir = "wienerlab_run";
};

struct Command {
    CLI::App* app = nullptr;
    Flags flags;
    Common common;
    std::function<void(Manifest&, const Common&, std::ostream&)> handler;
};

void add_common(Command& c) {
    c.app->add_option("--config", c.common.config, "Input manifest (flat key = value or JSON)");
    c.app->add_option("--manifest", c.common.manifest_out, "Also write the resolved manifest here (.json for JSON)");
    c.app->add_option("--out", c.common.out_dir, "Output directory");
}

void add_grid_flags(Command& c) {
    c.flags.option(c.app, "--d", "grid.d", "Dimension 1..4");
    c.flags.option(c.app, "--M", "grid.M", "Points per axis (power of two >= 8)");
    c.flags.option(c.app, "--L", "grid.L", "Half extent of the box");
    c.flags.option(c.app, "--psi-width", "psi.width", "Transition width of the partition of unity");
}

void add_data_flags(Command& c) {
    c.flags.option(c.app, "--generator", "data.generator", "rough | gaussian | one_cube | file");
    c.flags.option(c.app, "--s-decay", "data.s_decay", "Decay exponent of the rough profile");
    c.flags.option(c.app, "--data-seed", "data.seed", "Phase seed of the rough profile");
    c.flags.flag(c.app, "--aligned", "data.aligned", "Zero phases in the rough profile");
    c.flags.option(c.app, "--localize", "data.localize_radius", "Gaussian envelope radius for rough data");
    c.flags.option(c.app, "--amp", "data.l2_norm", "Rescale phi to this L^2 norm");
    c.flags.option(c.app, "--width", "data.width", "Gaussian width");
    c.flags.option(c.app, "--amplitude", "data.amplitude", "Gaussian / one_cube amplitude");
    c.flags.option(c.app, "--in", "data.path", "Field file for generator=file");
    c.flags.flag(c.app, "--no-decay-check", "data.decay_check", "Accept fields that do not decay at the box edge",
                 false);
    c.flags.option(c.app, "--dist", "dist.kind", "gaussian | bernoulli | uniform");
}

void add_picard_flags(Command& c) {
    c.flags.option(c.app, "--T", "picard.T", "Time horizon");
    c.flags.option(c.app, "--steps", "picard.steps", "Time steps on [0, T] (>= 64)");
    c.flags.option(c.app, "--max-iters", "picard.max_iters", "Picard iteration cap");
    c.flags.option(c.app, "--sign", "picard.sign", "defocusing | focusing");
    c.flags.option(c.app, "--sigma", "picard.sigma", "Regularity of the contraction metric");
    c.flags.option(c.app, "--b", "picard.b", "Temporal exponent of the X^{s,b} proxy");
    c.flags.option(c.app, "--tol", "picard.tol", "Relative convergence tolerance");
    c.flags.option(c.app, "--cap", "picard.divergence_cap", "Divergence cap relative to ||z||");
    c.flags.option(c.app, "--strength", "picard.strength", "Nonlinearity coefficient");
    c.flags.flag(c.app, "--track-xsb", "picard.track_xsb", "Also track X^{s,b} contraction factors");
    c.flags.option(c.app, "--seed", "rand.seed", "Master seed of the coefficients");
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(parse_exponent(item));
        } catch (const ValidationError&) {
            throw ValidationError(key + ": cannot parse list item '" + item + "'");
        }
    }
    require(!out.empty(), key + ": empty list");
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

// Keeps the entries whose first section is listed.
Manifest keep_sections(const Manifest& m, std::initializer_list<const char*> sections) {
    Manifest out;
    for (const auto& [k, v] : m.entries()) {
        const std::string head = k.substr(0, k.find('.'));
        for (const char* s : sections) {
            if (head == s) {
                out.set(k, v);
                break;
            }
        }
    }
    return out;
}

PicardConfig picard_from(const Manifest& m) {
    PicardConfig c;
    c.T = m.get_double("picard.T", c.T);
    c.steps = m.get_u64("picard.steps", c.steps);
    c.max_iters = m.get_u64("picard.max_iters", c.max_iters);
    c.sign = sign_from_string(m.get_string("picard.sign", to_string(c.sign)));
    c.sigma = m.get_double("picard.sigma", c.sigma);
    c.b = m.get_double("picard.b", c.b);
    c.tol = m.get_double("picard.tol", c.tol);
    c.divergence_cap = m.get_double("picard.divergence_cap", c.divergence_cap);
    c.stall_limit = m.get_u64("picard.stall_limit", c.stall_limit);
    c.strength = m.get_double("picard.strength", c.strength);
    c.track_xsb = m.get_bool("picard.track_xsb", c.track_xsb);
    c.validate();
    return c;
}

void picard_into(Manifest& m, const PicardConfig& c) {
    m.set("picard.T", c.T);
    m.set("picard.steps", static_cast<std::uint64_t>(c.steps));
    m.set("picard.max_iters", static_cast<std::uint64_t>(c.max_iters));
    m.set("picard.sign", to_string(c.sign));
    m.set("picard.sigma", c.sigma);
    m.set("picard.b", c.b);
    m.set("picard.tol", c.tol);
    m.set("picard.divergence_cap", c.divergence_cap);
    m.set("picard.stall_limit", static_cast<std::uint64_t>(c.stall_limit));
    m.set("picard.strength", c.strength);
    m.set("picard.track_xsb", c.track_xsb);
}

// All artifacts of one run go through this collector, in one thread, after the computation.
class Output {
public:
    Output(const Common& common, const Manifest& m) : dir_(common.out_dir), manifest_(m), hash_(m.hash()) {
        fs::create_directories(dir_);
        manifest_.save((dir_ / "manifest.cfg").string());
        if (!common.manifest_out.empty()) manifest_.save(common.manifest_out);
    }

    const fs::path& dir() const { return dir_; }

    std::string header() const {
        return "# wienerlab schema " + std::to_string(kSchemaVersion) + " manifest " + hash_ + "\n";
    }

    void text(const std::string& name, const std::string& body) const {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw ValidationError("out: cannot write " + (dir_ / name).string());
        out << body;
    }

    void csv(const std::string& name, const std::string& body) const { text(name, header() + body); }

    void dat(const std::string& name, const std::string& columns, const std::vector<std::pair<double, double>>& rows) const {
        std::string body = header() + "# " + columns + "\n";
        for (const auto& [x, y] : rows) body += format_double(x) + " " + format_double(y) + "\n";
        text(name, body);
    }

    void record(const std::string& kind, json payload) const {
        payload["schema"] = kSchemaVersion;
        payload["kind"] = kind;
        payload["version"] = kCodeVersion;
        payload["manifest_hash"] = hash_;
        payload["manifest"] = manifest_.to_json();
        text(kind + ".json", payload.dump(2) + "\n");
    }

private:
    fs::path dir_;
    Manifest manifest_;
    std::string hash_;
};

Manifest resolve(const Command& c) {
    Manifest m = c.common.config.empty() ? Manifest() : Manifest::load(c.common.config);
    c.flags.apply(m);
    if (m.has("data.path") && !m.has("data.generator")) m.set("data.generator", "file");
    return m;
}

// Radially binned RMS amplitude of a spectrum, bin width = lattice spacing.
std::vector<std::pair<double, double>> radial_spectrum(const Field& field) {
    const Field hat = to_frequency(field);
    const auto xi2 = hat.grid().frequency_norms_squared();
    const double h = hat.grid().frequency_spacing();
    std::map<long, std::pair<double, double>> bins;
    for (std::size_t i = 0; i < hat.size(); ++i) {
        auto& b = bins[std::lround(std::sqrt(xi2[i]) / h)];
        b.first += 1.0;
        b.second += std::norm(hat[i]);
    }
    std::vector<std::pair<double, double>> rows;
    for (const auto& [k, b] : bins) rows.emplace_back(static_cast<double>(k) * h, std::sqrt(b.second / b.first));
    return rows;
}

// ---------------------------------------------------------------------------

void cmd_grid_info(Manifest& m, const Common& common, std::ostream& out) {
    const TorusGrid grid = make_grid(static_cast<int>(m.get_int("grid.d", 1)), static_cast<int>(m.get_int("grid.M", 128)),
                                     m.get_double("grid.L", 1.0));
    const PartitionOfUnity psi = build_psi(m.get_double("psi.width", 0.25));
    m.set("schema", kSchemaVersion);
    m.set("grid.d", grid.dim());
    m.set("grid.M", grid.points());
    m.set("grid.L", grid.half_extent());
    m.set("psi.width", psi.transition_width());
    const CubeIndexSet cubes(grid);
    const json info{{"d", grid.dim()},
                    {"M", grid.points()},
                    {"L", grid.half_extent()},
                    {"dx", grid.dx()},
                    {"frequency_spacing", grid.frequency_spacing()},
                    {"nyquist", grid.nyquist()},
                    {"points", grid.size()},
                    {"bytes_per_field", grid.bytes_per_field()},
                    {"memory_budget", default_limits().memory_budget_bytes},
                    {"cube_nmax", cubes.nmax()},
                    {"cubes", cubes.size()},
                    {"band_edge", cubes.band_edge(psi)},
                    {"c1", psi.sum_squares_min(grid.dim())},
                    {"c2", psi.sum_squares_max(grid.dim())}};
    Output o(common, m);
    o.record("grid", {{"grid", info}});
    out << info.dump(2) << "\n";
}

Field load_input(const Manifest& m) {
    const std::string path = m.require_string("data.path");
    return load_field(path, FieldLoadOptions{m.get_bool("data.decay_check", true), 1e-10});
}

void cmd_decompose(Manifest& m, const Common& common, std::ostream& out) {
    const Field f = load_input(m);
    const PartitionOfUnity psi = build_psi(m.get_double("psi.width", 0.25));
    m.set("schema", kSchemaVersion);
    m.set("psi.width", psi.transition_width());
    const CubeIndexSet cubes(f.grid());
    const auto mass = cube_l2_masses(f, psi);
    const int d = f.grid().dim();
    std::string csv;
    for (int a = 0; a < d; ++a) csv += "n" + std::to_string(a) + ",";
    csv += "mass\n";
    std::vector<std::pair<double, double>> rows;
    double total = 0.0;
    for (std::size_t i = 0; i < cubes.size(); ++i) {
        for (int a = 0; a < d; ++a) csv += std::to_string(cubes[i][a]) + ",";
        csv += format_double(mass[i]) + "\n";
        rows.emplace_back(static_cast<double>(i), mass[i]);
        total += mass[i];
    }
    const double l2 = l2_norm(f);
    const json summary{{"cubes", cubes.size()},
                       {"nmax", cubes.nmax()},
                       {"sum_cube_mass", total},
                       {"l2_squared", l2 * l2},
                       {"out_of_band", out_of_band_fraction(f, psi)},
                       {"c1", psi.sum_squares_min(d)},
                       {"c2", psi.sum_squares_max(d)}};
    Output o(common, m);
    o.csv("cubes.csv", csv);
    o.dat("cubes.dat", "cube_position mass", rows);
    o.record("decompose", summary);
    out << summary.dump(2) << "\n";
}

SpacetimeField evolve_frames(const Field& u0, double T, std::size_t frames) {
    require(T > 0.0, "norm.T: must be positive for space-time norms");
    require(frames >= 2, "norm.frames: need at least two frames");
    return linear_part(u0, uniform_times(T, frames - 1));
}

void cmd_norm(Manifest& m, const Common& common, std::ostream& out) {
    const Field f = load_input(m);
    NormSpec spec;
    spec.kind = norm_kind_from_string(m.get_string("norm.kind", "lp"));
    spec.p = m.get_double("norm.p", spec.p);
    spec.q = m.get_double("norm.q", spec.q);
    spec.r = m.get_double("norm.r", spec.r);
    spec.s = m.get_double("norm.s", spec.s);
    spec.b = m.get_double("norm.b", spec.b);
    spec.T = m.get_double("norm.T", spec.T);
    spec.validate();
    const std::size_t frames = m.get_u64("norm.frames", 129);
    const PartitionOfUnity psi = build_psi(m.get_double("psi.width", 0.25));
    m.set("schema", kSchemaVersion);
    m.set("norm.kind", to_string(spec.kind));
    m.set("psi.width", psi.transition_width());

    double value = 0.0;
    switch (spec.kind) {
        case NormKind::lp: value = lp_norm(f, spec.p); break;
        case NormKind::hs: value = sobolev_norm(f, spec.s); break;
        case NormKind::modulation: value = modulation_norm(f, spec.p, spec.q, spec.s, psi); break;
        case NormKind::besov: value = besov_norm(f, spec.p, spec.q, spec.s); break;
        case NormKind::spacetime: value = spacetime_norm(evolve_frames(f, spec.T, frames), spec.q, spec.r, spec.T); break;
        case NormKind::xsb: value = xsb_norm(evolve_frames(f, spec.T, frames), spec.s, spec.b); break;
    }
    Output o(common, m);
    o.record("norm", {{"norm", spec.to_json()}, {"value", value}});
    out << format_double(value) << "\n";
}

void cmd_randomize(Manifest& m, const Common& common, std::ostream& out) {
    const bool generated = !m.has("data.path");
    ExperimentManifest e = ExperimentManifest::from_manifest(m);
    Field phi;
    if (generated) {
        phi = make_data(make_grid(e.d, e.M, e.L), e.data, build_psi(e.psi_width));
    } else {
        phi = load_input(m);
        e.d = phi.grid().dim();
        e.M = phi.grid().points();
        e.L = phi.grid().half_extent();
    }
    const PartitionOfUnity psi = build_psi(e.psi_width);
    const std::uint64_t seed = m.get_u64("rand.seed", 0);
    const std::uint64_t stream = m.get_u64("rand.stream", 0);
    const RandomDraw draw = sample(CoeffDistribution::make(e.dist), CubeIndexSet(phi.grid()), seed, stream);
    const Field omega = randomize(phi, draw, psi);

    Manifest resolved = keep_sections(e.to_manifest(), {"schema", "version", "grid", "psi", "dist", "data"});
    resolved.set("rand.seed", seed);
    resolved.set("rand.stream", stream);
    m = resolved;
    Output o(common, m);
    if (generated) save_field(o.dir() / "phi.field", to_physical(phi));
    save_field(o.dir() / "phi_omega.field", to_physical(omega));
    const json summary{{"generated", generated},
                       {"l2_phi", l2_norm(phi)},
                       {"l2_phi_omega", l2_norm(omega)},
                       {"cubes", draw.values.size()}};
    o.record("randomize", summary);
    out << summary.dump(2) << "\n";
}

void cmd_probe_tail(Manifest& m, const Common& common, std::ostream& out) {
    const ExperimentManifest e = ExperimentManifest::from_manifest(m);
    const TailCurve c = tail_experiment(e.stat, e);
    m = e.to_manifest();
    Output o(common, m);
    o.csv("tail.csv", c.to_csv());
    std::vector<std::pair<double, double>> rows;
    for (std::size_t i = 0; i < c.lambda.size(); ++i) rows.emplace_back(c.lambda[i], c.exceed[i]);
    o.dat("tail.dat", "lambda p_hat", rows);
    o.record("tail", c.to_json());
    out << "C_hat " << format_double(c.C_hat) << " c_hat " << format_double(c.c_hat) << " fit_r2 "
        << format_double(c.fit_r2) << "\n";
}

void cmd_probe_khintchine(Manifest& m, const Common& common, std::ostream& out) {
    const CoeffKind kind = coeff_kind_from_string(m.get_string("dist.kind", "gaussian"));
    const auto p_list = parse_list(m.get_string("khintchine.p", "2,4,8,16"), "khintchine.p");
    const std::size_t trials = m.get_u64("khintchine.trials", 100000);
    const std::size_t ncoef = m.get_u64("khintchine.ncoef", 16);
    const std::uint64_t seed = m.get_u64("khintchine.seed", 0);
    require(ncoef >= 1, "khintchine.ncoef: must be >= 1");
    const std::vector<Complex> c(ncoef, Complex(1.0 / std::sqrt(static_cast<double>(ncoef)), 0.0));
    const KhintchineTable t = khintchine_moments(CoeffDistribution::make(kind), c, p_list, trials, seed);

    Manifest r;
    r.set("schema", kSchemaVersion);
    r.set("dist.kind", to_string(kind));
    r.set("khintchine.p", join(p_list));
    r.set("khintchine.trials", static_cast<std::uint64_t>(trials));
    r.set("khintchine.ncoef", static_cast<std::uint64_t>(ncoef));
    r.set("khintchine.seed", seed);
    m = r;
    Output o(common, m);
    std::string csv = "p,ratio,se,flagged\n";
    std::vector<std::pair<double, double>> rows;
    for (const auto& row : t.rows) {
        csv += format_double(row.p) + "," + format_double(row.ratio) + "," + format_double(row.se) + "," +
               (row.flagged ? "1" : "0") + "\n";
        rows.emplace_back(row.p, row.ratio);
    }
    o.csv("khintchine.csv", csv);
    o.dat("khintchine.dat", "p ratio", rows);
    o.record("khintchine", t.to_json());
    out << "alpha " << format_double(t.alpha) << "\n";
}

void cmd_probe_scaling(Manifest& m, const Common& common, std::ostream& out) {
    const ExperimentManifest e = ExperimentManifest::from_manifest(m);
    const auto T_list = parse_list(m.get_string("scaling.T", "0.05,0.1,0.2,0.4,0.8"), "scaling.T");
    const ScalingReport rep = strichartz_T_scaling(e.stat.q, e.stat.r, T_list, e);
    m = e.to_manifest();
    m.set("scaling.T", join(T_list));
    Output o(common, m);
    std::vector<std::pair<double, double>> rows;
    for (const auto& r : rep.rows) rows.emplace_back(r.T, r.c_hat);
    o.dat("scaling.dat", "T c_hat", rows);
    o.record("scaling", rep.to_json());
    out << "slope " << format_double(rep.slope) << " expected " << format_double(rep.expected) << "\n";
}

void cmd_probe_strichartz(Manifest& m, const Common& common, std::ostream& out) {
    ExperimentManifest e = ExperimentManifest::from_manifest(m);
    const Field phi = e.data.generator == "file" ? load_input(m)
                                                 : make_data(make_grid(e.d, e.M, e.L), e.data, build_psi(e.psi_width));
    const bool override_flag = m.get_bool("strichartz.allow_nonadmissible", false);
    const std::size_t frames = m.get_u64("stat.frames", 257);
    e.stat.frames = frames;
    const double ratio = deterministic_strichartz(phi, e.stat.q, e.stat.r, e.stat.T, frames, override_flag);
    m = keep_sections(e.to_manifest(), {"schema", "version", "grid", "psi", "data", "stat"});
    m.set("strichartz.allow_nonadmissible", override_flag);
    Output o(common, m);
    o.record("strichartz", {{"ratio", ratio}, {"q", e.stat.q}, {"r", e.stat.r}, {"T", e.stat.T}});
    out << format_double(ratio) << "\n";
}

void cmd_probe_lp_demo(Manifest& m, const Common& common, std::ostream& out) {
    const double s_decay = m.get_double("lpdemo.s_decay", 0.2);
    const double p = m.get_double("lpdemo.p", 4.0);
    const auto M_values = parse_list(m.get_string("lpdemo.M", "64,128,256,512"), "lpdemo.M");
    std::vector<int> M_list;
    for (double v : M_values) M_list.push_back(static_cast<int>(v));
    LpDemoOptions opt;
    opt.d = static_cast<int>(m.get_int("grid.d", opt.d));
    opt.L = m.get_double("grid.L", opt.L);
    opt.trials = m.get_u64("lpdemo.trials", opt.trials);
    opt.dist = coeff_kind_from_string(m.get_string("dist.kind", to_string(opt.dist)));
    opt.seed = m.get_u64("lpdemo.seed", opt.seed);
    opt.psi_width = m.get_double("psi.width", opt.psi_width);
    const LpDemoReport rep = lp_improvement_demo(s_decay, p, M_list, opt);

    Manifest r;
    r.set("schema", kSchemaVersion);
    r.set("grid.d", opt.d);
    r.set("grid.L", opt.L);
    r.set("psi.width", opt.psi_width);
    r.set("dist.kind", to_string(opt.dist));
    r.set("lpdemo.s_decay", s_decay);
    r.set("lpdemo.p", p);
    r.set("lpdemo.M", join(M_values));
    r.set("lpdemo.trials", static_cast<std::uint64_t>(opt.trials));
    r.set("lpdemo.seed", opt.seed);
    m = r;
    Output o(common, m);
    std::string csv = "M,deterministic,randomized_median\n";
    std::vector<std::pair<double, double>> det, ran;
    for (const auto& row : rep.rows) {
        csv += std::to_string(row.M) + "," + format_double(row.deterministic) + "," +
               format_double(row.randomized_median) + "\n";
        det.emplace_back(row.M, row.deterministic);
        ran.emplace_back(row.M, row.randomized_median);
    }
    o.csv("lpdemo.csv", csv);
    o.dat("lpdemo_deterministic.dat", "M lp_norm", det);
    o.dat("lpdemo_randomized.dat", "M median_lp_norm", ran);
    o.record("lpdemo", rep.to_json());
    out << "deterministic " << format_double(rep.deterministic_exponent) << " randomized "
        << format_double(rep.randomized_exponent) << "\n";
}

struct NlsSetup {
    ExperimentManifest e;
    TorusGrid grid;
    PartitionOfUnity psi;
    Field phi;
    PicardConfig cfg;
    std::uint64_t seed = 0;
};

NlsSetup nls_setup(const Manifest& m) {
    NlsSetup s;
    s.e = ExperimentManifest::from_manifest(m);
    s.grid = make_grid(s.e.d, s.e.M, s.e.L);
    s.psi = build_psi(s.e.psi_width);
    s.phi = make_data(s.grid, s.e.data, s.psi);
    s.cfg = picard_from(m);
    s.seed = m.get_u64("rand.seed", 0);
    return s;
}

Manifest nls_manifest(const NlsSetup& s) {
    Manifest r = keep_sections(s.e.to_manifest(), {"schema", "version", "grid", "psi", "dist", "data"});
    picard_into(r, s.cfg);
    r.set("rand.seed", s.seed);
    return r;
}

void cmd_nls_solve(Manifest& m, const Common& common, std::ostream& out) {
    const NlsSetup s = nls_setup(m);
    const std::uint64_t stream = m.get_u64("rand.stream", 0);
    const bool snapshot = m.get_bool("nls.snapshot", false);
    const RandomDraw draw = sample(CoeffDistribution::make(s.e.dist), CubeIndexSet(s.grid), s.seed, stream);
    const Field omega = randomize(s.phi, draw, s.psi);
    const PicardResult res = picard_solve(omega, s.cfg);
    const Field z_T = propagate(to_frequency(omega), s.cfg.T);

    json record = res.to_json();
    if (res.converged) record["smoothness_gap"] = smoothness_gap(res, z_T, s.cfg.sigma, s.psi).to_json();
    m = nls_manifest(s);
    m.set("rand.stream", stream);
    m.set("nls.snapshot", snapshot);
    Output o(common, m);
    std::vector<std::pair<double, double>> upd, rho;
    for (std::size_t k = 0; k < res.update_norms.size(); ++k) upd.emplace_back(k + 1.0, res.update_norms[k]);
    for (std::size_t k = 0; k < res.rho.size(); ++k) rho.emplace_back(k + 1.0, res.rho[k]);
    o.dat("convergence.dat", "iteration update_norm", upd);
    o.dat("rho.dat", "iteration rho", rho);
    o.dat("spectrum_z.dat", "abs_xi rms_abs_z_hat", radial_spectrum(z_T));
    o.dat("spectrum_v.dat", "abs_xi rms_abs_v_hat", radial_spectrum(res.v.frames.back()));
    if (snapshot) {
        save_field(o.dir() / "z_T.field", to_physical(z_T));
        save_field(o.dir() / "v_T.field", to_physical(res.v.frames.back()));
    }
    o.record("picard", record);
    out << "converged " << (res.converged ? "true" : "false") << " iterations " << res.iterations << " stop "
        << res.stop_reason << " residual " << format_double(res.residual) << "\n";
}

void cmd_nls_sweep(Manifest& m, const Common& common, std::ostream& out) {
    const NlsSetup s = nls_setup(m);
    auto T_list = parse_list(m.get_string("sweep.T", "0.04,0.02,0.01,0.005"), "sweep.T");
    std::sort(T_list.begin(), T_list.end());
    const std::size_t seeds = m.get_u64("sweep.seeds", 50);
    const double gamma = m.get_double("sweep.gamma", 1.0);
    const LwpTable table = lwp_probability(s.phi, CoeffDistribution::make(s.e.dist), s.psi, T_list, seeds, s.seed,
                                           s.cfg, gamma);
    m = nls_manifest(s);
    m.set("sweep.T", join(T_list));
    m.set("sweep.seeds", static_cast<std::uint64_t>(seeds));
    m.set("sweep.gamma", gamma);
    Output o(common, m);
    std::string csv = "T,runs,successes,failure,ci_lo,ci_hi\n";
    std::vector<std::pair<double, double>> rows;
    for (const auto& r : table.rows) {
        csv += format_double(r.T) + "," + std::to_string(r.runs) + "," + std::to_string(r.successes) + "," +
               format_double(r.failure) + "," + format_double(r.ci_lo) + "," + format_double(r.ci_hi) + "\n";
        rows.emplace_back(r.T, r.failure);
    }
    o.csv("sweep.csv", csv);
    o.dat("sweep.dat", "T failure_fraction", rows);
    o.record("sweep", table.to_json());
    for (const auto& r : table.rows) {
        out << "T " << format_double(r.T) << " success " << r.successes << "/" << r.runs << "\n";
    }
}

// ---------------------------------------------------------------------------

json summarize(const json& rec, bool& pass) {
    const std::string kind = rec.value("kind", "");
    pass = true;
    json s{{"kind", kind}};
    auto check = [&](const std::string& name, bool ok) {
        s["checks"][name] = ok;
        pass = pass && ok;
    };
    if (kind == "tail") {
        s["C_hat"] = rec.at("C_hat");
        s["c_hat"] = rec.at("c_hat");
        s["fit_r2"] = rec.at("fit_r2");
        check("fit_r2 > 0.95", rec.at("fit_r2").get<double>() > 0.95);
    } else if (kind == "khintchine") {
        s["alpha"] = rec.at("alpha");
        check("alpha <= 0.55", rec.at("alpha").get<double>() <= 0.55);
    } else if (kind == "scaling") {
        s["slope"] = rec.at("slope");
        s["expected"] = rec.at("expected");
        check("|slope - expected| <= 0.3",
              std::abs(rec.at("slope").get<double>() - rec.at("expected").get<double>()) <= 0.3);
    } else if (kind == "lpdemo") {
        const double gap = rec.at("deterministic_exponent").get<double>() - rec.at("randomized_exponent").get<double>();
        s["exponent_gap"] = gap;
        check("exponent gap >= 0.1", gap >= 0.1);
    } else if (kind == "picard") {
        s["converged"] = rec.at("converged");
        s["iterations"] = rec.at("iterations");
        s["residual"] = rec.at("residual");
        check("converged", rec.at("converged").get<bool>());
        if (rec.at("converged").get<bool>()) check("residual < 1e-6", rec.at("residual").get<double>() < 1e-6);
    } else if (kind == "sweep") {
        json table = json::array();
        for (const auto& r : rec.at("rows")) {
            table.push_back({{"T", r.at("T")},
                             {"success_fraction", 1.0 - r.at("failure").get<double>()},
                             {"runs", r.at("runs")}});
        }
        s["success"] = table;
        check("monotone", rec.at("monotone").get<bool>());
        if (!rec.at("rows").empty()) {
            check("success >= 0.8 at smallest T", 1.0 - rec.at("rows").front().at("failure").get<double>() >= 0.8);
        }
    } else if (kind == "strichartz") {
        s["ratio"] = rec.at("ratio");
    } else if (kind == "norm") {
        s["value"] = rec.at("value");
    }
    return s;
}

int cmd_report(const std::string& dir, bool json_only, std::ostream& out, std::ostream& err) {
    if (!fs::is_directory(dir)) {
        err << "error: report: " << dir << " is not a directory\n";
        return 2;
    }
    std::vector<fs::path> dirs{dir};
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin() + 1, dirs.end());
    json runs = json::array();
    for (const auto& d : dirs) {
        std::vector<fs::path> records;
        for (const auto& entry : fs::directory_iterator(d)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json" &&
                entry.path().filename() != "summary.json") {
                records.push_back(entry.path());
            }
        }
        std::sort(records.begin(), records.end());
        bool found = false;
        for (const auto& p : records) {
            std::ifstream in(p);
            json rec = json::parse(in, nullptr, false);
            if (rec.is_discarded() || !rec.is_object() || !rec.contains("kind") || !rec.contains("schema")) continue;
            found = true;
            bool pass = true;
            json s;
            try {
                s = summarize(rec, pass);
            } catch (const json::exception& e) {
                s = {{"kind", rec.value("kind", "")}, {"partial", true}, {"error", e.what()}};
                pass = false;
            }
            s["dir"] = d.string();
            s["file"] = p.filename().string();
            s["pass"] = pass;
            runs.push_back(s);
        }
        if (!found && fs::exists(d / "manifest.cfg")) {
            runs.push_back({{"dir", d.string()}, {"partial", true}, {"pass", false}});
        }
    }
    if (runs.empty()) {
        err << "no runs found\n";
        return 2;
    }
    const json summary{{"schema", kSchemaVersion}, {"runs", runs}};
    {
        std::ofstream f(fs::path(dir) / "summary.json");
        f << summary.dump(2) << "\n";
    }
    if (json_only) {
        out << summary.dump(2) << "\n";
        return 0;
    }
    out << "dir | kind | pass | details\n";
    for (const auto& r : runs) {
        json details = r;
        for (const char* k : {"dir", "kind", "pass", "file"}) details.erase(k);
        out << r.value("dir", "") << " | " << r.value("kind", "?") << " | " << (r.value("pass", false) ? "pass" : "FAIL")
            << " | " << details.dump() << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"wienerlab: Wiener randomization and cubic NLS experiments"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Command>> commands;
    auto make = [&](CLI::App* parent, const std::string& name, const std::string& help,
                    std::function<void(Manifest&, const Common&, std::ostream&)> handler) -> Command& {
        auto c = std::make_unique<Command>();
        c->app = parent->add_subcommand(name, help);
        c->handler = std::move(handler);
        add_common(*c);
        commands.push_back(std::move(c));
        return *commands.back();
    };

    {
        auto& c = make(&app, "grid-info", "Describe a grid and its cube decomposition", cmd_grid_info);
        add_grid_flags(c);
    }
    {
        auto& c = make(&app, "decompose", "Cube masses of a field", cmd_decompose);
        c.flags.option(c.app, "--in", "data.path", "Field file");
        c.flags.flag(c.app, "--no-decay-check", "data.decay_check", "Accept fields that do not decay at the edge", false);
        c.flags.option(c.app, "--psi-width", "psi.width", "Transition width of the partition of unity");
    }
    {
        auto& c = make(&app, "norm", "Evaluate a norm of a field", cmd_norm);
        c.flags.option(c.app, "--in", "data.path", "Field file");
        c.flags.flag(c.app, "--no-decay-check", "data.decay_check", "Accept fields that do not decay at the edge", false);
        c.flags.option(c.app, "--kind", "norm.kind", "lp | hs | modulation | besov | spacetime | xsb");
        for (const char* k : {"p", "q", "r", "s", "b", "T", "frames"}) {
            c.flags.option(c.app, std::string("--") + k, std::string("norm.") + k, "Norm parameter");
        }
        c.flags.option(c.app, "--psi-width", "psi.width", "Transition width of the partition of unity");
    }
    {
        auto& c = make(&app, "randomize", "Wiener randomization of a given or generated field", cmd_randomize);
        add_grid_flags(c);
        add_data_flags(c);
        c.flags.option(c.app, "--seed", "rand.seed", "Master seed");
        c.flags.option(c.app, "--stream", "rand.stream", "Stream (trial) index");
    }

    CLI::App* probe = app.add_subcommand("probe", "Monte Carlo probes");
    probe->require_subcommand(1);
    auto add_tail_flags = [](Command& c) {
        add_grid_flags(c);
        add_data_flags(c);
        c.flags.option(c.app, "--stat", "stat.kind", "hs | lp | local_strichartz | global_strichartz");
        for (const char* k : {"s", "p", "q", "r", "T", "frames"}) {
            c.flags.option(c.app, std::string("--") + k, std::string("stat.") + k, "Statistic parameter");
        }
        c.flags.option(c.app, "--trials", "probe.trials", "Monte Carlo trials");
        c.flags.option(c.app, "--lambda", "probe.lambda", "auto or start:stop:count");
        c.flags.option(c.app, "--seed", "probe.seed", "Master seed");
    };
    {
        auto& c = make(probe, "tail", "Tail curve of a randomized statistic", cmd_probe_tail);
        add_tail_flags(c);
    }
    {
        auto& c = make(probe, "khintchine", "Moment growth of random sums", cmd_probe_khintchine);
        c.flags.option(c.app, "--dist", "dist.kind", "gaussian | bernoulli | uniform");
        c.flags.option(c.app, "--p", "khintchine.p", "Comma-separated moments");
        c.flags.option(c.app, "--trials", "khintchine.trials", "Monte Carlo trials");
        c.flags.option(c.app, "--ncoef", "khintchine.ncoef", "Number of equal coefficients");
        c.flags.option(c.app, "--seed", "khintchine.seed", "Master seed");
    }
    {
        auto& c = make(probe, "scaling", "Local Strichartz tail constant versus T", cmd_probe_scaling);
        add_tail_flags(c);
        c.flags.option(c.app, "--Ts", "scaling.T", "Comma-separated windows");
    }
    {
        auto& c = make(probe, "strichartz", "Deterministic Strichartz ratio", cmd_probe_strichartz);
        add_grid_flags(c);
        add_data_flags(c);
        for (const char* k : {"q", "r", "T", "frames"}) {
            c.flags.option(c.app, std::string("--") + k, std::string("stat.") + k, "Strichartz parameter");
        }
        c.flags.flag(c.app, "--allow-nonadmissible", "strichartz.allow_nonadmissible", "Skip the admissibility check");
    }
    {
        auto& c = make(probe, "lp-demo", "L^p growth under refinement, deterministic vs randomized", cmd_probe_lp_demo);
        c.flags.option(c.app, "--d", "grid.d", "Dimension");
        c.flags.option(c.app, "--L", "grid.L", "Half extent");
        c.flags.option(c.app, "--psi-width", "psi.width", "Transition width");
        c.flags.option(c.app, "--dist", "dist.kind", "gaussian | bernoulli | uniform");
        c.flags.option(c.app, "--s-decay", "lpdemo.s_decay", "Decay exponent");
        c.flags.option(c.app, "--p", "lpdemo.p", "Lebesgue exponent");
        c.flags.option(c.app, "--Ms", "lpdemo.M", "Comma-separated grid sizes");
        c.flags.option(c.app, "--trials", "lpdemo.trials", "Randomizations per grid");
        c.flags.option(c.app, "--seed", "lpdemo.seed", "Master seed");
    }

    CLI::App* nls = app.add_subcommand("nls", "Cubic NLS with randomized data");
    nls->require_subcommand(1);
    {
        auto& c = make(nls, "solve", "One Picard solve", cmd_nls_solve);
        add_grid_flags(c);
        add_data_flags(c);
        add_picard_flags(c);
        c.flags.option(c.app, "--stream", "rand.stream", "Stream (trial) index");
        c.flags.flag(c.app, "--snapshot", "nls.snapshot", "Write z(T) and v(T) field files");
    }
    {
        auto& c = make(nls, "sweep", "Success fraction versus T", cmd_nls_sweep);
        add_grid_flags(c);
        add_data_flags(c);
        add_picard_flags(c);
        c.flags.option(c.app, "--Ts", "sweep.T", "Comma-separated horizons");
        c.flags.option(c.app, "--seeds", "sweep.seeds", "Seeds per T");
        c.flags.option(c.app, "--gamma", "sweep.gamma", "Exponent of the descriptive fit");
    }

    CLI::App* report = app.add_subcommand("report", "Summarize run directories");
    std::string report_dir;
    bool report_json = false;
    report->add_option("dir", report_dir, "Run directory")->required();
    report->add_flag("--json", report_json, "Print the JSON summary instead of the table");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (report->parsed()) return cmd_report(report_dir, report_json, out, err);
        for (auto& c : commands) {
            if (!c->app->parsed()) continue;
            Manifest m = resolve(*c);
            c->handler(m, c->common, out);
            return 0;
        }
        err << "error: no command\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalFault& e) {
        err << "numerical fault: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "fault: " << e.what() << "\n";
        return 3;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace wienerlab
