#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wienerlab/cli.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/nls.hpp"
#include "wienerlab/norms.hpp"
#include "wienerlab/probe.hpp"
#include "wienerlab/randomize.hpp"
#include "wienerlab/spectral.hpp"

namespace py = pybind11;
using namespace wienerlab;

namespace {

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

Field field_from(const CArray& a, double L) {
    const int d = static_cast<int>(a.ndim());
    if (d < 1) throw ValidationError("array: need at least one dimension");
    const auto M = a.shape(0);
    for (int ax = 1; ax < d; ++ax) {
        if (a.shape(ax) != M) throw ValidationError("array: all axes must have the same length");
    }
    const TorusGrid g = make_grid(d, static_cast<int>(M), L);
    Field f(g, Space::physical);
    const Complex* src = a.data();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = src[i];
    return f;
}

CArray array_from(const Field& field) {
    const Field f = to_physical(field);
    const int d = f.grid().dim();
    std::vector<py::ssize_t> shape(static_cast<std::size_t>(d), f.grid().points());
    CArray out(shape);
    Complex* dst = out.mutable_data();
    for (std::size_t i = 0; i < f.size(); ++i) dst[i] = f[i];
    return out;
}

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bindings to the wienerlab C++ core";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalFault>(m, "NumericalFault", PyExc_ArithmeticError);

    m.attr("__version__") = kCodeVersion;

    m.def("grid_info", [](int d, int M, double L, double psi_width) {
        const TorusGrid g = make_grid(d, M, L);
        const PartitionOfUnity psi = build_psi(psi_width);
        const CubeIndexSet cubes(g);
        py::dict info;
        info["dx"] = g.dx();
        info["frequency_spacing"] = g.frequency_spacing();
        info["nyquist"] = g.nyquist();
        info["cube_nmax"] = cubes.nmax();
        info["cubes"] = cubes.size();
        info["band_edge"] = cubes.band_edge(psi);
        return info;
    }, py::arg("d"), py::arg("M"), py::arg("L"), py::arg("psi_width") = 0.25);

    m.def("coordinates", [](int M, double L) {
        const TorusGrid g = make_grid(1, M, L);
        std::vector<double> x(static_cast<std::size_t>(M));
        for (int j = 0; j < M; ++j) x[static_cast<std::size_t>(j)] = g.x(j);
        return x;
    }, py::arg("M"), py::arg("L"));

    m.def("gaussian", [](int d, int M, double L, double width, double amplitude) {
        return array_from(make_gaussian(make_grid(d, M, L), width, amplitude));
    }, py::arg("d"), py::arg("M"), py::arg("L"), py::arg("width") = 1.0, py::arg("amplitude") = 1.0);

    m.def("rough_data", [](int d, int M, double L, double s_decay, std::uint64_t seed, bool aligned,
                           double localize_radius, double l2, double psi_width) {
        RoughDataSpec spec;
        spec.s_decay = s_decay;
        spec.seed = seed;
        spec.aligned_phases = aligned;
        spec.localize_radius = localize_radius;
        spec.l2_norm = l2;
        return array_from(make_rough_data(make_grid(d, M, L), spec, build_psi(psi_width)));
    }, py::arg("d"), py::arg("M"), py::arg("L"), py::arg("s_decay") = 0.8, py::arg("seed") = 0,
       py::arg("aligned") = false, py::arg("localize_radius") = 0.0, py::arg("l2_norm") = 0.0,
       py::arg("psi_width") = 0.25);

    m.def("randomize", [](const CArray& phi, double L, std::uint64_t seed, std::uint64_t stream,
                          const std::string& dist, double psi_width) {
        const Field f = field_from(phi, L);
        const PartitionOfUnity psi = build_psi(psi_width);
        const RandomDraw draw =
            sample(CoeffDistribution::make(coeff_kind_from_string(dist)), CubeIndexSet(f.grid()), seed, stream);
        return array_from(randomize(f, draw, psi));
    }, py::arg("phi"), py::arg("L"), py::arg("seed") = 0, py::arg("stream") = 0, py::arg("dist") = "gaussian",
       py::arg("psi_width") = 0.25);

    m.def("propagate", [](const CArray& u, double L, double t) { return array_from(propagate(field_from(u, L), t)); },
          py::arg("u"), py::arg("L"), py::arg("t"));

    m.def("lp_norm", [](const CArray& u, double L, double p) { return lp_norm(field_from(u, L), p); },
          py::arg("u"), py::arg("L"), py::arg("p"));
    m.def("sobolev_norm", [](const CArray& u, double L, double s) { return sobolev_norm(field_from(u, L), s); },
          py::arg("u"), py::arg("L"), py::arg("s"));
    m.def("modulation_norm", [](const CArray& u, double L, double p, double q, double s, double psi_width) {
        return modulation_norm(field_from(u, L), p, q, s, build_psi(psi_width));
    }, py::arg("u"), py::arg("L"), py::arg("p"), py::arg("q"), py::arg("s"), py::arg("psi_width") = 0.25);

    m.def("picard_solve", [](const CArray& phi, double L, double T, std::size_t steps, const std::string& sign,
                             double sigma, double tol) {
        PicardConfig cfg;
        cfg.T = T;
        cfg.steps = steps;
        cfg.sign = sign_from_string(sign);
        cfg.sigma = sigma;
        cfg.tol = tol;
        const Field f = field_from(phi, L);
        PicardResult r;
        {
            py::gil_scoped_release release;
            r = picard_solve(f, cfg);
        }
        py::dict out = to_python(r.to_json());
        out["v_T"] = array_from(r.v.frames.back());
        return out;
    }, py::arg("phi"), py::arg("L"), py::arg("T") = 0.01, py::arg("steps") = 128, py::arg("sign") = "defocusing",
       py::arg("sigma") = 1.1, py::arg("tol") = 1e-10);

    m.def("tail_experiment", [](const std::string& manifest_text) {
        const ExperimentManifest e = ExperimentManifest::from_manifest(Manifest::parse(manifest_text));
        TailCurve c;
        {
            py::gil_scoped_release release;
            c = tail_experiment(e.stat, e);
        }
        py::dict out = to_python(c.to_json());
        out["lambda"] = c.lambda;
        out["exceed"] = c.exceed;
        out["ci_lo"] = c.ci_lo;
        out["ci_hi"] = c.ci_hi;
        return out;
    }, py::arg("manifest"));

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));
}
