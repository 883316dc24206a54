#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "vdlab/calculus.hpp"
#include "vdlab/config.hpp"
#include "vdlab/dirac.hpp"
#include "vdlab/error.hpp"
#include "vdlab/kgops.hpp"
#include "vdlab/manufactured.hpp"
#include "vdlab/runner.hpp"
#include "vdlab/vacuum.hpp"

namespace py = pybind11;
using namespace vdlab;

namespace {

std::vector<py::ssize_t> shape_of(const SpacetimeGrid& g) {
    std::vector<py::ssize_t> s;
    for (std::size_t a = 0; a < g.dim(); ++a) s.push_back(static_cast<py::ssize_t>(g.points(a)));
    return s;
}

template <class T>
py::array_t<T> to_array(const Field<T>& f) {
    py::array_t<T> out(shape_of(f.grid()));
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

RealField from_array(const SpacetimeGrid& g, const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                     const char* what) {
    if (static_cast<std::size_t>(a.size()) != g.size()) {
        throw InvalidArgument(std::string(what) + " has " + std::to_string(a.size()) + " samples, grid has " +
                              std::to_string(g.size()));
    }
    return RealField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

StencilOrder order_from(int order) {
    if (order == 2) return StencilOrder::second;
    if (order == 4) return StencilOrder::fourth;
    throw InvalidArgument("order must be 2 or 4");
}

py::dict residual_dict(const Residual& r) {
    py::dict d;
    d["abs"] = r.abs;
    d["scale"] = r.scale;
    d["relative"] = r.relative();
    return d;
}

py::dict shift_dict(const PolarCalculus& calc) {
    const auto sr = kg::shift_residual(calc);
    py::dict d;
    d["box"] = residual_dict(sr.box);
    d["gradient_minus"] = residual_dict(sr.gradient_minus);
    d["gradient_plus"] = residual_dict(sr.gradient_plus);
    d["phase_identity"] = residual_dict(phase_identity_residual(calc));
    return d;
}

py::object json_loads(const nlohmann::ordered_json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "vdlab native core";
    m.attr("__version__") = runner::kVersion;

    const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<SingularDomain>(m, "SingularDomain", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<SpacetimeGrid>(m, "Grid")
        .def_static(
            "lorentzian_1p1",
            [](double t_lo, double t_hi, std::size_t nt, double x_lo, double x_hi, std::size_t nx,
               const std::string& boundary) {
                return SpacetimeGrid::lorentzian_1p1(t_lo, t_hi, nt, x_lo, x_hi, nx, boundary_from_string(boundary));
            },
            py::arg("t_lo"), py::arg("t_hi"), py::arg("nt"), py::arg("x_lo"), py::arg("x_hi"), py::arg("nx"),
            py::arg("boundary") = "periodic")
        .def_property_readonly("shape", &shape_of)
        .def_property_readonly("size", &SpacetimeGrid::size)
        .def_property_readonly("signature", &SpacetimeGrid::signature)
        .def("spacing", &SpacetimeGrid::spacing, py::arg("axis"))
        .def("coordinates",
             [](const SpacetimeGrid& g, std::size_t a) {
                 std::vector<double> c(g.points(a));
                 for (std::size_t i = 0; i < c.size(); ++i) c[i] = g.coordinate(a, i);
                 return py::array_t<double>(static_cast<py::ssize_t>(c.size()), c.data());
             },
             py::arg("axis"))
        .def("refined", &SpacetimeGrid::refined, py::arg("levels"));

    m.def(
        "manufactured_fields",
        [](std::uint64_t seed, const SpacetimeGrid& g, int smoothness, double hbar, double mass) {
            const auto mf = generate_manufactured_fields(seed, g, smoothness, hbar, mass);
            py::dict d;
            d["rho"] = to_array(mf.polar.rho());
            d["S"] = to_array(mf.polar.S());
            d["winding"] = mf.polar.winding();
            return d;
        },
        py::arg("seed"), py::arg("grid"), py::arg("smoothness") = 2, py::arg("hbar") = 1.0, py::arg("mass") = 1.0);

    m.def(
        "manufactured_shift_residual",
        [](std::uint64_t seed, const SpacetimeGrid& g, int smoothness, bool analytic, int order) {
            const auto mf = generate_manufactured_fields(seed, g, smoothness);
            const auto o = order_from(order);
            return shift_dict(analytic ? PolarCalculus::analytic(mf.polar, mf.pack, o)
                                       : PolarCalculus::stencil(mf.polar, o));
        },
        py::arg("seed"), py::arg("grid"), py::arg("smoothness") = 2, py::arg("analytic") = false,
        py::arg("order") = 2);

    m.def(
        "shift_residual",
        [](const SpacetimeGrid& g, const py::array_t<double, py::array::c_style | py::array::forcecast>& rho,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& S, double hbar, double mass,
           std::vector<int> winding, int order) {
            const PolarDecomposition p(from_array(g, rho, "rho"), from_array(g, S, "S"), hbar, mass,
                                       std::move(winding));
            return shift_dict(PolarCalculus::stencil(p, order_from(order)));
        },
        py::arg("grid"), py::arg("rho"), py::arg("S"), py::arg("hbar") = 1.0, py::arg("mass") = 1.0,
        py::arg("winding") = std::vector<int>{}, py::arg("order") = 2);

    m.def(
        "solve_lambda_static",
        [](double sigma, double mass, double hbar, double lambda0, double x0, double lo, double hi,
           std::size_t points) {
            const auto g = SpacetimeGrid::lorentzian_1p1(0.0, 1.0, 5, lo, hi, points, Boundary::one_sided);
            vacuum::StaticSolveOptions o;
            o.domain_lo = lo;
            o.domain_hi = hi;
            const auto v = vacuum::solve_lambda_static_1d(g, vacuum::LogDensityProfile::gaussian(sigma),
                                                          {mass, hbar, lambda0, x0}, o);
            std::vector<double> x(points), lam(points), exact(points);
            for (std::size_t i = 0; i < points; ++i) {
                x[i] = g.coordinate(1, i);
                lam[i] = v.lambda[i];
                exact[i] = vacuum::gaussian_lambda_exact(x[i], sigma, mass, hbar, x0, lambda0);
            }
            py::dict d;
            d["x"] = py::array_t<double>(static_cast<py::ssize_t>(points), x.data());
            d["lambda"] = py::array_t<double>(static_cast<py::ssize_t>(points), lam.data());
            d["lambda_exact"] = py::array_t<double>(static_cast<py::ssize_t>(points), exact.data());
            return d;
        },
        py::arg("sigma") = 1.0, py::arg("mass") = 1.0, py::arg("hbar") = 1.0, py::arg("lambda0") = 1.0,
        py::arg("x0") = 1.5, py::arg("domain_lo") = 1.2, py::arg("domain_hi") = 3.0, py::arg("points") = 181);

    m.def(
        "gamma_matrices",
        [](int dim) {
            if (dim != 2 && dim != 4) throw InvalidArgument("dim must be 2 or 4");
            const auto rep = dirac::build_gamma(static_cast<dirac::Dim>(dim));
            std::vector<Eigen::MatrixXcd> out;
            for (std::size_t mu = 0; mu < rep.count(); ++mu) out.push_back(rep[mu]);
            return out;
        },
        py::arg("dim") = 2);

    m.def(
        "dispersion",
        [](double k, double mass, double vacuum_mass) {
            const auto p = dirac::plane_wave_dispersion(k, mass, vacuum_mass);
            return py::make_tuple(p.numeric, p.closed);
        },
        py::arg("k"), py::arg("mass"), py::arg("vacuum_mass"));

    m.def(
        "experiments",
        [] {
            std::vector<std::string> out;
            for (auto e : runner::all_experiments()) out.emplace_back(runner::to_string(e));
            return out;
        });

    m.def("config_schema", [] {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& k : runner::config_schema()) out.emplace_back(k.name, k.default_value, k.help);
        return out;
    });

    m.def(
        "config_echo",
        [](const std::string& text, const std::vector<std::string>& overrides) {
            return runner::parse_config(text, "<string>", overrides).echo;
        },
        py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{});

    m.def(
        "run_experiment",
        [](const std::string& name, const std::string& text, const std::vector<std::string>& overrides) {
            const auto cfg = runner::parse_config(text, "<string>", overrides);
            std::vector<runner::ExperimentResult> rs;
            {
                py::gil_scoped_release release;
                rs.push_back(runner::run_experiment(cfg, runner::experiment_from_string(name)));
            }
            auto report = runner::build_report(cfg, rs);
            auto tables = nlohmann::ordered_json::object();
            for (const auto& t : rs.front().tables) {
                auto rows = nlohmann::ordered_json::array();
                for (const auto& row : t.rows) {
                    auto r = nlohmann::ordered_json::array();
                    for (const auto& c : row) std::visit([&](const auto& v) { r.push_back(v); }, c);
                    rows.push_back(r);
                }
                tables[t.name] = {{"columns", t.columns}, {"rows", rows}};
            }
            report["table_data"] = tables;
            return json_loads(report);
        },
        py::arg("name"), py::arg("config_text") = "", py::arg("overrides") = std::vector<std::string>{});

    m.def(
        "run",
        [](const std::string& config_path, const std::string& out_dir, const std::vector<std::string>& overrides) {
            auto cfg = runner::load_config(config_path, overrides);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            std::ostringstream log;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = runner::run(cfg, log).exit_code;
            }
            return py::make_tuple(code, log.str());
        },
        py::arg("config_path"), py::arg("out_dir") = "", py::arg("overrides") = std::vector<std::string>{});
}
