#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wulffflow/contour.hpp"
#include "wulffflow/scenario.hpp"
#include "wulffflow/symmetry.hpp"

namespace py = pybind11;
using namespace wf;

namespace {

AnisoNorm norm_from_dict(const py::dict& d) {
    std::string fam = py::cast<std::string>(d["family"]);
    double rot = d.contains("rotation") ? py::cast<double>(d["rotation"]) : 0.0;
    if (fam == "euclidean") return AnisoNorm::euclidean();
    if (fam == "ellipse")
        return AnisoNorm::ellipse(py::cast<double>(d["a"]), py::cast<double>(d["b"]), rot);
    if (fam == "fourier")
        return AnisoNorm::fourier(py::cast<std::vector<double>>(d["coeffs"]), rot);
    if (fam == "sampled")
        return AnisoNorm::sampled(py::cast<std::vector<double>>(d["values"]), rot);
    throw Error("unknown norm family '" + fam + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "anisotropic area-preserving flat flow on a grid";

    py::register_exception<Error>(m, "WulffError");

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<>())
        .def(py::init([](double x, double y) { return Vec2{x, y}; }))
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("norm", &Vec2::norm)
        .def("__repr__", [](const Vec2& v) {
            return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")";
        });

    py::class_<GammaJet>(m, "GammaJet")
        .def_readonly("g", &GammaJet::g)
        .def_readonly("dg", &GammaJet::dg)
        .def_readonly("ddg", &GammaJet::ddg);

    py::class_<EllipticityData>(m, "EllipticityData")
        .def_readonly("L_phi", &EllipticityData::L_phi)
        .def_readonly("Lambda_phi", &EllipticityData::Lambda_phi);

    py::class_<AnisoNorm>(m, "AnisoNorm")
        .def_static("euclidean", &AnisoNorm::euclidean)
        .def_static("ellipse", &AnisoNorm::ellipse, py::arg("a"), py::arg("b"),
                    py::arg("rotation") = 0.0)
        .def_static("fourier", &AnisoNorm::fourier, py::arg("coeffs"),
                    py::arg("rotation") = 0.0)
        .def_static("sampled", &AnisoNorm::sampled, py::arg("values"),
                    py::arg("rotation") = 0.0)
        .def_static("from_dict", &norm_from_dict)
        .def("gamma", &AnisoNorm::gamma)
        .def("gamma_jet", &AnisoNorm::gamma_jet)
        .def("eval", [](const AnisoNorm& n, double x, double y) { return n.eval({x, y}); })
        .def("dual", [](const AnisoNorm& n, double x, double y) { return n.dual({x, y}); })
        .def("cahn_hoffman", &AnisoNorm::cahn_hoffman)
        .def("wulff_polygon",
             [](const AnisoNorm& n, double cx, double cy, double r, int k) {
                 std::vector<std::pair<double, double>> out;
                 for (const auto& p : n.wulff_polygon({cx, cy}, r, k))
                     out.emplace_back(p.x, p.y);
                 return out;
             },
             py::arg("cx") = 0.0, py::arg("cy") = 0.0, py::arg("r") = 1.0,
             py::arg("n") = 128)
        .def("wulff_area", &AnisoNorm::wulff_area)
        .def("ellipticity_bounds", &AnisoNorm::ellipticity_bounds)
        .def("is_elliptic", &AnisoNorm::is_elliptic)
        .def("describe", &AnisoNorm::describe);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](double x0, double y0, double dx, int nx, int ny) {
                 return GridSpec{{x0, y0}, dx, nx, ny};
             }),
             py::arg("x0"), py::arg("y0"), py::arg("dx"), py::arg("nx"), py::arg("ny"))
        .def_readonly("dx", &GridSpec::dx)
        .def_readonly("nx", &GridSpec::nx)
        .def_readonly("ny", &GridSpec::ny);

    py::class_<GridSet>(m, "GridSet")
        .def_readonly("spec", &GridSet::spec)
        .def("count", &GridSet::count)
        .def("at", &GridSet::at)
        .def("area", [](const GridSet& e) { return area(e); });

    m.def("rasterize",
          [](const std::vector<std::vector<std::pair<double, double>>>& polys,
             const GridSpec& spec) {
              std::vector<std::vector<Vec2>> ps;
              for (const auto& poly : polys) {
                  std::vector<Vec2> q;
                  for (const auto& [x, y] : poly) q.push_back({x, y});
                  ps.push_back(std::move(q));
              }
              return rasterize(ps, spec);
          });
    m.def("sym_diff_area", &sym_diff_area);
    m.def("anisotropic_perimeter",
          [](const GridSet& e, const AnisoNorm& phi, int order) {
              return anisotropic_perimeter(e, perimeter_weights(phi, order));
          },
          py::arg("e"), py::arg("phi"), py::arg("order") = 16);
    m.def("save_grid", [](const GridSet& e, const std::string& p) { save_grid_file(e, p); });
    m.def("load_grid", [](const std::string& p) { return load_grid_file(p); });

    py::enum_<VolumeBranch>(m, "VolumeBranch")
        .value("Interior", VolumeBranch::Interior)
        .value("Under", VolumeBranch::Under)
        .value("Over", VolumeBranch::Over)
        .value("Pinned", VolumeBranch::Pinned);

    py::class_<StepReport>(m, "StepReport")
        .def_readonly("step", &StepReport::step)
        .def_readonly("perimeter", &StepReport::perimeter)
        .def_readonly("area", &StepReport::area)
        .def_readonly("dissipation", &StepReport::dissipation)
        .def_readonly("mu", &StepReport::mu)
        .def_readonly("branch", &StepReport::branch)
        .def_readonly("sup_move", &StepReport::sup_move)
        .def_readonly("eps", &StepReport::eps)
        .def_readonly("lyapunov", &StepReport::lyapunov);

    py::class_<FlowTrace>(m, "FlowTrace")
        .def_readonly("reports", &FlowTrace::reports)
        .def_readonly("final_state", &FlowTrace::final_state)
        .def_readonly("stopped_early", &FlowTrace::stopped_early);

    m.def("run_flow",
          [](const GridSet& e0, const AnisoNorm& phi, const AnisoNorm& psi, double h,
             double m_target, int max_steps, int snapshot_stride) {
              FlowParams p;
              p.phi = phi;
              p.psi = psi;
              p.h = h;
              p.m = m_target > 0.0 ? m_target : area(e0);
              p.max_steps = max_steps;
              p.snapshot_stride = snapshot_stride;
              FlowEngine engine(p, e0.spec.dx);
              return engine.run(e0);
          },
          py::arg("e0"), py::arg("phi"), py::arg("psi"), py::arg("h"), py::arg("m") = 0.0,
          py::arg("max_steps") = 50, py::arg("snapshot_stride") = 10);

    py::class_<WulffComponentFit>(m, "WulffComponentFit")
        .def_property_readonly("center",
                               [](const WulffComponentFit& c) {
                                   return std::make_pair(c.center.x, c.center.y);
                               })
        .def_readonly("r_individual", &WulffComponentFit::r_individual)
        .def_readonly("f_sup", &WulffComponentFit::f_sup)
        .def_readonly("star_shaped", &WulffComponentFit::star_shaped);

    py::class_<WulffFit>(m, "WulffFit")
        .def_readonly("d", &WulffFit::d)
        .def_readonly("r", &WulffFit::r)
        .def_readonly("degenerate", &WulffFit::degenerate)
        .def_readonly("components", &WulffFit::components);

    py::class_<AlexandrovReport>(m, "AlexandrovReport")
        .def_readonly("eps", &AlexandrovReport::eps)
        .def_readonly("d", &AlexandrovReport::d)
        .def_readonly("p_phi", &AlexandrovReport::p_phi)
        .def_readonly("p_d", &AlexandrovReport::p_d)
        .def_readonly("gap", &AlexandrovReport::gap)
        .def_readonly("ratio", &AlexandrovReport::ratio);

    m.def("fit_wulff", [](const GridSet& e, const AnisoNorm& phi) {
        return fit_wulff_union(extract_contours(e), phi);
    });
    m.def("alexandrov_report",
          [](const GridSet& e, const AnisoNorm& phi, double m_target) {
              return alexandrov_report(e, phi, m_target);
          });

    m.def("run_scenario_file", [](const std::filesystem::path& config) {
        ScenarioArtifacts art = run_scenario(load_config(config));
        py::dict d;
        d["ok"] = art.ok;
        d["failure_stage"] = art.failure_stage;
        d["error"] = art.error_message;
        d["steps"] = art.trace.reports.size();
        d["fit_d"] = art.final_fit.d;
        d["output_dir"] = art.dir.string();
        return d;
    });
}
