#include <cmath>
#include <cstdio>
#include <numbers>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wulffflow/contour.hpp"
#include "wulffflow/scenario.hpp"
#include "wulffflow/symmetry.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAssert = 2;

// norm specs are JSON, given inline or as @file
json load_spec(const std::string& arg) {
    std::string text = arg;
    if (!arg.empty() && arg[0] == '@') {
        std::ifstream is(arg.substr(1));
        if (!is) throw wf::Error("cannot open " + arg.substr(1));
        std::ostringstream ss;
        ss << is.rdbuf();
        text = ss.str();
    } else if (!arg.empty() && arg[0] != '{') {
        std::ifstream is(arg);
        if (is) {
            std::ostringstream ss;
            ss << is.rdbuf();
            text = ss.str();
        }
    }
    return json::parse(text);
}

wf::AnisoNorm norm_from_spec(const std::string& arg) {
    json j = load_spec(arg);
    json wrapped{{"schema", "wulff-flow/1"},
                 {"norms", {{"phi", j}}},
                 {"grid", {{"dx", 0.01}, {"extent", {0, 0, 1, 1}}}},
                 {"flow", {{"h", 0.04}, {"m", 1.0}}},
                 {"shape", {{"kind", "wulff"}, {"radius", 1.0}}},
                 {"output_dir", "."}};
    return wf::parse_config(wrapped).phi;
}

int cmd_wulff(const std::string& spec) {
    wf::AnisoNorm phi = norm_from_spec(spec);
    wf::EllipticityData el = phi.ellipticity_bounds();  // throws when non-elliptic
    json out;
    out["norm"] = phi.describe();
    out["wulff_area"] = phi.wulff_area();
    out["L_phi"] = el.L_phi;
    out["Lambda_phi"] = el.Lambda_phi;
    json poly = json::array();
    for (const auto& p : phi.wulff_polygon({0.0, 0.0}, 1.0, 64))
        poly.push_back(json::array({p.x, p.y}));
    out["polygon"] = poly;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_simulate(const std::string& path) {
    wf::ScenarioConfig cfg = wf::load_config(path);
    wf::ScenarioArtifacts art = wf::run_scenario(cfg);
    if (!art.ok) {
        std::cerr << "simulate failed at stage '" << art.failure_stage
                  << "': " << art.error_message << "\n";
        return kExitError;
    }
    json out;
    out["steps"] = art.trace.reports.size();
    out["stopped_early"] = art.trace.stopped_early;
    out["final_area"] = art.trace.reports.empty() ? 0.0 : art.trace.reports.back().area;
    out["final_fit"] = wf::wulff_fit_json(art.final_fit);
    out["rate_fit"] = wf::rate_fit_json(art.rate);
    out["output_dir"] = art.dir.string();
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_diagnose(const std::string& snapshot, const std::string& phi_spec, double mass) {
    wf::GridSet e = wf::load_grid_file(snapshot);
    wf::AnisoNorm phi =
        phi_spec.empty() ? wf::AnisoNorm::euclidean() : norm_from_spec(phi_spec);
    double m = mass > 0.0 ? mass : wf::area(e);
    json out;
    out["cells"] = e.count();
    out["area"] = wf::area(e);
    auto contours = wf::extract_contours(e);
    out["contours"] = contours.size();
    if (!contours.empty()) {
        out["alexandrov"] =
            wf::alexandrov_json(wf::alexandrov_report(contours, phi, m, 3.0 * e.spec.dx));
        out["fit"] = wf::wulff_fit_json(wf::fit_wulff_union(contours, phi));
        json gb = json::array();
        for (const auto& c : contours)
            gb.push_back(json{{"outer", c.outer},
                              {"integral", wf::gauss_bonnet(c, phi, 3.0 * e.spec.dx)},
                              {"expected", 2.0 * phi.wulff_area() * (c.outer ? 1 : -1)}});
        out["gauss_bonnet"] = gb;
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_alexandrov_sweep(const std::string& path, std::vector<double> amplitudes) {
    wf::ScenarioConfig cfg = wf::load_config(path);
    if (cfg.shape.kind != "wulff")
        throw wf::Error("alexandrov-sweep: config shape must be 'wulff'");
    if (amplitudes.empty()) amplitudes = {0.02, 0.04, 0.08, 0.16};
    double r = cfg.shape.radius > 0.0 ? cfg.shape.radius
                                      : std::sqrt(cfg.shape.area / cfg.phi.wulff_area());
    int mode = cfg.shape.perturb_mode > 0 ? cfg.shape.perturb_mode : 3;

    struct Row {
        double amp, eps, gap, ratio;
    };
    std::vector<Row> rows(amplitudes.size());
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        const int n = 1024;
        std::vector<double> f(n);
        for (int k = 0; k < n; ++k)
            f[k] = amplitudes[i] * r * std::cos(mode * 2.0 * std::numbers::pi * k / n);
        auto pts = wf::normal_perturbation_curve(cfg.phi, cfg.shape.center, r, f);
        auto c = wf::contour_from_points(std::move(pts));
        double m = std::abs(c.signed_area());
        auto rep = wf::alexandrov_report({c}, cfg.phi, m, 0.02 * r);
        rows[i] = {amplitudes[i], rep.eps, rep.gap, rep.ratio};
    }
    std::printf("# amplitude  eps  gap  ratio  log_eps  log_gap\n");
    for (const auto& row : rows)
        std::printf("%.6g %.8g %.8g %.8g %.8g %.8g\n", row.amp, row.eps, row.gap, row.ratio,
                    std::log(row.eps), std::log(row.gap));
    // slope of log gap vs log eps across the sweep
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : rows) {
        double x = std::log(row.eps), y = std::log(row.gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(rows.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    std::printf("# slope %.6f\n", slope);
    return kExitOk;
}

int cmd_reflection_check(const std::string& path) {
    wf::ScenarioConfig cfg = wf::load_config(path);
    if (!cfg.diagnostics.reflection_root_m)
        throw wf::Error("reflection-check: config needs diagnostics.reflection.root_m");
    wf::GridSet e0 = wf::build_initial_shape(cfg.shape, cfg.grid, cfg.phi, cfg.seed);
    wf::FlowParams params = cfg.flow;
    if (params.m <= 0.0) params.m = wf::area(e0);
    wf::FlowEngine engine(params, cfg.grid.dx);
    if (!cfg.distance_auto) engine.set_distance_mode(cfg.distance_mode);
    wf::FlowTrace trace = engine.run(e0, cfg.stop);

    std::vector<wf::HalfSpace> family;
    for (const auto& nu : wf::root_system(*cfg.diagnostics.reflection_root_m).dirs)
        family.push_back({nu, cfg.shape.center.dot(nu)});
    auto series = wf::monitor_reflection(trace, family);
    bool all_hold = true;
    std::printf("# step  max_violation  holds\n");
    for (const auto& s : series) {
        std::printf("%d %.8g %d\n", s.step, s.max_violation, s.all_hold ? 1 : 0);
        all_hold = all_hold && s.all_hold;
    }
    std::printf("# reflection %s\n", all_hold ? "preserved" : "violated");
    return all_hold ? kExitOk : kExitAssert;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic area-preserving flat-flow toolkit"};
    app.require_subcommand(1);

    std::string sim_config;
    auto* sim = app.add_subcommand("simulate", "run a scenario config end to end");
    sim->add_option("config", sim_config, "scenario JSON")->required();

    std::string diag_snapshot, diag_phi;
    double diag_mass = 0.0;
    auto* diag = app.add_subcommand("diagnose", "analyze a WFGRID1 snapshot");
    diag->add_option("snapshot", diag_snapshot, "snapshot file")->required();
    diag->add_option("--phi", diag_phi, "surface-tension norm spec (JSON or @file)");
    diag->add_option("--mass", diag_mass, "target mass for the Alexandrov gap");

    std::string wulff_spec;
    auto* wcmd = app.add_subcommand("wulff", "print Wulff data for a norm spec");
    wcmd->add_option("norm-spec", wulff_spec, "norm spec (JSON or @file)")->required();

    std::string sweep_config;
    std::vector<double> sweep_amps;
    auto* sweep = app.add_subcommand("alexandrov-sweep",
                                     "perturbation-amplitude sweep (log-log table)");
    sweep->add_option("config", sweep_config, "scenario JSON with a wulff shape")->required();
    sweep->add_option("--amplitudes", sweep_amps, "relative amplitudes");

    std::string refl_config;
    auto* refl = app.add_subcommand("reflection-check", "run a flow and monitor (*)_H");
    refl->add_option("config", refl_config, "scenario JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_config);
        if (diag->parsed()) return cmd_diagnose(diag_snapshot, diag_phi, diag_mass);
        if (wcmd->parsed()) {
            try {
                return cmd_wulff(wulff_spec);
            } catch (const wf::Error& ex) {
                std::string msg = ex.what();
                if (msg.find("elliptic") != std::string::npos) {
                    std::cerr << "error: " << msg << "\n";
                    return kExitAssert;
                }
                throw;
            }
        }
        if (sweep->parsed()) return cmd_alexandrov_sweep(sweep_config, sweep_amps);
        if (refl->parsed()) return cmd_reflection_check(refl_config);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
