#include "wulffflow/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace wf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw Error("config: unknown key '" + path + "." + it.key() + "'");
    }
}

double num(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw Error("config: missing key '" + path + "." + key + "'");
    if (!j[key].is_number()) throw Error("config: '" + path + "." + key + "' must be a number");
    return j[key].get<double>();
}

double num_or(const json& j, const char* key, double def) {
    return j.contains(key) ? j[key].get<double>() : def;
}

AnisoNorm parse_norm(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("family"))
        throw Error("config: '" + path + "' must be an object with a 'family' key");
    std::string fam = j["family"].get<std::string>();
    double rot = num_or(j, "rotation", 0.0);
    if (fam == "euclidean") {
        check_keys(j, {"family"}, path);
        return AnisoNorm::euclidean();
    }
    if (fam == "ellipse") {
        check_keys(j, {"family", "a", "b", "rotation"}, path);
        return AnisoNorm::ellipse(num(j, "a", path), num(j, "b", path), rot);
    }
    if (fam == "fourier") {
        check_keys(j, {"family", "coeffs", "rotation"}, path);
        if (!j.contains("coeffs")) throw Error("config: missing key '" + path + ".coeffs'");
        return AnisoNorm::fourier(j["coeffs"].get<std::vector<double>>(), rot);
    }
    if (fam == "sampled") {
        check_keys(j, {"family", "values", "rotation"}, path);
        if (!j.contains("values")) throw Error("config: missing key '" + path + ".values'");
        return AnisoNorm::sampled(j["values"].get<std::vector<double>>(), rot);
    }
    throw Error("config: '" + path + ".family' must be euclidean|ellipse|fourier|sampled");
}

Vec2 parse_vec(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2)
        throw Error("config: '" + path + "' must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

ShapeSpec parse_shape(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("kind"))
        throw Error("config: '" + path + "' must be an object with a 'kind' key");
    ShapeSpec s;
    s.kind = j["kind"].get<std::string>();
    if (s.kind == "wulff") {
        check_keys(j, {"kind", "center", "area", "radius", "perturbation"}, path);
        if (j.contains("center")) s.center = parse_vec(j["center"], path + ".center");
        s.area = num_or(j, "area", 0.0);
        s.radius = num_or(j, "radius", 0.0);
        if (s.area <= 0.0 && s.radius <= 0.0)
            throw Error("config: '" + path + "' needs a positive area or radius");
        if (j.contains("perturbation")) {
            const json& p = j["perturbation"];
            check_keys(p, {"amplitude", "mode"}, path + ".perturbation");
            s.perturb_amplitude = num(p, "amplitude", path + ".perturbation");
            s.perturb_mode = p.contains("mode") ? p["mode"].get<int>() : 0;
        }
    } else if (s.kind == "ellipse") {
        check_keys(j, {"kind", "center", "a", "b", "rotation"}, path);
        if (j.contains("center")) s.center = parse_vec(j["center"], path + ".center");
        s.a = num(j, "a", path);
        s.b = num(j, "b", path);
        s.rotation = num_or(j, "rotation", 0.0);
    } else if (s.kind == "dumbbell") {
        check_keys(j, {"kind", "center", "radius", "separation", "neck_width"}, path);
        if (j.contains("center")) s.center = parse_vec(j["center"], path + ".center");
        s.radius = num(j, "radius", path);
        s.separation = num(j, "separation", path);
        s.neck_width = num(j, "neck_width", path);
    } else if (s.kind == "polygon") {
        check_keys(j, {"kind", "vertices"}, path);
        if (!j.contains("vertices") || !j["vertices"].is_array() || j["vertices"].size() < 3)
            throw Error("config: '" + path + ".vertices' needs at least 3 points");
        for (std::size_t i = 0; i < j["vertices"].size(); ++i)
            s.vertices.push_back(parse_vec(j["vertices"][i], path + ".vertices"));
    } else if (s.kind == "union") {
        check_keys(j, {"kind", "shapes"}, path);
        if (!j.contains("shapes") || !j["shapes"].is_array() || j["shapes"].empty())
            throw Error("config: '" + path + ".shapes' must be a non-empty array");
        for (std::size_t i = 0; i < j["shapes"].size(); ++i)
            s.parts.push_back(parse_shape(j["shapes"][i], path + ".shapes[" +
                                                              std::to_string(i) + "]"));
    } else {
        throw Error("config: '" + path + ".kind' must be wulff|ellipse|dumbbell|polygon|union");
    }
    return s;
}

std::vector<Vec2> circle_polygon(Vec2 c, double rx, double ry, double rot, int n) {
    std::vector<Vec2> pts;
    pts.reserve(n);
    double cr = std::cos(rot), sr = std::sin(rot);
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * std::numbers::pi * i / n;
        double x = rx * std::cos(th), y = ry * std::sin(th);
        pts.push_back({c.x + cr * x - sr * y, c.y + sr * x + cr * y});
    }
    return pts;
}

void collect_polygons(const ShapeSpec& s, const AnisoNorm& phi, unsigned seed,
                      std::vector<std::vector<Vec2>>& out) {
    if (s.kind == "wulff") {
        double r = s.radius > 0.0 ? s.radius : std::sqrt(s.area / phi.wulff_area());
        if (s.perturb_amplitude > 0.0) {
            const int n = 512;
            std::vector<double> f(n, 0.0);
            if (s.perturb_mode > 0) {
                for (int i = 0; i < n; ++i)
                    f[i] = s.perturb_amplitude *
                           std::cos(s.perturb_mode * 2.0 * std::numbers::pi * i / n);
            } else {
                std::mt19937 rng(seed);
                std::uniform_real_distribution<double> u(-1.0, 1.0);
                std::vector<double> a, b;
                for (int k = 2; k <= 6; ++k) {
                    a.push_back(u(rng));
                    b.push_back(u(rng));
                }
                double sup = 0.0;
                for (int i = 0; i < n; ++i) {
                    double th = 2.0 * std::numbers::pi * i / n, v = 0.0;
                    for (int k = 2; k <= 6; ++k)
                        v += a[k - 2] * std::cos(k * th) + b[k - 2] * std::sin(k * th);
                    f[i] = v;
                    sup = std::max(sup, std::abs(v));
                }
                if (sup > 0.0)
                    for (double& v : f) v *= s.perturb_amplitude / sup;
            }
            out.push_back(normal_perturbation_curve(phi, s.center, r, f));
        } else {
            out.push_back(phi.wulff_polygon(s.center, r, 512));
        }
    } else if (s.kind == "ellipse") {
        out.push_back(circle_polygon(s.center, s.a, s.b, s.rotation, 512));
    } else if (s.kind == "dumbbell") {
        double d = 0.5 * s.separation, w = 0.5 * s.neck_width;
        out.push_back(circle_polygon({s.center.x - d, s.center.y}, s.radius, s.radius, 0.0, 512));
        out.push_back(circle_polygon({s.center.x + d, s.center.y}, s.radius, s.radius, 0.0, 512));
        out.push_back({{s.center.x - d, s.center.y - w},
                       {s.center.x + d, s.center.y - w},
                       {s.center.x + d, s.center.y + w},
                       {s.center.x - d, s.center.y + w}});
    } else if (s.kind == "polygon") {
        out.push_back(s.vertices);
    } else if (s.kind == "union") {
        for (const auto& p : s.parts) collect_polygons(p, phi, seed, out);
    } else {
        throw Error("unknown shape kind '" + s.kind + "'");
    }
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string frame_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.svg", step);
    return buf;
}

void svg_path(std::ostringstream& os, const std::vector<Vec2>& pts) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%c%.6f %.6f ", i == 0 ? 'M' : 'L', pts[i].x, pts[i].y);
        os << buf;
    }
    os << "Z ";
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
    if (!j.is_object()) throw Error("config: root must be an object");
    check_keys(j, {"schema", "norms", "grid", "flow", "shape", "diagnostics", "output_dir",
                   "seed", "fit"},
               "$");
    if (!j.contains("schema") || j["schema"].get<std::string>() != "wulff-flow/1")
        throw Error("config: schema must be \"wulff-flow/1\"");

    ScenarioConfig cfg;

    if (!j.contains("norms")) throw Error("config: missing key '$.norms'");
    check_keys(j["norms"], {"phi", "psi"}, "$.norms");
    if (!j["norms"].contains("phi")) throw Error("config: missing key '$.norms.phi'");
    cfg.phi = parse_norm(j["norms"]["phi"], "$.norms.phi");
    cfg.psi = j["norms"].contains("psi") ? parse_norm(j["norms"]["psi"], "$.norms.psi")
                                         : cfg.phi;

    if (!j.contains("grid")) throw Error("config: missing key '$.grid'");
    const json& g = j["grid"];
    check_keys(g, {"dx", "extent"}, "$.grid");
    double dx = num(g, "dx", "$.grid");
    if (dx <= 0.0) throw Error("config: '$.grid.dx' must be positive");
    if (!g.contains("extent") || !g["extent"].is_array() || g["extent"].size() != 4)
        throw Error("config: '$.grid.extent' must be [x0, y0, x1, y1]");
    double x0 = g["extent"][0].get<double>(), y0 = g["extent"][1].get<double>();
    double x1 = g["extent"][2].get<double>(), y1 = g["extent"][3].get<double>();
    if (x1 <= x0 || y1 <= y0) throw Error("config: '$.grid.extent' is empty");
    cfg.grid.origin = {x0, y0};
    cfg.grid.dx = dx;
    cfg.grid.nx = static_cast<int>(std::lround((x1 - x0) / dx));
    cfg.grid.ny = static_cast<int>(std::lround((y1 - y0) / dx));

    if (!j.contains("flow")) throw Error("config: missing key '$.flow'");
    const json& f = j["flow"];
    check_keys(f,
               {"h", "m", "max_steps", "snapshot_stride", "stencil_order", "lambda_tol",
                "stop", "distance_mode"},
               "$.flow");
    cfg.flow.h = num(f, "h", "$.flow");
    cfg.flow.m = num_or(f, "m", 0.0);  // 0 => measured |E0|
    cfg.flow.max_steps = f.contains("max_steps") ? f["max_steps"].get<int>() : 200;
    cfg.flow.snapshot_stride =
        f.contains("snapshot_stride") ? f["snapshot_stride"].get<int>() : 10;
    cfg.flow.stencil_order = f.contains("stencil_order") ? f["stencil_order"].get<int>() : 16;
    cfg.flow.lambda_tol = num_or(f, "lambda_tol", 0.0);
    if (f.contains("stop")) {
        const json& st = f["stop"];
        check_keys(st, {"enabled", "threshold_factor", "patience", "check_stride"},
                   "$.flow.stop");
        if (st.contains("enabled")) cfg.stop.enabled = st["enabled"].get<bool>();
        cfg.stop.threshold_factor = num_or(st, "threshold_factor", cfg.stop.threshold_factor);
        if (st.contains("patience")) cfg.stop.patience = st["patience"].get<int>();
        if (st.contains("check_stride")) cfg.stop.check_stride = st["check_stride"].get<int>();
    }
    if (f.contains("distance_mode")) {
        std::string md = f["distance_mode"].get<std::string>();
        if (md == "exact") {
            cfg.distance_mode = DistanceMode::Exact;
            cfg.distance_auto = false;
        } else if (md == "fast") {
            cfg.distance_mode = DistanceMode::Fast;
            cfg.distance_auto = false;
        } else if (md == "auto") {
            cfg.distance_auto = true;
        } else {
            throw Error("config: '$.flow.distance_mode' must be exact|fast|auto");
        }
    }
    cfg.flow.phi = cfg.phi;
    cfg.flow.psi = cfg.psi;
    {
        FlowParams probe = cfg.flow;
        if (probe.m <= 0.0) probe.m = 1.0;  // measured later; validate the rest now
        probe.validate(dx);
    }

    if (!j.contains("shape")) throw Error("config: missing key '$.shape'");
    cfg.shape = parse_shape(j["shape"], "$.shape");

    if (j.contains("diagnostics")) {
        const json& d = j["diagnostics"];
        check_keys(d, {"alexandrov", "gauss_bonnet", "reflection", "frames"}, "$.diagnostics");
        if (d.contains("alexandrov")) cfg.diagnostics.alexandrov = d["alexandrov"].get<bool>();
        if (d.contains("gauss_bonnet"))
            cfg.diagnostics.gauss_bonnet = d["gauss_bonnet"].get<bool>();
        if (d.contains("frames")) cfg.diagnostics.frames = d["frames"].get<bool>();
        if (d.contains("reflection")) {
            const json& r = d["reflection"];
            check_keys(r, {"root_m"}, "$.diagnostics.reflection");
            cfg.diagnostics.reflection_root_m = r["root_m"].get<int>();
            if (*cfg.diagnostics.reflection_root_m < 1)
                throw Error("config: '$.diagnostics.reflection.root_m' must be >= 1");
        }
    }

    if (!j.contains("output_dir")) throw Error("config: missing key '$.output_dir'");
    cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<unsigned>();
    if (j.contains("fit")) {
        check_keys(j["fit"], {"window_start_frac"}, "$.fit");
        cfg.fit_window_start_frac = num_or(j["fit"], "window_start_frac", 0.1);
        if (cfg.fit_window_start_frac < 0.0 || cfg.fit_window_start_frac >= 1.0)
            throw Error("config: '$.fit.window_start_frac' must lie in [0, 1)");
    }
    return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("config: cannot open " + path.string());
    json j;
    try {
        is >> j;
    } catch (const std::exception& ex) {
        throw Error("config: invalid JSON in " + path.string() + ": " + ex.what());
    }
    return parse_config(j);
}

GridSet build_initial_shape(const ShapeSpec& shape, const GridSpec& grid, const AnisoNorm& phi,
                            unsigned seed) {
    std::vector<std::vector<Vec2>> polys;
    collect_polygons(shape, phi, seed, polys);
    GridSet out = make_grid_set(grid);
    for (const auto& poly : polys) {
        GridSet part = rasterize({poly}, grid);
        for (std::size_t i = 0; i < out.mask.size(); ++i) out.mask[i] |= part.mask[i];
    }
    return out;
}

RateFit fit_exponential_rate(const std::vector<std::pair<double, double>>& series, double t0,
                             double t1, const std::string& name) {
    RateFit out;
    out.name = name;
    out.t0 = t0;
    out.t1 = t1;
    std::vector<double> t, ly;
    for (const auto& [ti, yi] : series) {
        if (ti < t0 || ti > t1) continue;
        if (yi <= 0.0) throw Error("rate fit: nonpositive value in fit window");
        t.push_back(ti);
        ly.push_back(std::log(yi));
    }
    if (t.size() < 8) throw Error("rate fit: fewer than 8 points in the window");
    const double n = static_cast<double>(t.size());
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += ly[i];
        stt += t[i] * t[i];
        sty += t[i] * ly[i];
    }
    double det = n * stt - st * st;
    if (det <= 0.0) throw Error("rate fit: degenerate time axis");
    double b = (n * sty - st * sy) / det;
    double a = (sy - b * st) / n;
    double ss_res = 0.0, ss_tot = 0.0, mean = sy / n;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double pred = a + b * t[i];
        ss_res += (ly[i] - pred) * (ly[i] - pred);
        ss_tot += (ly[i] - mean) * (ly[i] - mean);
    }
    out.C = std::exp(a);
    out.C0 = b < 0.0 ? -1.0 / b : 0.0;
    out.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    out.accepted = b < 0.0 && out.r2 >= 0.8;
    return out;
}

json rate_fit_json(const RateFit& r) {
    return json{{"name", r.name},   {"C", r.C},   {"C0", r.C0},
                {"r2", r.r2},       {"t0", r.t0}, {"t1", r.t1},
                {"accepted", r.accepted}, {"degenerate", r.degenerate}};
}

json wulff_fit_json(const WulffFit& f) {
    json comps = json::array();
    for (const auto& c : f.components)
        comps.push_back(json{{"center", {c.center.x, c.center.y}},
                             {"r_individual", c.r_individual},
                             {"f_sup", c.f_sup},
                             {"f_c1", c.f_c1},
                             {"star_shaped", c.star_shaped}});
    return json{{"d", f.d}, {"r", f.r}, {"degenerate", f.degenerate}, {"components", comps}};
}

json alexandrov_json(const AlexandrovReport& r) {
    return json{{"eps", r.eps},
                {"d", r.d},
                {"p_phi", r.p_phi},
                {"p_d", r.p_d},
                {"gap", r.gap},
                {"ratio", r.ratio},
                {"kbar_phi", r.kbar_phi},
                {"radii_spread", r.radii_spread},
                {"far_from_critical", r.far_from_critical}};
}

std::vector<fs::path> export_frames(const FlowTrace& trace, const AnisoNorm& phi,
                                    const fs::path& dir, const FrameStyle& style) {
    fs::create_directories(dir);
    std::vector<fs::path> out;
    for (const auto& [step, e] : trace.snapshots) {
        const GridSpec& sp = e.spec;
        double x0 = sp.origin.x, y0 = sp.origin.y;
        double w = sp.nx * sp.dx, hgt = sp.ny * sp.dx;
        std::ostringstream os;
        char head[256];
        std::snprintf(head, sizeof(head),
                      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.6f %.6f %.6f "
                      "%.6f\" width=\"640\" height=\"%d\">\n",
                      x0, y0, w, hgt, static_cast<int>(640 * hgt / w));
        os << head;
        // flip y so the grid's y axis points up in the image
        char grp[128];
        std::snprintf(grp, sizeof(grp), "<g transform=\"translate(0 %.6f) scale(1 -1)\">\n",
                      2.0 * y0 + hgt);
        os << grp;

        auto contours = extract_contours(e);
        if (contours.empty()) {
            os << "<text x=\"" << fmt(x0 + 0.5 * w) << "\" y=\"" << fmt(y0 + 0.5 * hgt)
               << "\" font-size=\"" << fmt(0.05 * w)
               << "\" text-anchor=\"middle\" transform=\"scale(1 -1) translate(0 "
               << fmt(-(2.0 * y0 + hgt)) << ")\">empty set</text>\n";
        } else {
            os << "<path fill-rule=\"evenodd\" fill=\"#9ecae1\" stroke=\"#08306b\" "
                  "stroke-width=\""
               << fmt(0.5 * sp.dx) << "\" d=\"";
            std::ostringstream d;
            for (const auto& c : contours) svg_path(d, c.pts);
            os << d.str() << "\"/>\n";
            if (style.draw_fit) {
                auto fit = fit_wulff_union(contours, phi);
                if (!fit.degenerate)
                    for (const auto& comp : fit.components) {
                        auto poly = phi.wulff_polygon(comp.center, fit.r, 128);
                        std::ostringstream fd;
                        svg_path(fd, poly);
                        os << "<path fill=\"none\" stroke=\"#d94801\" stroke-dasharray=\""
                           << fmt(2.0 * sp.dx) << "\" stroke-width=\"" << fmt(0.5 * sp.dx)
                           << "\" d=\"" << fd.str() << "\"/>\n";
                    }
            }
        }
        double diam = std::hypot(w, hgt);
        for (const auto& hs : style.halfspaces) {
            Vec2 tau{-hs.nu.y, hs.nu.x};
            Vec2 p = hs.s * hs.nu;
            Vec2 a = p + diam * tau, b = p - diam * tau;
            char line[192];
            std::snprintf(line, sizeof(line),
                          "<line x1=\"%.6f\" y1=\"%.6f\" x2=\"%.6f\" y2=\"%.6f\" "
                          "stroke=\"#41ab5d\" stroke-width=\"%.6f\"/>\n",
                          a.x, a.y, b.x, b.y, 0.35 * sp.dx);
            os << line;
        }
        if (!style.overlay_polygon.empty()) {
            std::ostringstream od;
            svg_path(od, style.overlay_polygon);
            os << "<path fill=\"none\" stroke=\"#54278f\" stroke-width=\"" << fmt(0.5 * sp.dx)
               << "\" d=\"" << od.str() << "\"/>\n";
        }
        os << "</g>\n</svg>\n";

        fs::path file = dir / frame_name(step);
        std::ofstream f(file, std::ios::binary);
        f << os.str();
        out.push_back(file);
    }
    return out;
}

std::uint64_t fnv1a_digest(const fs::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw Error("digest: cannot open " + file.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!is) break;
    }
    return h;
}

namespace {

std::string snap_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snap_%06d.wfgrid", step);
    return buf;
}

std::string diag_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "diag_%06d.json", step);
    return buf;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << s;
}

}  // namespace

ScenarioArtifacts run_scenario(const ScenarioConfig& cfg) {
    ScenarioArtifacts art;
    art.dir = cfg.output_dir;
    std::string stage = "setup";
    try {
        fs::create_directories(cfg.output_dir);

        GridSet e0 = build_initial_shape(cfg.shape, cfg.grid, cfg.phi, cfg.seed);
        if (e0.empty_set()) throw Error("initial shape rasterizes to the empty set");

        FlowParams params = cfg.flow;
        if (params.m <= 0.0) params.m = area(e0);
        FlowEngine engine(params, cfg.grid.dx);
        if (!cfg.distance_auto) engine.set_distance_mode(cfg.distance_mode);

        stage = "flow";
        art.trace = engine.run(e0, cfg.stop);

        stage = "trace";
        {
            std::ostringstream csv;
            csv << "step,t,area,perimeter,dissipation,mu,branch,sup_move,eps,lyapunov,"
                   "wall_ms\n";
            for (const auto& r : art.trace.reports) {
                csv << r.step << ',' << fmt(r.step * params.h) << ',' << fmt(r.area) << ','
                    << fmt(r.perimeter) << ',' << fmt(r.dissipation) << ',' << fmt(r.mu) << ','
                    << to_string(r.branch) << ',' << fmt(r.sup_move) << ',' << fmt(r.eps)
                    << ',' << fmt(r.lyapunov) << ',' << fmt(r.wall_ms) << '\n';
            }
            fs::path p = cfg.output_dir / "trace.csv";
            write_text(p, csv.str());
            art.files.push_back(p);
        }

        stage = "snapshots";
        for (const auto& [step, e] : art.trace.snapshots) {
            fs::path p = cfg.output_dir / snap_name(step);
            save_grid_file(e, p.string());
            art.files.push_back(p);
        }

        stage = "diagnostics";
        std::vector<HalfSpace> family;
        if (cfg.diagnostics.reflection_root_m) {
            DirectionSet p = root_system(*cfg.diagnostics.reflection_root_m);
            for (const auto& nu : p.dirs) family.push_back({nu, cfg.shape.center.dot(nu)});
        }
        for (const auto& [step, e] : art.trace.snapshots) {
            json diag;
            diag["step"] = step;
            auto contours = extract_contours(e);
            if (cfg.diagnostics.alexandrov && !contours.empty())
                diag["alexandrov"] =
                    alexandrov_json(alexandrov_report(contours, cfg.phi, params.m,
                                                      15.0 * cfg.grid.dx));
            if (cfg.diagnostics.gauss_bonnet) {
                json gb = json::array();
                double w2 = 2.0 * cfg.phi.wulff_area();
                for (const auto& c : contours) {
                    double val = gauss_bonnet(c, cfg.phi, 15.0 * cfg.grid.dx);
                    int winding = c.outer ? 1 : -1;
                    gb.push_back(json{{"outer", c.outer},
                                      {"integral", val},
                                      {"expected", w2 * winding}});
                }
                diag["gauss_bonnet"] = gb;
            }
            if (!family.empty()) {
                json fam = json::array();
                for (const auto& hs : family) {
                    auto chk = check_star_H(e, hs);
                    fam.push_back(json{{"nu", {hs.nu.x, hs.nu.y}},
                                       {"s", hs.s},
                                       {"violation", chk.violation_area},
                                       {"strict", chk.strict},
                                       {"holds", chk.holds}});
                }
                diag["reflection"] = json{{"step", step}, {"family", fam}};
            }
            fs::path p = cfg.output_dir / diag_name(step);
            write_text(p, diag.dump(2) + "\n");
            art.files.push_back(p);
        }

        stage = "fit";
        auto final_contours = extract_contours(art.trace.final_state);
        if (!final_contours.empty()) art.final_fit = fit_wulff_union(final_contours, cfg.phi);
        {
            fs::path p = cfg.output_dir / "final_fit.json";
            write_text(p, wulff_fit_json(art.final_fit).dump(2) + "\n");
            art.files.push_back(p);
        }

        stage = "rate";
        art.rate.name = "sup_dist_to_fit";
        if (art.final_fit.d == 0 || art.final_fit.degenerate) {
            art.rate.degenerate = true;
        } else {
            std::vector<std::vector<Vec2>> fit_polys;
            for (const auto& comp : art.final_fit.components)
                fit_polys.push_back(cfg.phi.wulff_polygon(comp.center, art.final_fit.r, 512));
            GridSet fit_set = make_grid_set(cfg.grid);
            for (const auto& poly : fit_polys) {
                GridSet part = rasterize({poly}, cfg.grid);
                for (std::size_t i = 0; i < fit_set.mask.size(); ++i)
                    fit_set.mask[i] |= part.mask[i];
            }
            std::vector<std::pair<double, double>> series;
            double floor = 0.0;
            for (const auto& [step, e] : art.trace.snapshots) {
                double y = hausdorff_sup_distance(e, fit_set, cfg.psi);
                series.emplace_back(step * params.h, y);
                floor = std::max(floor, y);
            }
            if (series.size() < 8 || floor <= cfg.grid.dx) {
                art.rate.degenerate = true;  // stationary at grid scale
            } else {
                double T = series.back().first;
                try {
                    art.rate = fit_exponential_rate(series, cfg.fit_window_start_frac * T, T,
                                                    "sup_dist_to_fit");
                } catch (const Error&) {
                    art.rate.degenerate = true;
                }
            }
        }
        {
            fs::path p = cfg.output_dir / "rate_fit.json";
            write_text(p, rate_fit_json(art.rate).dump(2) + "\n");
            art.files.push_back(p);
        }

        if (cfg.diagnostics.frames) {
            stage = "frames";
            FrameStyle style;
            style.halfspaces = family;
            auto frames = export_frames(art.trace, cfg.phi, cfg.output_dir, style);
            art.files.insert(art.files.end(), frames.begin(), frames.end());
        }
        art.ok = true;
    } catch (const std::exception& ex) {
        art.ok = false;
        art.failure_stage = stage;
        art.error_message = ex.what();
    }

    json manifest;
    manifest["schema"] = "wulff-flow/1";
    manifest["status"] = art.ok ? "ok" : "failed";
    if (!art.ok) {
        manifest["failure_stage"] = art.failure_stage;
        manifest["error"] = art.error_message;
    }
    json files = json::array();
    for (const auto& p : art.files) {
        char dig[24];
        std::snprintf(dig, sizeof(dig), "%016llx",
                      static_cast<unsigned long long>(fnv1a_digest(p)));
        files.push_back(json{{"path", p.filename().string()}, {"fnv1a", dig}});
    }
    manifest["files"] = files;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (!ec) {
        write_text(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
        art.files.push_back(cfg.output_dir / "manifest.json");
    }
    return art;
}

int worker_count(std::size_t jobs) {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned cap = hw;
    if (const char* env = std::getenv("WULFF_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) cap = static_cast<unsigned>(v);
    }
    return static_cast<int>(std::min<std::size_t>(jobs, std::min(hw, cap)));
}

std::vector<ScenarioArtifacts> run_scenarios(const std::vector<ScenarioConfig>& cfgs) {
    std::vector<ScenarioArtifacts> out(cfgs.size());
    if (cfgs.empty()) return out;
    int workers = worker_count(cfgs.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < cfgs.size(); ++i) out[i] = run_scenario(cfgs[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < cfgs.size(); i = next.fetch_add(1))
                out[i] = run_scenario(cfgs[i]);
        });
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace wf
