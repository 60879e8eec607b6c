// Acceptance gate: one line per criterion, exit 0 iff all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/contour.hpp"
#include "wulffflow/grid.hpp"
#include "wulffflow/scenario.hpp"
#include "wulffflow/stepper.hpp"
#include "wulffflow/symmetry.hpp"

using namespace wf;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Criterion {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<Criterion> g_results;

double now_s() {
    using clk = std::chrono::steady_clock;
    static const auto t0 = clk::now();
    return std::chrono::duration<double>(clk::now() - t0).count();
}

template <typename F>
void criterion(int id, const std::string& name, F&& body) {
    Criterion c;
    c.id = id;
    c.name = name;
    const double t0 = now_s();
    try {
        body(c);
    } catch (const std::exception& ex) {
        c.pass = false;
        c.detail = std::string("exception: ") + ex.what();
    }
    c.seconds = now_s() - t0;
    std::fprintf(stderr, "  [%2d] %-24s %s (%.1fs)\n", id, name.c_str(),
                 c.pass ? "pass" : "FAIL", c.seconds);
    g_results.push_back(std::move(c));
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

GridSpec sym_grid(double dx, int hx, int hy) {
    // cell centers symmetric about the origin (nx = 2*hx)
    return {{-hx * dx, -hy * dx}, dx, 2 * hx, 2 * hy};
}

std::vector<Vec2> circle_pts(Vec2 c, double rx, double ry, double rot, int n) {
    std::vector<Vec2> pts(n);
    const double cr = std::cos(rot), sr = std::sin(rot);
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * i / n;
        const double x = rx * std::cos(t), y = ry * std::sin(t);
        pts[i] = {c.x + cr * x - sr * y, c.y + sr * x + cr * y};
    }
    return pts;
}

struct LogFit {
    double slope = 0.0, r2 = 0.0;
};

LogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    LogFit f;
    const double vxy = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
    f.slope = vxy / vx;
    f.r2 = (vy > 0) ? vxy * vxy / (vx * vy) : 1.0;
    return f;
}

// ---- shared flow runs ----------------------------------------------------

struct RunBundle {
    std::string name;
    FlowTrace trace;
    GridSet e0;
    double dx = 0.0;
};

FlowTrace run_flow(const GridSet& e0, const AnisoNorm& phi, const AnisoNorm& psi, double h,
                   int steps, int stride, bool stop_enabled, double* dx_out = nullptr) {
    FlowParams p;
    p.h = h;
    p.m = area(e0);
    p.phi = phi;
    p.psi = psi;
    p.max_steps = steps;
    p.snapshot_stride = stride;
    p.compute_eps = false;
    FlowEngine eng(p, e0.spec.dx);
    StopCriteria stop;
    stop.enabled = stop_enabled;
    if (dx_out) *dx_out = e0.spec.dx;
    return eng.run(e0, stop);
}

GridSet dumbbell_set(const GridSpec& g, double radius, double separation, double neck,
                     Vec2 center = {0, 0}) {
    ShapeSpec s;
    s.kind = "dumbbell";
    s.center = center;
    s.radius = radius;
    s.separation = separation;
    s.neck_width = neck;
    return build_initial_shape(s, g, AnisoNorm::euclidean(), 0);
}

// volume-control stats over a trace
struct VolStats {
    double frac_over = 0.0;
    double terminal_rel = 0.0;
};

VolStats vol_stats(const FlowTrace& tr, double lambda_tol) {
    VolStats v;
    int over = 0;
    for (const auto& r : tr.reports)
        if (r.area_gap > lambda_tol) ++over;
    v.frac_over = tr.reports.empty() ? 0.0 : double(over) / tr.reports.size();
    if (!tr.reports.empty())
        v.terminal_rel = std::abs(tr.reports.back().area - tr.m) / tr.m;
    return v;
}

}  // namespace

int main() {
    std::setbuf(stdout, nullptr);

    // ---- 1: isoperimetric equality --------------------------------------
    criterion(1, "isoperimetric", [](Criterion& c) {
        const std::vector<AnisoNorm> norms = {
            AnisoNorm::euclidean(),
            AnisoNorm::ellipse(1.5, 1.0),
            AnisoNorm::ellipse(2.0, 1.0),
            AnisoNorm::fourier({1.0, 0.2}),
            AnisoNorm::fourier({1.0, 0.05, 0.03}),
        };
        const double dx = 1.0 / 200.0, r = 0.7;
        double worst = 0.0;
        for (const auto& phi : norms) {
            const auto st = perimeter_weights(phi, 16);
            auto poly = phi.wulff_polygon({0, 0}, r, 2048);
            double ext = 0.0;
            for (auto p : poly) ext = std::max({ext, std::abs(p.x), std::abs(p.y)});
            const int hx = static_cast<int>(std::ceil((ext + 0.1) / dx));
            GridSpec gs = sym_grid(dx, hx, hx);
            GridSet e = rasterize({poly}, gs);
            const double p = anisotropic_perimeter(e, st);
            const double target = 2.0 * r * phi.wulff_area();
            worst = std::max(worst, std::abs(p - target) / target);
        }
        c.pass = worst <= 0.02;
        c.detail = fmt("max |P_phi - 2|W||/2|W| = %.4f over 5 norms at dx=1/200, k=16 (tol 0.02)",
                       worst);
    });

    // ---- 2: anisotropic Gauss-Bonnet ------------------------------------
    criterion(2, "gauss-bonnet", [](Criterion& c) {
        const std::vector<AnisoNorm> norms = {
            AnisoNorm::euclidean(),
            AnisoNorm::ellipse(1.5, 1.0),
            AnisoNorm::fourier({1.0, 0.1}),
        };
        const int n = 2048;
        double worst = 0.0;
        for (const auto& phi : norms) {
            const double target = 2.0 * phi.wulff_area();
            std::vector<Contour> curves;
            curves.push_back(contour_from_points(circle_pts({0, 0}, 0.4, 0.4, 0, n)));
            curves.push_back(contour_from_points(circle_pts({0.3, -0.2}, 0.7, 0.7, 0, n)));
            curves.push_back(contour_from_points(circle_pts({-0.5, 0.4}, 1.1, 1.1, 0, n)));
            curves.push_back(contour_from_points(circle_pts({0, 0}, 0.8, 0.5, 0, n)));
            curves.push_back(contour_from_points(circle_pts({0.2, 0.1}, 1.0, 0.6, 0.3, n)));
            curves.push_back(contour_from_points(circle_pts({-0.1, 0}, 1.2, 0.9, 1.0, n)));
            for (double eps : {0.05, 0.08, 0.12, 0.16}) {
                std::vector<double> f(n);
                for (int i = 0; i < n; ++i) f[i] = eps * std::cos(3.0 * 2.0 * kPi * i / n);
                curves.push_back(
                    contour_from_points(normal_perturbation_curve(phi, {0, 0}, 0.8, f)));
            }
            for (const auto& cv : curves) {
                const double gb = gauss_bonnet(cv, phi, 0.01);
                worst = std::max(worst, std::abs(gb - target) / target);
            }
        }
        c.pass = worst <= 0.02;
        c.detail = fmt("max rel error of contour integral of kappa^phi dP vs 2|W| = %.4f "
                       "on 10 curves x 3 norms (tol 0.02)", worst);
    });

    // ---- 3: exact area identity -----------------------------------------
    criterion(3, "area-identity", [](Criterion& c) {
        const AnisoNorm phi = AnisoNorm::fourier({1.0, 0.2});
        const int n = 4096;
        std::vector<double> f1(n), f2(n);
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * kPi * i / n;
            f1[i] = 0.05 * std::cos(3.0 * t);
            f2[i] = 0.5 * f1[i];
        }
        const auto a1 = area_expansion_check(f1, phi);
        const auto a2 = area_expansion_check(f2, phi);
        const double res = std::max(std::abs(a1.area_residual), std::abs(a2.area_residual));
        const double ratio = a1.perimeter_defect / a2.perimeter_defect;
        c.pass = res <= 1e-8 && ratio >= 3.2 && ratio <= 4.8;
        c.detail = fmt("area residual %.2e (tol 1e-8); defect ratio on f-halving %.3f "
                       "(4.0 +/- 20%%)", res, ratio);
    });

    // ---- 4: Alexandrov quadratic exponent -------------------------------
    criterion(4, "alexandrov-exponent", [](Criterion& c) {
        const AnisoNorm phi = AnisoNorm::fourier({1.0, 0.1});
        const int n = 4096;
        std::vector<double> xs, ys;
        for (double e0 : {0.02, 0.04, 0.08, 0.16}) {
            std::vector<double> f(n);
            for (int i = 0; i < n; ++i) f[i] = e0 * std::cos(3.0 * 2.0 * kPi * i / n);
            auto cv = contour_from_points(normal_perturbation_curve(phi, {0, 0}, 1.0, f));
            const double m = cv.signed_area();
            auto rep = alexandrov_report({cv}, phi, m, 0.01);
            xs.push_back(rep.eps);
            ys.push_back(rep.gap);
        }
        const auto fit = loglog_fit(xs, ys);
        c.pass = std::abs(fit.slope - 2.0) <= 0.15 && fit.r2 >= 0.98;
        c.detail = fmt("log-log slope of |P_phi - P_1| vs ||kappa^phi - kbar||_L2: %.3f "
                       "(2.0 +/- 0.15), R^2 = %.4f (>= 0.98)", fit.slope, fit.r2);
    });

    // ---- long flow runs (shared between criteria 5-13) -------------------
    std::vector<std::pair<std::string, VolStats>> vol_runs;
    double vol_lambda_tol = 0.0;

    // 500-step dumbbell, generic sub-cell offset so area plateaus stay small
    std::fprintf(stderr, "  running 500-step dumbbell...\n");
    RunBundle dumb500;
    {
        const double dx = 1.0 / 64.0;
        GridSpec g = sym_grid(dx, 135, 90);
        dumb500.name = "dumbbell-500";
        dumb500.dx = dx;
        dumb500.e0 = dumbbell_set(g, 0.75, 1.5, 0.2, {0.31 * dx, 0.17 * dx});
        dumb500.trace = run_flow(dumb500.e0, AnisoNorm::euclidean(), AnisoNorm::euclidean(),
                                 1.0 / 16.0, 500, 25, false);
        vol_lambda_tol = dx * dx;
        vol_runs.push_back({dumb500.name, vol_stats(dumb500.trace, dx * dx)});
    }

    // ---- 5: per-step dissipation inequality ------------------------------
    criterion(5, "dissipation", [&](Criterion& c) {
        const double dx = dumb500.dx, h = dumb500.trace.h;
        // lambda tolerance actually achieved at a step: the nominal dx^2 when
        // the multiplier search hits it, else the plateau gap it reports
        const auto& reps = dumb500.trace.reports;
        double diss_sum = 0.0, worst_excess = 0.0, budget_sum = 0.0;
        bool per_step = true;
        for (size_t k = 0; k < reps.size(); ++k) {
            const double gap_prev = k ? reps[k - 1].area_gap : 0.0;
            const double budget = (std::max(dx * dx, reps[k].area_gap) +
                                   std::max(dx * dx, gap_prev)) / std::sqrt(h);
            per_step = per_step && reps[k].slack <= budget;
            worst_excess = std::max(worst_excess, reps[k].slack - budget);
            budget_sum += budget;
            diss_sum += reps[k].dissipation / h;
        }
        const double iterated =
            dumb500.trace.initial_lyapunov + budget_sum -
            (reps.back().lyapunov + diss_sum);
        c.pass = per_step && iterated >= 0.0;
        c.detail = fmt("per-step slack <= 2 max(lambda_tol, achieved gap)/sqrt(h) over %zu "
                       "steps (worst excess %.2e); iterated margin %.3f >= 0",
                       reps.size(), worst_excess, iterated);
    });

    // Wulff stationary run, 200 steps, anisotropic norm
    std::fprintf(stderr, "  running 200-step Wulff stationary...\n");
    RunBundle stat200;
    {
        const double dx = 1.0 / 64.0;
        const AnisoNorm phi = AnisoNorm::ellipse(1.3, 1.0);
        GridSpec g = sym_grid(dx, 64, 64);
        stat200.name = "wulff-stationary-200";
        stat200.dx = dx;
        stat200.e0 = rasterize({phi.wulff_polygon({0, 0}, 0.55, 1024)}, g);
        stat200.trace = run_flow(stat200.e0, phi, phi, 1.0 / 16.0, 200, 20, false);
        vol_runs.push_back({stat200.name, vol_stats(stat200.trace, dx * dx)});
    }

    // ---- 10: stationarity -------------------------------------------------
    criterion(10, "wulff-stationarity", [&](Criterion& c) {
        const double sd = sym_diff_area(stat200.trace.final_state, stat200.e0);
        const double bound = 4.0 * stat200.dx * stat200.trace.initial_perimeter;
        c.pass = !stat200.trace.vanished && sd <= bound;
        c.detail = fmt("sym-diff after 200 steps %.4f <= 4 dx P_phi = %.4f", sd, bound);
    });

    // h sweep: stationary calibration + perturbed runs at h0, h0/2, h0/4
    std::fprintf(stderr, "  running h sweep...\n");
    std::vector<double> sweep_h = {0.25, 0.125, 0.0625};
    std::vector<double> cal_ratio, run_ratio;
    std::vector<FlowTrace> sweep_traces;
    {
        const double dx = 1.0 / 64.0;
        GridSpec g = sym_grid(dx, 88, 88);
        const AnisoNorm eu = AnisoNorm::euclidean();
        ShapeSpec pert;
        pert.kind = "wulff";
        pert.radius = 1.0;
        pert.perturb_amplitude = 0.12;
        pert.perturb_mode = 3;
        GridSet pset = build_initial_shape(pert, g, eu, 7);
        GridSet ball = rasterize({eu.wulff_polygon({0, 0}, 1.0, 1024)}, g);
        for (double h : sweep_h) {
            FlowParams p;
            p.h = h;
            p.phi = p.psi = eu;
            p.compute_eps = false;
            p.snapshot_stride = 1;

            p.m = area(ball);
            p.max_steps = 25;
            FlowEngine cal(p, dx);
            StopCriteria off;
            off.enabled = false;
            cal.run(ball, off);
            cal_ratio.push_back(std::max(cal.max_sup_move_ratio(), dx / std::sqrt(h)));

            p.m = area(pset);
            p.max_steps = 40;
            FlowEngine eng(p, dx);
            sweep_traces.push_back(eng.run(pset, off));
            run_ratio.push_back(eng.max_sup_move_ratio());
            vol_runs.push_back({fmt("perturbed-h=%.4f", h),
                                vol_stats(sweep_traces.back(), dx * dx)});
        }
    }

    // ---- 7: L-infinity step estimate --------------------------------------
    criterion(7, "linf-step", [&](Criterion& c) {
        double worst = 0.0;
        for (size_t i = 0; i < sweep_h.size(); ++i)
            worst = std::max(worst, run_ratio[i] / cal_ratio[i]);
        c.pass = worst <= 10.0;
        c.detail = fmt("max_h (sup d^psi / sqrt(h)) / calibration = %.2f <= 10 across "
                       "h in {1/4, 1/8, 1/16}", worst);
    });

    // ---- 8: Hoelder continuity in time ------------------------------------
    criterion(8, "holder-in-time", [&](Criterion& c) {
        std::vector<double> consts;
        for (size_t k = 0; k < sweep_traces.size(); ++k) {
            const auto& tr = sweep_traces[k];
            const double h = sweep_h[k];
            const double p0 = tr.initial_perimeter;
            double cmax = 0.0;
            for (size_t i = 0; i < tr.snapshots.size(); ++i)
                for (size_t j = i + 1; j < tr.snapshots.size(); ++j) {
                    const double dt = h * (tr.snapshots[j].first - tr.snapshots[i].first);
                    const double sd =
                        sym_diff_area(tr.snapshots[i].second, tr.snapshots[j].second);
                    cmax = std::max(cmax, sd / (p0 * std::sqrt(std::max(h, dt))));
                }
            consts.push_back(cmax);
        }
        bool ok = true;
        double worst = 1.0;
        for (size_t k = 0; k + 1 < consts.size(); ++k) {
            const double r = consts[k + 1] / consts[k];
            worst = std::max(worst, std::max(r, 1.0 / r));
            ok = ok && r <= 2.0 && r >= 0.5;
        }
        c.pass = ok;
        c.detail = fmt("Hoelder constants %.3f / %.3f / %.3f over h-halving, "
                       "max ratio %.2f <= 2", consts[0], consts[1], consts[2], worst);
    });

    // merge scenario: three overlapping balls -> single Wulff shape
    std::fprintf(stderr, "  running merge scenario...\n");
    RunBundle merge;
    std::vector<Vec2> merge_d = {{-0.21, 0.0}, {0.24, 0.036}, {0.0, 0.228}};
    {
        const double dx = 1.0 / 64.0;
        GridSpec g = sym_grid(dx, 70, 70);
        std::vector<std::vector<Vec2>> polys;
        for (auto d : merge_d)
            polys.push_back(circle_pts(d, 0.45, 0.45, 0, 512));
        GridSet e0 = rasterize({polys[0]}, g);
        for (int k = 1; k < 3; ++k) {
            GridSet part = rasterize({polys[k]}, g);
            for (size_t i = 0; i < e0.mask.size(); ++i)
                e0.mask[i] = e0.mask[i] | part.mask[i];
        }
        merge.name = "merge-3balls";
        merge.dx = dx;
        merge.e0 = e0;
        merge.trace = run_flow(e0, AnisoNorm::euclidean(), AnisoNorm::euclidean(),
                               1.0 / 16.0, 150, 10, true);
        vol_runs.push_back({merge.name, vol_stats(merge.trace, dx * dx)});
    }

    // ---- 12: containment --------------------------------------------------
    criterion(12, "containment", [&](Criterion& c) {
        const AnisoNorm eu = AnisoNorm::euclidean();
        auto contours = extract_contours(merge.trace.final_state);
        auto fit = fit_wulff_union(contours, eu);
        auto bound = containment_bound(merge_d, merge.trace.m, eu);
        bool inside = !fit.degenerate && fit.d >= 1;
        double worst = 0.0;
        for (const auto& comp : fit.components) {
            auto poly = eu.wulff_polygon(comp.center, comp.r_individual, 256);
            for (auto p : poly)
                if (!point_in_convex(bound, p, 2.0 * merge.dx)) inside = false;
        }
        (void)worst;
        c.pass = inside;
        c.detail = fmt("fitted union (d=%d) inside containment_bound(D, m, phi) "
                       "dilated by 2 dx", fit.d);
    });

    // ---- 13: single-Wulff criterion ---------------------------------------
    criterion(13, "single-wulff", [&](Criterion& c) {
        // closed form for the unit-area square, euclidean norm
        std::vector<Vec2> sq = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
        const double alpha_exact = 2.0 / std::sqrt(kPi);
        const double t = std::sqrt(alpha_exact * alpha_exact + 1.0) + alpha_exact;
        const double thr_exact = 2.0 * t * t;
        auto sw = single_wulff_criterion(sq, AnisoNorm::euclidean(), thr_exact * 1.01);
        const bool square_ok =
            std::abs(sw.alpha - alpha_exact) <= 1e-6 * alpha_exact &&
            std::abs(sw.threshold - thr_exact) <= 1e-6 * thr_exact && sw.satisfied;

        // a scenario satisfying the criterion converges to d = 1
        auto crit = single_wulff_criterion(merge_d, AnisoNorm::euclidean(), merge.trace.m);
        auto fit = fit_wulff_union(extract_contours(merge.trace.final_state),
                                   AnisoNorm::euclidean());
        c.pass = square_ok && crit.satisfied && fit.d == 1;
        c.detail = fmt("square alpha %.7f vs %.7f, threshold %.7f vs %.7f (6 digits); "
                       "satisfied scenario (m=%.3f > %.3f) ended d=%d",
                       sw.alpha, alpha_exact, sw.threshold, thr_exact, merge.trace.m,
                       crit.threshold, fit.d);
    });

    // dumbbell convergence runs at dx = 1/128
    auto dumbbell_converge = [&](const AnisoNorm& phi, const char* tag, RunBundle& out) {
        std::fprintf(stderr, "  running dumbbell convergence (%s)...\n", tag);
        const double dx = 1.0 / 128.0;
        GridSpec g = sym_grid(dx, 186, 122);
        out.name = fmt("dumbbell-%s", tag);
        out.dx = dx;
        out.e0 = dumbbell_set(g, 0.5, 1.5, 0.08);
        out.trace = run_flow(out.e0, phi, phi, 1.0 / 32.0, 200, 5, true);
        vol_runs.push_back({out.name, vol_stats(out.trace, dx * dx)});
    };

    RunBundle db_e, db_a;
    const AnisoNorm db_phi_a = AnisoNorm::ellipse(1.3, 1.0);
    double db_e_secs = 0.0, db_a_secs = 0.0;
    {
        double t0 = now_s();
        dumbbell_converge(AnisoNorm::euclidean(), "euclid", db_e);
        db_e_secs = now_s() - t0;
        t0 = now_s();
        dumbbell_converge(db_phi_a, "ellipse", db_a);
        db_a_secs = now_s() - t0;
    }

    // ---- 9: convergence to Wulff unions -----------------------------------
    criterion(9, "wulff-union-convergence", [&](Criterion& c) {
        std::string parts;
        bool ok = true;
        for (auto* rb : {&db_e, &db_a}) {
            const AnisoNorm& phi = (rb == &db_e) ? AnisoNorm::euclidean() : db_phi_a;
            auto fit = fit_wulff_union(extract_contours(rb->trace.final_state), phi);
            double fsup = 0.0, rlo = 1e30, rhi = 0.0;
            for (const auto& comp : fit.components) {
                fsup = std::max(fsup, comp.f_sup);
                rlo = std::min(rlo, comp.r_individual);
                rhi = std::max(rhi, comp.r_individual);
            }
            const double rspread = (rhi - rlo) / fit.r;

            // sup-distance decay to the fitted union, post-transient window
            std::vector<std::vector<Vec2>> polys;
            for (const auto& comp : fit.components)
                polys.push_back(phi.wulff_polygon(comp.center, comp.r_individual, 512));
            GridSet fitset = rasterize(polys, rb->e0.spec);
            std::vector<std::pair<double, double>> series;
            for (const auto& [step, e] : rb->trace.snapshots) {
                const double y = hausdorff_sup_distance(e, fitset, phi);
                if (y > rb->dx / 4.0) series.push_back({step * rb->trace.h, y});
            }
            // fit the decaying segment: from the post-peak drop below half the
            // maximum down to the grid-resolution floor
            size_t peak = 0;
            for (size_t i = 1; i < series.size(); ++i)
                if (series[i].second > series[peak].second) peak = i;
            size_t lo = peak;
            while (lo < series.size() && series[lo].second > 0.5 * series[peak].second) ++lo;
            size_t hi_i = lo;
            while (hi_i < series.size() && series[hi_i].second > 4.0 * rb->dx) ++hi_i;
            while (hi_i - lo < 8 && hi_i < series.size()) ++hi_i;
            lo = std::min(lo, series.size() > 8 ? series.size() - 8 : 0);
            RateFit rf = fit_exponential_rate(series, series[lo].first,
                                              series[hi_i - 1].first, rb->name);

            const bool this_ok = fit.d == 2 && fsup <= 5.0 * rb->dx && rspread <= 0.02 &&
                                 rf.r2 >= 0.9 && rf.C < 0;
            ok = ok && this_ok;
            parts += fmt("%s[d=%d fsup=%.1fdx dr=%.3f R2=%.2f] ", rb->name.c_str(), fit.d,
                         fsup / rb->dx, rspread, rf.r2);
        }
        ok = ok && db_e_secs < 300.0 && db_a_secs < 300.0;
        c.pass = ok;
        c.detail = parts + fmt("runtimes %.0fs/%.0fs < 300s", db_e_secs, db_a_secs);
    });

    // ---- 11: reflection preservation --------------------------------------
    criterion(11, "reflection", [&](Criterion& c) {
        auto family = halfspace_family({{0.0, 0.0}}, root_system(2));
        auto series = monitor_reflection(db_e.trace, family);
        bool holds = !series.empty();
        double max_v = 0.0;
        for (const auto& e : series) {
            holds = holds && e.all_hold;
            max_v = std::max(max_v, e.max_violation);
        }
        const double bound = 4.0 * db_e.dx * db_e.trace.initial_perimeter;

        // asymmetric negative control: two unequal disjoint balls
        const double dx = 1.0 / 64.0;
        GridSpec g = sym_grid(dx, 80, 55);
        GridSet neg = rasterize({circle_pts({-0.5, 0.0}, 0.55, 0.55, 0, 512),
                                 circle_pts({0.45, 0.0}, 0.35, 0.35, 0, 512)},
                                g);
        FlowTrace ntr = run_flow(neg, AnisoNorm::euclidean(), AnisoNorm::euclidean(),
                                 1.0 / 16.0, 8, 2, false);
        auto nfam = halfspace_family({{0.0, 0.0}}, root_system(2));
        auto nser = monitor_reflection(ntr, nfam);
        bool neg_violates = false;
        for (const auto& e : nser) neg_violates = neg_violates || !e.all_hold;

        c.pass = holds && max_v <= bound && neg_violates;
        c.detail = fmt("symmetric dumbbell max violation %.4f <= 4 dx P = %.4f over %zu "
                       "snapshots; asymmetric control violates: %s", max_v, bound,
                       series.size(), neg_violates ? "yes" : "no");
    });

    // ---- 6: volume control -------------------------------------------------
    criterion(6, "volume-control", [&](Criterion& c) {
        bool ok = true;
        double worst_frac = 0.0, worst_term = 0.0;
        for (const auto& [name, v] : vol_runs) {
            std::fprintf(stderr, "      vol %-20s frac_over=%.3f terminal=%.5f\n",
                         name.c_str(), v.frac_over, v.terminal_rel);
            worst_frac = std::max(worst_frac, v.frac_over);
            worst_term = std::max(worst_term, v.terminal_rel);
            ok = ok && v.frac_over <= 0.05 && v.terminal_rel <= 0.01;
        }
        c.pass = ok;
        c.detail = fmt("over %zu runs: max fraction of steps with area gap > lambda_tol "
                       "= %.3f (<= 0.05), max terminal |area-m|/m = %.4f (<= 0.01)",
                       vol_runs.size(), worst_frac, worst_term);
        (void)vol_lambda_tol;
    });

    // ---- 14: duality -------------------------------------------------------
    criterion(14, "duality", [](Criterion& c) {
        std::vector<AnisoNorm> norms = {
            AnisoNorm::euclidean(),
            AnisoNorm::ellipse(1.5, 1.0),
            AnisoNorm::ellipse(2.0, 1.0, 0.4),
            AnisoNorm::fourier({1.0, 0.2}),
            AnisoNorm::fourier({1.0, 0.05, 0.03}),
        };
        {
            const AnisoNorm base = AnisoNorm::fourier({1.0, 0.08});
            std::vector<double> vals(256);
            for (int i = 0; i < 256; ++i) vals[i] = base.gamma(2.0 * kPi * i / 256);
            norms.push_back(AnisoNorm::sampled(vals, 0.2));
        }
        const int N = 1 << 14;
        std::mt19937 rng(42);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst_bidual = 0.0, worst_L = 0.0;
        for (const auto& phi : norms) {
            std::vector<double> gd(N);
            for (int i = 0; i < N; ++i) {
                const double t = 2.0 * kPi * i / N;
                gd[i] = phi.dual({std::cos(t), std::sin(t)});
            }
            // L_{phi_dual} from the dual profile (parabolic extrema refinement)
            auto refine = [&](int i) {
                const double ym = gd[(i + N - 1) % N], y0 = gd[i], yp = gd[(i + 1) % N];
                const double d = ym - 2.0 * y0 + yp;
                return d == 0.0 ? y0 : y0 - 0.125 * (yp - ym) * (yp - ym) / d;
            };
            double gmin = 1e30, gmax = 0.0;
            for (int i = 0; i < N; ++i) {
                if (gd[i] < gd[(i + N - 1) % N] && gd[i] <= gd[(i + 1) % N])
                    gmin = std::min(gmin, refine(i));
                if (gd[i] > gd[(i + N - 1) % N] && gd[i] >= gd[(i + 1) % N])
                    gmax = std::max(gmax, refine(i));
            }
            gmin = std::min(gmin, *std::min_element(gd.begin(), gd.end()));
            gmax = std::max(gmax, *std::max_element(gd.begin(), gd.end()));
            const double L_dual = std::max(gmax, 1.0 / gmin);
            const double L = phi.norm_equivalence_constant();
            worst_L = std::max(worst_L, std::abs(L_dual - L) / L);

            for (int k = 0; k < 1000; ++k) {
                Vec2 v{u(rng), u(rng)};
                if (v.norm() < 1e-3) continue;
                v = v * std::pow(10.0, u(rng));
                // bidual: support function of the dual unit ball
                double best = 0.0;
                int bi = 0;
                for (int i = 0; i < N; ++i) {
                    const double t = 2.0 * kPi * i / N;
                    const double val = (v.x * std::cos(t) + v.y * std::sin(t)) / gd[i];
                    if (val > best) { best = val; bi = i; }
                }
                // parabolic refinement around the argmax
                auto sup_at = [&](int i) {
                    const double t = 2.0 * kPi * ((i % N + N) % N) / N;
                    return (v.x * std::cos(t) + v.y * std::sin(t)) / gd[(i % N + N) % N];
                };
                const double ym = sup_at(bi - 1), yp = sup_at(bi + 1);
                const double d = ym - 2.0 * best + yp;
                const double bidual =
                    d == 0.0 ? best : best - 0.125 * (yp - ym) * (yp - ym) / d;
                worst_bidual =
                    std::max(worst_bidual, std::abs(bidual - phi.eval(v)) / phi.eval(v));
            }
        }
        c.pass = worst_bidual <= 1e-6 && worst_L <= 1e-6;
        c.detail = fmt("max |phi_bidual - phi|/phi = %.2e, max |L_dual - L|/L = %.2e "
                       "(tol 1e-6) over 6 norms x 1000 vectors", worst_bidual, worst_L);
    });

    // ---- report ------------------------------------------------------------
    std::sort(g_results.begin(), g_results.end(),
              [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
    bool all = true;
    for (const auto& r : g_results) {
        std::printf("%s %2d %-24s %s [%.1fs]\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str(), r.seconds);
        all = all && r.pass;
    }
    std::printf("%s: %zu/%zu criteria passed\n", all ? "ACCEPTED" : "REJECTED",
                static_cast<size_t>(std::count_if(g_results.begin(), g_results.end(),
                                                  [](const Criterion& r) { return r.pass; })),
                g_results.size());
    return all ? 0 : 1;
}
