#include "wulffflow/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "wulffflow/contour.hpp"
#include "wulffflow/maxflow.hpp"

namespace wf {

std::string to_string(VolumeBranch b) {
    switch (b) {
        case VolumeBranch::Interior: return "interior";
        case VolumeBranch::Under: return "under";
        case VolumeBranch::Over: return "over";
        case VolumeBranch::Pinned: return "pinned";
    }
    return "?";
}

void FlowParams::validate(double dx) {
    if (h <= 0.0) throw Error("flow params: h must be positive");
    if (m <= 0.0) throw Error("flow params: target area m must be positive");
    if (dx > h / 4.0)
        throw Error("flow params: grid/time coupling violated, need dx <= h/4 "
                    "(dx = " + std::to_string(dx) + ", h = " + std::to_string(h) + ")");
    if (lambda_tol == 0.0) lambda_tol = dx * dx;
    if (lambda_tol > dx * dx)
        throw Error("flow params: lambda search tolerance must be <= dx^2");
    phi.require_elliptic();
}

ScalarField unary_costs(const ScalarField& sd, double h, double mu) {
    ScalarField c;
    c.spec = sd.spec;
    c.value.resize(sd.value.size());
    const double cell = sd.spec.dx * sd.spec.dx;
    for (size_t i = 0; i < sd.value.size(); ++i)
        c.value[i] = (sd.value[i] / h + mu) * cell;
    return c;
}

GridSet min_cut_solve(const ScalarField& unary, const CroftonStencil& stencil,
                      const GridSet* subset, const GridSet* superset) {
    const GridSpec& spec = unary.spec;
    const int nx = spec.nx, ny = spec.ny;
    const int ix0 = 2, iy0 = 2, ix1 = nx - 2, iy1 = ny - 2;  // interior box
    if (ix1 <= ix0 || iy1 <= iy0) throw Error("min_cut_solve: grid too small");

    // cell state: 0 pinned out, 1 pinned in, 2 free
    auto state = [&](int ix, int iy) -> int {
        if (ix < ix0 || iy < iy0 || ix >= ix1 || iy >= iy1) return 0;
        if (subset && subset->at(ix, iy)) return 1;
        if (superset && !superset->at(ix, iy)) return 0;
        return 2;
    };

    std::vector<int> node(spec.cells(), -1);
    int nfree = 0;
    for (int iy = iy0; iy < iy1; ++iy)
        for (int ix = ix0; ix < ix1; ++ix)
            if (state(ix, iy) == 2) node[static_cast<size_t>(iy) * nx + ix] = nfree++;

    GridSet e = make_grid_set(spec);
    if (subset)
        for (int iy = iy0; iy < iy1; ++iy)
            for (int ix = ix0; ix < ix1; ++ix)
                if (subset->at(ix, iy)) e.set(ix, iy, true);
    if (nfree == 0) return e;

    MaxFlow mf(nfree);
    const double edge_scale = spec.dx;
    for (int iy = iy0; iy < iy1; ++iy) {
        for (int ix = ix0; ix < ix1; ++ix) {
            const int v = node[static_cast<size_t>(iy) * nx + ix];
            if (v < 0) continue;
            const double c = unary.at(ix, iy);
            double to_sink = std::max(c, 0.0);
            double from_source = std::max(-c, 0.0);
            for (const auto& ent : stencil.entries) {
                const double w = ent.weight * edge_scale;
                if (w <= 0.0) continue;
                for (int sgn : {1, -1}) {
                    const int jx = ix + sgn * ent.dx, jy = iy + sgn * ent.dy;
                    const int st = state(jx, jy);
                    if (st == 2) {
                        // each undirected pair once, from the forward side
                        if (sgn == 1)
                            mf.add_edge(v, node[static_cast<size_t>(jy) * nx + jx], w, w);
                    } else if (st == 1) {
                        from_source += w;
                    } else {
                        to_sink += w;
                    }
                }
            }
            mf.add_terminal(v, from_source, to_sink);
        }
    }
    mf.solve();
    const std::vector<uint8_t> side = mf.min_source_side();

    for (int iy = iy0; iy < iy1; ++iy)
        for (int ix = ix0; ix < ix1; ++ix) {
            const int v = node[static_cast<size_t>(iy) * nx + ix];
            if (v >= 0 && side[v]) e.set(ix, iy, true);
        }
    return e;
}

double dissipation(const GridSet& e, const GridSet& f, const ScalarField& sd_f) {
    if (!(e.spec == f.spec)) throw Error("dissipation: mismatched grid specs");
    const double cell = e.spec.dx * e.spec.dx;
    double acc = 0.0;
    for (int iy = 0; iy < e.spec.ny; ++iy)
        for (int ix = 0; ix < e.spec.nx; ++ix)
            if (e.at(ix, iy) != f.at(ix, iy)) acc += std::abs(sd_f.at(ix, iy));
    return acc * cell;
}

double dissipation(const GridSet& e, const GridSet& f, const AnisoNorm& psi) {
    return dissipation(e, f, signed_distance_field(f, psi, DistanceMode::Exact));
}

namespace {

double penalty(double a, double m, double h) { return std::abs(a - m) / std::sqrt(h); }

}  // namespace

MultiplierResult volume_multiplier_search(const GridSet& f, const ScalarField& sd_f,
                                          const FlowParams& params,
                                          const CroftonStencil& stencil,
                                          std::optional<double> mu_hint) {
    const double h = params.h, m = params.m;
    const double mu_max = 1.0 / std::sqrt(h);
    const double tol = params.lambda_tol;
    MultiplierResult res;

    auto solve_at = [&](double mu, const GridSet* sub = nullptr, const GridSet* sup = nullptr) {
        ++res.cut_solves;
        return min_cut_solve(unary_costs(sd_f, h, mu), stencil, sub, sup);
    };

    double lo = -mu_max, hi = mu_max;
    GridSet e_lo, e_hi;
    double a_lo, a_hi;

    // warm bracket around the previous multiplier when it still brackets m
    bool have_bracket = false;
    if (mu_hint) {
        const double half = 0.05 * mu_max;
        const double wl = std::max(*mu_hint - half, -mu_max);
        const double wh = std::min(*mu_hint + half, mu_max);
        GridSet el = solve_at(wl);
        GridSet eh = solve_at(wh, nullptr, &el);
        const double al = area(el), ah = area(eh);
        if (al + tol >= m && ah <= m + tol) {
            lo = wl; hi = wh;
            e_lo = std::move(el); e_hi = std::move(eh);
            a_lo = al; a_hi = ah;
            have_bracket = true;
        }
    }
    if (!have_bracket) {
        e_lo = solve_at(lo);
        a_lo = area(e_lo);
        if (a_lo < m - tol) {  // even maximal growth pressure undershoots
            res.e = std::move(e_lo);
            res.mu = lo;
            res.branch = VolumeBranch::Under;
            res.area_gap = std::abs(a_lo - m);
            return res;
        }
        e_hi = solve_at(hi, nullptr, &e_lo);
        a_hi = area(e_hi);
        if (a_hi > m + tol) {
            res.e = std::move(e_hi);
            res.mu = hi;
            res.branch = VolumeBranch::Over;
            res.area_gap = std::abs(a_hi - m);
            return res;
        }
    }

    if (std::abs(a_lo - m) <= tol) {
        res.e = std::move(e_lo);
        res.mu = lo;
        res.branch = VolumeBranch::Interior;
        res.area_gap = std::abs(a_lo - m);
        return res;
    }
    if (std::abs(a_hi - m) <= tol) {
        res.e = std::move(e_hi);
        res.mu = hi;
        res.branch = VolumeBranch::Interior;
        res.area_gap = std::abs(a_hi - m);
        return res;
    }

    // bisection on mu; area is non-increasing in mu and the minimal
    // minimizers nest, so each midpoint solve is confined to e_lo \ e_hi
    for (int iter = 0; iter < 60 && hi - lo > 1e-13 * mu_max; ++iter) {
        const double mid = 0.5 * (lo + hi);
        GridSet em = solve_at(mid, &e_hi, &e_lo);
        const double am = area(em);
        if (am > a_lo + 1e-12 || am < a_hi - 1e-12)
            throw Error("volume_multiplier_search: area not monotone in mu");
        if (std::abs(am - m) <= tol) {
            res.e = std::move(em);
            res.mu = mid;
            res.branch = VolumeBranch::Interior;
            res.area_gap = std::abs(am - m);
            return res;
        }
        if (am > m) {
            lo = mid;
            e_lo = std::move(em);
            a_lo = am;
        } else {
            hi = mid;
            e_hi = std::move(em);
            a_hi = am;
        }
    }

    // plateau collapse: pick the candidate with the lower full energy
    const double en_lo = anisotropic_perimeter(e_lo, stencil) + dissipation(e_lo, f, sd_f) / h +
                         penalty(a_lo, m, h);
    const double en_hi = anisotropic_perimeter(e_hi, stencil) + dissipation(e_hi, f, sd_f) / h +
                         penalty(a_hi, m, h);
    if (en_lo <= en_hi) {
        res.e = std::move(e_lo);
        res.mu = lo;
        res.area_gap = std::abs(a_lo - m);
    } else {
        res.e = std::move(e_hi);
        res.mu = hi;
        res.area_gap = std::abs(a_hi - m);
    }
    res.branch = VolumeBranch::Pinned;
    return res;
}

FlowEngine::FlowEngine(FlowParams params, double dx) : params_(std::move(params)) {
    params_.validate(dx);
    stencil_ = perimeter_weights(params_.phi, params_.stencil_order);
    prev_lyapunov_ = std::numeric_limits<double>::infinity();
}

std::pair<GridSet, StepReport> FlowEngine::step(const GridSet& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec& spec = f.spec;
    const DistanceMode mode = mode_override_.value_or(
        spec.cells() <= size_t(512) * 512 ? DistanceMode::Exact : DistanceMode::Fast);
    const ScalarField sd = signed_distance_field(f, params_.psi, mode);

    if (prev_lyapunov_ == std::numeric_limits<double>::infinity())
        prev_lyapunov_ = anisotropic_perimeter(f, stencil_) + penalty(area(f), params_.m, params_.h);

    MultiplierResult mr = volume_multiplier_search(f, sd, params_, stencil_, mu_prev_);
    mu_prev_ = mr.mu;

    StepReport rep;
    rep.step = ++step_index_;
    rep.perimeter = anisotropic_perimeter(mr.e, stencil_);
    rep.area = area(mr.e);
    rep.dissipation = dissipation(mr.e, f, sd);
    rep.mu = mr.mu;
    rep.branch = mr.branch;
    rep.area_gap = mr.area_gap;
    rep.cut_solves = mr.cut_solves;

    double sup = 0.0;
    for (int iy = 0; iy < spec.ny; ++iy)
        for (int ix = 0; ix < spec.nx; ++ix)
            if (mr.e.at(ix, iy) != f.at(ix, iy)) sup = std::max(sup, std::abs(sd.at(ix, iy)));
    rep.sup_move = sup;
    max_ratio_ = std::max(max_ratio_, sup / std::sqrt(params_.h));
    if (linf_c_ && sup > *linf_c_ * std::sqrt(params_.h)) rep.linf_ok = false;

    rep.lyapunov = rep.perimeter + penalty(rep.area, params_.m, params_.h);
    rep.slack = std::max(0.0, rep.lyapunov - prev_lyapunov_);
    prev_lyapunov_ = rep.lyapunov;

    if (params_.compute_eps && !mr.e.empty_set()) {
        try {
            rep.eps = curvature_deviation(mr.e, params_.phi);
        } catch (const Error&) {
            rep.eps = std::numeric_limits<double>::quiet_NaN();
        }
    }

    // margin safety: moving mass into the rim means the domain is too small
    for (int iy = 0; iy < spec.ny; ++iy)
        for (int ix = 0; ix < spec.nx; ++ix)
            if ((ix < 2 || iy < 2 || ix >= spec.nx - 2 || iy >= spec.ny - 2) && mr.e.at(ix, iy))
                throw Error("step: evolved set reached the domain margin; enlarge the grid");

    rep.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0).count();
    return {std::move(mr.e), rep};
}

FlowTrace FlowEngine::run(const GridSet& e0, const StopCriteria& stop) {
    FlowTrace trace;
    trace.h = params_.h;
    trace.m = params_.m;
    trace.initial_perimeter = anisotropic_perimeter(e0, stencil_);
    trace.initial_lyapunov = trace.initial_perimeter + penalty(area(e0), params_.m, params_.h);
    prev_lyapunov_ = trace.initial_lyapunov;
    step_index_ = 0;

    GridSet cur = e0;
    trace.snapshots.emplace_back(0, cur);
    GridSet last_check = cur;
    int calm = 0;
    const double stop_threshold =
        e0.spec.dx * trace.initial_perimeter * stop.threshold_factor;

    for (int k = 1; k <= params_.max_steps; ++k) {
        auto [next, rep] = step(cur);
        cur = std::move(next);
        trace.reports.push_back(rep);
        if (params_.snapshot_stride > 0 && k % params_.snapshot_stride == 0)
            trace.snapshots.emplace_back(k, cur);
        if (cur.empty_set()) {
            trace.vanished = true;
            break;
        }
        if (stop.enabled && k % stop.check_stride == 0) {
            const double moved = sym_diff_area(cur, last_check);
            last_check = cur;
            calm = moved < stop_threshold ? calm + 1 : 0;
            if (calm >= stop.patience) {
                trace.stopped_early = true;
                break;
            }
        }
    }
    if (trace.snapshots.back().first != (trace.reports.empty() ? 0 : trace.reports.back().step))
        trace.snapshots.emplace_back(trace.reports.back().step, cur);
    trace.final_state = std::move(cur);
    return trace;
}

}  // namespace wf
