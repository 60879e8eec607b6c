#include "wulffflow/symmetry.hpp"

#include "wulffflow/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wf {

namespace {

// exposed-edge boundary length (Euclidean), used to scale tolerances
double boundary_length(const GridSet& e) {
    const auto& sp = e.spec;
    long edges = 0;
    for (int iy = 0; iy < sp.ny; ++iy)
        for (int ix = 0; ix < sp.nx; ++ix) {
            if (!e.at(ix, iy)) continue;
            if (ix == 0 || !e.at(ix - 1, iy)) ++edges;
            if (ix == sp.nx - 1 || !e.at(ix + 1, iy)) ++edges;
            if (iy == 0 || !e.at(ix, iy - 1)) ++edges;
            if (iy == sp.ny - 1 || !e.at(ix, iy + 1)) ++edges;
        }
    return static_cast<double>(edges) * sp.dx;
}

}  // namespace

GridSet reflect(const GridSet& e, const HalfSpace& h) {
    const auto& sp = e.spec;
    GridSet out = make_grid_set(sp);
    for (int iy = 0; iy < sp.ny; ++iy)
        for (int ix = 0; ix < sp.nx; ++ix) {
            if (!e.at(ix, iy)) continue;
            Vec2 y = h.reflect(sp.center(ix, iy));
            int jx = static_cast<int>(std::lround((y.x - sp.origin.x) / sp.dx - 0.5));
            int jy = static_cast<int>(std::lround((y.y - sp.origin.y) / sp.dx - 0.5));
            if (jx < 0 || jx >= sp.nx || jy < 0 || jy >= sp.ny)
                throw Error("reflect: image leaves the grid");
            out.set(jx, jy, true);
        }
    return out;
}

ReflectionCheck check_star_H(const GridSet& e, const HalfSpace& h) {
    const auto& sp = e.spec;
    GridSet r = reflect(e, h);
    long bad = 0;
    for (int iy = 0; iy < sp.ny; ++iy)
        for (int ix = 0; ix < sp.nx; ++ix) {
            if (!r.at(ix, iy) || e.at(ix, iy)) continue;
            if (h.contains(sp.center(ix, iy))) ++bad;
        }
    ReflectionCheck out;
    out.violation_area = static_cast<double>(bad) * sp.dx * sp.dx;
    out.tolerance = 4.0 * sp.dx * boundary_length(e);
    out.holds = out.violation_area <= out.tolerance;
    return out;
}

ReflectionCheck check_star_H_strict(const GridSet& e, const HalfSpace& h, double band) {
    const auto& sp = e.spec;
    if (band < 0.0) band = 3.0 * sp.dx;
    GridSet r = reflect(e, h);
    long bad = 0;
    for (int iy = 0; iy < sp.ny; ++iy)
        for (int ix = 0; ix < sp.nx; ++ix) {
            if (!r.at(ix, iy) || e.at(ix, iy)) continue;
            Vec2 x = sp.center(ix, iy);
            if (h.s - x.dot(h.nu) > band) ++bad;
        }
    ReflectionCheck out;
    out.strict = true;
    out.violation_area = static_cast<double>(bad) * sp.dx * sp.dx;
    out.tolerance = 0.0;
    out.holds = bad == 0;
    return out;
}

DirectionSet root_system(int m) {
    if (m < 1) throw Error("root_system: m must be >= 1");
    DirectionSet p;
    p.dirs.reserve(2 * m);
    for (int i = 0; i < 2 * m; ++i) {
        double th = std::numbers::pi * i / m;
        p.dirs.push_back({std::cos(th), std::sin(th)});
    }
    return p;
}

bool is_root_system(const DirectionSet& p, double tol) {
    auto member = [&](Vec2 v) {
        for (const auto& q : p.dirs)
            if (std::abs(q.x - v.x) <= tol && std::abs(q.y - v.y) <= tol) return true;
        return false;
    };
    for (const auto& q : p.dirs) {
        if (std::abs(q.norm() - 1.0) > tol) return false;
        if (!member({-q.x, -q.y})) return false;
    }
    for (const auto& a : p.dirs)
        for (const auto& q : p.dirs) {
            Vec2 img = a - (2.0 * a.dot(q)) * q;  // reflect across q^perp
            if (!member(img)) return false;
        }
    return true;
}

std::vector<HalfSpace> halfspace_family(const std::vector<Vec2>& d, const DirectionSet& p) {
    if (d.empty()) throw Error("halfspace_family: empty point set");
    std::vector<HalfSpace> out;
    out.reserve(p.dirs.size());
    for (const auto& nu : p.dirs) {
        double s = d.front().dot(nu);
        for (const auto& v : d) s = std::max(s, v.dot(nu));
        out.push_back({nu, s});
    }
    return out;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    if (pts.size() < 3) return pts;
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    if (pts.size() < 3) return pts;
    auto cross3 = [](Vec2 o, Vec2 a, Vec2 b) { return (a - o).cross(b - o); };
    std::vector<Vec2> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross3(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && cross3(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

bool point_in_convex(const std::vector<Vec2>& poly, Vec2 p, double tol) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % n];
        if ((b - a).cross(p - a) < -tol * (b - a).norm()) return false;
    }
    return true;
}

double polygon_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) a += poly[i].cross(poly[(i + 1) % n]);
    return 0.5 * a;
}

double polygon_phi_perimeter(const std::vector<Vec2>& poly, const AnisoNorm& phi) {
    double p = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 e = poly[(i + 1) % n] - poly[i];
        double len = e.norm();
        if (len <= 0.0) continue;
        Vec2 nu{e.y / len, -e.x / len};  // outer normal for CCW orientation
        p += len * phi.eval(nu);
    }
    return p;
}

std::vector<Vec2> containment_bound(const std::vector<Vec2>& d, double m, const AnisoNorm& phi) {
    if (d.empty()) throw Error("containment_bound: empty point set");
    if (m <= 0.0) throw Error("containment_bound: mass must be positive");
    double r = std::sqrt(m / phi.wulff_area());
    auto hull = convex_hull(d);
    auto w = phi.wulff_polygon({0.0, 0.0}, r, 256);
    std::vector<Vec2> sums;
    sums.reserve(hull.size() * w.size());
    for (const auto& a : hull)
        for (const auto& b : w) sums.push_back(a + b);
    return convex_hull(std::move(sums));
}

SingleWulffCriterion single_wulff_criterion(const std::vector<Vec2>& d, const AnisoNorm& phi,
                                            double m) {
    SingleWulffCriterion out;
    auto hull = convex_hull(d);
    double area = polygon_area(hull);
    if (hull.size() < 3 || area <= 0.0) {
        out.degenerate = true;
        return out;
    }
    double wa = phi.wulff_area();
    double pphi = polygon_phi_perimeter(hull, phi);
    out.alpha = pphi / (2.0 * std::sqrt(wa) * std::sqrt(area));
    double t = std::sqrt(out.alpha * out.alpha + 1.0) + out.alpha;
    out.threshold = 2.0 * t * t * area;
    out.satisfied = m > out.threshold;
    return out;
}

std::vector<ReflectionSeriesEntry> monitor_reflection(const FlowTrace& trace,
                                                      const std::vector<HalfSpace>& family) {
    std::vector<ReflectionSeriesEntry> out;
    out.reserve(trace.snapshots.size());
    for (const auto& [step, e] : trace.snapshots) {
        ReflectionSeriesEntry entry;
        entry.step = step;
        for (const auto& h : family) {
            auto chk = check_star_H(e, h);
            entry.max_violation = std::max(entry.max_violation, chk.violation_area);
            entry.all_hold = entry.all_hold && chk.holds;
        }
        out.push_back(entry);
    }
    return out;
}

}  // namespace wf
