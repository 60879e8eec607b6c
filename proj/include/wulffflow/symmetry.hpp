#pragma once

#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/grid.hpp"

namespace wf {

// H = {x : x . nu <= s}
struct HalfSpace {
    Vec2 nu;
    double s = 0.0;

    Vec2 reflect(Vec2 x) const { return x + (2.0 * (s - x.dot(nu))) * nu; }
    bool contains(Vec2 x) const { return x.dot(nu) <= s; }
};

struct DirectionSet {
    std::vector<Vec2> dirs;
};

struct ReflectionCheck {
    double violation_area = 0.0;
    bool holds = false;
    bool strict = false;
    double tolerance = 0.0;
};

GridSet reflect(const GridSet& e, const HalfSpace& h);

// (*)_H: Psi(E) cap H subseteq E cap H, up to 4 dx P(E)
ReflectionCheck check_star_H(const GridSet& e, const HalfSpace& h);

// (*)'_H: additionally no shared boundary cells inside H away from dH
ReflectionCheck check_star_H_strict(const GridSet& e, const HalfSpace& h, double band = -1.0);

// Q_{2m}: 2m evenly spaced unit vectors, closed under negation and
// mutual reflection
DirectionSet root_system(int m);
bool is_root_system(const DirectionSet& p, double tol = 1e-12);

std::vector<HalfSpace> halfspace_family(const std::vector<Vec2>& d, const DirectionSet& p);

// D + (m/|W_phi|)^{1/2} W_phi as a convex polygon
std::vector<Vec2> containment_bound(const std::vector<Vec2>& d, double m, const AnisoNorm& phi);

struct SingleWulffCriterion {
    bool satisfied = false;
    double alpha = 0.0;
    double threshold = 0.0;
    bool degenerate = false;
};

SingleWulffCriterion single_wulff_criterion(const std::vector<Vec2>& d, const AnisoNorm& phi,
                                            double m);

double polygon_area(const std::vector<Vec2>& poly);
double polygon_phi_perimeter(const std::vector<Vec2>& poly, const AnisoNorm& phi);
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);
bool point_in_convex(const std::vector<Vec2>& poly, Vec2 p, double tol = 0.0);

struct ReflectionSeriesEntry {
    int step = 0;
    double max_violation = 0.0;
    bool all_hold = true;
};

struct FlowTrace;

std::vector<ReflectionSeriesEntry> monitor_reflection(const FlowTrace& trace,
                                                      const std::vector<HalfSpace>& family);

}  // namespace wf
