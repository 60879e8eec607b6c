#pragma once

#include <optional>
#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/grid.hpp"

namespace wf {

// Closed sub-cell polyline; vertices ordered so the set lies on the left
// (outer loops CCW, holes CW).
struct Contour {
    std::vector<Vec2> pts;
    bool outer = true;

    double signed_area() const;
    double length() const;
};

struct CurvatureProfile {
    std::vector<double> s;          // arclength
    std::vector<double> normal_angle;  // unwrapped outward-normal angle
    std::vector<double> kappa;
    std::vector<double> kappa_phi;
    double kbar_phi = 0.0;    // H^1-average of kappa_phi
    double ktilde_phi = 0.0;  // phi-weighted average
    double eps = 0.0;         // ||kappa_phi - kbar_phi||_{L^2(ds)}
    double length = 0.0;
    double p_phi = 0.0;       // contour integral of gamma(nu) ds
    int winding = 0;
};

struct WulffComponentFit {
    Vec2 center;
    double r_individual = 0.0;
    double f_sup = 0.0;
    double f_c1 = 0.0;
    bool star_shaped = true;
    std::vector<double> f;  // normal graph samples on the theta grid
};

struct WulffFit {
    int d = 0;
    double r = 0.0;  // uniform radius, d r^2 = sum r_j^2
    std::vector<WulffComponentFit> components;
    bool degenerate = false;  // some component was not star-shaped
};

struct AlexandrovReport {
    double eps = 0.0;
    int d = 1;
    double p_phi = 0.0;
    double p_d = 0.0;
    double gap = 0.0;
    double ratio = 0.0;  // gap / eps^2
    double kbar_phi = 0.0;
    double radii_spread = 0.0;
    bool far_from_critical = false;
};

// Marching squares at level 0.5 on a Gaussian-smoothed indicator.
std::vector<Contour> extract_contours(const GridSet& e, double smooth_sigma_cells = 1.0);

Contour contour_from_points(std::vector<Vec2> pts);

// sigma is the tangent-smoothing scale in length units.
CurvatureProfile curvature_profile(const Contour& c, const AnisoNorm& phi, double sigma);

double gauss_bonnet(const Contour& c, const AnisoNorm& phi, double sigma);

WulffFit fit_wulff_union(const std::vector<Contour>& contours, const AnisoNorm& phi,
                         int n_theta = 256);

AlexandrovReport alexandrov_report(const std::vector<Contour>& contours, const AnisoNorm& phi,
                                   double m, double sigma);
AlexandrovReport alexandrov_report(const GridSet& e, const AnisoNorm& phi, double m);

// Curvature-deviation proxy: eps of the contour family at the default
// smoothing scale 3*dx.
double curvature_deviation(const GridSet& e, const AnisoNorm& phi);

struct PerturbationCheck {
    double area_residual;     // |E_f| minus the exact expansion
    double perimeter_defect;  // P_phi(E_f) - P_phi(W_phi) - linear term
    double area;
    double perimeter;
};

// f sampled on a uniform theta grid (power of two); the perturbed curve is
// u(theta) = xi(theta) + f(theta) nu(theta).
PerturbationCheck area_expansion_check(const std::vector<double>& f, const AnisoNorm& phi);

// Samples of the perturbed boundary, usable to build a Contour or polygons.
std::vector<Vec2> normal_perturbation_curve(const AnisoNorm& phi, Vec2 center, double r,
                                            const std::vector<double>& f);

}  // namespace wf
