#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace wf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

enum class NormFamily { Euclidean, Ellipse, Fourier, Sampled };

struct GammaJet {
    double g, dg, ddg;  // gamma, gamma', gamma''
};

struct EllipticityData {
    double L_phi;       // norm-equivalence constant, >= 1
    double Lambda_phi;  // two-sided bound on gamma + gamma''
};

/// A norm on R^2 carried as its restriction gamma(theta) = phi(cos t, sin t).
/// Immutable after construction; all evaluations are pure.
class AnisoNorm {
public:
    static AnisoNorm euclidean();
    static AnisoNorm ellipse(double a, double b, double rotation = 0.0);
    // coeffs[i] multiplies cos(2*i*theta)
    static AnisoNorm fourier(std::vector<double> coeffs, double rotation = 0.0);
    // gamma values on a uniform theta grid of size n (power of two, >= 16)
    static AnisoNorm sampled(std::vector<double> values, double rotation = 0.0);

    NormFamily family() const { return family_; }
    double rotation() const { return rotation_; }
    const std::vector<double>& params() const { return params_; }

    GammaJet gamma_jet(double theta) const;
    double gamma(double theta) const { return gamma_jet(theta).g; }

    double eval(Vec2 v) const;
    double dual(Vec2 w) const;

    // gamma(theta) nu + gamma'(theta) tau; lies on the boundary of the
    // unit Wulff shape with outward normal (cos theta, sin theta).
    Vec2 cahn_hoffman(double theta) const;

    std::vector<Vec2> wulff_polygon(Vec2 center, double r, int n) const;
    double wulff_area() const;

    EllipticityData ellipticity_bounds() const;
    // L_phi alone; does not require ellipticity
    double norm_equivalence_constant() const;
    bool is_elliptic() const;
    // throws if min(gamma + gamma'') <= 0
    void require_elliptic() const;

    // phi(x) == phi(x - 2 (x.nu) nu) for sampled x, within tol
    bool compatible_with(Vec2 nu, double tol = 1e-9) const;

    std::string describe() const;

private:
    AnisoNorm() = default;
    void validate() const;

    NormFamily family_ = NormFamily::Euclidean;
    double rotation_ = 0.0;
    std::vector<double> params_;
    // Sampled family: interpolation coefficients, cos_k and sin_k harmonics
    std::vector<double> cosc_, sinc_;
};

}  // namespace wf
