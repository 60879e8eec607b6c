#include "wulffflow/anisotropy.hpp"

#include <algorithm>
#include <numbers>

namespace wf {

namespace {

constexpr double kPi = std::numbers::pi;

// 1D minimization of f on [a,b] by golden section, tolerance in the argument.
template <class F>
double golden_min(F&& f, double a, double b, double tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

template <class F>
double grid_min(F&& f, int n, double* argmin = nullptr) {
    double best = f(0.0);
    double arg = 0.0;
    for (int i = 1; i < n; ++i) {
        double t = 2.0 * kPi * i / n;
        double v = f(t);
        if (v < best) { best = v; arg = t; }
    }
    double span = 2.0 * kPi / n;
    double refined = golden_min(f, arg - span, arg + span, 1e-10);
    if (argmin) *argmin = refined;
    return f(refined);
}

}  // namespace

AnisoNorm AnisoNorm::euclidean() {
    AnisoNorm n;
    n.family_ = NormFamily::Euclidean;
    return n;
}

AnisoNorm AnisoNorm::ellipse(double a, double b, double rotation) {
    if (a <= 0.0 || b <= 0.0) throw Error("ellipse norm: semi-axis scales must be positive");
    AnisoNorm n;
    n.family_ = NormFamily::Ellipse;
    n.params_ = {a, b};
    n.rotation_ = rotation;
    return n;
}

AnisoNorm AnisoNorm::fourier(std::vector<double> coeffs, double rotation) {
    if (coeffs.empty()) throw Error("fourier norm: need at least c0");
    AnisoNorm n;
    n.family_ = NormFamily::Fourier;
    n.params_ = std::move(coeffs);
    n.rotation_ = rotation;
    n.validate();
    return n;
}

AnisoNorm AnisoNorm::sampled(std::vector<double> values, double rotation) {
    const size_t m = values.size();
    if (m < 16 || (m & (m - 1)) != 0)
        throw Error("sampled norm: grid size must be a power of two, >= 16");
    AnisoNorm n;
    n.family_ = NormFamily::Sampled;
    n.params_ = values;
    n.rotation_ = rotation;
    // Trigonometric interpolation: direct DFT (construction-time only).
    const int nh = static_cast<int>(m) / 2;
    n.cosc_.assign(nh + 1, 0.0);
    n.sinc_.assign(nh + 1, 0.0);
    for (int k = 0; k <= nh; ++k) {
        double ck = 0.0, sk = 0.0;
        for (size_t j = 0; j < m; ++j) {
            double t = 2.0 * kPi * k * j / m;
            ck += values[j] * std::cos(t);
            sk += values[j] * std::sin(t);
        }
        double scale = (k == 0 || k == nh) ? 1.0 / m : 2.0 / m;
        n.cosc_[k] = ck * scale;
        n.sinc_[k] = sk * scale;
    }
    // Evenness gamma(t + pi) = gamma(t): odd harmonics must vanish.
    double amax = 0.0;
    for (double v : values) amax = std::max(amax, std::abs(v));
    for (int k = 1; k <= nh; k += 2) {
        if (std::hypot(n.cosc_[k], n.sinc_[k]) > 1e-9 * std::max(1.0, amax))
            throw Error("sampled norm: gamma is not even under theta -> theta + pi");
    }
    n.validate();
    return n;
}

void AnisoNorm::validate() const {
    const int n = 1024;
    for (int i = 0; i < n; ++i) {
        double t = 2.0 * kPi * i / n;
        if (gamma_jet(t).g <= 0.0) throw Error("norm: gamma must be strictly positive");
    }
    double tmin = grid_min([this](double t) { return gamma_jet(t).g; }, 4096);
    if (tmin <= 0.0) throw Error("norm: gamma must be strictly positive");
}

GammaJet AnisoNorm::gamma_jet(double theta) const {
    const double t = theta - rotation_;
    switch (family_) {
        case NormFamily::Euclidean:
            return {1.0, 0.0, 0.0};
        case NormFamily::Ellipse: {
            const double a = params_[0], b = params_[1];
            const double c0 = 0.5 * (a * a + b * b), c2 = 0.5 * (a * a - b * b);
            const double g2 = c0 + c2 * std::cos(2.0 * t);
            const double g = std::sqrt(g2);
            const double dg = -c2 * std::sin(2.0 * t) / g;
            const double ddg = (-2.0 * c2 * std::cos(2.0 * t) - dg * dg) / g;
            return {g, dg, ddg};
        }
        case NormFamily::Fourier: {
            double g = 0.0, dg = 0.0, ddg = 0.0;
            for (size_t i = 0; i < params_.size(); ++i) {
                const double k = 2.0 * static_cast<double>(i);
                g += params_[i] * std::cos(k * t);
                dg += -params_[i] * k * std::sin(k * t);
                ddg += -params_[i] * k * k * std::cos(k * t);
            }
            return {g, dg, ddg};
        }
        case NormFamily::Sampled: {
            double g = 0.0, dg = 0.0, ddg = 0.0;
            for (size_t k = 0; k < cosc_.size(); ++k) {
                const double kk = static_cast<double>(k);
                const double c = std::cos(kk * t), s = std::sin(kk * t);
                g += cosc_[k] * c + sinc_[k] * s;
                dg += -cosc_[k] * kk * s + sinc_[k] * kk * c;
                ddg += -kk * kk * (cosc_[k] * c + sinc_[k] * s);
            }
            return {g, dg, ddg};
        }
    }
    throw Error("unreachable");
}

double AnisoNorm::eval(Vec2 v) const {
    const double r = v.norm();
    if (r == 0.0) return 0.0;
    return r * gamma_jet(std::atan2(v.y, v.x)).g;
}

double AnisoNorm::dual(Vec2 w) const {
    const double r = w.norm();
    if (r == 0.0) return 0.0;
    // sup over unit phi-ball of x.w = max_theta (cos,sin).w / gamma(theta)
    auto neg = [&](double t) {
        return -(std::cos(t) * w.x + std::sin(t) * w.y) / gamma_jet(t).g;
    };
    return -grid_min(neg, 1024);
}

Vec2 AnisoNorm::cahn_hoffman(double theta) const {
    const GammaJet j = gamma_jet(theta);
    const double c = std::cos(theta), s = std::sin(theta);
    return {j.g * c - j.dg * s, j.g * s + j.dg * c};
}

std::vector<Vec2> AnisoNorm::wulff_polygon(Vec2 center, double r, int n) const {
    if (n < 16) throw Error("wulff_polygon: need n >= 16");
    std::vector<Vec2> poly(n);
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * i / n;
        poly[i] = center + r * cahn_hoffman(t);
    }
    return poly;
}

double AnisoNorm::wulff_area() const {
    require_elliptic();
    // |W_phi| = 1/2 integral of gamma (gamma + gamma''); the integrand is
    // smooth periodic, so the trapezoid rule is spectrally accurate.
    const int n = 4096;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const GammaJet j = gamma_jet(2.0 * kPi * i / n);
        acc += j.g * (j.g + j.ddg);
    }
    return 0.5 * acc * (2.0 * kPi / n);
}

EllipticityData AnisoNorm::ellipticity_bounds() const {
    auto g = [this](double t) { return gamma_jet(t).g; };
    auto gpp = [this](double t) { const GammaJet j = gamma_jet(t); return j.g + j.ddg; };
    const double gmin = grid_min(g, 4096);
    const double gmax = -grid_min([&](double t) { return -g(t); }, 4096);
    const double emin = grid_min(gpp, 4096);
    const double emax = -grid_min([&](double t) { return -gpp(t); }, 4096);
    if (emin <= 0.0)
        throw Error("norm is not regularly elliptic: min(gamma + gamma'') = " +
                    std::to_string(emin));
    return {std::max(gmax, 1.0 / gmin), std::max(emax, 1.0 / emin)};
}

double AnisoNorm::norm_equivalence_constant() const {
    auto g = [this](double t) { return gamma_jet(t).g; };
    const double gmin = grid_min(g, 4096);
    const double gmax = -grid_min([&](double t) { return -g(t); }, 4096);
    return std::max(gmax, 1.0 / gmin);
}

bool AnisoNorm::is_elliptic() const {
    const double emin =
        grid_min([this](double t) { const GammaJet j = gamma_jet(t); return j.g + j.ddg; }, 4096);
    return emin > 0.0;
}

void AnisoNorm::require_elliptic() const {
    if (!is_elliptic()) throw Error("norm is not regularly elliptic");
}

bool AnisoNorm::compatible_with(Vec2 nu, double tol) const {
    const double nn = nu.norm();
    if (std::abs(nn - 1.0) > 1e-9) throw Error("compatible_with: nu must be a unit vector");
    const int n = 512;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * i / n;
        const Vec2 x{std::cos(t), std::sin(t)};
        const Vec2 xr = x - (2.0 * x.dot(nu)) * nu;
        if (std::abs(eval(x) - eval(xr)) > tol) return false;
    }
    return true;
}

std::string AnisoNorm::describe() const {
    switch (family_) {
        case NormFamily::Euclidean: return "euclidean";
        case NormFamily::Ellipse:
            return "ellipse(" + std::to_string(params_[0]) + "," + std::to_string(params_[1]) + ")";
        case NormFamily::Fourier: {
            std::string s = "fourier(";
            for (size_t i = 0; i < params_.size(); ++i)
                s += (i ? "," : "") + std::to_string(params_[i]);
            return s + ")";
        }
        case NormFamily::Sampled: return "sampled(n=" + std::to_string(params_.size()) + ")";
    }
    return "?";
}

}  // namespace wf
