#include "wulffflow/contour.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>

namespace wf {

namespace {

constexpr double kPi = std::numbers::pi;

// in-place radix-2 FFT, n a power of two
void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? -1.0 : 1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k], v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

// spectral derivative of periodic samples on [0, 2pi)
std::vector<double> spectral_derivative(const std::vector<double>& f) {
    const size_t n = f.size();
    if (n < 4 || (n & (n - 1)) != 0)
        throw Error("spectral derivative: sample count must be a power of two");
    std::vector<std::complex<double>> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = f[i];
    fft(a, false);
    for (size_t k = 0; k < n; ++k) {
        double kk = k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
        if (k == n / 2) kk = 0.0;  // Nyquist
        a[k] *= std::complex<double>(0.0, kk);
    }
    fft(a, true);
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = a[i].real();
    return out;
}

struct Seg {
    int from_edge, to_edge;
    Vec2 from_pt, to_pt;
};

double bilinear(double v00, double v10, double v01, double v11, double x, double y) {
    return v00 * (1 - x) * (1 - y) + v10 * x * (1 - y) + v01 * (1 - x) * y + v11 * x * y;
}

std::vector<double> smooth_field(const GridSet& e, double sigma_cells) {
    const int nx = e.spec.nx, ny = e.spec.ny;
    std::vector<double> f(e.mask.begin(), e.mask.end());
    if (sigma_cells <= 0.0) return f;
    const int rad = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_cells)));
    std::vector<double> ker(2 * rad + 1);
    double ksum = 0.0;
    for (int k = -rad; k <= rad; ++k)
        ksum += ker[k + rad] = std::exp(-0.5 * k * k / (sigma_cells * sigma_cells));
    for (auto& v : ker) v /= ksum;
    std::vector<double> tmp(f.size(), 0.0);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            double acc = 0.0;
            for (int k = -rad; k <= rad; ++k) {
                const int jx = std::clamp(ix + k, 0, nx - 1);
                acc += ker[k + rad] * f[static_cast<size_t>(iy) * nx + jx];
            }
            tmp[static_cast<size_t>(iy) * nx + ix] = acc;
        }
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            double acc = 0.0;
            for (int k = -rad; k <= rad; ++k) {
                const int jy = std::clamp(iy + k, 0, ny - 1);
                acc += ker[k + rad] * tmp[static_cast<size_t>(jy) * nx + ix];
            }
            f[static_cast<size_t>(iy) * nx + ix] = acc;
        }
    return f;
}

std::vector<Vec2> resample_closed(const std::vector<Vec2>& pts, double target) {
    const size_t n = pts.size();
    std::vector<double> cum(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i)
        cum[i + 1] = cum[i] + (pts[(i + 1) % n] - pts[i]).norm();
    const double total = cum[n];
    const int m = std::max<int>(16, static_cast<int>(std::lround(total / target)));
    std::vector<Vec2> out(m);
    size_t seg = 0;
    for (int i = 0; i < m; ++i) {
        const double s = total * i / m;
        while (seg + 1 < n + 1 && cum[seg + 1] < s) ++seg;
        const double d = cum[seg + 1] - cum[seg];
        const double t = d > 0 ? (s - cum[seg]) / d : 0.0;
        const Vec2 a = pts[seg % n], b = pts[(seg + 1) % n];
        out[i] = a + t * (b - a);
    }
    return out;
}

}  // namespace

double Contour::signed_area() const {
    double acc = 0.0;
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) acc += pts[i].cross(pts[(i + 1) % n]);
    return 0.5 * acc;
}

double Contour::length() const {
    double acc = 0.0;
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) acc += (pts[(i + 1) % n] - pts[i]).norm();
    return acc;
}

Contour contour_from_points(std::vector<Vec2> pts) {
    Contour c;
    c.pts = std::move(pts);
    c.outer = c.signed_area() > 0.0;
    return c;
}

std::vector<Contour> extract_contours(const GridSet& e, double smooth_sigma_cells) {
    if (e.empty_set()) return {};
    const GridSpec& spec = e.spec;
    const int nx = spec.nx, ny = spec.ny;
    const double th = 0.5;
    const std::vector<double> f = smooth_field(e, smooth_sigma_cells);
    auto val = [&](int i, int j) { return f[static_cast<size_t>(j) * nx + i]; };

    // edge ids: ((j * nx + i) * 2): horizontal (i,j)-(i+1,j); +1: vertical (i,j)-(i,j+1)
    auto hedge = [&](int i, int j) { return (j * nx + i) * 2; };
    auto vedge = [&](int i, int j) { return (j * nx + i) * 2 + 1; };

    std::vector<Seg> segs;
    std::map<int, int> seg_by_from;

    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const double v00 = val(i, j), v10 = val(i + 1, j);
            const double v01 = val(i, j + 1), v11 = val(i + 1, j + 1);
            struct Crossing {
                int edge;
                Vec2 pt;       // physical
                double lx, ly; // local square coords
            };
            std::vector<Crossing> xs;
            auto lerp_pt = [&](double va, double vb) { return (th - va) / (vb - va); };
            if ((v00 > th) != (v10 > th)) {
                const double t = lerp_pt(v00, v10);
                xs.push_back({hedge(i, j),
                              {spec.center(i, j).x + t * spec.dx, spec.center(i, j).y}, t, 0.0});
            }
            if ((v10 > th) != (v11 > th)) {
                const double t = lerp_pt(v10, v11);
                xs.push_back({vedge(i + 1, j),
                              {spec.center(i + 1, j).x, spec.center(i + 1, j).y + t * spec.dx},
                              1.0, t});
            }
            if ((v01 > th) != (v11 > th)) {
                const double t = lerp_pt(v01, v11);
                xs.push_back({hedge(i, j + 1),
                              {spec.center(i, j + 1).x + t * spec.dx, spec.center(i, j + 1).y},
                              t, 1.0});
            }
            if ((v00 > th) != (v01 > th)) {
                const double t = lerp_pt(v00, v01);
                xs.push_back({vedge(i, j),
                              {spec.center(i, j).x, spec.center(i, j).y + t * spec.dx}, 0.0, t});
            }
            if (xs.empty()) continue;

            auto emit = [&](const Crossing& a, const Crossing& b) {
                // orient so the inside (value > th) lies on the left
                const double mx = 0.5 * (a.lx + b.lx), my = 0.5 * (a.ly + b.ly);
                double dxl = b.lx - a.lx, dyl = b.ly - a.ly;
                const double dn = std::hypot(dxl, dyl);
                if (dn < 1e-12) return;
                dxl /= dn; dyl /= dn;
                const double px = std::clamp(mx - 0.05 * dyl, 0.0, 1.0);
                const double py = std::clamp(my + 0.05 * dxl, 0.0, 1.0);
                const bool left_inside = bilinear(v00, v10, v01, v11, px, py) > th;
                Seg s;
                if (left_inside) s = {a.edge, b.edge, a.pt, b.pt};
                else s = {b.edge, a.edge, b.pt, a.pt};
                seg_by_from[s.from_edge] = static_cast<int>(segs.size());
                segs.push_back(s);
            };

            if (xs.size() == 2) {
                emit(xs[0], xs[1]);
            } else if (xs.size() == 4) {
                // ambiguous saddle; pair by the center value
                const double vc = 0.25 * (v00 + v10 + v01 + v11);
                // xs order: bottom(0), right(1), top(2), left(3)
                if (vc > th) {
                    emit(xs[0], xs[1]);
                    emit(xs[2], xs[3]);
                } else {
                    emit(xs[1], xs[2]);
                    emit(xs[3], xs[0]);
                }
            }
        }
    }

    std::vector<Contour> out;
    std::vector<bool> used(segs.size(), false);
    for (size_t start = 0; start < segs.size(); ++start) {
        if (used[start]) continue;
        std::vector<Vec2> loop;
        size_t cur = start;
        while (!used[cur]) {
            used[cur] = true;
            loop.push_back(segs[cur].from_pt);
            auto it = seg_by_from.find(segs[cur].to_edge);
            if (it == seg_by_from.end()) break;  // open chain, should not happen
            cur = static_cast<size_t>(it->second);
        }
        if (loop.size() < 4) continue;
        Contour c;
        c.pts = resample_closed(loop, spec.dx);
        c.outer = c.signed_area() > 0.0;
        if (c.length() > 4.0 * spec.dx) out.push_back(std::move(c));
    }
    // largest first
    std::sort(out.begin(), out.end(), [](const Contour& a, const Contour& b) {
        return std::abs(a.signed_area()) > std::abs(b.signed_area());
    });
    return out;
}

CurvatureProfile curvature_profile(const Contour& c, const AnisoNorm& phi, double sigma) {
    if (c.pts.size() < 32) throw Error("curvature_profile: contour needs >= 32 samples");
    const double total = c.length();

    // resample to uniform arclength; input spacing is arbitrary
    std::vector<Vec2> pts;
    {
        const size_t m = c.pts.size();
        pts.resize(m);
        const double step = total / static_cast<double>(m);
        size_t seg = 0;
        double seg_start = 0.0;
        double seg_len = (c.pts[1 % m] - c.pts[0]).norm();
        for (size_t j = 0; j < m; ++j) {
            const double s = step * static_cast<double>(j);
            while (seg_start + seg_len < s && seg + 1 < m) {
                seg_start += seg_len;
                ++seg;
                seg_len = (c.pts[(seg + 1) % m] - c.pts[seg]).norm();
            }
            const double t = seg_len > 0.0 ? (s - seg_start) / seg_len : 0.0;
            const Vec2 a = c.pts[seg], b = c.pts[(seg + 1) % m];
            pts[j] = a + std::clamp(t, 0.0, 1.0) * (b - a);
        }
    }
    const size_t n = pts.size();
    const double ds = total / static_cast<double>(n);

    // tangent angles, unwrapped
    std::vector<double> theta(n);
    double prev = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 d = pts[(i + 1) % n] - pts[(i + n - 1) % n];
        double a = std::atan2(d.y, d.x);
        if (i > 0) {
            while (a - prev > kPi) a -= 2.0 * kPi;
            while (a - prev < -kPi) a += 2.0 * kPi;
        }
        theta[i] = a;
        prev = a;
    }
    // winding from closing the loop
    {
        const Vec2 d = c.pts[1 % n] - c.pts[n - 1];
        double a = std::atan2(d.y, d.x);
        while (a - prev > kPi) a -= 2.0 * kPi;
        while (a - prev < -kPi) a += 2.0 * kPi;
        prev = a;
    }
    const int winding = static_cast<int>(std::lround((prev - theta[0]) / (2.0 * kPi)));

    // periodic smoothing of the residual after removing the winding ramp
    std::vector<double> smoothed = theta;
    if (sigma > 0.0) {
        std::vector<double> resid(n);
        for (size_t i = 0; i < n; ++i)
            resid[i] = theta[i] - 2.0 * kPi * winding * static_cast<double>(i) / static_cast<double>(n);
        const double sig_samples = sigma / ds;
        const int rad = std::max(1, static_cast<int>(std::ceil(3.0 * sig_samples)));
        std::vector<double> ker(2 * rad + 1);
        double ksum = 0.0;
        for (int k = -rad; k <= rad; ++k)
            ksum += ker[k + rad] = std::exp(-0.5 * k * k / (sig_samples * sig_samples));
        for (size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int k = -rad; k <= rad; ++k)
                acc += ker[k + rad] * resid[(i + n + k) % n];
            smoothed[i] = acc / ksum +
                          2.0 * kPi * winding * static_cast<double>(i) / static_cast<double>(n);
        }
    }

    CurvatureProfile p;
    p.s.resize(n);
    p.normal_angle.resize(n);
    p.kappa.resize(n);
    p.kappa_phi.resize(n);
    p.length = total;
    p.winding = winding;
    double sum_kphi = 0.0, sum_gamma = 0.0, sum_kphi_gamma = 0.0;
    for (size_t i = 0; i < n; ++i) {
        p.s[i] = ds * static_cast<double>(i);
        // neighbors wrap with the winding ramp continued across the seam
        const double fwd = smoothed[(i + 1) % n] + (i + 1 >= n ? 2.0 * kPi * winding : 0.0);
        const double bwd = smoothed[(i + n - 1) % n] - (i == 0 ? 2.0 * kPi * winding : 0.0);
        const double kap = (fwd - bwd) / (2.0 * ds);
        const double na = smoothed[i] - kPi / 2.0;
        const GammaJet j = phi.gamma_jet(na);
        p.normal_angle[i] = na;
        p.kappa[i] = kap;
        p.kappa_phi[i] = kap * (j.g + j.ddg);
        sum_kphi += p.kappa_phi[i];
        sum_gamma += j.g;
        sum_kphi_gamma += p.kappa_phi[i] * j.g;
    }
    p.kbar_phi = sum_kphi / static_cast<double>(n);
    p.p_phi = sum_gamma * ds;
    p.ktilde_phi = sum_kphi_gamma * ds / p.p_phi;
    double acc = 0.0;
    for (double k : p.kappa_phi) acc += (k - p.kbar_phi) * (k - p.kbar_phi);
    p.eps = std::sqrt(acc * ds);
    return p;
}

double gauss_bonnet(const Contour& c, const AnisoNorm& phi, double sigma) {
    const CurvatureProfile p = curvature_profile(c, phi, sigma);
    const double ds = p.length / static_cast<double>(p.s.size());
    double acc = 0.0;
    for (size_t i = 0; i < p.kappa_phi.size(); ++i)
        acc += p.kappa_phi[i] * phi.gamma(p.normal_angle[i]) * ds;
    return acc;
}

namespace {

// count intersections of the ray x + t u (t > 0) with the closed polyline
int ray_crossings(const std::vector<Vec2>& pts, Vec2 x, Vec2 u) {
    int count = 0;
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = pts[i] - x, b = pts[(i + 1) % n] - x;
        const double ca = u.cross(a), cb = u.cross(b);
        if ((ca > 0) == (cb > 0)) continue;
        const double s = ca / (ca - cb);
        const Vec2 p = a + s * (b - a);
        if (p.dot(u) > 0) ++count;
    }
    return count;
}

// signed distance along direction u from point x to the polyline (smallest |t|)
std::optional<double> line_hit(const std::vector<Vec2>& pts, Vec2 x, Vec2 u) {
    const size_t n = pts.size();
    double best = 0.0;
    bool found = false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = pts[i] - x, b = pts[(i + 1) % n] - x;
        const double ca = u.cross(a), cb = u.cross(b);
        if ((ca > 0) == (cb > 0)) continue;
        const double s = ca / (ca - cb);
        const Vec2 p = a + s * (b - a);
        const double t = p.dot(u);
        if (!found || std::abs(t) < std::abs(best)) {
            best = t;
            found = true;
        }
    }
    if (!found) return std::nullopt;
    return best;
}

Vec2 polygon_centroid(const std::vector<Vec2>& pts) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 p = pts[i], q = pts[(i + 1) % n];
        const double w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    a *= 0.5;
    return {cx / (6.0 * a), cy / (6.0 * a)};
}

}  // namespace

WulffFit fit_wulff_union(const std::vector<Contour>& contours, const AnisoNorm& phi,
                         int n_theta) {
    const double wa = phi.wulff_area();
    WulffFit fit;
    double sum_r2 = 0.0;
    for (const Contour& c : contours) {
        if (!c.outer) continue;
        WulffComponentFit comp;
        const double carea = c.signed_area();
        comp.r_individual = std::sqrt(std::max(carea, 0.0) / wa);

        Vec2 x = polygon_centroid(c.pts);
        // star-shapedness about the centroid by ray casting
        for (int k = 0; k < 64 && comp.star_shaped; ++k) {
            const double t = 2.0 * kPi * k / 64;
            if (ray_crossings(c.pts, x, {std::cos(t), std::sin(t)}) != 1)
                comp.star_shaped = false;
        }
        if (!comp.star_shaped) {
            comp.center = x;
            fit.degenerate = true;
            sum_r2 += comp.r_individual * comp.r_individual;
            fit.components.push_back(std::move(comp));
            ++fit.d;
            continue;
        }

        // center: least-squares flatness of the dual gauge over boundary samples
        std::vector<Vec2> samples;
        const size_t stride = std::max<size_t>(1, c.pts.size() / 128);
        for (size_t i = 0; i < c.pts.size(); i += stride) samples.push_back(c.pts[i]);
        auto objective = [&](Vec2 cand) {
            double mean = 0.0;
            std::vector<double> g(samples.size());
            for (size_t i = 0; i < samples.size(); ++i) mean += g[i] = phi.dual(samples[i] - cand);
            mean /= static_cast<double>(samples.size());
            double acc = 0.0;
            for (double v : g) acc += (v - mean) * (v - mean);
            return acc;
        };
        double span = 0.5 * comp.r_individual;
        for (int sweep = 0; sweep < 4; ++sweep) {
            for (int coord = 0; coord < 2; ++coord) {
                double lo = (coord == 0 ? x.x : x.y) - span;
                double hi = (coord == 0 ? x.x : x.y) + span;
                const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
                double a = lo, b = hi;
                double c1 = b - gr * (b - a), d1 = a + gr * (b - a);
                auto f1 = [&](double v) {
                    Vec2 cand = x;
                    (coord == 0 ? cand.x : cand.y) = v;
                    return objective(cand);
                };
                double fc = f1(c1), fd = f1(d1);
                while (b - a > 1e-4 * comp.r_individual) {
                    if (fc < fd) { b = d1; d1 = c1; fd = fc; c1 = b - gr * (b - a); fc = f1(c1); }
                    else { a = c1; c1 = d1; fc = fd; d1 = a + gr * (b - a); fd = f1(d1); }
                }
                (coord == 0 ? x.x : x.y) = 0.5 * (a + b);
            }
            span *= 0.4;
        }
        comp.center = x;
        sum_r2 += comp.r_individual * comp.r_individual;
        fit.components.push_back(std::move(comp));
        ++fit.d;
    }
    if (fit.d == 0) return fit;
    fit.r = std::sqrt(sum_r2 / fit.d);

    // normal graphs against the uniform-radius Wulff shapes
    for (auto& comp : fit.components) {
        if (!comp.star_shaped) continue;
        comp.f.assign(n_theta, 0.0);
        const Contour* src = nullptr;
        // match component back to its contour by center containment
        for (const Contour& c : contours) {
            if (!c.outer) continue;
            if (ray_crossings(c.pts, comp.center, {1.0, 0.0}) == 1) { src = &c; break; }
        }
        if (!src) continue;
        double fmax = 0.0, c1max = 0.0;
        std::vector<double> fs(n_theta, 0.0);
        for (int k = 0; k < n_theta; ++k) {
            const double t = 2.0 * kPi * k / n_theta;
            const Vec2 base = comp.center + fit.r * phi.cahn_hoffman(t);
            const Vec2 nu{std::cos(t), std::sin(t)};
            const auto hit = line_hit(src->pts, base, nu);
            fs[k] = hit.value_or(0.0);
            fmax = std::max(fmax, std::abs(fs[k]));
        }
        for (int k = 0; k < n_theta; ++k) {
            const double t = 2.0 * kPi * k / n_theta;
            const GammaJet j = phi.gamma_jet(t);
            const double darc = fit.r * (j.g + j.ddg) * 2.0 * kPi / n_theta;
            const double df = std::abs(fs[(k + 1) % n_theta] - fs[k]);
            if (darc > 0) c1max = std::max(c1max, df / darc);
        }
        comp.f = std::move(fs);
        comp.f_sup = fmax;
        comp.f_c1 = fmax + c1max;
    }
    return fit;
}

static AlexandrovReport alexandrovFromProfiles(const std::vector<CurvatureProfile>& profiles,
                                        const AnisoNorm& phi, double m,
                                        const WulffFit* fit) {
    AlexandrovReport rep;
    double total_len = 0.0, sum_kphi_ds = 0.0, p_phi = 0.0;
    for (const auto& p : profiles) {
        total_len += p.length;
        sum_kphi_ds += p.kbar_phi * p.length;
        p_phi += p.p_phi;
    }
    rep.kbar_phi = sum_kphi_ds / total_len;
    double acc = 0.0;
    for (const auto& p : profiles) {
        const double ds = p.length / static_cast<double>(p.s.size());
        for (double k : p.kappa_phi) acc += (k - rep.kbar_phi) * (k - rep.kbar_phi) * ds;
    }
    rep.eps = std::sqrt(acc);
    rep.p_phi = p_phi;
    const double wa = phi.wulff_area();
    double best_gap = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= 20; ++d) {
        const double pd = 2.0 * std::sqrt(wa * m * d);
        const double gap = std::abs(p_phi - pd);
        if (gap < best_gap) {
            best_gap = gap;
            rep.d = d;
            rep.p_d = pd;
        }
    }
    rep.gap = best_gap;
    rep.ratio = rep.eps > 0 ? rep.gap / (rep.eps * rep.eps) : 0.0;
    rep.far_from_critical = rep.gap > 0.1 * rep.p_phi;
    if (fit && fit->d > 0 && !fit->degenerate) {
        double spread = 0.0;
        for (const auto& comp : fit->components)
            spread = std::max(spread, std::abs(comp.r_individual - fit->r));
        rep.radii_spread = fit->r > 0 ? spread / fit->r : 0.0;
    }
    return rep;
}

AlexandrovReport alexandrov_report(const std::vector<Contour>& contours, const AnisoNorm& phi,
                                   double m, double sigma) {
    if (contours.empty()) throw Error("alexandrov_report: no contours");
    std::vector<CurvatureProfile> profiles;
    for (const auto& c : contours) profiles.push_back(curvature_profile(c, phi, sigma));
    const WulffFit fit = fit_wulff_union(contours, phi);
    return alexandrovFromProfiles(profiles, phi, m, &fit);
}

AlexandrovReport alexandrov_report(const GridSet& e, const AnisoNorm& phi, double m) {
    const auto contours = extract_contours(e);
    return alexandrov_report(contours, phi, m, 15.0 * e.spec.dx);
}

double curvature_deviation(const GridSet& e, const AnisoNorm& phi) {
    const auto contours = extract_contours(e);
    std::vector<CurvatureProfile> profiles;
    for (const auto& c : contours)
        profiles.push_back(curvature_profile(c, phi, 15.0 * e.spec.dx));
    return alexandrovFromProfiles(profiles, phi, area(e), nullptr).eps;
}

std::vector<Vec2> normal_perturbation_curve(const AnisoNorm& phi, Vec2 center, double r,
                                            const std::vector<double>& f) {
    const size_t n = f.size();
    std::vector<Vec2> pts(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
        const Vec2 nu{std::cos(t), std::sin(t)};
        pts[i] = center + r * phi.cahn_hoffman(t) + f[i] * nu;
    }
    return pts;
}

PerturbationCheck area_expansion_check(const std::vector<double>& f, const AnisoNorm& phi) {
    const size_t n = f.size();
    const std::vector<double> fp = spectral_derivative(f);
    const double dth = 2.0 * kPi / static_cast<double>(n);

    double area2 = 0.0, lin = 0.0, quad = 0.0, wa2 = 0.0, per = 0.0, pw = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double t = dth * static_cast<double>(i);
        const GammaJet j = phi.gamma_jet(t);
        const double gpp = j.g + j.ddg;
        if ((j.g + f[i]) * (gpp + f[i]) - j.dg * fp[i] <= 0.0)
            throw Error("area_expansion_check: perturbation too large, omega' changes sign");
        const double c = std::cos(t), s = std::sin(t);
        const Vec2 nu{c, s}, tau{-s, c};
        const Vec2 u = (j.g + f[i]) * nu + j.dg * tau;
        const Vec2 up = fp[i] * nu + (gpp + f[i]) * tau;
        area2 += u.cross(up);
        lin += f[i] * gpp;
        quad += f[i] * f[i];
        wa2 += j.g * gpp;
        // normal to the right of the tangent direction
        const double na = std::atan2(-up.x, up.y);
        per += phi.gamma(na) * up.norm();
        pw += j.g * gpp;
    }
    PerturbationCheck out;
    out.area = 0.5 * area2 * dth;
    const double wulff_a = 0.5 * wa2 * dth;
    out.area_residual = out.area - (wulff_a + lin * dth + 0.5 * quad * dth);
    out.perimeter = per * dth;
    const double p_wulff = pw * dth;  // = 2 |W_phi|
    out.perimeter_defect = out.perimeter - p_wulff - lin * dth;
    return out;
}

}  // namespace wf
