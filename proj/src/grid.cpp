#include "wulffflow/grid.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <tuple>
#include <queue>

namespace wf {

namespace {

constexpr double kPi = std::numbers::pi;

void check_margin(const GridSet& e) {
    const int nx = e.spec.nx, ny = e.spec.ny;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            if ((ix < 2 || iy < 2 || ix >= nx - 2 || iy >= ny - 2) && e.at(ix, iy))
                throw Error("set touches the two-cell domain margin; enlarge the grid");
}

// half-plane representatives of primitive lattice offsets up to radius 5
std::vector<std::pair<int, int>> stencil_pool() {
    std::vector<std::pair<int, int>> pool;
    for (int x = -5; x <= 5; ++x)
        for (int y = 0; y <= 5; ++y) {
            if (y == 0 && x <= 0) continue;
            if (std::gcd(std::abs(x), y) != 1) continue;
            pool.emplace_back(x, y);
        }
    return pool;
}

// Lawson-Hanson nonnegative least squares, small dense problems.
std::vector<double> nnls(const std::vector<std::vector<double>>& a,
                         const std::vector<double>& b) {
    const int m = static_cast<int>(a.size());
    const int p = static_cast<int>(a[0].size());
    std::vector<double> x(p, 0.0);
    std::vector<bool> passive(p, false);

    auto solve_passive = [&](std::vector<double>& z) {
        std::vector<int> idx;
        for (int j = 0; j < p; ++j)
            if (passive[j]) idx.push_back(j);
        const int q = static_cast<int>(idx.size());
        z.assign(p, 0.0);
        if (q == 0) return;
        std::vector<std::vector<double>> ata(q, std::vector<double>(q + 1, 0.0));
        for (int r = 0; r < q; ++r) {
            for (int c = 0; c < q; ++c) {
                double s = 0.0;
                for (int i = 0; i < m; ++i) s += a[i][idx[r]] * a[i][idx[c]];
                ata[r][c] = s;
            }
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += a[i][idx[r]] * b[i];
            ata[r][q] = s;
        }
        for (int c = 0; c < q; ++c) {  // gaussian elimination, partial pivot
            int piv = c;
            for (int r = c + 1; r < q; ++r)
                if (std::abs(ata[r][c]) > std::abs(ata[piv][c])) piv = r;
            std::swap(ata[c], ata[piv]);
            if (std::abs(ata[c][c]) < 1e-14) continue;
            for (int r = c + 1; r < q; ++r) {
                double f = ata[r][c] / ata[c][c];
                for (int k = c; k <= q; ++k) ata[r][k] -= f * ata[c][k];
            }
        }
        for (int r = q - 1; r >= 0; --r) {
            double s = ata[r][q];
            for (int c = r + 1; c < q; ++c) s -= ata[r][c] * z[idx[c]];
            z[idx[r]] = std::abs(ata[r][r]) < 1e-14 ? 0.0 : s / ata[r][r];
        }
    };

    for (int iter = 0; iter < 10 * p; ++iter) {
        // gradient of 1/2 |Ax - b|^2
        std::vector<double> w(p, 0.0);
        std::vector<double> resid(m);
        for (int i = 0; i < m; ++i) {
            double s = -b[i];
            for (int j = 0; j < p; ++j) s += a[i][j] * x[j];
            resid[i] = s;
        }
        for (int j = 0; j < p; ++j) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += a[i][j] * resid[i];
            w[j] = -s;
        }
        int best = -1;
        double bw = 1e-10;
        for (int j = 0; j < p; ++j)
            if (!passive[j] && w[j] > bw) { bw = w[j]; best = j; }
        if (best < 0) break;
        passive[best] = true;

        for (int inner = 0; inner < 10 * p; ++inner) {
            std::vector<double> z;
            solve_passive(z);
            bool feasible = true;
            for (int j = 0; j < p; ++j)
                if (passive[j] && z[j] <= 0.0) feasible = false;
            if (feasible) {
                x = z;
                break;
            }
            double alpha = 1.0;
            for (int j = 0; j < p; ++j)
                if (passive[j] && z[j] <= 0.0 && x[j] > z[j])
                    alpha = std::min(alpha, x[j] / (x[j] - z[j]));
            for (int j = 0; j < p; ++j)
                if (passive[j]) x[j] += alpha * (z[j] - x[j]);
            for (int j = 0; j < p; ++j)
                if (passive[j] && x[j] <= 1e-12) { x[j] = 0.0; passive[j] = false; }
        }
    }
    return x;
}

}  // namespace

size_t GridSet::count() const {
    size_t c = 0;
    for (uint8_t v : mask) c += v;
    return c;
}

GridSet make_grid_set(const GridSpec& spec) {
    if (spec.dx <= 0.0 || spec.nx <= 0 || spec.ny <= 0)
        throw Error("grid spec: dx, nx, ny must be positive");
    if (spec.cells() > size_t(64) * 1024 * 1024)
        throw Error("grid spec: cell budget exceeded");
    GridSet e;
    e.spec = spec;
    e.mask.assign(spec.cells(), 0);
    return e;
}

GridSet rasterize(const std::vector<std::vector<Vec2>>& polygons, const GridSpec& spec) {
    GridSet e = make_grid_set(spec);
    if (polygons.empty()) return e;
    for (int iy = 0; iy < spec.ny; ++iy) {
        const double y = spec.center(0, iy).y;
        std::vector<double> xs;
        for (const auto& poly : polygons) {
            const size_t n = poly.size();
            for (size_t i = 0; i < n; ++i) {
                const Vec2 p = poly[i], q = poly[(i + 1) % n];
                if ((p.y <= y) == (q.y <= y)) continue;
                xs.push_back(p.x + (y - p.y) / (q.y - p.y) * (q.x - p.x));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (size_t i = 0; i + 1 < xs.size(); i += 2) {
            int lo = static_cast<int>(std::ceil((xs[i] - spec.origin.x) / spec.dx - 0.5));
            int hi = static_cast<int>(std::floor((xs[i + 1] - spec.origin.x) / spec.dx - 0.5));
            lo = std::max(lo, 0);
            hi = std::min(hi, spec.nx - 1);
            for (int ix = lo; ix <= hi; ++ix) e.set(ix, iy, true);
        }
    }
    check_margin(e);
    return e;
}

double area(const GridSet& e) { return static_cast<double>(e.count()) * e.spec.dx * e.spec.dx; }

size_t sym_diff_cells(const GridSet& a, const GridSet& b) {
    if (!(a.spec == b.spec)) throw Error("sym_diff: mismatched grid specs");
    size_t c = 0;
    for (size_t i = 0; i < a.mask.size(); ++i) c += (a.mask[i] != b.mask[i]);
    return c;
}

double sym_diff_area(const GridSet& a, const GridSet& b) {
    return static_cast<double>(sym_diff_cells(a, b)) * a.spec.dx * a.spec.dx;
}

std::vector<Vec2> boundary_midpoints(const GridSet& f) {
    std::vector<Vec2> pts;
    const int nx = f.spec.nx, ny = f.spec.ny;
    const double dx = f.spec.dx;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const bool v = f.at(ix, iy);
            if (ix + 1 < nx && v != f.at(ix + 1, iy)) {
                Vec2 c = f.spec.center(ix, iy);
                pts.push_back({c.x + 0.5 * dx, c.y});
            }
            if (iy + 1 < ny && v != f.at(ix, iy + 1)) {
                Vec2 c = f.spec.center(ix, iy);
                pts.push_back({c.x, c.y + 0.5 * dx});
            }
        }
    }
    return pts;
}

namespace {

ScalarField exact_distance(const GridSet& f, const AnisoNorm& psi) {
    const GridSpec& spec = f.spec;
    const std::vector<Vec2> pts = boundary_midpoints(f);
    const double L = psi.norm_equivalence_constant();

    // Bucket the boundary points for pruned nearest search.
    const int bsize = 8;  // cells per bucket side
    const int bnx = (spec.nx + bsize - 1) / bsize;
    const int bny = (spec.ny + bsize - 1) / bsize;
    std::vector<std::vector<int>> buckets(static_cast<size_t>(bnx) * bny);
    for (size_t i = 0; i < pts.size(); ++i) {
        int bx = std::clamp(static_cast<int>((pts[i].x - spec.origin.x) / (bsize * spec.dx)), 0, bnx - 1);
        int by = std::clamp(static_cast<int>((pts[i].y - spec.origin.y) / (bsize * spec.dx)), 0, bny - 1);
        buckets[static_cast<size_t>(by) * bnx + bx].push_back(static_cast<int>(i));
    }

    ScalarField sd;
    sd.spec = spec;
    sd.value.assign(spec.cells(), 0.0);
    const double bw = bsize * spec.dx;

    for (int iy = 0; iy < spec.ny; ++iy) {
        for (int ix = 0; ix < spec.nx; ++ix) {
            const Vec2 c = spec.center(ix, iy);
            const int cbx = ix / bsize, cby = iy / bsize;
            double best = std::numeric_limits<double>::infinity();
            for (int ring = 0; ring < std::max(bnx, bny); ++ring) {
                // euclidean lower bound to any bucket on this ring
                const double lb = ring == 0 ? 0.0 : (ring - 1) * bw;
                if (lb / L >= best) break;
                bool any = false;
                for (int by = cby - ring; by <= cby + ring; ++by) {
                    if (by < 0 || by >= bny) continue;
                    for (int bx = cbx - ring; bx <= cbx + ring; ++bx) {
                        if (bx < 0 || bx >= bnx) continue;
                        if (std::max(std::abs(bx - cbx), std::abs(by - cby)) != ring) continue;
                        any = true;
                        for (int pi : buckets[static_cast<size_t>(by) * bnx + bx]) {
                            const double d = psi.eval(c - pts[pi]);
                            if (d < best) best = d;
                        }
                    }
                }
                if (!any && ring > std::max(bnx, bny)) break;
            }
            sd.value[static_cast<size_t>(iy) * spec.nx + ix] = f.at(ix, iy) ? -best : best;
        }
    }
    return sd;
}

ScalarField fast_distance(const GridSet& f, const AnisoNorm& psi) {
    const GridSpec& spec = f.spec;
    const double dx = spec.dx;
    const std::vector<std::pair<int, int>> reps = {
        {1, 0},  {0, 1},  {1, 1}, {-1, 1}, {2, 1},  {1, 2},  {-1, 2}, {-2, 1},
        {3, 1},  {1, 3},  {-1, 3}, {-3, 1}, {3, 2},  {2, 3},  {-2, 3}, {-3, 2}};
    std::vector<std::pair<int, int>> offs;
    std::vector<double> olen;
    for (auto [ox, oy] : reps) {
        offs.push_back({ox, oy});
        offs.push_back({-ox, -oy});
    }
    for (auto [ox, oy] : offs) olen.push_back(psi.eval({ox * dx, oy * dx}));

    const size_t n = spec.cells();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;

    // seed: cells adjacent to the boundary, exact local distance
    for (int iy = 0; iy < spec.ny; ++iy) {
        for (int ix = 0; ix < spec.nx; ++ix) {
            const bool v = f.at(ix, iy);
            double d0 = std::numeric_limits<double>::infinity();
            const int dx4[4] = {1, -1, 0, 0}, dy4[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int jx = ix + dx4[k], jy = iy + dy4[k];
                if (jx < 0 || jy < 0 || jx >= spec.nx || jy >= spec.ny) continue;
                if (f.at(jx, jy) != v)
                    d0 = std::min(d0, psi.eval({dx4[k] * 0.5 * dx, dy4[k] * 0.5 * dx}));
            }
            if (d0 < std::numeric_limits<double>::infinity()) {
                const size_t id = static_cast<size_t>(iy) * spec.nx + ix;
                dist[id] = d0;
                pq.push({d0, id});
            }
        }
    }
    while (!pq.empty()) {
        auto [d, id] = pq.top();
        pq.pop();
        if (d > dist[id]) continue;
        const int ix = static_cast<int>(id % spec.nx), iy = static_cast<int>(id / spec.nx);
        for (size_t k = 0; k < offs.size(); ++k) {
            const int jx = ix + offs[k].first, jy = iy + offs[k].second;
            if (jx < 0 || jy < 0 || jx >= spec.nx || jy >= spec.ny) continue;
            const size_t jd = static_cast<size_t>(jy) * spec.nx + jx;
            const double nd = d + olen[k];
            if (nd < dist[jd]) {
                dist[jd] = nd;
                pq.push({nd, jd});
            }
        }
    }
    ScalarField sd;
    sd.spec = spec;
    sd.value.assign(n, 0.0);
    for (int iy = 0; iy < spec.ny; ++iy)
        for (int ix = 0; ix < spec.nx; ++ix) {
            const size_t id = static_cast<size_t>(iy) * spec.nx + ix;
            sd.value[id] = f.at(ix, iy) ? -dist[id] : dist[id];
        }
    return sd;
}

}  // namespace

ScalarField signed_distance_field(const GridSet& f, const AnisoNorm& psi, DistanceMode mode) {
    const size_t c = f.count();
    if (c == 0 || c == f.spec.cells())
        throw Error("signed_distance_field: set must be nonempty and not full");
    return mode == DistanceMode::Exact ? exact_distance(f, psi) : fast_distance(f, psi);
}

namespace {

constexpr int kFitDirs = 256;

std::vector<std::vector<double>> design_matrix(const std::vector<std::pair<int, int>>& reps) {
    std::vector<std::vector<double>> a(kFitDirs, std::vector<double>(reps.size()));
    for (int j = 0; j < kFitDirs; ++j) {
        const double t = kPi * (j + 0.5) / kFitDirs;
        for (size_t i = 0; i < reps.size(); ++i)
            a[j][i] = std::abs(reps[i].first * std::cos(t) + reps[i].second * std::sin(t));
    }
    return a;
}

// Iteratively reweighted NNLS (Lawson): drives the weighted least-squares
// fit toward the minimax solution over the direction set.  `wt` carries the
// direction weights in and out so successive calls can warm-start.
std::pair<std::vector<double>, double> lawson_fit(const std::vector<std::vector<double>>& a,
                                                  const std::vector<double>& b, int iters,
                                                  std::vector<double>& wt) {
    const int m = kFitDirs;
    const int p = static_cast<int>(a[0].size());
    std::vector<double> best_w;
    double best_err = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> aw(m, std::vector<double>(p));
    std::vector<double> bw(m);
    for (int it = 0; it < iters; ++it) {
        for (int i = 0; i < m; ++i) {
            const double s = std::sqrt(wt[i]);
            for (int j = 0; j < p; ++j) aw[i][j] = a[i][j] * s;
            bw[i] = b[i] * s;
        }
        std::vector<double> w = nnls(aw, bw);
        double err = 0.0;
        double total = 0.0;
        std::vector<double> rel(m);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int j = 0; j < p; ++j) s += a[i][j] * w[j];
            rel[i] = std::abs(s - b[i]) / b[i];
            err = std::max(err, rel[i]);
        }
        if (err < best_err) {
            best_err = err;
            best_w = w;
        }
        for (int i = 0; i < m; ++i) {
            wt[i] *= std::max(rel[i], 1e-15);
            total += wt[i];
        }
        for (int i = 0; i < m; ++i) wt[i] /= total;
    }
    return {best_w, best_err};
}

// prune the pool down to `target` representatives, dropping zero-weight
// offsets in bulk and the weakest one otherwise
std::pair<std::vector<std::pair<int, int>>, double> select_by_pruning(
    const std::vector<double>& b, int target) {
    auto reps = stencil_pool();
    std::vector<double> wt(kFitDirs, 1.0 / kFitDirs);
    auto [w, err] = lawson_fit(design_matrix(reps), b, 12, wt);
    while (static_cast<int>(reps.size()) > target) {
        std::vector<std::pair<int, int>> keep;
        for (size_t i = 0; i < reps.size(); ++i)
            if (w[i] > 1e-12) keep.push_back(reps[i]);
        if (static_cast<int>(keep.size()) >= target && keep.size() < reps.size()) {
            reps = std::move(keep);
        } else {
            size_t drop = 0;
            for (size_t i = 1; i < reps.size(); ++i)
                if (w[i] < w[drop]) drop = i;
            reps.erase(reps.begin() + drop);
        }
        std::tie(w, err) = lawson_fit(design_matrix(reps), b, 8, wt);
    }
    return {reps, err};
}

// nearest lattice representatives to equally spaced angles
std::vector<std::pair<int, int>> select_equiangular(int target) {
    auto pool = stencil_pool();
    std::vector<double> ang(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) {
        double a = std::atan2(static_cast<double>(pool[i].second),
                              static_cast<double>(pool[i].first));
        ang[i] = a < 0.0 ? a + kPi : a;
    }
    std::vector<std::pair<int, int>> reps;
    for (int k = 0; k < target; ++k) {
        const double goal = kPi * k / target;
        size_t best = pool.size();
        double bd = 1e300;
        for (size_t i = 0; i < pool.size(); ++i) {
            if (std::find(reps.begin(), reps.end(), pool[i]) != reps.end()) continue;
            double d = std::abs(ang[i] - goal);
            d = std::min(d, kPi - d);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        reps.push_back(pool[best]);
    }
    return reps;
}

}  // namespace

CroftonStencil perimeter_weights(const AnisoNorm& phi, int order, double max_rel_error) {
    if (order != 4 && order != 8 && order != 16 && order != 32)
        throw Error("perimeter_weights: order must be one of 4, 8, 16, 32");

    std::vector<double> b(kFitDirs);
    for (int j = 0; j < kFitDirs; ++j) {
        const double t = kPi * (j + 0.5) / kFitDirs;
        b[j] = phi.eval({std::cos(t), std::sin(t)});
    }

    std::vector<std::pair<int, int>> reps;
    std::vector<double> w;
    double err;
    if (order == 4) {
        reps = {{1, 0}, {0, 1}};  // axis-only, kept as the designed failure mode
        std::vector<double> wt(kFitDirs, 1.0 / kFitDirs);
        std::tie(w, err) = lawson_fit(design_matrix(reps), b, 40, wt);
    } else {
        const int target = order / 2;
        auto [pruned, perr] = select_by_pruning(b, target);
        auto equi = select_equiangular(target);
        std::vector<double> wt1(kFitDirs, 1.0 / kFitDirs), wt2(kFitDirs, 1.0 / kFitDirs);
        auto [wp, ep] = lawson_fit(design_matrix(pruned), b, 40, wt1);
        auto [we, ee] = lawson_fit(design_matrix(equi), b, 40, wt2);
        if (ep <= ee) {
            reps = std::move(pruned);
            w = std::move(wp);
            err = ep;
        } else {
            reps = std::move(equi);
            w = std::move(we);
            err = ee;
        }
    }

    if (err > max_rel_error)
        throw Error("perimeter_weights: stencil order " + std::to_string(order) +
                    " cannot reach the requested directional accuracy (max error " +
                    std::to_string(err) + ")");
    CroftonStencil s;
    s.order = 2 * static_cast<int>(reps.size());
    s.max_directional_error = err;
    for (size_t i = 0; i < reps.size(); ++i)
        s.entries.push_back({reps[i].first, reps[i].second, w[i]});
    return s;
}

double anisotropic_perimeter(const GridSet& e, const CroftonStencil& s) {
    const int nx = e.spec.nx, ny = e.spec.ny;
    double acc = 0.0;
    for (const auto& ent : s.entries) {
        size_t crossings = 0;
        for (int iy = 0; iy < ny; ++iy) {
            const int jy = iy + ent.dy;
            if (jy < 0 || jy >= ny) continue;
            for (int ix = 0; ix < nx; ++ix) {
                const int jx = ix + ent.dx;
                if (jx < 0 || jx >= nx) continue;
                crossings += (e.at(ix, iy) != e.at(jx, jy));
            }
        }
        acc += ent.weight * static_cast<double>(crossings);
    }
    return acc * e.spec.dx;
}

double hausdorff_sup_distance(const GridSet& a, const GridSet& f, const AnisoNorm& psi) {
    if (!(a.spec == f.spec)) throw Error("hausdorff_sup_distance: mismatched grid specs");
    if (sym_diff_cells(a, f) == 0) return 0.0;
    const ScalarField sd = signed_distance_field(f, psi, DistanceMode::Exact);
    double best = 0.0;
    for (int iy = 0; iy < a.spec.ny; ++iy)
        for (int ix = 0; ix < a.spec.nx; ++ix)
            if (a.at(ix, iy) != f.at(ix, iy))
                best = std::max(best, std::abs(sd.at(ix, iy)));
    return best;
}

void save_grid(const GridSet& e, std::ostream& os) {
    os.write("WFGRID1\n", 8);
    const double hdr[3] = {e.spec.origin.x, e.spec.origin.y, e.spec.dx};
    os.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    const int32_t dims[2] = {e.spec.nx, e.spec.ny};
    os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    // run-length encoding, runs alternate starting from value 0
    std::vector<uint32_t> runs;
    uint8_t cur = 0;
    uint32_t len = 0;
    for (uint8_t v : e.mask) {
        if (v == cur) {
            ++len;
        } else {
            runs.push_back(len);
            cur = v;
            len = 1;
        }
    }
    runs.push_back(len);
    const uint32_t nr = static_cast<uint32_t>(runs.size());
    os.write(reinterpret_cast<const char*>(&nr), sizeof(nr));
    os.write(reinterpret_cast<const char*>(runs.data()), nr * sizeof(uint32_t));
}

GridSet load_grid(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "WFGRID1\n", 8) != 0)
        throw Error("load_grid: bad magic, not a WFGRID1 file");
    double hdr[3];
    int32_t dims[2];
    is.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    is.read(reinterpret_cast<char*>(dims), sizeof(dims));
    GridSpec spec{{hdr[0], hdr[1]}, hdr[2], dims[0], dims[1]};
    GridSet e = make_grid_set(spec);
    uint32_t nr = 0;
    is.read(reinterpret_cast<char*>(&nr), sizeof(nr));
    std::vector<uint32_t> runs(nr);
    is.read(reinterpret_cast<char*>(runs.data()), nr * sizeof(uint32_t));
    if (!is) throw Error("load_grid: truncated file");
    size_t pos = 0;
    uint8_t cur = 0;
    for (uint32_t r : runs) {
        if (pos + r > e.mask.size()) throw Error("load_grid: run overflow");
        std::fill(e.mask.begin() + pos, e.mask.begin() + pos + r, cur);
        pos += r;
        cur = 1 - cur;
    }
    if (pos != e.mask.size()) throw Error("load_grid: run underflow");
    return e;
}

void save_grid_file(const GridSet& e, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for write: " + path);
    save_grid(e, os);
}

GridSet load_grid_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open for read: " + path);
    return load_grid(is);
}

}  // namespace wf
