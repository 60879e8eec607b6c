#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wulffflow/anisotropy.hpp"

namespace wf {

struct GridSpec {
    Vec2 origin;
    double dx = 0.0;
    int nx = 0, ny = 0;

    Vec2 center(int ix, int iy) const {
        return {origin.x + (ix + 0.5) * dx, origin.y + (iy + 0.5) * dx};
    }
    size_t cells() const { return static_cast<size_t>(nx) * ny; }
    bool operator==(const GridSpec& o) const {
        return origin.x == o.origin.x && origin.y == o.origin.y && dx == o.dx &&
               nx == o.nx && ny == o.ny;
    }
};

// Rasterized bounded set; the mask never touches the outer two-cell rim.
struct GridSet {
    GridSpec spec;
    std::vector<uint8_t> mask;  // row-major, iy * nx + ix

    bool at(int ix, int iy) const {
        if (ix < 0 || iy < 0 || ix >= spec.nx || iy >= spec.ny) return false;
        return mask[static_cast<size_t>(iy) * spec.nx + ix] != 0;
    }
    void set(int ix, int iy, bool v) {
        mask[static_cast<size_t>(iy) * spec.nx + ix] = v ? 1 : 0;
    }
    size_t count() const;
    bool empty_set() const { return count() == 0; }
};

struct ScalarField {
    GridSpec spec;
    std::vector<double> value;

    double at(int ix, int iy) const { return value[static_cast<size_t>(iy) * spec.nx + ix]; }
};

enum class DistanceMode { Exact, Fast };

// Offset/weight table whose lattice cut value approximates P_phi.
// Offsets are stored as half-plane representatives; the negated partner
// is implied.
struct CroftonStencil {
    struct Entry {
        int dx, dy;
        double weight;
    };
    std::vector<Entry> entries;
    int order = 0;                   // total offsets including negations
    double max_directional_error = 0.0;  // relative, over fitted directions
};

GridSet make_grid_set(const GridSpec& spec);

// Cell centers inside the even-odd interior of the polygon list.
GridSet rasterize(const std::vector<std::vector<Vec2>>& polygons, const GridSpec& spec);

double area(const GridSet& e);
double sym_diff_area(const GridSet& a, const GridSet& b);
size_t sym_diff_cells(const GridSet& a, const GridSet& b);

// Signed psi-distance sampled at cell centers: negative inside, positive
// outside.  Exact mode minimizes psi(x - y) over boundary cell-edge
// midpoints; fast mode relaxes over a 32-neighborhood graph and
// overestimates by at most ~3%.
ScalarField signed_distance_field(const GridSet& f, const AnisoNorm& psi,
                                  DistanceMode mode = DistanceMode::Exact);

// Nonnegative least-squares fit of stencil weights so half-plane cuts
// reproduce phi(nu) across 256 directions.  Throws when the residual
// exceeds max_rel_error.
CroftonStencil perimeter_weights(const AnisoNorm& phi, int order, double max_rel_error = 0.02);

double anisotropic_perimeter(const GridSet& e, const CroftonStencil& s);

double hausdorff_sup_distance(const GridSet& a, const GridSet& f, const AnisoNorm& psi);

// Boundary-adjacent cell-edge midpoints of the mask (4-neighborhood).
std::vector<Vec2> boundary_midpoints(const GridSet& f);

void save_grid(const GridSet& e, std::ostream& os);
GridSet load_grid(std::istream& is);
void save_grid_file(const GridSet& e, const std::string& path);
GridSet load_grid_file(const std::string& path);

}  // namespace wf
