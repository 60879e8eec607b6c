#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/grid.hpp"

namespace wf {

enum class VolumeBranch { Interior, Under, Over, Pinned };

std::string to_string(VolumeBranch b);

struct FlowParams {
    double h = 0.0;        // time step
    double m = 0.0;        // target area
    AnisoNorm phi = AnisoNorm::euclidean();
    AnisoNorm psi = AnisoNorm::euclidean();
    int stencil_order = 16;
    double lambda_tol = 0.0;  // area units; defaults to dx^2 when 0
    int max_steps = 200;
    int snapshot_stride = 10;
    bool compute_eps = true;

    // dx <= h/4 and lambda_tol <= dx^2
    void validate(double dx);
};

struct StepReport {
    int step = 0;
    double perimeter = 0.0;    // stencil cut value of E_{k+1}
    double area = 0.0;
    double dissipation = 0.0;
    double mu = 0.0;
    VolumeBranch branch = VolumeBranch::Interior;
    double area_gap = 0.0;     // |area - m| at the accepted candidate
    double sup_move = 0.0;     // sup over E_{k+1} Delta E_k of d^psi
    double eps = 0.0;          // curvature-deviation proxy
    double lyapunov = 0.0;     // perimeter + penalty
    double slack = 0.0;        // Lyapunov increase over the previous step, if any
    bool linf_ok = true;
    int cut_solves = 0;
    double wall_ms = 0.0;
};

struct FlowTrace {
    std::vector<StepReport> reports;
    std::vector<std::pair<int, GridSet>> snapshots;  // (step index, state)
    GridSet final_state;
    double initial_perimeter = 0.0;
    double initial_lyapunov = 0.0;
    bool stopped_early = false;
    bool vanished = false;
    double h = 0.0;
    double m = 0.0;
};

struct StopCriteria {
    bool enabled = true;
    double threshold_factor = 1e-2;  // times dx * P_phi(E0)
    int patience = 10;
    int check_stride = 5;
};

// c(x) = ((1/h) sd(x) + mu) * dx^2, the cost of including cell x.
ScalarField unary_costs(const ScalarField& sd, double h, double mu);

// Global minimizer of the cut energy: stencil pair costs plus unary costs.
// Among minimizers returns the minimal one (canonical source-side cut).
// When bracket sets are given the solve is restricted to superset \ subset;
// cells of subset are pinned in, cells outside superset pinned out.  Valid
// whenever the minimizer is known to nest between the two.
GridSet min_cut_solve(const ScalarField& unary, const CroftonStencil& stencil,
                      const GridSet* subset = nullptr, const GridSet* superset = nullptr);

double dissipation(const GridSet& e, const GridSet& f, const ScalarField& sd_f);
double dissipation(const GridSet& e, const GridSet& f, const AnisoNorm& psi);

struct MultiplierResult {
    GridSet e;
    double mu = 0.0;
    VolumeBranch branch = VolumeBranch::Interior;
    double area_gap = 0.0;
    int cut_solves = 0;
};

MultiplierResult volume_multiplier_search(const GridSet& f, const ScalarField& sd_f,
                                          const FlowParams& params,
                                          const CroftonStencil& stencil,
                                          std::optional<double> mu_hint = std::nullopt);

class FlowEngine {
public:
    FlowEngine(FlowParams params, double dx);

    std::pair<GridSet, StepReport> step(const GridSet& f);
    FlowTrace run(const GridSet& e0, const StopCriteria& stop = {});

    const CroftonStencil& stencil() const { return stencil_; }
    const FlowParams& params() const { return params_; }

    // L-infinity headroom constant; when set, each step checks
    // sup_move <= linf_c * sqrt(h).
    void set_linf_constant(double c) { linf_c_ = c; }
    double max_sup_move_ratio() const { return max_ratio_; }

    // Overrides the cell-count heuristic for the distance transform.
    void set_distance_mode(DistanceMode m) { mode_override_ = m; }

private:
    FlowParams params_;
    CroftonStencil stencil_;
    std::optional<double> mu_prev_;
    std::optional<DistanceMode> mode_override_;
    std::optional<double> linf_c_;
    double prev_lyapunov_ = 0.0;
    double max_ratio_ = 0.0;
    int step_index_ = 0;
};

}  // namespace wf
