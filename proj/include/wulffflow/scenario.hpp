#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/contour.hpp"
#include "wulffflow/grid.hpp"
#include "wulffflow/stepper.hpp"
#include "wulffflow/symmetry.hpp"

#include "json.hpp"

namespace wf {

struct ShapeSpec {
    std::string kind;  // wulff | ellipse | dumbbell | polygon | union
    Vec2 center{0.0, 0.0};
    double area = 0.0;    // wulff (alternative to radius)
    double radius = 0.0;  // wulff, dumbbell lobes
    double a = 0.0, b = 0.0, rotation = 0.0;         // ellipse
    double separation = 0.0, neck_width = 0.0;       // dumbbell
    std::vector<Vec2> vertices;                      // polygon
    std::vector<ShapeSpec> parts;                    // union
    double perturb_amplitude = 0.0;                  // wulff only
    int perturb_mode = 0;                            // 0 => random multi-mode
};

struct DiagnosticsConfig {
    bool alexandrov = true;
    bool gauss_bonnet = true;
    std::optional<int> reflection_root_m;  // Q_{2m} family when set
    bool frames = true;
};

struct ScenarioConfig {
    AnisoNorm phi = AnisoNorm::euclidean();
    AnisoNorm psi = AnisoNorm::euclidean();
    GridSpec grid;
    FlowParams flow;
    StopCriteria stop;
    DistanceMode distance_mode = DistanceMode::Exact;
    bool distance_auto = true;  // pick by grid size; overridden by config
    ShapeSpec shape;
    DiagnosticsConfig diagnostics;
    std::filesystem::path output_dir;
    unsigned seed = 0;
    double fit_window_start_frac = 0.1;
};

ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

GridSet build_initial_shape(const ShapeSpec& shape, const GridSpec& grid, const AnisoNorm& phi,
                            unsigned seed);

struct RateFit {
    std::string name;
    double C = 0.0;
    double C0 = 0.0;
    double r2 = 0.0;
    double t0 = 0.0, t1 = 0.0;  // fit window
    bool accepted = false;
    bool degenerate = false;  // series vanished / stationary
};

// least squares of log y vs t over the window [t0, t1]
RateFit fit_exponential_rate(const std::vector<std::pair<double, double>>& series, double t0,
                             double t1, const std::string& name = "series");

struct ScenarioArtifacts {
    std::filesystem::path dir;
    FlowTrace trace;
    WulffFit final_fit;
    RateFit rate;
    bool ok = false;
    std::string failure_stage;
    std::string error_message;
    std::vector<std::filesystem::path> files;
};

ScenarioArtifacts run_scenario(const ScenarioConfig& cfg);

struct FrameStyle {
    std::vector<HalfSpace> halfspaces;
    std::vector<Vec2> overlay_polygon;  // e.g. containment bound
    bool draw_fit = true;
};

std::vector<std::filesystem::path> export_frames(const FlowTrace& trace, const AnisoNorm& phi,
                                                 const std::filesystem::path& dir,
                                                 const FrameStyle& style = {});

// batch execution; worker count capped by WULFF_THREADS
std::vector<ScenarioArtifacts> run_scenarios(const std::vector<ScenarioConfig>& cfgs);
int worker_count(std::size_t jobs);

std::uint64_t fnv1a_digest(const std::filesystem::path& file);

nlohmann::json rate_fit_json(const RateFit& r);
nlohmann::json wulff_fit_json(const WulffFit& f);
nlohmann::json alexandrov_json(const AlexandrovReport& r);

}  // namespace wf
