"""Anisotropic area-preserving flat flow on a grid."""

import os


def _load():
    ext_dir = os.environ.get("WULFFFLOW_EXT_DIR")
    if ext_dir:
        import importlib.util
        import glob

        candidates = glob.glob(os.path.join(ext_dir, "_core*.so")) + glob.glob(
            os.path.join(ext_dir, "_core*.pyd")
        )
        if candidates:
            spec = importlib.util.spec_from_file_location("wulffflow._core", candidates[0])
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    from . import _core  # packaged layout

    return _core


_core = _load()

AnisoNorm = _core.AnisoNorm
GridSpec = _core.GridSpec
GridSet = _core.GridSet
Vec2 = _core.Vec2
VolumeBranch = _core.VolumeBranch
FlowTrace = _core.FlowTrace
StepReport = _core.StepReport
WulffFit = _core.WulffFit
AlexandrovReport = _core.AlexandrovReport
WulffError = _core.WulffError

rasterize = _core.rasterize
sym_diff_area = _core.sym_diff_area
anisotropic_perimeter = _core.anisotropic_perimeter
save_grid = _core.save_grid
load_grid = _core.load_grid
run_flow = _core.run_flow
fit_wulff = _core.fit_wulff
alexandrov_report = _core.alexandrov_report
run_scenario_file = _core.run_scenario_file

__all__ = [
    "AnisoNorm",
    "GridSpec",
    "GridSet",
    "Vec2",
    "VolumeBranch",
    "FlowTrace",
    "StepReport",
    "WulffFit",
    "AlexandrovReport",
    "WulffError",
    "rasterize",
    "sym_diff_area",
    "anisotropic_perimeter",
    "save_grid",
    "load_grid",
    "run_flow",
    "fit_wulff",
    "alexandrov_report",
    "run_scenario_file",
]
