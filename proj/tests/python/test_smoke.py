import json
import math
import os
import tempfile

import pytest

import wulffflow as wf


def circle(cx, cy, r, n=512):
    return [
        (cx + r * math.cos(2 * math.pi * i / n), cy + r * math.sin(2 * math.pi * i / n))
        for i in range(n)
    ]


def grid(dx=1 / 64, extent=2.0):
    n = round(extent / dx)
    return wf.GridSpec(-extent / 2, -extent / 2, dx, n, n)


def test_norms():
    phi = wf.AnisoNorm.ellipse(2.0, 1.0)
    assert phi.eval(1.0, 0.0) == pytest.approx(2.0)
    assert phi.eval(0.0, 1.0) == pytest.approx(1.0)
    bounds = phi.ellipticity_bounds()
    assert bounds.L_phi == pytest.approx(2.0)
    assert bounds.Lambda_phi == pytest.approx(4.0)
    assert phi.is_elliptic()
    assert not wf.AnisoNorm.fourier([1.0, 0.5]).is_elliptic()
    assert wf.AnisoNorm.euclidean().wulff_area() == pytest.approx(math.pi)
    d = wf.AnisoNorm.from_dict({"family": "ellipse", "a": 2.0, "b": 1.0})
    assert d.eval(1.0, 0.0) == pytest.approx(2.0)


def test_rasterize_area_perimeter():
    sp = grid()
    e = wf.rasterize([circle(0, 0, 0.5)], sp)
    assert e.area() == pytest.approx(math.pi * 0.25, rel=0.01)
    p = wf.anisotropic_perimeter(e, wf.AnisoNorm.euclidean())
    assert p == pytest.approx(math.pi, rel=0.03)


def test_grid_roundtrip(tmp_path):
    sp = grid()
    e = wf.rasterize([circle(0.1, -0.2, 0.4)], sp)
    path = str(tmp_path / "disk.wfgrid")
    wf.save_grid(e, path)
    back = wf.load_grid(path)
    assert wf.sym_diff_area(e, back) == 0.0
    assert back.spec.nx == sp.nx


def test_flow_and_fit():
    sp = grid()
    e0 = wf.rasterize([circle(0, 0, 0.5)], sp)
    trace = wf.run_flow(e0, wf.AnisoNorm.euclidean(), wf.AnisoNorm.euclidean(), h=1 / 16,
                        max_steps=5, snapshot_stride=5)
    assert len(trace.reports) == 5
    for rep in trace.reports:
        assert rep.area == pytest.approx(e0.area(), rel=0.05)
    fit = wf.fit_wulff(trace.final_state, wf.AnisoNorm.euclidean())
    assert fit.d == 1
    assert fit.r == pytest.approx(0.5, rel=0.05)
    rep = wf.alexandrov_report(trace.final_state, wf.AnisoNorm.euclidean(), e0.area())
    assert rep.d == 1
    assert rep.p_phi == pytest.approx(rep.p_d, rel=0.1)
    assert math.isfinite(rep.eps)


def test_error_type():
    with pytest.raises(wf.WulffError):
        wf.AnisoNorm.sampled([1.0, 2.0, 3.0])  # not a power-of-two profile


def test_scenario_file(tmp_path):
    out = tmp_path / "run"
    cfg = {
        "schema": "wulff-flow/1",
        "norms": {"phi": {"family": "euclidean"}},
        "grid": {"dx": 1 / 64, "extent": [-1, -1, 1, 1]},
        "flow": {"h": 1 / 16, "max_steps": 4, "snapshot_stride": 2,
                 "stop": {"enabled": False}},
        "shape": {"kind": "wulff", "radius": 0.5},
        "output_dir": str(out),
        "diagnostics": {"frames": False},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    res = wf.run_scenario_file(str(cfg_path))
    assert res["ok"]
    assert res["steps"] == 4
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
