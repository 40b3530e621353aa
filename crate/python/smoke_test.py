"""Exercises the `chua` extension module end to end.

Build it first, e.g. `maturin develop -m crates/py/Cargo.toml`, or copy
target/release/libchua.so to chua.so somewhere on PYTHONPATH.
"""

import json
import math
import os
import tempfile

import chua


def main():
    p = chua.CircuitParams()
    assert p == chua.CircuitParams.from_json(p.to_json())
    assert math.isclose(p.nonlinearity(0.5), -0.4, abs_tol=1e-12)
    assert p.region(2.0) == "POS_MID"
    assert p.vector_field((0.0, 0.0, 0.0)) == (0.0, 0.0, 0.0)
    assert len(p.jacobian((0.1, 0.2, 0.3))) == 3
    try:
        chua.CircuitParams(c1=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative capacitance accepted")

    sing = chua.find_singularities(p)
    assert [s["label"] for s in sing] == ["P_PLUS", "ORIGIN", "P_MINUS"]
    p_plus = sing[0]["location"]
    assert abs(p_plus["u1"] - 1.5) < 1e-12 and abs(p_plus["i"] + 1.05) < 1e-12

    report = chua.analyze(p)
    assert len(report["planes"]) == 3
    pair = [s for s in report["segments"] if s["pair"] == ["EP_PLUS", "EP_MINUS"]][0]
    assert pair["segment"] is None and pair["error"].startswith("PARALLEL")

    traj = chua.integrate(p, steps=60000, skip=10000)
    assert len(traj) == 50000
    (lo, hi) = traj.bounds()
    assert hi[0] > 1.0 and lo[0] < -1.0
    t0 = traj.points()[0]
    assert math.isclose(t0[0], 10001 * 0.01)

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "t.bin")
        traj.save(path)
        back = chua.Trajectory.load(path)
        assert back.points() == traj.points()
        assert len(chua.Trajectory.load(path, max_points=1000)) <= 2000

    ppm = chua.render_ppm(traj, p, projection="axo", azimuth=30, elevation=20, planes=True, segments=True, size=(128, 96))
    header = b"P6\n128 96\n255\n"
    assert ppm.startswith(header) and len(ppm) == len(header) + 128 * 96 * 3
    assert ppm == chua.render_ppm(traj, p, projection="axo", azimuth=30, elevation=20, planes=True, segments=True, size=(128, 96))
    svg = chua.render_svg(traj.decimate(500), p, iv=True, size=(64, 64))
    assert svg.startswith("<?xml")

    text = chua.export_scene(traj.decimate(1000), p, comet_length=1024, mode="sequential")
    doc = chua.parse_scene(text)
    assert doc["viewer_defaults"] == {**doc["viewer_defaults"], "mode": "SEQUENTIAL", "comet_length": 1024}
    bad = json.loads(text)
    bad["viewer_defaults"]["comet_length"] = 100000
    try:
        chua.parse_scene(json.dumps(bad))
    except ValueError as e:
        assert "viewer_defaults.comet_length" in str(e)
    else:
        raise AssertionError("comet_length 100000 accepted")
    try:
        chua.export_scene(traj, p, comet_length=300)
    except ValueError:
        pass
    else:
        raise AssertionError("comet_length 300 accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
