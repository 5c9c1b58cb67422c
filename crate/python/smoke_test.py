"""Smoke test for the fejerlab_py extension module."""

import json
import math
import pathlib
import tempfile

import fejerlab_py as fl

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> None:
    a = fl.Point.euclidean([0.0, 0.0])
    b = fl.Point.euclidean([3.0, 4.0])
    assert math.isclose(fl.distance(a, b), 5.0)
    mid = fl.geodesic_point(a, b, 0.5)
    assert json.loads(mid.to_json()) == {"euclidean": [1.5, 2.0]}

    t = fl.Point.tripod(1, 2.0)
    assert t.space == "tripod"
    assert math.isclose(fl.distance(t, fl.Point.tripod(2, 0.5)), 2.5)
    try:
        fl.Point.half_plane(0.0, -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("point below the axis was accepted")

    cfg = json.loads((ROOT / "configs" / "flagship_skm.json").read_text())
    cfg["ensemble"] = {"paths": 50, "horizon": 500, "seed": 1}
    cfg["audit"]["fast"]["horizon"] = 200
    cfg["validate"] = {"samples": 500}
    exp = fl.Experiment.from_json(json.dumps(cfg))
    assert exp.algorithm == "skm"
    assert json.loads(exp.validate())["passed"]

    cert = exp.certificate()
    assert cert.rho(0.2) == math.ceil(120 / 0.2) - 1
    n_mean, _, _, _ = cert.metric_rates(0.2, 0.1)
    assert n_mean == 11999

    ens = exp.run()
    assert (ens.paths, ens.horizon) == (50, 500)
    assert len(ens.mean_dist) == 501
    assert math.isclose(ens.mean_dist[0], math.sqrt(2.0))
    report = exp.audit(cert, ens)
    parsed = json.loads(report.to_json())
    assert parsed["algorithm"] == "skm" and parsed["records"]
    assert report.render(ens).startswith("fejerlab audit report")

    with tempfile.TemporaryDirectory() as d:
        exp.export(ens, d, report)
        assert (pathlib.Path(d) / "curves.csv").read_text() == ens.curves_csv()
        assert (pathlib.Path(d) / "audit.json").exists()

    print("smoke test passed")


if __name__ == "__main__":
    main()
