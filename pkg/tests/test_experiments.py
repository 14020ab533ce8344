import json
import math

import numpy as np
import pytest

from selregion.cli import main
from selregion.experiments import (
    ConfigError,
    ResultTable,
    SweepAxis,
    build_config,
    cmd_compare,
    cmd_optimize,
    cmd_route,
    cmd_surface,
    cmd_validate,
    parse_beta,
)


def test_beta_parsing():
    assert parse_beta("10dB")[0] == 10.0
    assert parse_beta("3 dB")[0] == pytest.approx(10 ** 0.3)
    assert parse_beta("10.0")[0] == 10.0
    assert parse_beta(2)[0] == 2.0
    with pytest.raises(ConfigError):
        parse_beta("loud")


def test_defaults_resolved():
    cfg = build_config("surface")
    assert cfg.model.beta == 10.0 and cfg.model.p == 0.01
    assert [a.name for a in cfg.sweep] == ["phi", "r_m"] and cfg.sweep[0].points == 40
    assert cfg.seed == 1 and cfg.mode == "semi"


@pytest.mark.parametrize(
    "raw,field",
    [
        ({"model": {"alpha": 2.0}}, "model.alpha"),
        ({"model": {"p": 1.5}}, "model.p"),
        ({"model": {"gamma": 1}}, "model.gamma"),
        ({"model": {"beta": "x"}}, "model.beta"),
        ({"sweep": [{"name": "phi", "start": 1, "stop": 1, "points": 3}]}, "sweep[0]"),
        ({"sweep": [{"name": "phi", "start": 1, "stop": 2, "points": 0}]}, "sweep[0].points"),
        ({"sweep": [{"name": "zeta", "start": 1, "stop": 2, "points": 2}]}, "sweep[0].name"),
        ({"sweep": [{"name": "phi", "values": [1, 3, 2]}]}, "sweep[0]"),
        ({"trials": 0}, "trials"),
        ({"seed": -1}, "seed"),
        ({"mode": "exact"}, "mode"),
        ({"colour": 1}, "colour"),
    ],
)
def test_config_errors_name_the_field(raw, field):
    with pytest.raises(ConfigError) as exc:
        build_config("surface", raw)
    assert exc.value.field == field


def test_compare_config_checks():
    with pytest.raises(ConfigError) as exc:
        build_config("compare", {"trials": 500})
    assert exc.value.field == "trials"
    with pytest.raises(ConfigError) as exc:
        build_config("compare", {"protocols": [{"kind": "flood"}]})
    assert exc.value.field == "protocols[0].kind"
    with pytest.raises(ConfigError):
        build_config("compare", {"protocols": []})


def test_overrides_win():
    cfg = build_config("compare", {"seed": 4, "trials": 2000}, seed=9, trials=None)
    assert cfg.seed == 9 and cfg.trials == 2000


def test_log_axis():
    a = SweepAxis.from_dict({"name": "p", "start": 0.01, "stop": 0.3, "points": 4, "scale": "log"}, "s")
    g = a.grid()
    assert g[0] == pytest.approx(0.01) and g[-1] == pytest.approx(0.3)
    assert np.allclose(np.diff(np.log(g)), np.log(30) / 3)


def test_result_table_round_trip():
    t = ResultTable(["a", "b", "c", "d"])
    t.add(a=1, b=0.1, c=None, d="ok")
    t.add(a=2, b=1e-300 / 3, c=math.pi, d="error: x, y")
    back = ResultTable.from_csv(t.to_csv())
    assert back == t
    with pytest.raises(ValueError):
        t.add(a=1, b=math.nan)
    assert json.loads(t.to_json())["columns"] == ["a", "b", "c", "d"]


def test_surface_single_cell():
    cfg = build_config("surface", {"sweep": [{"name": "phi", "start": 1.0, "points": 1}, {"name": "r_m", "start": 0.2, "points": 1}]})
    t = cmd_surface(cfg)
    assert len(t.rows) == 1 and t.columns[:4] == ["p", "phi", "r_m", "e_density"]


def test_surface_interior_maximum():
    t = cmd_surface(build_config("surface"))
    assert ResultTable.from_csv(t.to_csv()) == t.normalized()
    e = np.array(t.column("e_density")).reshape(40, 40)
    i, j = np.unravel_index(np.argmax(e), e.shape)
    assert 0 < i < 39 and 0 < j < 39
    assert cmd_surface(build_config("surface")).to_csv() == t.to_csv()


def test_optimize_table():
    cfg = build_config("optimize", {"sweep": [{"name": "p", "values": [0.01, 0.05, 0.3]}]})
    t = cmd_optimize(cfg)
    for r in t.records():
        assert r["status"] == "ok"
        if r["rm_upper_bound"] is not None:
            assert r["rm_upper_bound"] >= r["rm_star"]
        assert abs(r["rm_eq19"] - r["rm_star"]) <= 1e-6 * r["rm_star"]
    assert t.column("phi_star") == sorted(t.column("phi_star"))


def test_optimize_fixed_angle_blank_closed_form_rm():
    cfg = build_config("optimize", {"fixed_phi": math.pi / 3, "sweep": [{"name": "p", "values": [0.05]}]})
    r = cmd_optimize(cfg).records()[0]
    assert r["rm_eq19"] is None
    assert r["rm_upper_bound"] == pytest.approx(0.15006612360394422)
    assert ",," in cmd_optimize(cfg).to_csv()


def test_optimize_row_failure_recorded(monkeypatch):
    import selregion.experiments as ex

    def boom(cfg):
        if cfg.p > 0.1:
            raise ex.NumericalError("stalled")
        return real(cfg)

    real = ex.optimize_joint
    monkeypatch.setattr(ex, "optimize_joint", boom)
    t = cmd_optimize(build_config("optimize", {"sweep": [{"name": "p", "values": [0.05, 0.2]}]}))
    assert [s[:5] for s in t.column("status")] == ["ok", "error"]


def test_compare_small_and_std_error_scaling():
    raw = {"sweep": [{"name": "p", "values": [0.05]}], "protocols": [{"kind": "selection_region", "phi": 1.0, "r_m": 0.2}]}
    small = cmd_compare(build_config("compare", dict(raw, trials=1000))).records()[0]
    big = cmd_compare(build_config("compare", dict(raw, trials=10_000))).records()[0]
    assert small["analytic"] is not None
    assert big["std_error"] * math.sqrt(10) == pytest.approx(small["std_error"], rel=0.15)


def test_validate_negative_control():
    cfg = build_config("validate", {"trials": 2000, "tolerance": 1e-30})
    t = cmd_validate(cfg)
    fails = [r for r in t.records() if r["status"] == "fail"]
    assert fails and all(math.isfinite(r["deviation"]) for r in fails)
    ratio = [r for r in t.records() if r["check"].startswith("candidate_ratio_phi=1.5708")][0]
    assert ratio["value"] == pytest.approx(0.25, abs=0.02)


def test_route_command():
    same = build_config("route", {"route": {"source": [2, 3], "dest": [2, 3]}})
    table, meta = cmd_route(same)
    assert table.rows == [] and meta["terminated"] == "reached"
    cfg = build_config("route", {"route": {"dest": [10, 0]}, "seed": 5})
    a, meta = cmd_route(cfg)
    b, _ = cmd_route(cfg)
    assert a.to_csv() == b.to_csv() and meta["terminated"] == "reached"
    half = meta["protocol"]["phi"] / 2
    assert all(abs(d) <= half for d in a.column("deviation"))


def test_cli_writes_table_and_sidecar(tmp_path, capsys):
    out = tmp_path / "surface.csv"
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"model": {"beta": "10dB"}, "sweep": [{"name": "phi", "start": 0.5, "stop": 2.0, "points": 3}]}))
    assert main(["surface", "--config", str(conf), "--out", str(out), "--seed", "3"]) == 0
    side = json.loads((tmp_path / "surface.csv.json").read_text())
    assert side["config"]["seed"] == 3 and side["config"]["model"]["beta"] == "10dB"
    # the sidecar reproduces the run byte for byte
    out2 = tmp_path / "again.csv"
    assert main(["surface", "--config", str(tmp_path / "surface.csv.json"), "--out", str(out2)]) == 0
    assert out.read_bytes() == out2.read_bytes()
    assert main(["surface", "--config", str(conf)]) == 0
    assert capsys.readouterr().out == out.read_text()


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"model": {"alpha": 1.5}}))
    assert main(["optimize", "--config", str(bad)]) == 2
    assert "model.alpha" in capsys.readouterr().err
    assert main(["surface", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["validate", "--trials", "2000", "--tolerance", "1e-30", "--out", str(tmp_path / "v.csv")]) == 1
    assert main(["optimize", "--trials", "0"]) == 2


def test_cli_json_format(tmp_path):
    out = tmp_path / "o.json"
    assert main(["optimize", "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["columns"][0] == "p" and len(data["rows"]) == 10
