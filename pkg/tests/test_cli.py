import csv
import json
import math

import numpy as np
import pytest

from curvetrak import cli
from curvetrak import field as fieldmod
from curvetrak import io as cio
from curvetrak.checks import ellipse_config
from curvetrak.config import bundled_config_path, parse_config, parse_config_dict
from curvetrak.errors import ConfigError
from curvetrak.sim import CSV_COLUMNS, run

MATYAS = {"field": {"kind": "matyas"},
          "params": {"k1": 1, "k2": 0.99, "C": 1, "a": 1, "epsilon": 0.01, "d0": 0.2, "z_d": 2},
          "init": {"center": [1, 1], "gamma0": 0.785}}


def write_config(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return p


def small(raw, **kw):
    return {**raw, "steps": 200, **kw}


# configuration ------------------------------------------------------------------

def test_minimal_config_gets_defaults():
    cfg = parse_config_dict(MATYAS)
    assert cfg.sim.dt == 0.01 and cfg.sim.steps == 30000
    assert cfg.sim.noise_sigma == 0 and cfg.sim.seed == 0 and cfg.sim.scheme == "euler"
    assert cfg.emit == {"trajectory", "summary"}


@pytest.mark.parametrize("key,value,needle", [
    ("dt", -1, "dt"), ("steps", 0, "steps"), ("scheme", "rk4", "scheme"), ("bogus", 1, "bogus"),
])
def test_invalid_top_level_values_name_the_key(key, value, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config_dict({**MATYAS, key: value})


def test_invalid_params_name_the_key():
    with pytest.raises(ConfigError, match="params.epsilon"):
        parse_config_dict({**MATYAS, "params": {**MATYAS["params"], "epsilon": 0}})
    with pytest.raises(ConfigError, match="params.k2"):
        parse_config_dict({**MATYAS, "params": {**MATYAS["params"], "k2": -1}})
    params = dict(MATYAS["params"])
    del params["z_d"]
    with pytest.raises(ConfigError, match="params.z_d"):
        parse_config_dict({**MATYAS, "params": params})


def test_missing_file_and_bad_json(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.json")
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(ConfigError, match="JSON"):
        parse_config(p)


def test_bundled_ellipse_config():
    cfg = parse_config(bundled_config_path("ellipse"))
    p = cfg.sim.params
    assert (p.k1, p.k2, p.C, p.a, p.epsilon, p.z_d) == (1, 0.9, 1, 0.01, 2, 500)
    assert parse_config("matyas.json").sim.params.z_d == 2


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("CURVETRAK_SEED", "77")
    assert parse_config_dict(MATYAS).sim.seed == 77


def test_empty_sweep_is_rejected():
    with pytest.raises(ConfigError, match="sweep"):
        parse_config_dict({**MATYAS, "sweep": {}})
    with pytest.raises(ConfigError, match="sweep"):
        parse_config_dict({**MATYAS, "sweep": {"params.nope": [1]}})


# io ---------------------------------------------------------------------------------

def test_trajectory_csv_round_trip(tmp_path):
    traj, _ = run(ellipse_config(steps=300))
    path = tmp_path / "t.csv"
    cio.write_trajectory_csv(traj, path)
    with open(path) as fh:
        header = next(csv.reader(fh))
    assert tuple(header) == CSV_COLUMNS
    cols = cio.read_trajectory_csv(path)
    np.testing.assert_array_equal(cols["r1x"], traj["r1"][:, 0])
    np.testing.assert_array_equal(cols["gamma"], traj["gamma"])
    np.testing.assert_array_equal(cols["lemma_ok"], traj["lemma_ok"])
    assert cio.format_value(0.1) == "0.10000000000000001"


def test_summary_json_round_trip(tmp_path):
    _, summary = run(ellipse_config(steps=2000))
    path = tmp_path / "s.json"
    cio.write_summary_json(summary, path)
    back = cio.read_summary_json(path)
    assert back.to_dict() == summary.to_dict()
    assert json.loads(path.read_text())["rng_id"].startswith("numpy.random.PCG64")


def test_malformed_csv(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("")
    with pytest.raises(cio.MalformedTrajectoryError):
        cio.read_trajectory_csv(p)
    p.write_text(",".join(CSV_COLUMNS) + "\n")
    with pytest.raises(cio.MalformedTrajectoryError, match="no records"):
        cio.read_trajectory_csv(p)
    p.write_text("a,b\n1,2\n")
    with pytest.raises(cio.MalformedTrajectoryError, match="header"):
        cio.read_trajectory_csv(p)


# commands ---------------------------------------------------------------------------

def test_run_writes_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path, small(MATYAS, emit=["trajectory", "summary", "plot"]))
    out = tmp_path / "out"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 0
    for name in ("trajectory.csv", "summary.json", "plot.svg"):
        assert (out / name).stat().st_size > 0
    assert len(cio.read_trajectory_csv(out / "trajectory.csv")["step"]) == 200


def test_run_single_step(tmp_path):
    cfg = write_config(tmp_path, small(MATYAS, steps=1))
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert len((tmp_path / "o" / "trajectory.csv").read_text().splitlines()) == 2


def test_run_is_byte_deterministic(tmp_path):
    cfg = write_config(tmp_path, small(MATYAS, noise_sigma=0.02, seed=9, steps=2000))
    cli.main(["run", str(cfg), "--out", str(tmp_path / "a")])
    cli.main(["run", str(cfg), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_run_exit_codes(tmp_path, capsys):
    bad = write_config(tmp_path, {**MATYAS, "dt": -1}, "bad.json")
    assert cli.main(["run", str(bad)]) == 1
    assert "dt" in capsys.readouterr().err
    same = write_config(tmp_path, small({**MATYAS, "init": {"r1": [1, 1], "r2": [1, 1]}}), "same.json")
    assert cli.main(["run", str(same), "--out", str(tmp_path / "o")]) == 2
    assert "degenerate" in capsys.readouterr().err
    blocker = tmp_path / "file"
    blocker.write_text("x")
    ok = write_config(tmp_path, small(MATYAS), "ok.json")
    assert cli.main(["run", str(ok), "--out", str(blocker / "sub")]) == 3


def test_sweep(tmp_path):
    raw = small(MATYAS, sweep={"params.k2": [0.5, 0.9, 0.99]})
    cfg = write_config(tmp_path, raw)
    assert cli.main(["sweep", str(cfg), "--out", str(tmp_path / "s1")]) == 0
    assert cli.main(["sweep", str(cfg), "--jobs", "3", "--out", str(tmp_path / "s3")]) == 0
    a = (tmp_path / "s1" / "sweep.csv").read_text()
    assert a == (tmp_path / "s3" / "sweep.csv").read_text()
    rows = list(csv.DictReader(a.splitlines()))
    assert [float(r["params.k2"]) for r in rows] == [0.5, 0.9, 0.99]
    # appending a value keeps the earlier runs' seeds
    cfg2 = write_config(tmp_path, {**raw, "sweep": {"params.k2": [0.5, 0.9, 0.99, 1.2]}}, "more.json")
    cli.main(["sweep", str(cfg2), "--out", str(tmp_path / "s4")])
    rows4 = list(csv.DictReader((tmp_path / "s4" / "sweep.csv").read_text().splitlines()))
    assert [r["seed"] for r in rows4[:3]] == [r["seed"] for r in rows]


def test_sweep_records_failures(tmp_path):
    raw = small(MATYAS, sweep={"params.a": [1, -1]})
    cfg = write_config(tmp_path, raw)
    assert cli.main(["sweep", str(cfg), "--out", str(tmp_path / "s")]) == 0
    rows = list(csv.DictReader((tmp_path / "s" / "sweep.csv").read_text().splitlines()))
    assert rows[0]["aborted"] == "0" and rows[1]["aborted"] == "1"
    assert "params.a" in rows[1]["abort_reason"]


def test_sweep_tuning_shows_per_field_choice(tmp_path):
    # a = 0.01 (ellipse tuning) on the Matyas field leaves the pair crawling
    raw = small(MATYAS, steps=3000, sweep={"params.a": [0.01, 1]})
    cfg = write_config(tmp_path, raw)
    cli.main(["sweep", str(cfg), "--out", str(tmp_path / "s")])
    rows = list(csv.DictReader((tmp_path / "s" / "sweep.csv").read_text().splitlines()))
    assert float(rows[1]["arc_length_traveled"]) > float(rows[0]["arc_length_traveled"])


def test_sweep_without_map(tmp_path):
    cfg = write_config(tmp_path, small(MATYAS))
    assert cli.main(["sweep", str(cfg)]) == 1


def test_seed_mixing_is_stable():
    assert cli.mix_index(0) == 0xE220A8397B1DCDAF
    assert cli.sweep_seed(0, 3) != cli.sweep_seed(0, 4)
    assert cli.sweep_seed(12, 3) == 12 ^ cli.mix_index(3)


def test_plot(tmp_path):
    cfg = write_config(tmp_path, small(MATYAS, steps=500))
    cli.main(["run", str(cfg), "--out", str(tmp_path / "o")])
    svg = tmp_path / "p.svg"
    assert cli.main(["plot", str(tmp_path / "o" / "trajectory.csv"), "--field", str(cfg), "--out", str(svg)]) == 0
    assert svg.read_text().lstrip().startswith("<?xml") and "<svg" in svg.read_text()


def test_plot_linear_field_is_clipped(tmp_path):
    raw = {"field": {"kind": "polynomial", "terms": [[1, 0, 1.0]]},
           "params": {"k1": 1, "k2": 0.9, "C": 1, "a": 0.1, "epsilon": 0.5, "d0": 0.5, "z_d": 1},
           "init": {"r1": [1.2, 0], "r2": [0.8, 0]}, "steps": 300}
    cfg = write_config(tmp_path, raw)
    cli.main(["run", str(cfg), "--out", str(tmp_path / "o")])
    assert cli.main(["plot", str(tmp_path / "o" / "trajectory.csv"), "--field", str(cfg),
                     "--out", str(tmp_path / "lin.svg")]) == 0


def test_plot_rejects_bad_input(tmp_path):
    cfg = write_config(tmp_path, small(MATYAS))
    empty = tmp_path / "e.csv"
    empty.write_text(",".join(CSV_COLUMNS) + "\n")
    assert cli.main(["plot", str(empty), "--field", str(cfg), "--out", str(tmp_path / "x.svg")]) == 4
    junk = tmp_path / "j.csv"
    junk.write_text("garbage\n")
    assert cli.main(["plot", str(junk), "--field", str(cfg), "--out", str(tmp_path / "x.svg")]) == 4


def test_validate_passes(capsys):
    assert cli.main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_validate_catches_corrupted_gradient(monkeypatch, capsys):
    real = fieldmod._gradient

    def flipped(f, x, y):
        gx, gy = real(f, x, y)
        return (-gx, -gy) if f.kind == "matyas" else (gx, gy)

    monkeypatch.setattr(fieldmod, "_gradient", flipped)
    assert cli.main(["validate"]) == 1
    out = capsys.readouterr().out
    assert "FAIL  gradient oracle [matyas]" in out
