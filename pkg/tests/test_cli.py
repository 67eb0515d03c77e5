import json
import math
from fractions import Fraction

import pytest

from rbfscreen.cli import CSV_COLUMNS, main, read_csv
from rbfscreen.config import Coupling, RunConfig, level_params


def test_config_json_roundtrip(tmp_path):
    cfg = RunConfig(m=2, levels=(6, 9, 12), coupling=Coupling(0.5, 1.5), quad_scale=2.0)
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    assert RunConfig.from_json(path) == cfg


def test_config_overrides():
    cfg = RunConfig().with_overrides({"coupling.c_r": 0.4, "quad.outer": [20, 20], "interp.r": 0.2})
    assert cfg.coupling.c_r == 0.4 and cfg.coupling.c_k == 2.0
    assert cfg.quad.outer == (20, 20) and cfg.interp.r == 0.2
    assert RunConfig().with_overrides({"m": 0}).coupling == Coupling(0.33, 2.0)
    with pytest.raises(KeyError):
        RunConfig().with_overrides({"coupling.nope": 1})
    with pytest.raises(ValueError):
        RunConfig(m=3)


def test_level_params_snap_k():
    p = level_params(24, Fraction(5, 2), Coupling(0.6, 2.0))
    assert p.h == pytest.approx(math.sqrt(2) / 48)
    scale = p.h**0.6
    assert p.r == pytest.approx(0.6 * scale)
    K = round(1 / p.k)
    assert abs(1 / K - p.k) < 1e-15 and p.k >= 2.0 * scale and p.k > p.r
    assert not p.k_clamped
    assert level_params(6, Fraction(5, 2), Coupling(0.6, 2.0)).k_clamped


def test_verify_default_passes(capsys):
    assert main(["verify"]) == 0
    assert "all levels satisfy" in capsys.readouterr().out


def test_verify_reports_a1(capsys):
    assert main(["verify", "--levels", "6", "--coupling.c_r", "3"]) == 1
    assert "A1" in capsys.readouterr().out


def test_verify_reports_a2(capsys):
    assert main(["verify", "--levels", "4", "--coupling.c_r", "0.85"]) == 1
    assert "A2" in capsys.readouterr().out


def test_bad_override_is_a_configuration_error(capsys):
    assert main(["verify", "--m", "1", "--fit_levels", "2"]) == 2


def _solve(tmp_path, capsys, *extra):
    out = tmp_path / "o"
    assert main(["solve", "--levels", "8", "--out", str(out), *extra]) == 0
    capsys.readouterr()
    return json.loads((out / "solve_m1_n8.json").read_text()), (out / "solve_m1_n8.json").read_bytes()


def test_solve_summary_and_determinism(tmp_path, capsys):
    s1, raw1 = _solve(tmp_path / "a", capsys)
    s2, raw2 = _solve(tmp_path / "b", capsys)
    assert raw1 == raw2
    assert s1["energy"] > 0
    assert s1["constraint_norm"] <= 1e-10 * max(s1["coef_norm"], 1.0)
    assert abs(s1["energy"] - s1["load_work"]) <= 1e-9 * s1["load_work"]
    assert (tmp_path / "a" / "o" / "solve_m1_n8.timings.json").exists()


def test_solve_load_scaling(tmp_path, capsys):
    s1, _ = _solve(tmp_path / "a", capsys)
    s2, _ = _solve(tmp_path / "b", capsys, "--load", "2")
    assert s2["energy"] == pytest.approx(4 * s1["energy"], rel=1e-10)
    assert s2["coef_norm"] == pytest.approx(2 * s1["coef_norm"], rel=1e-10)


def test_solve_reports_violation(tmp_path, capsys):
    assert main(["solve", "--levels", "4", "--coupling.c_r", "0.85", "--out", str(tmp_path)]) == 2
    assert "AssumptionViolation" in capsys.readouterr().out


@pytest.mark.parametrize("m,slope", [(1, "3/10"), (0, "1/6")])
def test_converge_outputs(tmp_path, capsys, m, slope):
    out = tmp_path / "run"
    args = ["converge", "--m", str(m), "--levels", "6,9,12", "--fit_levels", "3", "--out", str(out), "--no-stab"]
    assert main(args) == 0
    csv_path = out / f"converge_m{m}.csv"
    rows = read_csv(csv_path)
    assert len(rows) == 3
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert csv_path.read_bytes().count(b"\r\n") == 4
    svg = (out / f"converge_m{m}.svg").read_text()
    assert 'width="800" height="600"' in svg
    assert f"expected (slope {slope})" in svg
    fit = json.loads((out / f"converge_m{m}.fit.json").read_text())
    assert fit["expected_rate"] == slope
    first = csv_path.read_bytes()
    svg_first = svg
    assert main(args) == 0
    assert csv_path.read_bytes() == first
    assert (out / f"converge_m{m}.svg").read_text() == svg_first


def test_interp_study_small(tmp_path, capsys):
    out = tmp_path / "i"
    assert main(["interp-study", "--interp.levels", "[8, 16]", "--out", str(out)]) == 0
    rows = read_csv(out / "interp_m1.csv")
    assert [int(r["n"]) for r in rows] == [8, 16]
    assert float(rows[1]["l2_error"]) < float(rows[0]["l2_error"])


def test_bad_values_are_configuration_errors(capsys):
    assert main(["verify", "--coupling.c_r", "\"x\""]) == 2
    assert main(["verify", "--coupling.c_k", "-1"]) == 2
    assert "configuration error" in capsys.readouterr().err
