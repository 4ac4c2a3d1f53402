import csv
import io
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import pytest

from partgame import __version__
from partgame.cli import run
from partgame.schemas import CONFIG_SCHEMA_ID, REPORT_SCHEMA

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, game, **sections):
    cfg = {"schema": CONFIG_SCHEMA_ID, "game": game, **sections}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def invoke(command, config, tmp_path, *extra):
    out = tmp_path / "out"
    code = run([command, "--config", str(config), "--out", str(out), *extra])
    text = out.read_text() if out.exists() else None
    return code, text


def report(command, config, tmp_path, *extra):
    code, text = invoke(command, config, tmp_path, *extra)
    assert code == 0
    data = json.loads(text)
    jsonschema.validate(data, REPORT_SCHEMA)
    assert data["tool"]["version"] == __version__
    return data


BASIC4 = {"n": 4, "k": 2, "q": "0.5", "alpha": "1", "r": "3", "variant": "basic"}


def test_enumerate_example1(tmp_path):
    data = report("enumerate", CONFIGS / "example1.json", tmp_path)
    res = data["result"]
    assert res["count"] == 3 and res["agreement"] is True
    assert [e["contributors"] for e in res["equilibria"]] == [[], [0, 1], [0, 1, 2, 3]]
    assert all(e["verified_by"] == "both" for e in res["equilibria"])
    levels = res["structure"]["thresholds"]
    assert (levels[0]["contributor_lhs"], levels[0]["abstainer_lhs"]) == ("1/4", "3/16")
    assert levels[1]["contributor_lhs"] == "13/64"
    assert data["config"]["game"]["q"] == ["1/2", "1/2", "1/4", "1/4"]
    margin = res["equilibria"][1]["margins"]["2"]["C"]
    assert Fraction(margin) == 1 - 5 * Fraction(3, 16)


def test_enumerate_example2(tmp_path):
    res = report("enumerate", CONFIGS / "example2.json", tmp_path)["result"]
    assert res["count"] == 2
    assert [e["label"] for e in res["equilibria"]] == ["all-out", "all-in"]


def test_enumerate_n60_skips_brute_force(tmp_path):
    res = report("enumerate", CONFIGS / "retraction60.json", tmp_path)["result"]
    assert [e["label"] for e in res["equilibria"]] == ["all-out", "mixed(C=48,F=12)"]
    assert res["brute_force"]["status"] == "skipped"
    assert "guard exceeded" in res["brute_force"]["note"]
    assert res["agreement"] is None
    assert res["structure"]["lambda_window"] == [48]
    lo, hi = res["structure"]["beta_ratio_feasible_range"]
    assert (round(float(Fraction(lo["exact"])), 4), round(float(Fraction(hi["exact"])), 4)) == (0.0355, 0.1366)


def test_guard_exceeded_exit_code(tmp_path):
    cfg = write_config(tmp_path, {"n": 10, "k": 2, "q": "0.5", "alpha": "1", "beta": "0", "r": "3",
                                  "variant": "retraction"}, enumerate={"methods": ["brute_force"]})
    assert invoke("enumerate", cfg, tmp_path)[0] == 3
    code, _ = invoke("enumerate", cfg, tmp_path, "--guard", "10")
    assert code == 0


def test_calibrate_basic(tmp_path):
    cfg = write_config(tmp_path, BASIC4, calibrate={"target": "all-in", "pair_universal": True})
    res = report("calibrate", cfg, tmp_path)["result"]
    assert res["r_min"] == {"exact": "16/7", "decimal": "2.28571428571"}
    cmp_ = res["comparison"]
    assert cmp_["tracked_total"]["exact"] == "32/7"
    assert cmp_["universal_total"]["exact"] == "64/11"
    assert cmp_["universal_higher"] and cmp_["strictly_higher"]


def test_calibrate_infeasible_reports_constraint(tmp_path):
    game = {"n": 60, "k": 13, "q": "0.3", "alpha": "0.2", "beta": "0.1", "r": "1", "variant": "retraction"}
    cfg = write_config(tmp_path, game, calibrate={"target": 20})
    res = report("calibrate", cfg, tmp_path)["result"]
    assert res["status"] == "infeasible" and res["violated_constraint"] == "lambda_range"


def test_missing_beta_is_config_error(tmp_path, capsys):
    game = {"n": 6, "k": 2, "q": "0.3", "alpha": "0.2", "r": "1", "variant": "retraction"}
    cfg = write_config(tmp_path, game, calibrate={"target": "all-in"})
    assert invoke("calibrate", cfg, tmp_path)[0] == 2
    assert "field game: 'beta' is a required property" in capsys.readouterr().err


@pytest.mark.parametrize(
    "game,sections,fragment",
    [
        ({**BASIC4, "reward": "1"}, {}, "'reward' was unexpected"),
        ({**BASIC4, "q": 0.5}, {}, "field game.q"),
        ({**BASIC4, "k": 5}, {}, "threshold exceeds population"),
        (BASIC4, {"extra": {}}, "'extra' was unexpected"),
        (BASIC4, {}, "section required"),
    ],
)
def test_config_errors(tmp_path, capsys, game, sections, fragment):
    cfg = write_config(tmp_path, game, **sections)
    assert invoke("calibrate", cfg, tmp_path)[0] == 2
    assert fragment in capsys.readouterr().err


def test_json_syntax_error_has_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"schema": "partgame/config/v1",\n  "game": {,}}')
    assert run(["enumerate", "--config", str(path)]) == 2
    assert "bad.json:2:" in capsys.readouterr().err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_flips_at_boundary(tmp_path):
    cfg = write_config(tmp_path, BASIC4, sweep={"parameter": "r", "start": "2", "stop": "3", "step": "1/7"})
    code, text = invoke("sweep", cfg, tmp_path)
    assert code == 0
    assert text.splitlines()[0] == "parameter,value,value_exact,equilibria,all_out,all_in,mixed_lambdas,window_lambdas,nontrivial"
    rows = read_csv(text)
    flips = [(r["value_exact"], r["all_in"]) for r in rows]
    assert flips[:3] == [("2/1", "0"), ("15/7", "0"), ("16/7", "1")]
    assert rows[2]["value"] == "2.28571428571"
    assert rows[-1]["value_exact"] == "3/1"


def test_sweep_single_point_and_bad_ranges(tmp_path):
    cfg = write_config(tmp_path, BASIC4, sweep={"parameter": "r", "start": "2", "stop": "2", "step": "0"})
    code, text = invoke("sweep", cfg, tmp_path)
    assert code == 0 and len(read_csv(text)) == 1
    cfg = write_config(tmp_path, BASIC4, sweep={"parameter": "r", "start": "3", "stop": "2", "step": "1"})
    assert invoke("sweep", cfg, tmp_path)[0] == 2
    cfg = write_config(tmp_path, BASIC4, sweep={"parameter": "r", "start": "2", "stop": "3", "step": "0"})
    assert invoke("sweep", cfg, tmp_path)[0] == 2


def test_sweep_beta_window_shifts(tmp_path):
    code, text = invoke("sweep", CONFIGS / "retraction60.json", tmp_path)
    assert code == 0
    rows = read_csv(text)
    window = [int(r["window_lambdas"]) for r in rows if r["window_lambdas"]]
    assert window == sorted(window, reverse=True)
    assert window[0] == 59 and window[-1] == 42
    at_tenth = next(r for r in rows if r["value_exact"] == "1/10")
    assert at_tenth["mixed_lambdas"] == "48"


def test_sweep_k(tmp_path):
    cfg = write_config(tmp_path, BASIC4, sweep={"parameter": "k", "start": "1", "stop": "4", "step": "1"})
    code, text = invoke("sweep", cfg, tmp_path)
    assert code == 0 and len(read_csv(text)) == 4
    cfg = write_config(tmp_path, BASIC4, sweep={"parameter": "k", "start": "1", "stop": "2", "step": "1/2"})
    assert invoke("sweep", cfg, tmp_path)[0] == 2


def test_simulate_example1(tmp_path):
    data = report("simulate", CONFIGS / "example1.json", tmp_path)
    res = data["result"]
    assert res["within_4se"]
    assert res["dynamics"]["terminal"] == "fixed_point"
    assert res["dynamics"]["final"] == "CCCC"
    again = report("simulate", CONFIGS / "example1.json", tmp_path)
    assert again["result"]["simulation"] == res["simulation"]


def test_simulate_all_out_and_overrides(tmp_path):
    cfg = write_config(tmp_path, BASIC4, simulate={"profile": "AAAA"})
    data = report("simulate", cfg, tmp_path, "--trials", "500", "--seed", "7")
    sim = data["result"]["simulation"]
    assert sim["empirical_progress_rate"] == 0 and sim["trials"] == 500 and sim["seed"] == 7
    assert data["cli_overrides"] == {"seed": 7, "trials": 500}


def test_float_mode_reports_numbers(tmp_path):
    data = report("enumerate", CONFIGS / "example1.json", tmp_path, "--mode", "float", "--epsilon", "1e-12")
    res = data["result"]
    assert res["count"] == 3
    assert isinstance(res["structure"]["thresholds"][0]["contributor_lhs"], float)


def test_exact_rationals_round_trip(tmp_path):
    data = report("calibrate", CONFIGS / "retraction60.json", tmp_path)
    exact = Fraction(data["result"]["r_min"]["exact"])
    assert data["result"]["r_min"]["exact"] == f"{exact.numerator}/{exact.denominator}"
    assert json.loads(json.dumps(data)) == data


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "partgame", "enumerate", "--config", str(CONFIGS / "example2.json")],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(out.stdout)["result"]["count"] == 2
