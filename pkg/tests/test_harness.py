import csv
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quenchqsl.cli import main
from quenchqsl.harness import PRESETS, ConfigError, RunConfig, run, verify
from quenchqsl.harness.runner import format_value
from quenchqsl.config import DEFAULT_TOLERANCES


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _write_cfg(path, text):
    path.write_text(text)
    return path


# -- configuration ------------------------------------------------------------------------------

@given(
    model=st.sampled_from(["fermi-trap", "fermi-impurity", "lmg"]),
    couplings=st.lists(st.floats(0.1, 5.0), min_size=1, max_size=4),
    n_values=st.lists(st.integers(2, 500), min_size=1, max_size=4),
    n_points=st.integers(2, 5000),
    t_max=st.one_of(st.none(), st.floats(0.01, 100.0)),
    jobs=st.integers(1, 8),
    slack=st.floats(1e-15, 1e-3),
)
def test_config_round_trip(model, couplings, n_values, n_points, t_max, jobs, slack):
    cfg = RunConfig(model=model, couplings=couplings, n_values=n_values, n_points=n_points, t_max=t_max,
                    jobs=jobs, tolerances={"bound_slack": slack})
    again = RunConfig.from_yaml(cfg.to_yaml())
    assert again == cfg
    assert again.digest() == cfg.digest()


def test_empty_grid_rejected_before_computing():
    with pytest.raises(ConfigError, match="n_values"):
        RunConfig(n_values=())
    with pytest.raises(ConfigError, match="couplings"):
        RunConfig.from_yaml("schema-version: 1\ncouplings: []\n")


@pytest.mark.parametrize("text, match", [
    ("model: lmg\n", "schema-version"),
    ("schema-version: 7\n", "schema-version"),
    ("schema-version: 1\nfoo: 1\n", "unknown"),
    ("schema-version: 1\ntolerances: {nonsense: 1}\n", "nonsense"),
    ("schema-version: 1\nmodel: ising\n", "model"),
    ("schema-version: 1\npreset: fig9\n", "preset"),
    ("schema-version: 1\nthresholds: [1.5]\n", "thresholds"),
    ("[1, 2", "malformed"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        RunConfig.from_yaml(text)


def test_preset_defaults_and_overrides():
    cfg = RunConfig.for_preset("fig3a")
    assert cfg.model == "lmg"
    assert cfg.couplings == (1.2, 1.4, 1.6, 1.8, 2.0)
    assert cfg.n_values == (200, 400, 600, 800, 1000)
    small = RunConfig.from_yaml("schema-version: 1\nn_values: [20]\nmodel: fermi-trap\n", preset="fig2")
    assert small.model == "lmg" and small.n_values == (20,) and small.couplings == (0.9, 1.1)
    assert set(PRESETS) == {"fig1a", "fig1b", "fig2", "fig3a", "fig3b", "supp-a", "supp-b", "supp-c"}


def test_csv_number_format():
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(None) == "" and format_value(7) == "7" and format_value("trap") == "trap"


# -- runs ---------------------------------------------------------------------------------------------

def test_fig1a_columns(tmp_path):
    cfg = RunConfig.for_preset("fig1a", n_values=(10, 50), output_dir=str(tmp_path), n_points=256,
                               params={"inset_n": [10]})
    res = run(cfg)
    assert res.ok
    rows = _read(tmp_path / "fig1a.csv")
    assert rows[0] == ["N", "tau_qsl_trap", "tau_qsl_impurity"]
    assert [r[0] for r in rows[1:]] == ["10", "50"]
    assert float(rows[1][1]) > float(rows[2][1]) > 0
    assert _read(tmp_path / "fig1a_inset.csv")[0] == ["model", "N", "t", "fidelity"]
    reports = json.loads((tmp_path / "reports.json").read_text())
    assert {r["model"] for r in reports} == {"fermi-trap", "fermi-impurity"}


def test_fig3a_columns(tmp_path):
    cfg = RunConfig.for_preset("fig3a", couplings=(1.2,), n_values=(200, 400), output_dir=str(tmp_path))
    run(cfg)
    rows = _read(tmp_path / "fig3a.csv")
    assert rows[0] == ["lambda", "N", "f_min", "t_min"]
    assert len(rows) == 3


def test_manifest_contents(tmp_path):
    cfg = RunConfig(model="lmg", couplings=(0.9,), n_values=(20,), n_points=32, output_dir=str(tmp_path))
    res = run(cfg)
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["config_hash"] == cfg.digest() == res.manifest["config_hash"]
    assert m["tolerances"] == DEFAULT_TOLERANCES.as_dict()
    assert RunConfig.from_dict(m["config"]) == cfg
    assert m["families"]["scalars"]["columns"][0] == "coupling"


def test_runs_are_deterministic_and_cached(tmp_path):
    base = dict(model="fermi-impurity", couplings=(0.5, 1.0), n_values=(6, 12), n_points=40)
    a = run(RunConfig(output_dir=str(tmp_path / "a"), **base))
    b = run(RunConfig(output_dir=str(tmp_path / "b"), jobs=2, **base))
    for fam in ("scalars", "series", "thresholds"):
        assert (tmp_path / "a" / f"{fam}.csv").read_bytes() == (tmp_path / "b" / f"{fam}.csv").read_bytes()
    again = run(RunConfig(output_dir=str(tmp_path / "a"), **base))
    assert again.manifest["points_cached"] == 4 and again.manifest["points_computed"] == 0
    assert again.records == a.records == b.records
    fresh = run(RunConfig(output_dir=str(tmp_path / "a"), **base), use_cache=False)
    assert fresh.records == again.records


def test_records_sorted_by_parameter_point(tmp_path):
    cfg = RunConfig(model="lmg", couplings=(1.5, 0.5), n_values=(30, 10), n_points=16, output_dir=str(tmp_path))
    points = [r[:2] for r in run(cfg).records["scalars"]]
    assert points == sorted(points)


def test_corrupt_cache_entry_is_recomputed(tmp_path):
    cfg = RunConfig(model="fermi-trap", couplings=(1.5,), n_values=(3,), n_points=16, output_dir=str(tmp_path))
    first = run(cfg)
    for f in (tmp_path / "cache").iterdir():
        f.write_text("{not json")
    second = run(cfg)
    assert second.manifest["points_cached"] == 0 and second.records == first.records


def test_failed_points_are_reported(tmp_path):
    cfg = RunConfig(model="lmg", couplings=(0.5,), n_values=(1, 10), n_points=16, output_dir=str(tmp_path))
    res = run(cfg)
    assert [f["point"] for f in res.failures] == [[0.5, 1]]
    assert "ValueError" in res.failures[0]["error"]
    assert len(res.records["scalars"]) == 1


# -- verify ------------------------------------------------------------------------------------------------

def test_verify_quick_passes():
    report = verify(quick=True)
    assert report.ok, [r.line() for r in report.failures]
    names = {r.name for r in report.results}
    assert {"eq14_vs_det", "mt_bound", "eq23", "conservation", "parseval", "fisher_velocity"} <= names


def test_verify_negative_control_names_invariant():
    report = verify(DEFAULT_TOLERANCES.updated(analytic_vs_det=1e-20), quick=True)
    assert report.failures and {r.name for r in report.failures} >= {"eq14_vs_det"}


def test_verify_records_eq14_deviation_per_point():
    rows = [r for r in verify(quick=True).results if r.name == "eq14_vs_det"]
    assert len(rows) == 12 and all("eta=" in r.detail and "N=" in r.detail for r in rows)


# -- command line ----------------------------------------------------------------------------------------

def test_cli_run_success(tmp_path, capsys):
    cfg = _write_cfg(tmp_path / "c.yaml", "schema-version: 1\nmodel: lmg\ncouplings: [1.2]\nn_values: [10]\n"
                                          "time: {n_points: 32}\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--jobs", "1"]) == 0
    assert (tmp_path / "o" / "manifest.json").exists()


def test_cli_run_preset(tmp_path):
    cfg = _write_cfg(tmp_path / "c.yaml", "schema-version: 1\nn_values: [5, 10]\n")
    assert main(["run", "--config", str(cfg), "--preset", "supp-c", "--out", str(tmp_path / "o")]) == 0
    assert _read(tmp_path / "o" / "supp_c.csv")[0] == ["N", "tau_mt", "tau_ml", "tau_w", "tau_mt_per_particle",
                                                      "tau_w_printed"]


@pytest.mark.parametrize("text", ["schema-version: 2\n", "schema-version: 1\nn_values: []\n",
                                  "schema-version: 1\njobs: 0\n"])
def test_cli_config_errors_exit_2(tmp_path, text):
    cfg = _write_cfg(tmp_path / "c.yaml", text)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_cli_missing_config_and_usage(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.yaml")]) == 2
    assert main(["run"]) == 2
    assert main(["run", "--config", "x", "--preset", "fig9"]) == 2


def test_cli_failed_point_exit_1(tmp_path):
    cfg = _write_cfg(tmp_path / "c.yaml", "schema-version: 1\nmodel: lmg\nn_values: [1]\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_cli_verify(capsys):
    assert main(["verify", "--quick"]) == 0
    assert main(["verify", "--quick", "--tolerance", "eq23=1e-20"]) == 1
    assert "FAIL  eq23" in capsys.readouterr().out
    assert main(["verify", "--tolerance", "eq23"]) == 2


def test_cli_spectral(tmp_path, capsys):
    cfg = _write_cfg(tmp_path / "c.yaml", "schema-version: 1\nmodel: fermi-impurity\ncouplings: [0.5]\n"
                                          "n_values: [8]\ntime: {t_max: 6.283185307179586, n_points: 128}\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    series = tmp_path / "o" / "series.csv"
    for window in ("hann", "none"):
        out = tmp_path / f"S_{window}.csv"
        assert main(["spectral", "--input", str(series), "--window", window, "--output", str(out)]) == 0
        rows = _read(out)
        assert rows[0] == ["omega", "S"] and len(rows) == 1 + 2 * 128 - 1
    cfg2 = _write_cfg(tmp_path / "c2.yaml", "schema-version: 1\nmodel: lmg\ncouplings: [0.9]\n"
                                            "n_values: [10, 20]\ntime: {t_max: 5.0, n_points: 64}\n")
    assert main(["run", "--config", str(cfg2), "--out", str(tmp_path / "o2")]) == 0
    multi = tmp_path / "o2" / "series.csv"
    assert main(["spectral", "--input", str(multi), "--window", "none"]) == 2
    assert main(["spectral", "--input", str(multi), "--window", "none", "--point", "0.9,20"]) == 0
    assert main(["spectral", "--input", str(multi), "--window", "none", "--point", "0.9,30"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert main(["spectral", "--input", str(bad), "--window", "none"]) == 2
    assert main(["spectral", "--input", str(series), "--window", "kaiser"]) == 2
