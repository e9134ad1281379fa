from __future__ import annotations

import json
import subprocess
import sys

import pytest

from cislunar.cli import bundled_scenario_names, load_scenario, main
from cislunar.runner import (ADEV_HEADER, EVENT_TRACE_HEADER, GRAPH_HEADER,
                             SWEEP_HEADER, run)
from cislunar.scenario import (ScenarioError, parse_scenario, render_scenario,
                               scenario_to_dict)

MINIMAL = """
name: tiny
duration: 3600.0
clocks:
  - id: only
    worldline: {kind: earth_surface, latitude_deg: 0.0, longitude_deg: 0.0}
"""


def test_minimal_document_gets_defaults():
    s = parse_scenario(MINIMAL)
    assert s.name == "tiny"
    assert s.seed == 0
    assert s.epoch_step == 60.0
    assert s.ephemeris.speed_of_light == 299792458.0
    assert s.corrections.secular_scale == 1.0
    assert s.topology.nodes == ()


def test_duplicate_clock_id_names_the_id():
    doc = MINIMAL + """
  - id: only
    worldline: {kind: moon_surface, latitude_deg: 0.0, longitude_deg: 0.0}
"""
    with pytest.raises(ScenarioError, match="duplicate clock id 'only'"):
        parse_scenario(doc)


def test_eccentricity_invariant_cited_in_error():
    doc = MINIMAL + "ephemeris: {orbital_eccentricity: 1.2}\n"
    with pytest.raises(ScenarioError, match="0 <= e < 1"):
        parse_scenario(doc)


def test_unknown_key_rejected_in_strict_mode():
    doc = MINIMAL + "warp_factor: 9\n"
    with pytest.raises(ScenarioError, match="warp_factor"):
        parse_scenario(doc)


def test_dangling_topology_reference():
    doc = MINIMAL + """
topology:
  nodes:
    - {id: ghost, role: dependent}
"""
    with pytest.raises(ScenarioError, match="unknown clock 'ghost'"):
        parse_scenario(doc)


def test_syntax_error_reports_line():
    with pytest.raises(ScenarioError, match="line"):
        parse_scenario("name: x\n  bad indentation: [\n")


def test_undeclared_correction_convention_rejected():
    doc = MINIMAL + "broadcast: {correction_convention: NoSuchModel}\n"
    with pytest.raises(ScenarioError, match="NoSuchModel"):
        parse_scenario(doc)


def test_round_trip_all_bundled_scenarios():
    for name in bundled_scenario_names():
        scenario = load_scenario(name)
        again = parse_scenario(render_scenario(scenario))
        assert again == scenario, name
        assert scenario_to_dict(again) == scenario_to_dict(scenario)


def test_bundled_names_present():
    names = bundled_scenario_names()
    for required in ("anchor56", "gps38", "sweepdemo", "driftdemo",
                     "broadcastdemo", "ensembledemo", "transactdemo",
                     "modelswapdemo", "longhorizon"):
        assert required in names


# ---------------------------------------------------------------------------
# run() artifacts
# ---------------------------------------------------------------------------

def test_run_writes_contracted_headers(tmp_path):
    summary = run(load_scenario("transactdemo"), tmp_path)
    assert (tmp_path / "event_trace.csv").read_text().splitlines()[0] \
        == EVENT_TRACE_HEADER
    assert (tmp_path / "adev.csv").read_text().splitlines()[0] == ADEV_HEADER
    assert (tmp_path / "offset_graph.txt").read_text().splitlines()[0] \
        == GRAPH_HEADER
    assert summary["transactional"]["commits"] > 0
    data = json.loads((tmp_path / "summary.json").read_text())
    assert data["scenario"] == "transactdemo"


def test_anchor56_verdict_passes(tmp_path):
    summary = run(load_scenario("anchor56"), tmp_path)
    check = summary["checks"][0]
    assert check["verdict"] == "pass"
    assert check["value"] == pytest.approx(56.02, abs=0.5)


def test_gps38_verdict_passes(tmp_path):
    summary = run(load_scenario("gps38"), tmp_path)
    check = summary["checks"][0]
    assert check["verdict"] == "pass"
    assert check["value"] == pytest.approx(38.0, abs=1.0)


def test_run_twice_is_byte_identical(tmp_path):
    s = load_scenario("broadcastdemo")
    run(s, tmp_path / "one")
    run(s, tmp_path / "two")
    for path in sorted((tmp_path / "one").iterdir()):
        twin = tmp_path / "two" / path.name
        assert path.read_bytes() == twin.read_bytes(), path.name


def test_ensemble_csv_columns_follow_config_order(tmp_path):
    run(load_scenario("ensembledemo"), tmp_path)
    header = (tmp_path / "ensemble.csv").read_text().splitlines()[0]
    cols = header.split(",")
    assert cols[:2] == ["epoch_s", "paper_time_s"]
    members = [c[len("weight_"):] for c in cols if c.startswith("weight_")]
    assert members == ["lun_a", "lun_b", "lun_c", "lun_d", "lun_e"]
    first = (tmp_path / "ensemble.csv").read_text().splitlines()[1].split(",")
    weights = [float(x) for x in first[2:7]]
    assert sum(weights) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# CLI surface
# ---------------------------------------------------------------------------

def test_cli_run_ok(tmp_path, capsys):
    code = main(["run", "--config", "gps38", "--out", str(tmp_path),
                 "--quiet"])
    assert code == 0
    assert (tmp_path / "summary.json").exists()


def test_both_architectures_in_one_run(tmp_path):
    import dataclasses

    from cislunar.scenario import Architecture

    scenario = dataclasses.replace(load_scenario("driftdemo"),
                                   architecture=Architecture.BOTH)
    summary = run(scenario, tmp_path)
    assert summary["broadcast"] is not None
    assert summary["transactional"] is not None
    assert summary["transactional"]["attempts"] > 0
    assert (tmp_path / "offset_graph.txt").exists()
    events = {line.split(",")[2] for line
              in (tmp_path / "event_trace.csv").read_text().splitlines()[1:]}
    assert {"sample", "commit"} <= events


def test_cli_seed_override(tmp_path):
    code = main(["run", "--config", "gps38", "--out", str(tmp_path),
                 "--seed", "123", "--quiet"])
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["seed"] == 123


def test_cli_config_error_emits_json(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(MINIMAL + "ephemeris: {orbital_eccentricity: 3.0}\n")
    code = main(["run", "--config", str(bad), "--out", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == 1
    err = json.loads(captured.err)
    assert err["error"] == "config"
    assert "0 <= e < 1" in err["message"]


def test_cli_runtime_error_exit_code(tmp_path, capsys):
    code = main(["run", "--config", "definitely-not-a-scenario",
                 "--out", str(tmp_path)])
    assert code == 1  # unresolvable scenario reference is a config error
    assert json.loads(capsys.readouterr().err)["error"] == "config"
    code = main(["sweep", "--config", "gps38", "--samples", "2",
                 "--out", str(tmp_path)])
    assert code == 2  # gps38 has no topology: sweep is a runtime failure
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "runtime"


def test_cli_failed_check_returns_runtime_exit(tmp_path, capsys):
    doc = """
name: impossible
duration: 86400.0
epoch_step: 3600.0
clocks:
  - id: a
    worldline: {kind: earth_surface, latitude_deg: 0.0, longitude_deg: 0.0}
  - id: b
    worldline: {kind: earth_surface, latitude_deg: 10.0, longitude_deg: 0.0}
checks:
  - {name: cant_happen, kind: pair_rate_usday, pair: [a, b],
     expect: 1000.0, tolerance: 0.001}
"""
    path = tmp_path / "impossible.yaml"
    path.write_text(doc)
    code = main(["run", "--config", str(path), "--out", str(tmp_path / "o"),
                 "--quiet"])
    assert code == 2
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["checks"][0]["verdict"] == "fail"


def test_cli_env_var_out_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CISLUNAR_OUT", str(tmp_path / "envout"))
    code = main(["run", "--config", "gps38", "--quiet"])
    assert code == 0
    assert (tmp_path / "envout" / "summary.json").exists()


def test_cli_compare_models_and_report(tmp_path, capsys):
    assert main(["compare-models", "--config", "modelswapdemo",
                 "--out", str(tmp_path), "--quiet"]) == 0
    data = json.loads((tmp_path / "modelswap_summary.json").read_text())
    assert data["max_pairwise_observable_delta_s"] == 0.0
    header = (tmp_path / "modelswap.csv").read_text().splitlines()[0]
    assert header == "epoch_s,label_delta_s,pairwise_delta_s"
    assert main(["report", "--out", str(tmp_path)]) == 0


def test_cli_sweep_writes_contract_header(tmp_path):
    assert main(["sweep", "--config", "driftdemo", "--samples", "5",
                 "--include-unit", "--out", str(tmp_path), "--quiet"]) == 0
    header = (tmp_path / "sweep.csv").read_text().splitlines()[0]
    assert header == SWEEP_HEADER
    assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 7


def test_console_entry_point():
    result = subprocess.run([sys.executable, "-m", "cislunar.cli", "--help"],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert "run" in result.stdout and "sweep" in result.stdout
