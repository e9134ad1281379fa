"""Secondary acceptance: every figure kind renders from real simulator CSVs,
and a schema-broken fixture fails with an error naming the missing column."""

from __future__ import annotations

import json
import subprocess
import sys

import matplotlib.pyplot as plt

from plotkit.cli import main
from plotkit.figures import FigureSpec, render


def test_b1_all_five_kinds_render(artifacts, tmp_path):
    jobs = [
        ("sync_error_timeseries", artifacts / "broadcast" / "event_trace.csv"),
        ("allan_deviation", artifacts / "broadcast" / "adev.csv"),
        ("cycle_residual_hist", artifacts / "transact" / "cycles.csv"),
        ("finetune_heatmap", artifacts / "sweep" / "sweep.csv"),
        ("model_swap_band", artifacts / "modelswap" / "modelswap.csv"),
    ]
    for kind, source in jobs:
        out = tmp_path / f"{kind}.png"
        fig = render(FigureSpec(kind, str(source), str(out)))
        plt.close(fig)
        assert out.exists() and out.stat().st_size > 0, kind
    print(f"B1 PASS all {len(jobs)} figure kinds rendered from bundled "
          f"scenario artifacts")


def test_b1_schema_broken_fixture_fails_with_named_column(tmp_path, capsys):
    broken = tmp_path / "adev.csv"
    broken.write_text("clock,tau,adev\na,1.0,1e-12\n")  # tau_s renamed
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({
        "kind": "allan_deviation", "input": str(broken),
        "output": str(tmp_path / "broken.png")}))
    code = main(["--spec", str(spec_path), "--quiet"])
    err = capsys.readouterr().err
    assert code == 1
    assert "tau_s" in err
    assert not (tmp_path / "broken.png").exists()
    print("B1 PASS schema-broken fixture rejected naming column 'tau_s'")


def test_cli_manifest_batch(artifacts, tmp_path):
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps([
        {"kind": "allan_deviation",
         "input": str(artifacts / "broadcast" / "adev.csv"),
         "output": str(tmp_path / "one.png")},
        {"kind": "model_swap_band",
         "input": str(artifacts / "modelswap" / "modelswap.csv"),
         "output": str(tmp_path / "two.png")},
    ]))
    assert main(["--manifest", str(manifest), "--quiet"]) == 0
    assert (tmp_path / "one.png").exists()
    assert (tmp_path / "two.png").exists()


def test_cli_single_spec_with_out_override(artifacts, tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({
        "kind": "cycle_residual_hist",
        "input": str(artifacts / "transact" / "cycles.csv"),
        "output": str(tmp_path / "ignored.png")}))
    out = tmp_path / "actual.png"
    assert main(["--spec", str(spec_path), "--out", str(out),
                 "--quiet"]) == 0
    assert out.exists() and not (tmp_path / "ignored.png").exists()


def test_console_entry_point():
    result = subprocess.run([sys.executable, "-m", "plotkit.cli", "--help"],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert "--spec" in result.stdout and "--manifest" in result.stdout
