from __future__ import annotations

import csv
import json
import math

import matplotlib.pyplot as plt
import numpy as np
import pytest

from plotkit.figures import (FigureSpec, FigureSpecError, load_spec,
                             render, spec_from_dict)
from plotkit.schema import EmptyInputError, SchemaError, load_table


def close(fig):
    plt.close(fig)


# ---------------------------------------------------------------------------
# spec handling
# ---------------------------------------------------------------------------

def test_unknown_kind_rejected():
    with pytest.raises(FigureSpecError, match="unknown figure kind"):
        FigureSpec(kind="pie_chart", input_path="x.csv", output_path="x.png")


def test_spec_requires_core_keys():
    with pytest.raises(FigureSpecError, match="missing 'output'"):
        spec_from_dict({"kind": "adev", "input": "x.csv"})
    with pytest.raises(FigureSpecError, match="unknown figure spec key"):
        spec_from_dict({"kind": "allan_deviation", "input": "a", "output": "b",
                        "style": "dark"})


def test_spec_file_round_trip(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({
        "kind": "allan_deviation", "input": "adev.csv",
        "output": "adev.png", "options": {"bins": 10}}))
    spec = load_spec(path)
    assert spec.kind == "allan_deviation"
    assert spec.options == {"bins": 10}
    path.write_text("{not json")
    with pytest.raises(FigureSpecError, match="not valid JSON"):
        load_spec(path)


# ---------------------------------------------------------------------------
# schema loading
# ---------------------------------------------------------------------------

def test_missing_column_named_in_error(tmp_path):
    bad = tmp_path / "adev.csv"
    bad.write_text("clock,tau_seconds,adev\na,1.0,1e-12\n")
    with pytest.raises(SchemaError, match="missing column 'tau_s'"):
        load_table(bad, "adev")


def test_empty_input_is_an_error_not_an_empty_plot(tmp_path):
    empty = tmp_path / "adev.csv"
    empty.write_text("clock,tau_s,adev\n")
    out = tmp_path / "fig.png"
    spec = FigureSpec("allan_deviation", str(empty), str(out))
    with pytest.raises(EmptyInputError):
        render(spec)
    assert not out.exists()


def test_missing_file_is_schema_error(tmp_path):
    with pytest.raises(SchemaError, match="does not exist"):
        load_table(tmp_path / "nope.csv", "sweep")


def test_non_numeric_cell_is_schema_error(tmp_path):
    bad = tmp_path / "adev.csv"
    bad.write_text("clock,tau_s,adev\na,soon,1e-12\n")
    with pytest.raises(SchemaError, match="not numeric"):
        load_table(bad, "adev")


# ---------------------------------------------------------------------------
# figure fidelity: plotted values equal source cells
# ---------------------------------------------------------------------------

def test_timeseries_plots_exactly_the_sample_rows(artifacts, tmp_path):
    trace = artifacts / "broadcast" / "event_trace.csv"
    fig = render(FigureSpec("sync_error_timeseries", str(trace),
                            str(tmp_path / "ts.png")))
    with open(trace) as fh:
        rows = [r for r in csv.DictReader(fh)
                if r["event"] == "sample"
                and not math.isnan(float(r["residual_error_s"]))]
    by_node: dict[str, list[float]] = {}
    for r in rows:
        by_node.setdefault(r["node"], []).append(float(r["residual_error_s"]))
    lines = {line.get_label(): line for line in fig.axes[0].get_lines()}
    for node, residuals in by_node.items():
        plotted = lines[node].get_ydata()
        assert np.array_equal(np.asarray(plotted), np.asarray(residuals))
    close(fig)


def test_adev_figure_plots_source_cells(artifacts, tmp_path):
    adev_csv = artifacts / "broadcast" / "adev.csv"
    fig = render(FigureSpec("allan_deviation", str(adev_csv),
                            str(tmp_path / "adev.png")))
    table = load_table(adev_csv, "adev")
    lines = {line.get_label(): line for line in fig.axes[0].get_lines()}
    for clock in set(table["clock"]):
        mask = np.array(table["clock"]) == clock
        order = np.argsort(np.asarray(table["tau_s"])[mask])
        expected = np.asarray(table["adev"])[mask][order]
        assert np.array_equal(np.asarray(lines[clock].get_ydata()), expected)
    close(fig)


def test_histogram_counts_cover_every_residual(artifacts, tmp_path):
    cycles = artifacts / "transact" / "cycles.csv"
    fig = render(FigureSpec("cycle_residual_hist", str(cycles),
                            str(tmp_path / "hist.png")))
    table = load_table(cycles, "cycles")
    counts = sum(patch.get_height() for patch in fig.axes[0].patches)
    assert counts == len(table["residual_s"])
    close(fig)


def test_heatmap_cells_match_independent_binning(artifacts, tmp_path):
    sweep = artifacts / "sweep" / "sweep.csv"
    fig = render(FigureSpec("finetune_heatmap", str(sweep),
                            str(tmp_path / "heat.png"),
                            options={"axes": ["secular_scale", "drift_scale"],
                                     "grid": 10}))
    table = load_table(sweep, "sweep")
    image = fig.axes[0].images[0].get_array()
    x = np.asarray(table["secular_scale"])
    y = np.asarray(table["drift_scale"])
    z = np.log10(np.maximum(np.asarray(table["rms_sync_error_s"]), 1e-18))
    xi = np.clip((x / 2.0 * 10).astype(int), 0, 9)
    yi = np.clip((y / 2.0 * 10).astype(int), 0, 9)
    cell = (xi == xi[0]) & (yi == yi[0])
    assert image[yi[0], xi[0]] == pytest.approx(float(np.mean(z[cell])))
    close(fig)


def test_band_figure_plots_source_cells(artifacts, tmp_path):
    swap = artifacts / "modelswap" / "modelswap.csv"
    fig = render(FigureSpec("model_swap_band", str(swap),
                            str(tmp_path / "band.png")))
    table = load_table(swap, "modelswap")
    lines = [l for l in fig.axes[0].get_lines()
             if l.get_label() == "pairwise observable delta"]
    assert np.array_equal(np.asarray(lines[0].get_ydata()),
                          np.asarray(table["pairwise_delta_s"]))
    close(fig)


def test_heatmap_axes_option_validated(artifacts, tmp_path):
    sweep = artifacts / "sweep" / "sweep.csv"
    with pytest.raises(SchemaError, match="not a sweep column"):
        render(FigureSpec("finetune_heatmap", str(sweep),
                          str(tmp_path / "x.png"),
                          options={"axes": ["secular_scale", "warp_scale"]}))
    with pytest.raises(FigureSpecError, match="two scales"):
        render(FigureSpec("finetune_heatmap", str(sweep),
                          str(tmp_path / "x.png"),
                          options={"axes": ["secular_scale"]}))
