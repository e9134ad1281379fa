"""The standard figure set, one renderer per kind.

Every plotted number is read from the input CSV; this module never computes
physics.  Axes policies are fixed per kind: time series are linear seconds,
stability plots are log-log with a -1/2 slope guide, the sweep heatmap bins
two chosen scale columns over [0, 2].  render() saves the image and returns
the matplotlib Figure so callers (and tests) can inspect the plotted data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import EmptyInputError, SchemaError, load_table

FIGURE_KINDS = ("sync_error_timeseries", "allan_deviation",
                "cycle_residual_hist", "finetune_heatmap", "model_swap_band")


class FigureSpecError(ValueError):
    """Malformed figure specification."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_path: str
    output_path: str
    options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise FigureSpecError(
                f"unknown figure kind {self.kind!r}; expected one of "
                f"{', '.join(FIGURE_KINDS)}")


def spec_from_dict(data: dict) -> FigureSpec:
    for key in ("kind", "input", "output"):
        if key not in data:
            raise FigureSpecError(f"figure spec is missing {key!r}")
    unknown = set(data) - {"kind", "input", "output", "options"}
    if unknown:
        raise FigureSpecError(f"unknown figure spec key {sorted(unknown)[0]!r}")
    return FigureSpec(kind=data["kind"], input_path=data["input"],
                      output_path=data["output"],
                      options=data.get("options", {}))


def load_spec(path: str | Path) -> FigureSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FigureSpecError(f"spec {path} is not valid JSON: {exc}") from exc
    return spec_from_dict(data)


def _sync_error_timeseries(table, ax, options):
    nodes = options.get("nodes")
    series: dict[str, list[tuple[float, float]]] = {}
    for t, node, event, residual in zip(table["epoch_s"], table["node"],
                                        table["event"],
                                        table["residual_error_s"]):
        if event != "sample" or math.isnan(residual):
            continue
        if nodes and node not in nodes:
            continue
        series.setdefault(node, []).append((t, residual))
    if not series:
        raise EmptyInputError("no sample rows with finite residuals")
    for node in sorted(series):
        points = np.array(series[node])
        ax.plot(points[:, 0], points[:, 1], label=node, linewidth=1.0)
    ax.set_xlabel("coordinate time (s)")
    ax.set_ylabel("sync residual (s)")
    ax.legend(loc="best", fontsize="small")
    ax.grid(True, alpha=0.3)


def _allan_deviation(table, ax, options):
    clocks = sorted(set(table["clock"]))
    taus_all = np.asarray(table["tau_s"])
    adev_all = np.asarray(table["adev"])
    names = np.array(table["clock"])
    anchor = None
    for clock in clocks:
        mask = names == clock
        taus, sigmas = taus_all[mask], adev_all[mask]
        order = np.argsort(taus)
        ax.loglog(taus[order], sigmas[order], marker="o", markersize=3,
                  label=clock)
        if anchor is None and np.all(sigmas[order] > 0):
            anchor = (taus[order][0], sigmas[order][0])
    if anchor is not None:
        guide_t = np.array([taus_all.min(), taus_all.max()])
        guide = anchor[1] * np.sqrt(anchor[0]) / np.sqrt(guide_t)
        ax.loglog(guide_t, guide, linestyle="--", color="gray",
                  label="slope -1/2")
    ax.set_xlabel("averaging time tau (s)")
    ax.set_ylabel("Allan deviation")
    ax.legend(loc="best", fontsize="small")
    ax.grid(True, which="both", alpha=0.3)


def _cycle_residual_hist(table, ax, options):
    bins = int(options.get("bins", 30))
    ax.hist(np.asarray(table["residual_s"]), bins=bins, color="steelblue",
            edgecolor="black", linewidth=0.5)
    ax.set_xlabel("cycle residual (s)")
    ax.set_ylabel("count")
    ax.grid(True, alpha=0.3)


def _finetune_heatmap(table, ax, options):
    axes = options.get("axes", ["secular_scale", "drift_scale"])
    if len(axes) != 2:
        raise FigureSpecError("heatmap 'axes' option must list two scales")
    for name in axes:
        if name not in table:
            raise SchemaError(f"heatmap axis {name!r} is not a sweep column")
    grid_n = int(options.get("grid", 20))
    x = np.asarray(table[axes[0]])
    y = np.asarray(table[axes[1]])
    z = np.log10(np.maximum(np.asarray(table["rms_sync_error_s"]), 1e-18))
    sums = np.zeros((grid_n, grid_n))
    counts = np.zeros((grid_n, grid_n))
    xi = np.clip((x / 2.0 * grid_n).astype(int), 0, grid_n - 1)
    yi = np.clip((y / 2.0 * grid_n).astype(int), 0, grid_n - 1)
    for i, j, v in zip(xi, yi, z):
        sums[j, i] += v
        counts[j, i] += 1
    with np.errstate(invalid="ignore"):
        mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    image = ax.imshow(mean, origin="lower", extent=[0, 2, 0, 2],
                      aspect="auto", cmap="viridis")
    ax.figure.colorbar(image, ax=ax, label="log10 rms sync error (s)")
    ax.set_xlabel(axes[0])
    ax.set_ylabel(axes[1])


def _model_swap_band(table, ax, options):
    t = np.asarray(table["epoch_s"])
    label_delta = np.asarray(table["label_delta_s"])
    pairwise = np.asarray(table["pairwise_delta_s"])
    ax.fill_between(t, -label_delta, label_delta, alpha=0.3,
                    color="steelblue", label="coordinate label delta")
    ax.plot(t, pairwise, color="crimson", linewidth=1.2,
            label="pairwise observable delta")
    ax.set_xlabel("coordinate time (s)")
    ax.set_ylabel("delta (s)")
    ax.legend(loc="best", fontsize="small")
    ax.grid(True, alpha=0.3)


_RENDERERS = {
    "sync_error_timeseries": ("event_trace", _sync_error_timeseries),
    "allan_deviation": ("adev", _allan_deviation),
    "cycle_residual_hist": ("cycles", _cycle_residual_hist),
    "finetune_heatmap": ("sweep", _finetune_heatmap),
    "model_swap_band": ("modelswap", _model_swap_band),
}


def render(spec: FigureSpec):
    """Render one figure to spec.output_path; returns the Figure."""
    schema, renderer = _RENDERERS[spec.kind]
    table = load_table(spec.input_path, schema)
    fig, ax = plt.subplots(figsize=(8.0, 5.0), dpi=120)
    try:
        renderer(table, ax, spec.options)
        ax.set_title(f"{spec.kind}: {Path(spec.input_path).name}")
        fig.tight_layout()
        out = Path(spec.output_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
    except Exception:
        plt.close(fig)
        raise
    return fig
