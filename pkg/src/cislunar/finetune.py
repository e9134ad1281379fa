"""Correction-sensitivity experiments.

Three experiment families live here: scale sweeps over the five correction
families (how precisely must each be tuned before inter-clock agreement
collapses), convention swaps (relabeling coordinate time changes labels, not
observables), and long-horizon prediction (a fitted secular+periodic model
extrapolated far beyond its fit window against a truth that drifts out from
under it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conventions import CoordinateConvention, label_difference

SCALE_FIELDS = ("secular_scale", "periodic_scale", "anomaly_scale",
                "drift_scale", "delay_scale")


@dataclass(frozen=True)
class CorrectionVector:
    """Per-family correction scales: 1.0 = fully tuned, 0.0 = disabled."""

    secular_scale: float = 1.0
    periodic_scale: float = 1.0
    anomaly_scale: float = 1.0
    drift_scale: float = 1.0
    delay_scale: float = 1.0

    def __post_init__(self) -> None:
        for name in SCALE_FIELDS:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in SCALE_FIELDS])

    def max_norm_from_unit(self) -> float:
        return float(np.max(np.abs(self.as_array() - 1.0)))


UNIT_VECTOR = CorrectionVector()


@dataclass(frozen=True)
class SweepResult:
    vector: CorrectionVector
    rms_sync_error: float        # rms over epochs of the worst-pair |error|
    divergence_rate: float       # fitted slope of worst-pair error, s/day
    agreement_fraction: float    # fraction of epochs under the scenario epsilon

    def __post_init__(self) -> None:
        if self.rms_sync_error < 0:
            raise ValueError("rms_sync_error must be >= 0")


class SweepRunError(RuntimeError):
    def __init__(self, vector: CorrectionVector, cause: Exception):
        super().__init__(f"sweep run failed at vector {vector}: {cause}")
        self.vector = vector


def sweep_corrections(scenario, vectors) -> list[SweepResult]:
    """One broadcast run per correction vector, against shared truth.

    Physics and noise are identical across vectors (same scenario seed), so
    the truth trajectories are prepared once and each run evaluates only its
    correction pipeline.
    """
    from . import runner  # deferred: runner imports scenario which imports us

    ctx = runner.RunContext.prepare(scenario)
    results: list[SweepResult] = []
    for vector in vectors:
        try:
            stats = ctx.broadcast_free_run(vector)
        except Exception as exc:  # noqa: BLE001 - identify the failing vector
            raise SweepRunError(vector, exc) from exc
        results.append(SweepResult(
            vector=vector,
            rms_sync_error=stats.rms_sync_error,
            divergence_rate=stats.divergence_rate,
            agreement_fraction=stats.agreement_fraction,
        ))
    return results


def faithfulness_score(results: list[SweepResult], epsilon: float) -> float:
    """Fraction of sampled vectors whose rms sync error beats epsilon."""
    if not results:
        raise ValueError("faithfulness_score needs at least one result")
    passing = sum(1 for r in results if r.rms_sync_error < epsilon)
    return passing / len(results)


def latin_hypercube(n: int, rng: np.random.Generator,
                    low: float = 0.0, high: float = 2.0) -> list[CorrectionVector]:
    """Seeded Latin hypercube over the five-scale box [low, high]^5."""
    dims = len(SCALE_FIELDS)
    u = (rng.random((n, dims)) + np.stack(
        [rng.permutation(n) for _ in range(dims)], axis=1)) / n
    samples = low + (high - low) * u
    return [CorrectionVector(**dict(zip(SCALE_FIELDS, row))) for row in samples]


def model_swap(scenario, conv_a: CoordinateConvention,
               conv_b: CoordinateConvention) -> tuple[float, float]:
    """(max pairwise-observable delta, max label delta) across the run window.

    Pairwise displayed-time differences are computed with each convention in
    force; conventions only relabel the epochs, so the observable delta is
    exactly zero while the label delta reflects the configured terms.
    """
    from . import runner

    ctx = runner.RunContext.prepare(scenario)
    _, obs_a = ctx.pairwise_observables(conv_a)
    _, obs_b = ctx.pairwise_observables(conv_b)
    pairwise_delta = 0.0
    for pair in obs_a:
        delta = np.max(np.abs(obs_a[pair] - obs_b[pair])) if obs_a[pair].size else 0.0
        pairwise_delta = max(pairwise_delta, float(delta))
    # the label delta uses the difference form: absolute labels of magnitude
    # ~1e6 s would bury sub-microsecond gaps in float quantization
    label_delta = float(np.max(np.abs(label_difference(conv_a, conv_b, ctx.grid))))
    return pairwise_delta, label_delta


# ---------------------------------------------------------------------------
# secular + periodic model fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitSpec:
    harmonics: int = 3
    angular_frequency: float | None = None  # default: scenario orbital rate


class FitDegenerateError(RuntimeError):
    """Raised when the fit design matrix is rank deficient."""


@dataclass(frozen=True)
class FittedRateModel:
    constant: float
    secular_rate: float                  # s per s
    angular_frequency: float
    cos_coeffs: tuple[float, ...]
    sin_coeffs: tuple[float, ...]

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = self.constant + self.secular_rate * t
        for k, (c, s) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            out = out + c * np.cos(k * self.angular_frequency * t) \
                      + s * np.sin(k * self.angular_frequency * t)
        return out


def fit_rate_model(t: np.ndarray, values: np.ndarray, omega: float,
                   harmonics: int) -> FittedRateModel:
    """Least-squares secular + harmonic fit of an offset series."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.size != values.size or t.size < 2 * (harmonics + 1):
        raise FitDegenerateError("too few samples for the requested model")
    scale = max(float(t[-1] - t[0]), 1.0)
    columns = [np.ones_like(t), (t - t[0]) / scale]
    for k in range(1, harmonics + 1):
        columns.append(np.cos(k * omega * t))
        columns.append(np.sin(k * omega * t))
    design = np.stack(columns, axis=1)
    coeffs, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < design.shape[1]:
        raise FitDegenerateError(
            f"design matrix rank {rank} < {design.shape[1]} columns")
    constant = float(coeffs[0] - coeffs[1] * t[0] / scale)
    secular = float(coeffs[1] / scale)
    cos_coeffs = tuple(float(c) for c in coeffs[2::2])
    sin_coeffs = tuple(float(c) for c in coeffs[3::2])
    return FittedRateModel(constant, secular, omega, cos_coeffs, sin_coeffs)


@dataclass(frozen=True)
class PredictionSeries:
    epochs_days: np.ndarray
    errors: np.ndarray  # |predicted - truth|, seconds

    def max_error(self) -> float:
        return float(np.max(self.errors)) if self.errors.size else 0.0

    def first_crossing_days(self, threshold: float) -> float | None:
        above = np.nonzero(self.errors > threshold)[0]
        return float(self.epochs_days[above[0]]) if above.size else None


def long_horizon_prediction(fit_window_days: float, predict_window_days: float,
                            truth_scenario, fit_spec: FitSpec = FitSpec(),
                            unmodeled_anomaly_fraction: float = 0.0,
                            sample_step_days: float = 10.0) -> PredictionSeries:
    """Fit a secular+periodic model on a truth window, extrapolate, difference.

    The truth pair is the scenario's authority clock against its first
    dependent, ideal hardware (this experiment probes the relativistic
    correction model, not clock noise).  `unmodeled_anomaly_fraction` steps
    the dependent's site potential anomaly at the end of the fit window,
    modeling an environment change the fitted model cannot know about.
    """
    if fit_window_days < 30.0:
        raise ValueError("fit window must be at least 30 days")
    if predict_window_days <= fit_window_days:
        raise ValueError("prediction window must exceed the fit window")

    from . import runner

    fit_t, fit_values, anomaly_rate, omega = runner.truth_offset_series(
        truth_scenario, fit_window_days)
    if fit_spec.angular_frequency is not None:
        omega = fit_spec.angular_frequency
    model = fit_rate_model(fit_t, fit_values, omega, fit_spec.harmonics)

    pred_t, pred_values, _, _ = runner.truth_offset_series(
        truth_scenario, predict_window_days, sample_step_days * 86400.0)
    fit_end = fit_window_days * 86400.0
    keep = pred_t >= fit_end
    pred_t = pred_t[keep]
    truth = pred_values[keep] + (
        unmodeled_anomaly_fraction * anomaly_rate * (pred_t - fit_end))
    errors = np.abs(model.evaluate(pred_t) - truth)
    return PredictionSeries(epochs_days=pred_t / 86400.0, errors=errors)


def in_family_prediction_error(model: FittedRateModel, fit_window_days: float,
                               predict_window_days: float, fit_spec: FitSpec,
                               fit_step_s: float = 3600.0,
                               sample_step_days: float = 30.0) -> PredictionSeries:
    """Control experiment: truth synthesized from the model family itself."""
    fit_t = np.arange(0.0, fit_window_days * 86400.0 + fit_step_s, fit_step_s)
    truth_fit = model.evaluate(fit_t)
    refit = fit_rate_model(fit_t, truth_fit, model.angular_frequency,
                           fit_spec.harmonics)
    pred_t = np.arange(fit_window_days, predict_window_days + sample_step_days,
                       sample_step_days) * 86400.0
    errors = np.abs(refit.evaluate(pred_t) - model.evaluate(pred_t))
    return PredictionSeries(epochs_days=pred_t / 86400.0, errors=errors)
