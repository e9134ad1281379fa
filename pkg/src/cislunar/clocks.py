"""Hardware clock models: deterministic frequency error plus synthesized noise.

A clock displays

    displayed(tau) = tau + y0*tau + 0.5*drift*tau^2 + x_noise(tau)

where tau is the true proper time along its worldline and x_noise is the
integral of white-FM plus random-walk-FM frequency noise, synthesized in the
proper-time domain.  White FM: phase increments are independent gaussians with
std sigma_wfm*sqrt(h), giving ADEV(tau) = sigma_wfm/sqrt(tau).  Random-walk FM:
the fractional frequency itself random-walks with per-sqrt-second diffusion
sigma_rwfm, giving the +1/2 ADEV slope.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClockModel:
    frequency_offset: float = 0.0   # fractional frequency y0
    linear_drift: float = 0.0       # fractional frequency per second
    white_fm_sigma: float = 0.0     # ADEV at tau = 1 s
    rw_fm_sigma: float = 0.0        # random-walk FM diffusion per sqrt(s)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.white_fm_sigma < 0 or self.rw_fm_sigma < 0:
            raise ValueError("noise sigmas must be >= 0")


@dataclass(frozen=True)
class ClockReading:
    coordinate_epoch: float
    displayed_time: float
    true_proper_time: float


def noise_phase(model: ClockModel, proper_times: np.ndarray) -> np.ndarray:
    """Integrated noise phase at each proper-time sample (first sample -> 0).

    Bit-reproducible for a fixed seed and sample grid.
    """
    tau = np.asarray(proper_times, dtype=float)
    if tau.ndim != 1 or tau.size == 0:
        raise ValueError("proper_times must be a non-empty 1-d series")
    steps = np.diff(tau)
    if np.any(steps <= 0):
        raise ValueError("proper-time epochs must be strictly increasing")
    phase = np.zeros(tau.size)
    if tau.size == 1 or (model.white_fm_sigma == 0 and model.rw_fm_sigma == 0):
        return phase
    rng = np.random.default_rng(model.seed)
    sqrt_h = np.sqrt(steps)
    increments = np.zeros(steps.size)
    if model.white_fm_sigma > 0:
        increments += model.white_fm_sigma * sqrt_h * rng.standard_normal(steps.size)
    if model.rw_fm_sigma > 0:
        y_walk = np.cumsum(model.rw_fm_sigma * sqrt_h * rng.standard_normal(steps.size))
        increments += y_walk * steps
    phase[1:] = np.cumsum(increments)
    return phase


def displayed_offsets(model: ClockModel, proper_times: np.ndarray) -> np.ndarray:
    """displayed - proper, per sample (deterministic terms plus noise)."""
    tau = np.asarray(proper_times, dtype=float)
    deterministic = model.frequency_offset * tau + 0.5 * model.linear_drift * tau * tau
    return deterministic + noise_phase(model, tau)


def sample_clock(model: ClockModel, proper_times) -> list[ClockReading]:
    """Readings for an ordered series of (coordinate_epoch, proper_seconds)."""
    pairs = list(proper_times)
    if not pairs:
        raise ValueError("proper_times must be non-empty")
    epochs = np.array([p[0] for p in pairs], dtype=float)
    taus = np.array([p[1] for p in pairs], dtype=float)
    if np.any(np.diff(epochs) <= 0):
        raise ValueError("coordinate epochs must be strictly increasing")
    offsets = displayed_offsets(model, taus)
    return [
        ClockReading(coordinate_epoch=float(e),
                     displayed_time=float(tau + off),
                     true_proper_time=float(tau))
        for e, tau, off in zip(epochs, taus, offsets)
    ]


def allan_deviation(readings, taus) -> tuple[list[tuple[float, float]], list[float]]:
    """Overlapping Allan deviation of the displayed-minus-proper phase error.

    readings: ClockReading series with a uniform coordinate sampling interval.
    taus: averaging times to evaluate; each must be a multiple of the interval.
    Returns (sorted [(tau, sigma_y)] list, omitted taus).  A tau is omitted
    (with a warning) when fewer than 3 phase samples support it.
    """
    readings = list(readings)
    if len(readings) < 3:
        raise ValueError("need at least 3 readings")
    epochs = np.array([r.coordinate_epoch for r in readings])
    spacing = np.diff(epochs)
    h = spacing[0]
    if not np.allclose(spacing, h, rtol=1e-9, atol=0):
        raise ValueError("readings must be uniformly sampled")
    x = np.array([r.displayed_time - r.true_proper_time for r in readings])
    results: list[tuple[float, float]] = []
    omitted: list[float] = []
    for tau in sorted(taus):
        m = int(round(tau / h))
        if m < 1 or abs(m * h - tau) > 1e-9 * tau:
            omitted.append(tau)
            continue
        n_terms = x.size - 2 * m
        if n_terms < 1 or x.size < 3:
            omitted.append(tau)
            continue
        second_diff = x[2 * m:] - 2.0 * x[m:-m] + x[: -2 * m]
        avar = float(np.sum(second_diff ** 2)) / (2.0 * (m * h) ** 2 * n_terms)
        results.append((float(tau), float(np.sqrt(avar))))
    if omitted:
        warnings.warn(f"insufficient samples for taus {omitted}", stacklevel=2)
    return results, omitted
