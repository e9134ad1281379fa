"""Coordinate-time conventions: named relabelings of the reference timeline.

A convention maps reference coordinate time t to a label

    label(t) = t * (1 + secular_rate_offset) + sum_k A_k sin(w_k t + phi_k)

Conventions own no physical state; swapping one for another changes event
labels and nothing else.  Construction rejects parameterizations that are not
strictly monotone (sum A_k w_k must stay below 1 + secular_rate_offset).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConventionConfigError(ValueError):
    """Raised for non-monotone or otherwise invalid convention parameters."""


@dataclass(frozen=True)
class PeriodicTerm:
    amplitude: float          # seconds
    angular_frequency: float  # rad/s
    phase: float              # rad

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise ConventionConfigError("periodic amplitude must be >= 0")


@dataclass(frozen=True)
class CoordinateConvention:
    name: str
    secular_rate_offset: float = 0.0
    periodic_terms: tuple[PeriodicTerm, ...] = ()

    def __post_init__(self) -> None:
        slope_budget = sum(t.amplitude * abs(t.angular_frequency)
                           for t in self.periodic_terms)
        if slope_budget >= 1.0 + self.secular_rate_offset:
            raise ConventionConfigError(
                f"convention {self.name!r} is not monotone: "
                f"sum A*w = {slope_budget:.3e} >= 1 + secular")


def periodic_sum(conv: CoordinateConvention, t):
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for term in conv.periodic_terms:
        total = total + term.amplitude * np.sin(term.angular_frequency * t + term.phase)
    return total


def coordinate_label(conv: CoordinateConvention, reference_t):
    """Label assigned by the convention to reference coordinate time."""
    t = np.asarray(reference_t, dtype=float)
    return t * (1.0 + conv.secular_rate_offset) + periodic_sum(conv, t)


def label_difference(a: CoordinateConvention, b: CoordinateConvention, t):
    """label_a - label_b, computed without forming the large absolute labels."""
    t = np.asarray(t, dtype=float)
    return (t * (a.secular_rate_offset - b.secular_rate_offset)
            + periodic_sum(a, t) - periodic_sum(b, t))


def convention_discrepancy(a: CoordinateConvention, b: CoordinateConvention,
                           t0: float, t1: float,
                           samples: int = 4096) -> tuple[float, float]:
    """(max, mean) of |label_a - label_b| over [t0, t1].

    Pure relabeling disagreement; sampled on a uniform grid.
    """
    if not (t1 > t0):
        raise ValueError("t1 must exceed t0")
    grid = np.linspace(t0, t1, samples)
    diff = np.abs(label_difference(a, b, grid))
    return float(np.max(diff)), float(np.mean(diff))
