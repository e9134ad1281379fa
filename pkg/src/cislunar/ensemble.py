"""Weighted paper clock built from member clock readings.

Weights are inverse-variance (1/sigma^2) with a per-member cap, redistributed
iteratively: members exceeding the cap are pinned to it and the remainder is
reshared inverse-variance among the others, repeating until stable.  When the
cap is infeasible (every member pinned, n*cap < 1) weights fall back to equal
shares, the only order-consistent assignment.  The cap is waived for a
single-member ensemble.  A sigma of zero joins the capped set directly instead
of receiving infinite weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_WEIGHT_CAP = 0.4


@dataclass
class EnsembleState:
    member_ids: list[str]
    weights: list[float]
    paper_time: float = 0.0
    last_update_epoch: float = 0.0

    def __post_init__(self) -> None:
        if not self.member_ids:
            raise ValueError("ensemble needs at least one member")
        if len(self.weights) != len(self.member_ids):
            raise ValueError("one weight per member required")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be >= 0")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")


def compute_weights(stability_history: dict[str, list[float]],
                    cap: float = DEFAULT_WEIGHT_CAP) -> dict[str, float]:
    """Per-member weights from recent ADEV histories.

    stability_history maps member id -> non-empty list of recent ADEV
    estimates; a member's sigma is the mean of its history.
    """
    if not stability_history:
        raise ValueError("stability history must be non-empty")
    ids = list(stability_history.keys())
    sigmas = {}
    for member, history in stability_history.items():
        if not history:
            raise ValueError(f"empty stability history for {member!r}")
        if any(s < 0 for s in history):
            raise ValueError(f"negative ADEV for {member!r}")
        sigmas[member] = float(np.mean(history))
    if len(ids) == 1:
        return {ids[0]: 1.0}

    capped = {m for m in ids if sigmas[m] == 0.0}
    while True:
        free = [m for m in ids if m not in capped]
        if not free:
            # cap infeasible: every member pinned; equal shares preserve order
            return {m: 1.0 / len(ids) for m in ids}
        mass = 1.0 - cap * len(capped)
        inv_var = {m: 1.0 / sigmas[m] ** 2 for m in free}
        total = sum(inv_var.values())
        weights = {m: mass * inv_var[m] / total for m in free}
        violators = {m for m, w in weights.items() if w > cap + 1e-15}
        if not violators:
            weights.update({m: cap for m in capped})
            return {m: weights[m] for m in ids}
        capped |= violators


def ensemble_time(readings: dict[str, float], weights: dict[str, float],
                  ) -> tuple[float, list[str]]:
    """Weighted mean of member displayed times at a common epoch.

    readings may omit members (dropouts); those are excluded and the remaining
    weights renormalized for this epoch.  Returns (paper_time, excluded ids).
    """
    if not weights:
        raise ValueError("weights must be non-empty")
    present = [m for m in weights if m in readings]
    excluded = [m for m in weights if m not in readings]
    if not present:
        raise ValueError("no member readings available at this epoch")
    mass = sum(weights[m] for m in present)
    if mass <= 0:
        raise ValueError("present members carry zero weight")
    paper = sum(weights[m] * readings[m] for m in present) / mass
    return paper, excluded


def update_state(state: EnsembleState, epoch: float,
                 readings: dict[str, float],
                 weights: dict[str, float]) -> tuple[EnsembleState, list[str]]:
    """One ensemble step: apply fresh weights and readings at an epoch."""
    paper, excluded = ensemble_time(readings, weights)
    new_state = EnsembleState(
        member_ids=list(weights.keys()),
        weights=[weights[m] for m in weights],
        paper_time=paper,
        last_update_epoch=epoch,
    )
    return new_state, excluded
