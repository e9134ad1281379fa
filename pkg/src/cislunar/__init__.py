"""Deterministic simulator of Earth-Moon clock networks.

Contrasts broadcast time distribution (authoritative ensemble, one-way and
two-way transfer over a disruption-tolerant network) with a transactional
architecture (atomic bilateral comparisons feeding a relational offset
graph), and quantifies how precisely each correction family must be tuned
for the broadcast picture to hold together.
"""

__version__ = "0.1.0"

from .clocks import ClockModel, ClockReading, allan_deviation, sample_clock
from .conventions import (CoordinateConvention, PeriodicTerm,
                          convention_discrepancy, coordinate_label)
from .ensemble import EnsembleState, compute_weights, ensemble_time
from .finetune import (CorrectionVector, SweepResult, faithfulness_score,
                       long_horizon_prediction, model_swap, sweep_corrections)
from .kinematics import (EarthOrbit, EarthSurface, EphemerisConfig, MoonOrbit,
                         MoonSurface, PotentialField, Vec3, Worldline,
                         accumulate_proper_time, body_position, proper_rate,
                         proper_rate_excess, two_body_field)
from .scenario import Scenario, ScenarioError, parse_scenario, render_scenario
from .transact import (ComparisonTransaction, OffsetGraph, attempt_comparison,
                       cycle_residual, query_offset)

__all__ = [
    "ClockModel", "ClockReading", "allan_deviation", "sample_clock",
    "CoordinateConvention", "PeriodicTerm", "convention_discrepancy",
    "coordinate_label", "EnsembleState", "compute_weights", "ensemble_time",
    "CorrectionVector", "SweepResult", "faithfulness_score",
    "long_horizon_prediction", "model_swap", "sweep_corrections",
    "EarthOrbit", "EarthSurface", "EphemerisConfig", "MoonOrbit",
    "MoonSurface", "PotentialField", "Vec3", "Worldline",
    "accumulate_proper_time", "body_position", "proper_rate",
    "proper_rate_excess", "two_body_field",
    "Scenario", "ScenarioError", "parse_scenario", "render_scenario",
    "ComparisonTransaction", "OffsetGraph", "attempt_comparison",
    "cycle_residual", "query_offset",
]
