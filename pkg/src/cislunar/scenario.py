"""Scenario configuration: strict YAML parsing, validation and rendering.

The config grammar is documented in docs/config-format.md.  Parsing is
strict: unknown keys are rejected, every id reference must resolve, and all
type invariants are checked at construction.  render() emits YAML that
parses back to an equal Scenario (floats are dumped at repr precision).
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass

import yaml

from .broadcast import Link, NodeSpec, Role, Topology
from .clocks import ClockModel
from .conventions import (ConventionConfigError, CoordinateConvention,
                          PeriodicTerm)
from .finetune import CorrectionVector
from .kinematics import (EarthOrbit, EarthSurface, EphemerisConfig,
                         MoonOrbit, MoonSurface, Worldline)


class ScenarioError(ValueError):
    """Configuration error: syntax, unknown key, bad value or dangling id."""


class Architecture(enum.Enum):
    BROADCAST = "broadcast"
    TRANSACTIONAL = "transactional"
    BOTH = "both"


class SyncPolicy(enum.Enum):
    INITIAL_ONLY = "initial_only"   # one sync at t=0, free-run after
    CADENCE = "cadence"             # resync from every delivered broadcast


@dataclass(frozen=True)
class ClockSpec:
    id: str
    worldline: Worldline
    model: ClockModel


@dataclass(frozen=True)
class BroadcastSettings:
    cadence: float = 10.0                 # seconds between broadcasts
    sync_policy: SyncPolicy = SyncPolicy.INITIAL_ONLY
    correction_convention: str = "fitted"  # convention name or "fitted"
    fit_harmonics: int = 3
    assumed_delay_mode: str = "exact"     # "exact" or "fixed"
    assumed_delay: float = 0.0            # used when mode == "fixed"
    weight_update_interval: float = 3600.0
    agreement_epsilon: float = 1.0e-8     # worst-pair agreement threshold

    def __post_init__(self) -> None:
        if self.cadence <= 0:
            raise ScenarioError("broadcast cadence must be positive")
        if self.assumed_delay_mode not in ("exact", "fixed"):
            raise ScenarioError("assumed_delay_mode must be 'exact' or 'fixed'")
        if self.fit_harmonics < 0:
            raise ScenarioError("fit_harmonics must be >= 0")


@dataclass(frozen=True)
class TransactionalSettings:
    attempt_interval: float = 600.0
    measurement_noise: float = 1.0e-9
    staleness_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.attempt_interval <= 0:
            raise ScenarioError("attempt interval must be positive")
        if self.measurement_noise < 0 or self.staleness_rate < 0:
            raise ScenarioError("noise and staleness rate must be >= 0")


@dataclass(frozen=True)
class Check:
    name: str
    kind: str            # currently: pair_rate_usday
    pair: tuple[str, str]
    expect: float
    tolerance: float


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration: float
    epoch_step: float
    architecture: Architecture
    ephemeris: EphemerisConfig
    clocks: tuple[ClockSpec, ...]
    conventions: tuple[CoordinateConvention, ...]
    topology: Topology
    broadcast: BroadcastSettings
    transactional: TransactionalSettings
    corrections: CorrectionVector
    checks: tuple[Check, ...] = ()

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ScenarioError("duration must be positive")
        if not (0 < self.epoch_step <= self.duration):
            raise ScenarioError("epoch_step must be in (0, duration]")
        ids = [c.id for c in self.clocks]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise ScenarioError(f"duplicate clock id {dup!r}")
        known = set(ids)
        for node in self.topology.nodes:
            if node.id not in known:
                raise ScenarioError(f"topology references unknown clock {node.id!r}")
        conv_names = [c.name for c in self.conventions]
        if len(set(conv_names)) != len(conv_names):
            raise ScenarioError("convention names must be unique")
        if (self.broadcast.correction_convention != "fitted"
                and self.broadcast.correction_convention not in conv_names):
            raise ScenarioError(
                f"correction convention "
                f"{self.broadcast.correction_convention!r} is not declared")
        for check in self.checks:
            for clock_id in check.pair:
                if clock_id not in known:
                    raise ScenarioError(
                        f"check {check.name!r} references unknown clock {clock_id!r}")

    def clock(self, clock_id: str) -> ClockSpec:
        for spec in self.clocks:
            if spec.id == clock_id:
                return spec
        raise KeyError(clock_id)

    def convention(self, name: str) -> CoordinateConvention:
        for conv in self.conventions:
            if conv.name == name:
                return conv
        raise KeyError(name)

    def authority_ids(self) -> list[str]:
        return [n.id for n in self.topology.nodes if n.role is Role.AUTHORITY]

    def dependent_ids(self) -> list[str]:
        return [n.id for n in self.topology.nodes if n.role is Role.DEPENDENT]


# ---------------------------------------------------------------------------
# strict dict walking
# ---------------------------------------------------------------------------

def _take(mapping: dict, context: str, allowed: dict[str, object]) -> dict:
    """Apply defaults and reject unknown keys; `allowed` maps key -> default
    (REQUIRED sentinel for mandatory keys)."""
    if not isinstance(mapping, dict):
        raise ScenarioError(f"{context} must be a mapping, got {type(mapping).__name__}")
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ScenarioError(f"unknown key {sorted(unknown)[0]!r} in {context}")
    out = {}
    for key, default in allowed.items():
        if key in mapping:
            out[key] = mapping[key]
        elif default is _REQUIRED:
            raise ScenarioError(f"missing required key {key!r} in {context}")
        else:
            out[key] = default
    return out


_REQUIRED = object()


def _number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{context} must be a number, got {value!r}")
    return float(value)


def _parse_worldline(data: dict, context: str) -> Worldline:
    if not isinstance(data, dict) or "kind" not in data:
        raise ScenarioError(f"{context} must be a mapping with a 'kind' key")
    kind = data["kind"]
    if kind == "earth_surface":
        got = _take(data, context, {"kind": _REQUIRED, "latitude_deg": _REQUIRED,
                                    "longitude_deg": _REQUIRED})
        return EarthSurface(_number(got["latitude_deg"], context),
                            _number(got["longitude_deg"], context))
    if kind == "moon_surface":
        got = _take(data, context, {"kind": _REQUIRED, "latitude_deg": _REQUIRED,
                                    "longitude_deg": _REQUIRED,
                                    "mascon_anomaly": 0.0})
        return MoonSurface(_number(got["latitude_deg"], context),
                           _number(got["longitude_deg"], context),
                           _number(got["mascon_anomaly"], context))
    if kind == "earth_orbit":
        got = _take(data, context, {"kind": _REQUIRED, "radius": _REQUIRED})
        return EarthOrbit(_number(got["radius"], context))
    if kind == "moon_orbit":
        got = _take(data, context, {"kind": _REQUIRED, "radius": _REQUIRED})
        return MoonOrbit(_number(got["radius"], context))
    raise ScenarioError(f"unknown worldline kind {kind!r} in {context}")


_EPHEMERIS_KEYS = {
    "earth_gm": 3.986004418e14, "moon_gm": 4.9028e12,
    "earth_radius": 6.378137e6, "moon_radius": 1.7374e6,
    "earth_moon_distance": 3.84399e8, "orbital_eccentricity": 0.0549,
    "orbital_period": 27.321661 * 86400.0, "earth_spin_period": 86164.1,
    "speed_of_light": 299792458.0,
}


def _parse_ephemeris(data: dict) -> EphemerisConfig:
    got = _take(data, "ephemeris", dict(_EPHEMERIS_KEYS))
    values = {k: _number(v, f"ephemeris.{k}") for k, v in got.items()}
    if not (0 <= values["orbital_eccentricity"] < 1):
        raise ScenarioError(
            "ephemeris.orbital_eccentricity violates 0 <= e < 1")
    try:
        return EphemerisConfig(**values)
    except ValueError as exc:
        raise ScenarioError(f"ephemeris: {exc}") from exc


def _parse_clock(data: dict, index: int) -> ClockSpec:
    context = f"clocks[{index}]"
    got = _take(data, context, {"id": _REQUIRED, "worldline": _REQUIRED,
                                "model": {}})
    model_got = _take(got["model"], f"{context}.model", {
        "frequency_offset": 0.0, "linear_drift": 0.0,
        "white_fm_sigma": 0.0, "rw_fm_sigma": 0.0, "seed": 0})
    try:
        model = ClockModel(
            frequency_offset=_number(model_got["frequency_offset"], context),
            linear_drift=_number(model_got["linear_drift"], context),
            white_fm_sigma=_number(model_got["white_fm_sigma"], context),
            rw_fm_sigma=_number(model_got["rw_fm_sigma"], context),
            seed=int(model_got["seed"]))
    except ValueError as exc:
        raise ScenarioError(f"{context}.model: {exc}") from exc
    return ClockSpec(id=str(got["id"]),
                     worldline=_parse_worldline(got["worldline"], context),
                     model=model)


def _parse_convention(data: dict, index: int) -> CoordinateConvention:
    context = f"conventions[{index}]"
    got = _take(data, context, {"name": _REQUIRED, "secular_rate_offset": 0.0,
                                "periodic_terms": []})
    terms = []
    for j, term in enumerate(got["periodic_terms"]):
        term_got = _take(term, f"{context}.periodic_terms[{j}]", {
            "amplitude": _REQUIRED, "angular_frequency": _REQUIRED,
            "phase": 0.0})
        terms.append(PeriodicTerm(
            amplitude=_number(term_got["amplitude"], context),
            angular_frequency=_number(term_got["angular_frequency"], context),
            phase=_number(term_got["phase"], context)))
    try:
        return CoordinateConvention(
            name=str(got["name"]),
            secular_rate_offset=_number(got["secular_rate_offset"], context),
            periodic_terms=tuple(terms))
    except ConventionConfigError as exc:
        raise ScenarioError(f"{context}: {exc}") from exc


def _parse_topology(data: dict) -> Topology:
    got = _take(data, "topology", {"nodes": [], "links": []})
    nodes = []
    for i, node in enumerate(got["nodes"]):
        node_got = _take(node, f"topology.nodes[{i}]",
                         {"id": _REQUIRED, "role": _REQUIRED})
        try:
            role = Role(node_got["role"])
        except ValueError as exc:
            raise ScenarioError(
                f"topology.nodes[{i}].role must be authority or dependent") from exc
        nodes.append(NodeSpec(id=str(node_got["id"]), worldline_ref=str(node_got["id"]),
                              role=role))
    links = []
    for i, link in enumerate(got["links"]):
        context = f"topology.links[{i}]"
        link_got = _take(link, context, {
            "a": _REQUIRED, "b": _REQUIRED, "base_delay": 0.0,
            "asymmetry": 0.0, "loss_probability": 0.0,
            "disruption_windows": []})
        windows = []
        for w in link_got["disruption_windows"]:
            if not (isinstance(w, list) and len(w) == 2):
                raise ScenarioError(f"{context}.disruption_windows entries must "
                                    "be [start, end] pairs")
            windows.append((_number(w[0], context), _number(w[1], context)))
        try:
            links.append(Link(
                a=str(link_got["a"]), b=str(link_got["b"]),
                base_delay=_number(link_got["base_delay"], context),
                asymmetry=_number(link_got["asymmetry"], context),
                loss_probability=_number(link_got["loss_probability"], context),
                disruption_windows=tuple(windows)))
        except ValueError as exc:
            raise ScenarioError(f"{context}: {exc}") from exc
    try:
        return Topology(nodes=tuple(nodes), links=tuple(links))
    except ValueError as exc:
        raise ScenarioError(f"topology: {exc}") from exc


def _parse_corrections(data: dict) -> CorrectionVector:
    got = _take(data, "corrections", {
        "secular_scale": 1.0, "periodic_scale": 1.0, "anomaly_scale": 1.0,
        "drift_scale": 1.0, "delay_scale": 1.0})
    try:
        return CorrectionVector(**{k: _number(v, f"corrections.{k}")
                                   for k, v in got.items()})
    except ValueError as exc:
        raise ScenarioError(f"corrections: {exc}") from exc


def _parse_checks(data: list) -> tuple[Check, ...]:
    checks = []
    for i, item in enumerate(data):
        context = f"checks[{i}]"
        got = _take(item, context, {"name": _REQUIRED, "kind": _REQUIRED,
                                    "pair": _REQUIRED, "expect": _REQUIRED,
                                    "tolerance": _REQUIRED})
        if got["kind"] not in ("pair_rate_usday",):
            raise ScenarioError(f"{context}.kind {got['kind']!r} is not supported")
        pair = got["pair"]
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ScenarioError(f"{context}.pair must list exactly two clock ids")
        checks.append(Check(
            name=str(got["name"]), kind=str(got["kind"]),
            pair=(str(pair[0]), str(pair[1])),
            expect=_number(got["expect"], context),
            tolerance=_number(got["tolerance"], context)))
    return tuple(checks)


def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate a scenario config document."""
    try:
        raw = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f" at line {mark.line + 1}" if mark is not None else ""
        raise ScenarioError(f"config syntax error{line}: {exc}") from exc
    if raw is None:
        raise ScenarioError("empty config document")
    got = _take(raw, "scenario", {
        "name": _REQUIRED, "seed": 0, "duration": _REQUIRED,
        "epoch_step": 60.0, "architecture": "broadcast",
        "ephemeris": {}, "clocks": _REQUIRED, "conventions": [],
        "topology": {}, "broadcast": {}, "transactional": {},
        "corrections": {}, "checks": []})
    try:
        architecture = Architecture(got["architecture"])
    except ValueError as exc:
        raise ScenarioError(
            "architecture must be one of broadcast/transactional/both") from exc
    broadcast_got = _take(got["broadcast"], "broadcast", {
        "cadence": 10.0, "sync_policy": "initial_only",
        "correction_convention": "fitted", "fit_harmonics": 3,
        "assumed_delay_mode": "exact", "assumed_delay": 0.0,
        "weight_update_interval": 3600.0, "agreement_epsilon": 1.0e-8})
    try:
        sync_policy = SyncPolicy(broadcast_got["sync_policy"])
    except ValueError as exc:
        raise ScenarioError("broadcast.sync_policy must be "
                            "initial_only or cadence") from exc
    broadcast_settings = BroadcastSettings(
        cadence=_number(broadcast_got["cadence"], "broadcast.cadence"),
        sync_policy=sync_policy,
        correction_convention=str(broadcast_got["correction_convention"]),
        fit_harmonics=int(broadcast_got["fit_harmonics"]),
        assumed_delay_mode=str(broadcast_got["assumed_delay_mode"]),
        assumed_delay=_number(broadcast_got["assumed_delay"], "broadcast"),
        weight_update_interval=_number(
            broadcast_got["weight_update_interval"], "broadcast"),
        agreement_epsilon=_number(broadcast_got["agreement_epsilon"], "broadcast"))
    transact_got = _take(got["transactional"], "transactional", {
        "attempt_interval": 600.0, "measurement_noise": 1.0e-9,
        "staleness_rate": 0.0})
    transactional = TransactionalSettings(
        attempt_interval=_number(transact_got["attempt_interval"], "transactional"),
        measurement_noise=_number(transact_got["measurement_noise"], "transactional"),
        staleness_rate=_number(transact_got["staleness_rate"], "transactional"))
    if not isinstance(got["clocks"], list) or not got["clocks"]:
        raise ScenarioError("clocks must be a non-empty list")
    return Scenario(
        name=str(got["name"]),
        seed=int(got["seed"]),
        duration=_number(got["duration"], "duration"),
        epoch_step=_number(got["epoch_step"], "epoch_step"),
        architecture=architecture,
        ephemeris=_parse_ephemeris(got["ephemeris"]),
        clocks=tuple(_parse_clock(c, i) for i, c in enumerate(got["clocks"])),
        conventions=tuple(_parse_convention(c, i)
                          for i, c in enumerate(got["conventions"])),
        topology=_parse_topology(got["topology"]),
        broadcast=broadcast_settings,
        transactional=transactional,
        corrections=_parse_corrections(got["corrections"]),
        checks=_parse_checks(got["checks"]),
    )


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _worldline_dict(w: Worldline) -> dict:
    if isinstance(w, EarthSurface):
        return {"kind": "earth_surface", "latitude_deg": w.latitude_deg,
                "longitude_deg": w.longitude_deg}
    if isinstance(w, MoonSurface):
        return {"kind": "moon_surface", "latitude_deg": w.latitude_deg,
                "longitude_deg": w.longitude_deg,
                "mascon_anomaly": w.mascon_anomaly}
    if isinstance(w, EarthOrbit):
        return {"kind": "earth_orbit", "radius": w.radius}
    if isinstance(w, MoonOrbit):
        return {"kind": "moon_orbit", "radius": w.radius}
    raise TypeError(f"unknown worldline type {type(w).__name__}")


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "seed": s.seed,
        "duration": s.duration,
        "epoch_step": s.epoch_step,
        "architecture": s.architecture.value,
        "ephemeris": {k: getattr(s.ephemeris, k) for k in _EPHEMERIS_KEYS},
        "clocks": [
            {"id": c.id, "worldline": _worldline_dict(c.worldline),
             "model": {"frequency_offset": c.model.frequency_offset,
                       "linear_drift": c.model.linear_drift,
                       "white_fm_sigma": c.model.white_fm_sigma,
                       "rw_fm_sigma": c.model.rw_fm_sigma,
                       "seed": c.model.seed}}
            for c in s.clocks],
        "conventions": [
            {"name": conv.name,
             "secular_rate_offset": conv.secular_rate_offset,
             "periodic_terms": [
                 {"amplitude": t.amplitude,
                  "angular_frequency": t.angular_frequency,
                  "phase": t.phase} for t in conv.periodic_terms]}
            for conv in s.conventions],
        "topology": {
            "nodes": [{"id": n.id, "role": n.role.value}
                      for n in s.topology.nodes],
            "links": [
                {"a": l.a, "b": l.b, "base_delay": l.base_delay,
                 "asymmetry": l.asymmetry,
                 "loss_probability": l.loss_probability,
                 "disruption_windows": [list(w) for w in l.disruption_windows]}
                for l in s.topology.links]},
        "broadcast": {
            "cadence": s.broadcast.cadence,
            "sync_policy": s.broadcast.sync_policy.value,
            "correction_convention": s.broadcast.correction_convention,
            "fit_harmonics": s.broadcast.fit_harmonics,
            "assumed_delay_mode": s.broadcast.assumed_delay_mode,
            "assumed_delay": s.broadcast.assumed_delay,
            "weight_update_interval": s.broadcast.weight_update_interval,
            "agreement_epsilon": s.broadcast.agreement_epsilon},
        "transactional": {
            "attempt_interval": s.transactional.attempt_interval,
            "measurement_noise": s.transactional.measurement_noise,
            "staleness_rate": s.transactional.staleness_rate},
        "corrections": {k: getattr(s.corrections, k)
                        for k in ("secular_scale", "periodic_scale",
                                   "anomaly_scale", "drift_scale",
                                   "delay_scale")},
        "checks": [
            {"name": c.name, "kind": c.kind, "pair": list(c.pair),
             "expect": c.expect, "tolerance": c.tolerance}
            for c in s.checks],
    }


def render_scenario(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False,
                          default_flow_style=False)
