"""Scenario execution: truth trajectories, synchronization runs, artifacts.

A RunContext precomputes, per clock, the cumulative relativistic proper-time
excess and the displayed-time offset (hardware error included) on the epoch
grid.  Synchronization experiments then evaluate correction pipelines against
that shared truth.  All randomness flows from named child streams of the
scenario seed, so a given scenario is bit-reproducible; every artifact float
is serialized at 18 significant digits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import broadcast as bc
from . import transact as tx
from .clocks import ClockReading, allan_deviation, displayed_offsets
from .conventions import CoordinateConvention, periodic_sum
from .ensemble import compute_weights, ensemble_time
from .finetune import CorrectionVector, FittedRateModel, fit_rate_model
from .kinematics import (EphemerisConfig, MoonSurface, Worldline,
                         proper_time_series, two_body_field)
from .scenario import Architecture, Scenario, SyncPolicy

FLOAT_FMT = "{:.17e}"

EVENT_TRACE_HEADER = "epoch_s,node,event,offset_estimate_s,residual_error_s,lamport"
ADEV_HEADER = "clock,tau_s,adev"
SWEEP_HEADER = ("secular_scale,periodic_scale,anomaly_scale,drift_scale,"
                "delay_scale,rms_sync_error_s,divergence_rate_s_per_day,"
                "agreement_fraction")
GRAPH_HEADER = "node_a,node_b,offset_s,uncertainty_s,epoch_s"
CYCLES_HEADER = "cycle,residual_s,epoch_s"
MODELSWAP_HEADER = "epoch_s,label_delta_s,pairwise_delta_s"


def fnum(x: float) -> str:
    return FLOAT_FMT.format(float(x))


class RunError(RuntimeError):
    """Raised when a scenario cannot be executed (runtime failure)."""


def _strip_anomaly(w: Worldline) -> tuple[Worldline, float]:
    if isinstance(w, MoonSurface) and w.mascon_anomaly != 0.0:
        return MoonSurface(w.latitude_deg, w.longitude_deg, 0.0), w.mascon_anomaly
    return w, 0.0


@dataclass(frozen=True)
class CorrectionModel:
    """Per-dependent modeled offset against the authority, split by family."""

    secular_rate: float            # s/s
    periodic: FittedRateModel | CoordinateConvention | None
    anomaly_rate: float            # s/s
    drift_y0: float
    drift_rate: float
    assumed_delay: float

    def periodic_values(self, t: np.ndarray) -> np.ndarray:
        if self.periodic is None:
            return np.zeros_like(t)
        if isinstance(self.periodic, CoordinateConvention):
            return periodic_sum(self.periodic, t)
        # fitted model: harmonics only, the secular part lives in secular_rate
        return self.periodic.evaluate(t) - (self.periodic.constant
                                            + self.periodic.secular_rate * t)


@dataclass
class BroadcastStats:
    eval_epochs: np.ndarray
    worst_pair: np.ndarray
    rms_sync_error: float
    divergence_rate: float
    agreement_fraction: float
    dependent_errors: dict[str, np.ndarray]


@dataclass
class TransactStats:
    attempts: int
    commits: int
    graph: tx.OffsetGraph
    trace_rows: list[tuple]


@dataclass
class RunContext:
    scenario: Scenario
    cfg: EphemerisConfig
    grid: np.ndarray
    tau_base: dict[str, np.ndarray]      # relativistic excess, no anomaly
    anomaly_rate: dict[str, float]       # site potential anomaly / c^2
    tau_excess: dict[str, np.ndarray]    # base + anomaly contribution
    disp_offset: dict[str, np.ndarray]   # displayed(t) - t on the grid
    _free_run_cache: dict | None = None

    @classmethod
    def prepare(cls, scenario: Scenario, integration_step: float = 60.0) -> "RunContext":
        cfg = scenario.ephemeris
        fld = two_body_field(cfg)
        step = scenario.epoch_step
        n = int(math.floor(scenario.duration / step + 1e-9))
        grid = step * np.arange(n + 1)
        tau_base: dict[str, np.ndarray] = {}
        anomaly_rate: dict[str, float] = {}
        tau_excess: dict[str, np.ndarray] = {}
        disp_offset: dict[str, np.ndarray] = {}
        for spec in scenario.clocks:
            stripped, anomaly = _strip_anomaly(spec.worldline)
            base = proper_time_series(stripped, grid, min(integration_step, step),
                                      fld, cfg)
            rate = anomaly / cfg.c2
            excess = base + rate * grid
            tau_abs = grid + excess
            tau_base[spec.id] = base
            anomaly_rate[spec.id] = rate
            tau_excess[spec.id] = excess
            disp_offset[spec.id] = excess + displayed_offsets(spec.model, tau_abs)
        return cls(scenario=scenario, cfg=cfg, grid=grid, tau_base=tau_base,
                   anomaly_rate=anomaly_rate, tau_excess=tau_excess,
                   disp_offset=disp_offset)

    # -- clock access -----------------------------------------------------

    def displayed_offset_at(self, clock_id: str, t) -> np.ndarray:
        return np.interp(t, self.grid, self.disp_offset[clock_id])

    def displayed_fn(self, clock_id: str):
        return lambda t: t + float(self.displayed_offset_at(clock_id, t))

    def true_offset(self, a: str, b: str, t) -> np.ndarray:
        """displayed_a - displayed_b at coordinate time t."""
        return (np.interp(t, self.grid, self.disp_offset[a])
                - np.interp(t, self.grid, self.disp_offset[b]))

    def pair_rate_usday(self, a: str, b: str) -> float:
        """Mean proper-rate difference (a minus b) in microseconds/day."""
        days = (self.grid[-1] - self.grid[0]) / 86400.0
        delta = self.tau_excess[a][-1] - self.tau_excess[b][-1]
        return float(delta / days * 1e6)

    # -- correction models --------------------------------------------------

    def _link_between(self, a: str, b: str) -> bc.Link:
        for link in self.scenario.topology.links:
            if {link.a, link.b} == {a, b}:
                return link
        raise RunError(f"no link between {a!r} and {b!r}")

    def correction_model(self, dep: str, authority: str) -> CorrectionModel:
        s = self.scenario
        spec = s.clock(dep)
        link = self._link_between(authority, dep)
        assumed = (link.delay(authority)
                   if s.broadcast.assumed_delay_mode == "exact"
                   else s.broadcast.assumed_delay)
        rel = self.tau_base[dep] - self.tau_base[authority]
        if s.broadcast.correction_convention == "fitted":
            omega = 2.0 * math.pi / self.cfg.orbital_period
            model = fit_rate_model(self.grid, rel, omega, s.broadcast.fit_harmonics)
            secular = model.secular_rate
            periodic = model
        else:
            conv = s.convention(s.broadcast.correction_convention)
            secular = conv.secular_rate_offset
            periodic = conv
        return CorrectionModel(
            secular_rate=secular, periodic=periodic,
            anomaly_rate=self.anomaly_rate[dep] - self.anomaly_rate[authority],
            drift_y0=spec.model.frequency_offset,
            drift_rate=spec.model.linear_drift,
            assumed_delay=assumed)

    def _family_signals(self, model: CorrectionModel, t: np.ndarray) -> np.ndarray:
        """Stack of unscaled family signals, order matching CorrectionVector."""
        periodic = model.periodic_values(t)
        drift = model.drift_y0 * t + 0.5 * model.drift_rate * t * t
        return np.stack([
            model.secular_rate * t,
            periodic,
            model.anomaly_rate * t,
            drift,
            np.full_like(t, model.assumed_delay),
        ])

    # -- broadcast: initial sync + free run --------------------------------

    def _initial_sync(self, authority: str, dep: str,
                      rng: np.random.Generator) -> tuple[float, float]:
        """(emit time, arrival time) of the first delivered broadcast."""
        link = self._link_between(authority, dep)
        cadence = self.scenario.broadcast.cadence
        t_emit = 0.0
        while t_emit <= self.scenario.duration:
            outcome = bc.deliver(bc.TimeSignal(authority, 0.0, 0), link, t_emit, rng)
            if outcome.status is bc.DeliveryStatus.DELIVERED:
                return t_emit, outcome.arrival
            t_emit += cadence
        raise RunError(f"no broadcast ever delivered from {authority!r} to {dep!r}")

    def _free_run_parts(self) -> dict:
        """Per-dependent residual-at-unit-scales and family signal stacks."""
        if self._free_run_cache is not None:
            return self._free_run_cache
        s = self.scenario
        authorities = s.authority_ids()
        dependents = s.dependent_ids()
        if not authorities or not dependents:
            raise RunError("broadcast run needs an authority and >= 1 dependent")
        authority = authorities[0]
        rng_root = np.random.default_rng(s.seed)
        sync: dict[str, tuple[float, float]] = {}
        for dep in dependents:  # config order fixes the stream layout
            sync[dep] = self._initial_sync(authority, dep,
                                           np.random.default_rng(rng_root.integers(2 ** 63)))
        eval_start = max(arr for (_, arr) in sync.values())
        mask = self.grid >= eval_start
        t_eval = self.grid[mask]
        residuals: dict[str, np.ndarray] = {}
        signals: dict[str, np.ndarray] = {}
        for dep in dependents:
            model = self.correction_model(dep, authority)
            t_emit, t_arr = sync[dep]
            true_delay = t_arr - t_emit
            g_eval = self.true_offset(dep, authority, t_eval)
            g_sync = (float(self.displayed_offset_at(dep, t_arr))
                      - float(self.displayed_offset_at(authority, t_emit)))
            fam_eval = self._family_signals(model, t_eval)
            fam_sync = self._family_signals(model, np.array([t_arr]))[:, 0]
            delta_fam = fam_eval - fam_sync[:, None]
            delta_fam[4, :] = -model.assumed_delay  # delay enters once, at sync
            unit = (g_eval - g_sync) - np.sum(delta_fam[:4], axis=0) \
                + (model.assumed_delay - true_delay)
            residuals[dep] = unit
            signals[dep] = delta_fam
        self._free_run_cache = {
            "authority": authority, "dependents": dependents,
            "eval_epochs": t_eval, "residuals": residuals, "signals": signals,
        }
        return self._free_run_cache

    def broadcast_free_run(self, vector: CorrectionVector | None = None) -> BroadcastStats:
        """Initial sync, then free-running corrected clocks against truth."""
        parts = self._free_run_parts()
        vec = vector if vector is not None else self.scenario.corrections
        dev = 1.0 - vec.as_array()
        t_eval = parts["eval_epochs"]
        errors = {dep: parts["residuals"][dep] + dev @ parts["signals"][dep]
                  for dep in parts["dependents"]}
        series = [np.zeros_like(t_eval)] + [errors[d] for d in parts["dependents"]]
        worst = np.zeros_like(t_eval)
        for i in range(len(series)):
            for j in range(i + 1, len(series)):
                np.maximum(worst, np.abs(series[i] - series[j]), out=worst)
        days = (t_eval - t_eval[0]) / 86400.0
        slope = float(np.polyfit(days, worst, 1)[0]) if t_eval.size > 1 else 0.0
        eps = self.scenario.broadcast.agreement_epsilon
        return BroadcastStats(
            eval_epochs=t_eval,
            worst_pair=worst,
            rms_sync_error=float(np.sqrt(np.mean(worst ** 2))),
            divergence_rate=slope,
            agreement_fraction=float(np.mean(worst < eps)),
            dependent_errors=errors)

    # -- broadcast: event-driven cadence run --------------------------------

    def broadcast_event_run(self, vector: CorrectionVector | None = None
                            ) -> tuple[list[tuple], BroadcastStats]:
        """Cadence broadcasts through lossy/disrupted links, with trace rows.

        Row layout matches EVENT_TRACE_HEADER; trace residuals follow the
        one-way-sync convention (truth minus estimate).  The authority's
        state (lamport stamp, emission count, clock) never depends on
        delivery outcomes.
        """
        s = self.scenario
        vec = vector if vector is not None else s.corrections
        authorities = s.authority_ids()
        dependents = s.dependent_ids()
        if not authorities or not dependents:
            raise RunError("broadcast run needs an authority and >= 1 dependent")
        authority = authorities[0]
        scales = vec.as_array()
        rng_root = np.random.default_rng(s.seed)
        link_rng = {dep: np.random.default_rng(rng_root.integers(2 ** 63))
                    for dep in dependents}
        models = {dep: self.correction_model(dep, authority) for dep in dependents}

        rows: list[tuple] = []
        auth_stamp = 0
        dep_stamp = {dep: 0 for dep in dependents}
        # per dependent: (sync coordinate time, offset estimate at that sync)
        last_sync: dict[str, tuple[float, float] | None] = {d: None for d in dependents}
        events: list[tuple[float, int, str, str, dict]] = []
        seq = 0
        n_emits = int(math.floor(s.duration / s.broadcast.cadence)) + 1
        for k in range(n_emits):
            t_emit = k * s.broadcast.cadence
            auth_stamp += 1
            emit_label = t_emit + float(self.displayed_offset_at(authority, t_emit))
            signal = bc.TimeSignal(authority, emit_label, auth_stamp, (authority,))
            events.append((t_emit, seq, "emit", authority,
                           {"stamp": auth_stamp}))
            seq += 1
            for dep in dependents:
                link = self._link_between(authority, dep)
                outcome = bc.deliver(signal, link, t_emit, link_rng[dep])
                if outcome.status is bc.DeliveryStatus.DELIVERED:
                    events.append((outcome.arrival, seq, "deliver", dep,
                                   {"signal": signal}))
                else:
                    events.append((t_emit, seq, outcome.status.value, dep, {}))
                seq += 1
        for t_sample in self.grid:
            events.append((float(t_sample), seq, "sample", "", {}))
            seq += 1
        events.sort(key=lambda e: (e[0], e[1]))

        eps = s.broadcast.agreement_epsilon
        sample_epochs: list[float] = []
        sample_worst: list[float] = []
        dep_err_rows: dict[str, list[float]] = {d: [] for d in dependents}

        def estimate_error(dep: str, t: float) -> tuple[float, float] | None:
            """(estimated offset vs authority, estimate - truth) or None."""
            state = last_sync[dep]
            if state is None:
                return None
            t_s, offset = state
            fam_t = self._family_signals(models[dep], np.array([t]))[:, 0]
            fam_s = self._family_signals(models[dep], np.array([t_s]))[:, 0]
            est = offset + float(np.sum(scales[:4] * (fam_s[:4] - fam_t[:4])))
            true_off = float(self.true_offset(authority, dep, t))
            return est, est - true_off

        for t_ev, _, kind, node, payload in events:
            if t_ev > s.duration + 1e-9:
                continue
            if kind == "emit":
                rows.append((t_ev, node, "emit", math.nan, math.nan,
                             payload["stamp"]))
            elif kind in ("lost", "blocked"):
                rows.append((t_ev, node, kind, math.nan, math.nan,
                             dep_stamp[node]))
            elif kind == "deliver":
                signal: bc.TimeSignal = payload["signal"]
                dep = node
                dep_stamp[dep] = bc.receive_stamp(dep_stamp[dep], signal)
                local = t_ev + float(self.displayed_offset_at(dep, t_ev))
                assumed = vec.delay_scale * models[dep].assumed_delay
                estimate = bc.one_way_offset(signal.emit_label, assumed, local)
                if (s.broadcast.sync_policy is SyncPolicy.CADENCE
                        or last_sync[dep] is None):
                    last_sync[dep] = (t_ev, estimate)
                true_off = float(self.true_offset(authority, dep, t_ev))
                rows.append((t_ev, dep, "sync", estimate, true_off - estimate,
                             dep_stamp[dep]))
            elif kind == "sample":
                errs: list[float] = []
                for dep in dependents:
                    res = estimate_error(dep, t_ev)
                    if res is None:
                        errs.append(math.nan)
                        continue
                    est, err = res
                    errs.append(err)
                    rows.append((t_ev, dep, "sample", est, -err, dep_stamp[dep]))
                finite = [e for e in errs if not math.isnan(e)]
                if finite:
                    worst = max(abs(e) for e in finite)
                    for i in range(len(finite)):
                        for j in range(i + 1, len(finite)):
                            worst = max(worst, abs(finite[i] - finite[j]))
                    sample_epochs.append(t_ev)
                    sample_worst.append(worst)
                    for dep, e in zip(dependents, errs):
                        dep_err_rows[dep].append(e)

        t_eval = np.array(sample_epochs)
        worst = np.array(sample_worst)
        days = (t_eval - t_eval[0]) / 86400.0 if t_eval.size else t_eval
        slope = float(np.polyfit(days, worst, 1)[0]) if t_eval.size > 1 else 0.0
        stats = BroadcastStats(
            eval_epochs=t_eval, worst_pair=worst,
            rms_sync_error=float(np.sqrt(np.mean(worst ** 2))) if worst.size else 0.0,
            divergence_rate=slope,
            agreement_fraction=float(np.mean(worst < eps)) if worst.size else 0.0,
            dependent_errors={d: np.array(v) for d, v in dep_err_rows.items()})
        return rows, stats

    # -- transactional ------------------------------------------------------

    def transact_run(self) -> TransactStats:
        s = self.scenario
        rng_root = np.random.default_rng(s.seed + 1)
        ledgers = {c.id: tx.Ledger(c.id) for c in s.clocks}
        graph = tx.OffsetGraph()
        rows: list[tuple] = []
        attempts = 0
        commits = 0
        link_rng = {i: np.random.default_rng(rng_root.integers(2 ** 63))
                    for i, _ in enumerate(s.topology.links)}
        interval = s.transactional.attempt_interval
        n_slots = int(math.floor(s.duration / interval))
        for k in range(1, n_slots + 1):
            t = k * interval
            for i, link in enumerate(s.topology.links):
                attempts += 1
                result = tx.attempt_comparison(
                    ledgers[link.a], ledgers[link.b], link, t, link_rng[i],
                    displayed_a=self.displayed_fn(link.a),
                    displayed_b=self.displayed_fn(link.b),
                    measurement_noise=s.transactional.measurement_noise)
                pair = f"{link.a}~{link.b}"
                if result.state is tx.TransactionState.COMMITTED:
                    commits += 1
                    graph.add_transaction(result)
                    true_off = float(self.true_offset(link.a, link.b, t))
                    rows.append((t, pair, "commit", result.committed_offset,
                                 true_off - result.committed_offset, 0))
                else:
                    rows.append((t, pair, "abort", math.nan, math.nan, 0))
        return TransactStats(attempts=attempts, commits=commits, graph=graph,
                             trace_rows=rows)

    # -- convention swap ----------------------------------------------------

    def pairwise_observables(self, convention: CoordinateConvention
                             ) -> tuple[np.ndarray, dict[tuple[str, str], np.ndarray]]:
        """(event labels, pairwise displayed-time differences) with
        `convention` in force.

        The convention labels the epochs of the comparison events; the
        observable readings are functions of the events alone, which is the
        whole point of the exercise.
        """
        from .conventions import coordinate_label

        labels = coordinate_label(convention, self.grid)
        ids = [c.id for c in self.scenario.clocks]
        pairs: dict[tuple[str, str], np.ndarray] = {}
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                pairs[(a, b)] = self.disp_offset[a] - self.disp_offset[b]
        return labels, pairs

    # -- ensemble -----------------------------------------------------------

    def ensemble_series(self) -> tuple[list[str], list[tuple]] | None:
        """(member ids, per-epoch rows) for the authority paper clock."""
        s = self.scenario
        members = s.authority_ids()
        if not members:
            return None
        step = s.epoch_step
        update_every = max(1, int(round(s.broadcast.weight_update_interval / step)))
        phase_err = {m: self.disp_offset[m] - self.tau_excess[m] for m in members}
        histories: dict[str, list[float]] = {m: [] for m in members}
        weights = {m: 1.0 / len(members) for m in members}
        rows = []
        for idx, t in enumerate(self.grid):
            if idx > 0 and idx % update_every == 0:
                start = max(0, idx - update_every)
                for m in members:
                    window = phase_err[m][start:idx + 1]
                    sigma = _adev_point(window, step)
                    if sigma is not None:
                        histories[m].append(sigma)
                if all(histories[m] for m in members):
                    weights = compute_weights(
                        {m: histories[m][-6:] for m in members})
            readings = {m: float(t + self.disp_offset[m][idx]) for m in members}
            paper, _ = ensemble_time(readings, weights)
            rows.append((float(t), paper,
                         [weights[m] for m in members],
                         [readings[m] - paper for m in members]))
        return members, rows

    # -- clock stability artifact -------------------------------------------

    def adev_rows(self) -> list[tuple[str, float, float]]:
        rows = []
        step = self.scenario.epoch_step
        for spec in self.scenario.clocks:
            x = self.disp_offset[spec.id] - self.tau_excess[spec.id]
            readings = [ClockReading(float(t), float(t + xe), float(t))
                        for t, xe in zip(self.grid, x)]
            taus = []
            m = 1
            while 2 * m < len(readings):
                taus.append(m * step)
                m *= 2
            if not taus:
                continue
            points, _ = allan_deviation(readings, taus)
            rows.extend((spec.id, tau, sigma) for tau, sigma in points)
        return rows


def _adev_point(phase: np.ndarray, step: float) -> float | None:
    """Single overlapping-ADEV estimate at tau = step from a phase window."""
    if phase.size < 3:
        return None
    d2 = phase[2:] - 2.0 * phase[1:-1] + phase[:-2]
    return float(np.sqrt(np.sum(d2 ** 2) / (2.0 * step ** 2 * d2.size)))


def truth_offset_series(scenario: Scenario, window_days: float,
                        output_step_s: float = 3600.0
                        ) -> tuple[np.ndarray, np.ndarray, float, float]:
    """(t, dependent-minus-authority proper offset, dependent anomaly rate,
    orbital angular rate) over [0, window_days] with ideal clock hardware."""
    s = scenario
    authorities = s.authority_ids()
    dependents = s.dependent_ids()
    if not authorities or not dependents:
        raise RunError("truth series needs an authority and a dependent")
    cfg = s.ephemeris
    fld = two_body_field(cfg)
    window = window_days * 86400.0
    n = int(round(window / output_step_s))
    grid = output_step_s * np.arange(n + 1)
    refine = 600.0 if window_days <= 120 else 3600.0
    series = {}
    for clock_id in (dependents[0], authorities[0]):
        spec = s.clock(clock_id)
        stripped, anomaly = _strip_anomaly(spec.worldline)
        base = proper_time_series(stripped, grid, min(refine, output_step_s),
                                  fld, cfg)
        series[clock_id] = base + (anomaly / cfg.c2) * grid
    dep, auth = dependents[0], authorities[0]
    dep_anomaly = _strip_anomaly(s.clock(dep).worldline)[1] / cfg.c2
    omega = 2.0 * math.pi / cfg.orbital_period
    return grid, series[dep] - series[auth], dep_anomaly, omega


# ---------------------------------------------------------------------------
# artifact writing
# ---------------------------------------------------------------------------

def _write_lines(path: Path, header: str, lines) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for line in lines:
            fh.write(line + "\n")


def write_event_trace(path: Path, rows) -> None:
    def fmt(row):
        t, node, kind, estimate, residual, stamp = row
        return ",".join([fnum(t), node, kind, fnum(estimate), fnum(residual),
                         str(int(stamp))])
    _write_lines(path, EVENT_TRACE_HEADER, (fmt(r) for r in rows))


def write_ensemble_csv(path: Path, members: list[str], rows) -> None:
    header = "epoch_s,paper_time_s," + ",".join(
        [f"weight_{m}" for m in members] + [f"offset_{m}" for m in members])
    def fmt(row):
        t, paper, weights, offsets = row
        return ",".join([fnum(t), fnum(paper)]
                        + [fnum(w) for w in weights]
                        + [fnum(o) for o in offsets])
    _write_lines(path, header, (fmt(r) for r in rows))


def write_adev_csv(path: Path, rows) -> None:
    _write_lines(path, ADEV_HEADER,
                 (",".join([clock, fnum(tau), fnum(sigma)])
                  for clock, tau, sigma in rows))


def write_offset_graph(path: Path, graph: tx.OffsetGraph) -> None:
    _write_lines(path, GRAPH_HEADER,
                 (",".join([e.a, e.b, fnum(e.offset), fnum(e.uncertainty),
                            fnum(e.rendezvous_epoch)])
                  for e in graph.edges))


def write_cycles_csv(path: Path, graph: tx.OffsetGraph, final_epoch: float) -> None:
    nodes = sorted(graph.nodes())
    pairs = {tuple(sorted((e.a, e.b))) for e in graph.edges}
    lines = []
    for i, a in enumerate(nodes):
        for j in range(i + 1, len(nodes)):
            for k in range(j + 1, len(nodes)):
                b, c = nodes[j], nodes[k]
                if {(a, b) if a < b else (b, a),
                    tuple(sorted((b, c))),
                    tuple(sorted((a, c)))} <= pairs:
                    residual = tx.cycle_residual(graph, [a, b, c, a])
                    lines.append(",".join([f"{a}-{b}-{c}", fnum(residual),
                                           fnum(final_epoch)]))
    _write_lines(path, CYCLES_HEADER, lines)


def write_sweep_csv(path: Path, results) -> None:
    def fmt(res):
        v = res.vector
        return ",".join([
            fnum(v.secular_scale), fnum(v.periodic_scale), fnum(v.anomaly_scale),
            fnum(v.drift_scale), fnum(v.delay_scale), fnum(res.rms_sync_error),
            fnum(res.divergence_rate), fnum(res.agreement_fraction)])
    _write_lines(path, SWEEP_HEADER, (fmt(r) for r in results))


def write_modelswap_csv(path: Path, epochs, label_delta, pairwise_delta) -> None:
    _write_lines(path, MODELSWAP_HEADER,
                 (",".join([fnum(t), fnum(l), fnum(p)])
                  for t, l, p in zip(epochs, label_delta, pairwise_delta)))


# ---------------------------------------------------------------------------
# top-level run
# ---------------------------------------------------------------------------

def run(scenario: Scenario, out_dir: str | Path) -> dict:
    """Execute a scenario, write artifacts, return the summary dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext.prepare(scenario)
    artifacts: dict[str, str] = {}
    summary: dict = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "architecture": scenario.architecture.value,
        "duration_s": scenario.duration,
    }

    ids = [c.id for c in scenario.clocks]
    summary["pair_rates_usday"] = {
        f"{a}-{b}": ctx.pair_rate_usday(a, b)
        for i, a in enumerate(ids) for b in ids[i + 1:]
    }

    trace_rows: list[tuple] = []
    broadcast_summary = None
    run_broadcast = scenario.architecture in (Architecture.BROADCAST,
                                              Architecture.BOTH)
    if run_broadcast and scenario.authority_ids() and scenario.dependent_ids():
        if scenario.broadcast.sync_policy is SyncPolicy.CADENCE:
            rows, stats = ctx.broadcast_event_run()
            trace_rows.extend(rows)
        else:
            stats = ctx.broadcast_free_run()
            for t, w in zip(stats.eval_epochs, stats.worst_pair):
                trace_rows.append((float(t), "worst_pair", "sample",
                                   math.nan, float(w), 0))
            for dep, errs in stats.dependent_errors.items():
                for t, e in zip(stats.eval_epochs, errs):
                    # trace residual convention: truth minus estimate
                    trace_rows.append((float(t), dep, "sample", math.nan,
                                       float(-e), 0))
        broadcast_summary = {
            "rms_sync_error_s": stats.rms_sync_error,
            "divergence_rate_s_per_day": stats.divergence_rate,
            "agreement_fraction": stats.agreement_fraction,
        }
    summary["broadcast"] = broadcast_summary

    transact_summary = None
    if scenario.architecture in (Architecture.TRANSACTIONAL, Architecture.BOTH):
        tstats = ctx.transact_run()
        trace_rows.extend(tstats.trace_rows)
        graph_path = out / "offset_graph.txt"
        write_offset_graph(graph_path, tstats.graph)
        artifacts["offset_graph"] = graph_path.name
        cycles_path = out / "cycles.csv"
        write_cycles_csv(cycles_path, tstats.graph, scenario.duration)
        artifacts["cycles"] = cycles_path.name
        components = _component_count(tstats.graph)
        transact_summary = {
            "attempts": tstats.attempts,
            "commits": tstats.commits,
            "graph_nodes": len(tstats.graph.nodes()),
            "graph_edges": len(tstats.graph.edges),
            "components": components,
        }
    summary["transactional"] = transact_summary

    trace_rows.sort(key=lambda r: (r[0], r[1], r[2]))
    trace_path = out / "event_trace.csv"
    write_event_trace(trace_path, trace_rows)
    artifacts["event_trace"] = trace_path.name

    ens = ctx.ensemble_series()
    ensemble_path = out / "ensemble.csv"
    if ens is not None:
        write_ensemble_csv(ensemble_path, ens[0], ens[1])
    else:
        _write_lines(ensemble_path, "epoch_s,paper_time_s", [])
    artifacts["ensemble"] = ensemble_path.name

    adev_path = out / "adev.csv"
    write_adev_csv(adev_path, ctx.adev_rows())
    artifacts["adev"] = adev_path.name

    checks = []
    for check in scenario.checks:
        if check.kind == "pair_rate_usday":
            value = ctx.pair_rate_usday(*check.pair)
        else:  # unreachable: parse rejects unknown kinds
            raise RunError(f"unsupported check kind {check.kind!r}")
        checks.append({
            "name": check.name, "kind": check.kind,
            "pair": list(check.pair), "value": value,
            "expect": check.expect, "tolerance": check.tolerance,
            "verdict": "pass" if abs(value - check.expect) <= check.tolerance
                       else "fail",
        })
    summary["checks"] = checks
    summary["artifacts"] = artifacts

    with open(out / "summary.json", "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return summary


def _component_count(graph: tx.OffsetGraph) -> int:
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for node in graph.nodes():
        parent[node] = node
    for e in graph.edges:
        ra, rb = find(e.a), find(e.b)
        if ra != rb:
            parent[ra] = rb
    return len({find(n) for n in parent})
