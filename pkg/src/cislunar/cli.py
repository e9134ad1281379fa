"""Command-line scenario runner.

Subcommands: run, sweep, compare-models, report.  Exit codes: 0 success,
1 configuration error, 2 runtime error.  Failures emit a machine-readable
JSON object on stderr.  The default output directory comes from --out, the
CISLUNAR_OUT environment variable, or ./out, in that order.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import finetune, runner
from .scenario import Scenario, ScenarioError, parse_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def bundled_scenario_names() -> list[str]:
    root = resources.files("cislunar") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_scenario(ref: str) -> Scenario:
    """Load a scenario from a file path or a bundled scenario name."""
    path = Path(ref)
    if path.exists():
        return parse_scenario(path.read_text())
    bundled = resources.files("cislunar") / "scenarios" / f"{ref}.yaml"
    if bundled.is_file():
        return parse_scenario(bundled.read_text())
    raise ScenarioError(
        f"no such scenario {ref!r} (not a file; bundled: "
        f"{', '.join(bundled_scenario_names())})")


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("CISLUNAR_OUT", "out"))


def _apply_seed_override(scenario: Scenario, seed: int | None) -> Scenario:
    if seed is None:
        return scenario
    return dataclasses.replace(scenario, seed=seed)


def _cmd_run(args) -> int:
    scenario = _apply_seed_override(load_scenario(args.config), args.seed)
    out = _out_dir(args)
    summary = runner.run(scenario, out)
    if not args.quiet:
        print(f"wrote {out / 'summary.json'}")
        for check in summary["checks"]:
            print(f"check {check['name']}: value={check['value']:.6g} "
                  f"expect={check['expect']}+/-{check['tolerance']} "
                  f"-> {check['verdict']}")
    failed = [c for c in summary["checks"] if c["verdict"] != "pass"]
    return EXIT_RUNTIME if failed else EXIT_OK


def _cmd_sweep(args) -> int:
    scenario = _apply_seed_override(load_scenario(args.config), args.seed)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(scenario.seed)
    vectors = finetune.latin_hypercube(args.samples, rng)
    if args.include_unit:
        vectors.append(finetune.UNIT_VECTOR)
    results = finetune.sweep_corrections(scenario, vectors)
    sweep_path = out / "sweep.csv"
    runner.write_sweep_csv(sweep_path, results)
    fraction = finetune.faithfulness_score(results, args.epsilon)
    summary = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "samples": len(vectors),
        "epsilon_s": args.epsilon,
        "faithful_fraction": fraction,
        "artifacts": {"sweep": sweep_path.name},
    }
    with open(out / "sweep_summary.json", "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    if not args.quiet:
        print(f"wrote {sweep_path} ({len(results)} vectors, "
              f"faithful fraction {fraction:.4f})")
    return EXIT_OK


def _cmd_compare_models(args) -> int:
    scenario = _apply_seed_override(load_scenario(args.config), args.seed)
    if len(scenario.conventions) < 2 and not (args.model_a and args.model_b):
        raise ScenarioError("compare-models needs two declared conventions")
    name_a = args.model_a or scenario.conventions[0].name
    name_b = args.model_b or scenario.conventions[1].name
    conv_a = scenario.convention(name_a)
    conv_b = scenario.convention(name_b)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    ctx = runner.RunContext.prepare(scenario)
    _, obs_a = ctx.pairwise_observables(conv_a)
    _, obs_b = ctx.pairwise_observables(conv_b)
    pairwise_series = np.zeros_like(ctx.grid)
    for pair in obs_a:
        np.maximum(pairwise_series, np.abs(obs_a[pair] - obs_b[pair]),
                   out=pairwise_series)
    from .conventions import label_difference

    label_series = np.abs(label_difference(conv_a, conv_b, ctx.grid))
    path = out / "modelswap.csv"
    runner.write_modelswap_csv(path, ctx.grid, label_series, pairwise_series)
    summary = {
        "scenario": scenario.name,
        "model_a": name_a,
        "model_b": name_b,
        "max_pairwise_observable_delta_s": float(np.max(pairwise_series)),
        "max_label_delta_s": float(np.max(label_series)),
        "artifacts": {"modelswap": path.name},
    }
    with open(out / "modelswap_summary.json", "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    if not args.quiet:
        print(f"wrote {path}: pairwise delta "
              f"{summary['max_pairwise_observable_delta_s']:.3e} s, "
              f"label delta {summary['max_label_delta_s']:.3e} s")
    return EXIT_OK


def _cmd_report(args) -> int:
    out = _out_dir(args)
    any_fail = False
    found = False
    for name in ("summary.json", "sweep_summary.json", "modelswap_summary.json"):
        path = out / name
        if not path.exists():
            continue
        found = True
        data = json.loads(path.read_text())
        print(f"== {name} ({data.get('scenario', '?')})")
        for check in data.get("checks", []):
            line = (f"  {check['name']}: {check['value']:.6g} vs "
                    f"{check['expect']}+/-{check['tolerance']} "
                    f"[{check['verdict']}]")
            print(line)
            any_fail |= check["verdict"] != "pass"
        for key in ("faithful_fraction", "max_pairwise_observable_delta_s",
                    "max_label_delta_s"):
            if key in data:
                print(f"  {key}: {data[key]:.6g}")
    if not found:
        print(f"no summaries under {out}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_RUNTIME if any_fail else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cislunar",
        description="Earth-Moon clock network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=False,
                       help="scenario file path or bundled scenario name")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--quiet", action="store_true")

    p_run = sub.add_parser("run", help="execute a scenario, write artifacts")
    common(p_run)
    p_run.set_defaults(func=_cmd_run, needs_config=True)

    p_sweep = sub.add_parser("sweep", help="correction-scale hypercube sweep")
    common(p_sweep)
    p_sweep.add_argument("--samples", type=int, default=10000)
    p_sweep.add_argument("--epsilon", type=float, default=1.0e-8,
                         help="agreement threshold, seconds")
    p_sweep.add_argument("--include-unit", action="store_true",
                         help="append the fully tuned vector to the samples")
    p_sweep.set_defaults(func=_cmd_sweep, needs_config=True)

    p_cmp = sub.add_parser("compare-models",
                           help="swap coordinate conventions, diff outputs")
    common(p_cmp)
    p_cmp.add_argument("--model-a", default=None)
    p_cmp.add_argument("--model-b", default=None)
    p_cmp.set_defaults(func=_cmd_compare_models, needs_config=True)

    p_rep = sub.add_parser("report", help="print verdicts from summaries")
    common(p_rep)
    p_rep.set_defaults(func=_cmd_report, needs_config=False)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "needs_config", False) and not args.config:
        parser.error(f"{args.command} requires --config")
    try:
        return args.func(args)
    except ScenarioError as exc:
        json.dump({"error": "config", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - uniform runtime failure surface
        json.dump({"error": "runtime", "kind": type(exc).__name__,
                   "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
