"""Figure-rendering CLI: one figure per --spec, or a batch via --manifest.

A manifest is a JSON list of figure specs (the same shape --spec takes).
Exit codes: 0 rendered, 1 bad spec or schema mismatch, 2 unexpected failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import matplotlib.pyplot as plt

from .figures import FigureSpecError, load_spec, render, spec_from_dict
from .schema import EmptyInputError, SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="render figures from simulator CSV artifacts")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--spec", help="JSON figure spec file")
    group.add_argument("--manifest", help="JSON list of figure specs")
    parser.add_argument("--out", default=None,
                        help="override the spec's output path (single spec)")
    parser.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.spec:
            spec = load_spec(args.spec)
            if args.out:
                spec = type(spec)(kind=spec.kind, input_path=spec.input_path,
                                  output_path=args.out, options=spec.options)
            specs = [spec]
        else:
            data = json.loads(Path(args.manifest).read_text())
            if not isinstance(data, list):
                raise FigureSpecError("manifest must be a JSON list of specs")
            specs = [spec_from_dict(item) for item in data]
        for spec in specs:
            fig = render(spec)
            plt.close(fig)
            if not args.quiet:
                print(f"wrote {spec.output_path}")
        return 0
    except (FigureSpecError, SchemaError, EmptyInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"unexpected failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
