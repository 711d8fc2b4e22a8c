"""Command line entry point: ``geoflow list-examples | build | run | verify-table``.

Exit codes: 0 success, 1 regression failure, 2 configuration error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .examples import BUILDERS, build_example, list_examples
from .exceptions import BudgetExceeded, ConfigError, GeoflowError
from .report import atomic_write, to_csv, to_json
from .runner import QUANTITIES, ExperimentConfig, run_experiment, verify_table

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def _horizons(text: str) -> list:
    """``"1..12"``, ``"1,2,5"`` or a single value."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [Fraction(t) if "/" in t or "." in t else int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad horizon list {text!r}") from None


def _option(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("options take the form key=value")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geoflow", description="Entropy laboratory for periodic metric graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list-examples", help="list the bundled example spaces")

    b = sub.add_parser("build", help="write an example's space description as JSON")
    b.add_argument("--example", required=True)
    b.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("--config", help="JSON experiment config; flags override its fields")
    r.add_argument("--space")
    r.add_argument("--quantity", choices=QUANTITIES)
    r.add_argument("--horizon", type=_horizons)
    r.add_argument("--radius", dest="r", type=Fraction, help="scale r")
    r.add_argument("--decay", dest="a", type=Fraction, help="weight decay a in exp(-a|s|)")
    r.add_argument("--anchor-radius", dest="R", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--budget", type=int, help="maximal number of cover vertices")
    r.add_argument("--out")
    r.add_argument("--format", choices=("csv", "json"))
    r.add_argument("--option", action="append", type=_option, default=[],
                   help="quantity-specific option key=value (JSON values accepted)")

    v = sub.add_parser("verify-table", help="run the regression table")
    v.add_argument("--only", choices=QUANTITIES + ("property",))
    return p


def _run_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        data = ExperimentConfig.load(args.config).to_dict()
    for key, attr in (("space", "space"), ("quantity", "quantity"), ("horizons", "horizon"), ("r", "r"),
                      ("a", "a"), ("R", "R"), ("seed", "seed"), ("budget", "budget"), ("out", "out"),
                      ("format", "format")):
        value = getattr(args, attr)
        if value is not None:
            data[key] = value
    if args.option:
        data["options"] = {**data.get("options", {}), **dict(args.option)}
    if "space" not in data or "quantity" not in data:
        raise ConfigError("run needs --space and --quantity (or a config file)")
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-examples":
            for name in list_examples():
                doc = (BUILDERS[name].__doc__ or "").strip().splitlines()[0]
                print(f"{name:12s} {doc}")
            return EXIT_OK
        if args.command == "build":
            spec = build_example(args.example)
            atomic_write(args.out, json.dumps(spec.to_dict(), sort_keys=True, indent=2) + "\n")
            print(f"wrote {args.out}")
            return EXIT_OK
        if args.command == "run":
            cfg = _run_config(args)
            rep = run_experiment(cfg)
            if not cfg.out:
                sys.stdout.write(to_json(rep) if cfg.format == "json" else to_csv(rep))
            else:
                print(f"{rep.quantity}: slope {rep.slope:.6f} [{rep.slope_lo:.6f}, {rep.slope_hi:.6f}] -> {cfg.out}")
            return EXIT_BUDGET if rep.partial else EXIT_OK
        if args.command == "verify-table":
            return EXIT_OK if verify_table(args.only) else EXIT_FAIL
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (GeoflowError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG  # pragma: no cover - argparse enforces a command


if __name__ == "__main__":
    sys.exit(main())
