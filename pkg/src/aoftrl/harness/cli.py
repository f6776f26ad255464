"""Command line entry point: ``aoftrl {run,compare,verify-bounds,emit-curves}``."""

from __future__ import annotations

import argparse
import sys

from .experiment import (ConfigError, ExperimentConfig, PROBLEMS, dumps, load_config, parse_seeds,
                         run_experiment, verify_bounds, write_curves, write_report)


def _parse_problem(text: str) -> dict:
    """``slowly_varying:sigma=0.001,bound=1`` -> ``{"kind": ..., "sigma": 0.001, "bound": 1}``."""
    name, _, rest = text.partition(":")
    out: dict = {"kind": name}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value, got {item!r}")
        out[key.strip()] = _literal(val.strip())
    return out


def _literal(val: str):
    low = val.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(val)
        except ValueError:
            pass
    if ";" in val:
        return [float(v) for v in val.split(";")]
    return val


def _summary(result) -> str:
    lines = []
    for a in result.aggregates:
        mr = "n/a" if a["mean_regret"] is None else f"{a['mean_regret']:.6g}"
        lines.append(f"{a['algorithm']:<16} cells={a['cells']} failed={a['failed']} mean_regret={mr} "
                     f"bounds_hold={a['bounds_hold']}")
    return "\n".join(lines)


def cmd_run(args) -> int:
    config = load_config(args.config)
    out = args.out or config.output
    result = run_experiment(config)
    if out:
        write_report(result, out)
    else:
        sys.stdout.write(result.to_json())
    print(_summary(result), file=sys.stderr)
    return 0 if not any(r["error"] for r in result.rows) else 1


def cmd_compare(args) -> int:
    cfg = {"problem": _parse_problem(args.problem), "algorithms": [a for a in args.algos.split(",") if a],
           "T": args.T, "seeds": args.seeds, "predictor": args.predictor, "timing": args.timing}
    domain = {}
    if args.n is not None:
        domain["n"] = args.n
    if args.radius is not None:
        domain["radius"] = args.radius
    if domain:
        cfg["domain"] = domain
    result = run_experiment(ExperimentConfig.from_dict(cfg))
    write_report(result, args.out)
    print(_summary(result))
    return 0 if not any(r["error"] for r in result.rows) else 1


def cmd_verify(args) -> int:
    passed, doc = verify_bounds(args.suite, args.seeds)
    text = dumps(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    for exp in doc["experiments"]:
        prob = exp["config_echo"]["problem"]["kind"]
        for a in exp["aggregates"]:
            print(f"{'PASS' if a['bounds_hold'] else 'FAIL'} {prob} {a['algorithm']} "
                  f"mean_regret={a['mean_regret']} mean_bounds={a['mean_bounds']}")
    print("all bounds hold" if passed else "bound violations found")
    return 0 if passed else 1


def cmd_curves(args) -> int:
    paths = write_curves(load_config(args.config), args.out)
    print(f"wrote {len(paths)} curve files to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aoftrl", description="Adaptive optimistic FTRL experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a JSON or TOML config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="report path (overrides the config's output)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="compare algorithms on one problem")
    c.add_argument("--problem", required=True, help=f"kind[:key=value,...], kind in {sorted(PROBLEMS)}")
    c.add_argument("--algos", required=True, help="comma-separated algorithm names")
    c.add_argument("--T", type=int, required=True)
    c.add_argument("--seeds", required=True, help='e.g. "0-9" or "1,4,7"')
    c.add_argument("--out", required=True, help="JSON report path; a CSV mirror is written beside it")
    c.add_argument("--predictor", default="last")
    c.add_argument("--n", type=int)
    c.add_argument("--radius", type=float)
    c.add_argument("--timing", action="store_true", help="record per-cell runtime_ms")
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("verify-bounds", help="check regret bounds on the built-in suites")
    v.add_argument("--suite", choices=["aogd", "aoeg", "rcd", "erm", "all"], default="all")
    v.add_argument("--seeds", default="0-9")
    v.add_argument("--out", help="write the JSON report here")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("emit-curves", help="write per-round regret CSVs")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True, help="output directory")
    e.set_defaults(func=cmd_curves)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
