"""``ipq`` command line: run, sweep, qec, verify, presets."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import PRESETS, resolve
from .errors import ConfigError, ConvergenceError, IPQError

log = logging.getLogger("ipq")


def _add_common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", metavar="PATH", help="YAML run configuration")
        p.add_argument("--preset", metavar="NAME", help="named figure preset (see `ipq presets`)")
    p.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (QEC trials only)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ipq", description=__doc__)
    ap.add_argument("--version", action="version", version=f"ipq {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a config or preset and write CSV + JSON")
    _add_common(p)
    p.add_argument("--with-oracle", action="store_true", help="add *_oracle columns from the discretized-bath reference")

    p = sub.add_parser("sweep", help="run one point per axis value and write summary.csv")
    _add_common(p)
    p.add_argument("--with-oracle", action="store_true")
    p.add_argument("--axis", help="override the sweep axis (temperature, beta_difference or a dotted path)")
    p.add_argument("--values", type=float, nargs="+", help="override the axis values")

    p = sub.add_parser("qec", help="WWM trials and Knill-Laflamme residuals as JSON")
    _add_common(p)
    p.add_argument("--epsilon", type=float, default=None, help="error strength (default: smallest valid)")
    p.add_argument("--cutoff", type=int, default=4)
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("verify", help="reduced-scale invariant suite")
    p.add_argument("--flip-kernel-sign", action="store_true", help=argparse.SUPPRESS)

    sub.add_parser("presets", help="list figure presets")
    return ap


def _cmd_run(args) -> int:
    from .runner import run

    cfg = resolve(args.config, args.preset)
    if args.seed is not None:
        cfg["seed"] = args.seed
    for rec in run(cfg, Path(args.out), args.with_oracle):
        if isinstance(rec, dict):
            print(json.dumps(rec, indent=2, sort_keys=True, default=str))
        else:
            extra = f" infidelity_end={rec.summary['infidelity_end']:.3e}" if "infidelity_end" in rec.summary else ""
            print(f"{rec.label}: t_end={rec.summary['t_end']:.4g} n0={rec.summary['n0_end']:.4e} n1={rec.summary['n1_end']:.4e}{extra} ({rec.timing_s:.1f}s)")
    return 0


def _cmd_sweep(args) -> int:
    from .runner import sweep

    cfg = resolve(args.config, args.preset)
    rows = sweep(cfg, Path(args.out), args.with_oracle, args.axis, args.values)
    for v, rec in rows:
        print(f"{v:g}: " + " ".join(f"{k}={val:.4e}" for k, val in sorted(rec.summary.items()) if isinstance(val, float)))
    return 0


def _cmd_qec(args) -> int:
    from .config import normalize
    from .runner import run_qec

    if args.config or args.preset:
        cfg = resolve(args.config, args.preset)
        if cfg["kind"] != "qec":
            raise ConfigError("qec subcommand needs a config of kind qec")
    else:
        cfg = normalize({"kind": "qec", "units": "G", "qec": {"epsilon": args.epsilon, "cutoff": args.cutoff, "trials": args.trials}})
    report = run_qec(cfg, Path(args.out), args.seed)
    print(json.dumps(report, indent=2, sort_keys=True, default=str))
    return 0


def _cmd_verify(args) -> int:
    from .checks import verify

    results = verify(kernel_sign=-1.0 if args.flip_kernel_sign else 1.0)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def _cmd_presets(args) -> int:
    for name in sorted(PRESETS):
        print(f"{name:6s} {PRESETS[name].get('description', '')}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "qec": _cmd_qec, "verify": _cmd_verify, "presets": _cmd_presets}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return 3
    except IPQError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
