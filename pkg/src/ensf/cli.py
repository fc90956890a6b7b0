"""Command-line front end: truth generation, assimilation, inspection.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.  Config
errors carry a path:line: anchor when a config file is at fault, so they
read like compiler diagnostics.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .runner import compare, diagnose, generate_truth, run_filter


def _add_common(p, assimilating=False):
    p.add_argument("--config", required=True, metavar="PATH",
                   help="experiment config file")
    p.add_argument("--seed", type=int, metavar="N", help="override master seed")
    p.add_argument("--out", metavar="DIR", help="override output directory")
    if assimilating:
        p.add_argument("--filter", choices=("ensf", "letkf"), dest="method",
                       help="override the configured filter")
        p.add_argument("--obs-fraction", type=float, dest="obs_fraction",
                       metavar="F", help="override observed fraction")
        p.add_argument("--truth", metavar="DIR",
                       help="stored truth to assimilate against "
                            "(default: <out>/truth)")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ensf",
        description="Twin experiments for ensemble score filtering of "
                    "stochastic PDEs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("truth", help="integrate and store a reference trajectory")
    _add_common(p)

    p = sub.add_parser("assimilate", help="run the filter against a stored truth")
    _add_common(p, assimilating=True)

    p = sub.add_parser("diagnose",
                       help="recompute the diagnostics CSV from stored snapshots")
    p.add_argument("run_dir", help="run directory holding manifest.json")
    p.add_argument("--truth", metavar="DIR",
                   help="truth directory (default: from the run manifest)")

    p = sub.add_parser("compare", help="tabulate two runs side by side")
    p.add_argument("run_a")
    p.add_argument("run_b")
    return parser


def _cmd_truth(args):
    cfg = load_config(args.config, seed=args.seed, out=args.out)
    rec = generate_truth(cfg)
    print("wrote truth (%d filter steps) to %s" % (rec.n_steps, rec.path))
    return 0


def _cmd_assimilate(args):
    cfg = load_config(args.config, seed=args.seed, out=args.out,
                      method=args.method, obs_fraction=args.obs_fraction)
    rec = run_filter(cfg, truth_path=args.truth)
    rmse = rec.series["rmse"].values
    print("%s run: rmse %.6g -> %.6g, wrote %s"
          % (rec.method, rmse[0], rmse[-1], rec.path))
    return 0


def _cmd_diagnose(args):
    sys.stdout.write(diagnose(args.run_dir, truth_path=args.truth))
    return 0


def _cmd_compare(args):
    print(compare(args.run_a, args.run_b))
    return 0


_COMMANDS = {
    "truth": _cmd_truth,
    "assimilate": _cmd_assimilate,
    "diagnose": _cmd_diagnose,
    "compare": _cmd_compare,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (RuntimeError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
