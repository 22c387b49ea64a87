"""Run the temporal, spatial and mollifier ladders on one config and print the tables.

Usage: python3 scripts/convergence_report.py configs/gaussian.cfg [--output-dir DIR] [--workers N]
"""
import argparse
import sys

from freesurf.harness import convergence_study, load_config


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--output-dir", default=None)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--ladders", default="temporal,spatial,mollifier")
    args = ap.parse_args(argv)
    cfg = load_config(args.config)
    ok = True
    for ladder in args.ladders.split(","):
        reps = convergence_study(cfg, ladder, workers=args.workers, output_dir=args.output_dir)
        for rep in reps if isinstance(reps, list) else [reps]:
            ok &= rep.passed
            print(f"== {rep.ladder}: passed={rep.passed} order={rep.order} ({rep.notes})")
            print(rep.table())
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
