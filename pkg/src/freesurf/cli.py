"""Command-line entry point: ``freesurf <subcommand> <config> [options]``.

Exit codes: 0 when the run or check passes, 2 when a check fails,
1 on errors (bad config, I/O, numerical failure outside a check).
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import harness as hs
from .breaking import predict
from .integrator import StopReason

log = logging.getLogger("freesurf")

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


def _cfg(args) -> hs.ExperimentConfig:
    return hs.load_config(args.config)


def _outdir(args, cfg):
    return args.output_dir if args.output_dir is not None else cfg.output_dir


def cmd_simulate(args) -> int:
    cfg = _cfg(args)
    rec = hs.run_simulation(cfg, _outdir(args, cfg))
    H = rec.series["H"]
    drift = abs(H[-1] - H[0]) / H[0] if H[0] > 0 else abs(H[-1])
    print(f"run {cfg.run_id}: stop={rec.stop.value} t={rec.stop_time:.6g} "
          f"records={len(rec)} energy_drift={drift:.3e} wall={rec.wall_time:.2f}s")
    if rec.stop in (StopReason.NONFINITE, StopReason.ENERGY_DRIFT):
        return EXIT_FAILED
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _cfg(args)
    eta0 = hs.make_initial_data(cfg.initial, cfg.grid)
    p = predict(eta0, args.kind)
    print(f"kind={p.extremum_kind} h1={p.h1_norm!r} C0={p.C0!r} M0={p.M0!r} x0={p.x0!r}")
    print(f"threshold={p.threshold!r} hypothesis_ok={p.hypothesis_ok} "
          f"sigma={p.sigma!r} T0_bound={p.T0_bound!r}")
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = _cfg(args)
    rep = hs.convergence_study(cfg, args.ladder, workers=args.workers,
                               output_dir=_outdir(args, cfg))
    reps = rep if isinstance(rep, list) else [rep]
    for r in reps:
        print(f"{r.ladder}: passed={r.passed} order={r.order} ({r.notes})")
        for p, e in zip(r.parameters, r.errors):
            print(f"  {p!r:>24}  {e:.6e}")
    return EXIT_OK if all(r.passed for r in reps) else EXIT_FAILED


def cmd_equivalence(args) -> int:
    cfg = _cfg(args)
    rep = hs.equivalence_check(cfg, output_dir=_outdir(args, cfg))
    for t, r, q in zip(rep.times, rep.residual_max, rep.rhs_max):
        print(f"t={t:.6g} residual={r:.3e} bound={rep.tolerance_factor * (1 + q):.3e}")
    print(f"passed={rep.passed}")
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_mollifier(args) -> int:
    cfg = _cfg(args)
    reports = hs.mollifier_check(cfg, output_dir=_outdir(args, cfg))
    ok = True
    for v, rep in reports.items():
        if isinstance(rep, str):
            print(f"{v}: skipped ({rep})")
            continue
        ok &= rep.ok
        print(f"{v}: ratio={rep.linf_ratio:.12g} defect={rep.commutation_defect:.3e} "
              f"order={rep.convergence_order:.3f} growth={rep.growth_exponents} "
              f"passed={rep.passed}")
    return EXIT_OK if ok else EXIT_FAILED


def _amplitudes(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(a) for a in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad amplitude list {text!r}") from None


def cmd_sweep(args) -> int:
    cfg = _cfg(args)
    rows = hs.breaking_sweep(cfg, args.amplitudes, workers=args.workers,
                             output_dir=_outdir(args, cfg))
    failed = False
    for r in rows:
        print(", ".join(f"{k}={r[k]}" for k in ("amplitude", "hypothesis_sup", "T0_sup",
                                                 "stop_reason", "stop_time", "stop_within_T0",
                                                 "envelope_violations", "error")))
        failed |= bool(r["error"]) or r["stop_within_T0"] is False
    return EXIT_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freesurf", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="key=value experiment config")
        p.add_argument("--output-dir", default=None, help="overrides output_dir of the config")
        p.set_defaults(func=fn)
        return p

    add("simulate", cmd_simulate, "integrate and persist one run")
    p = add("predict", cmd_predict, "breaking constants of the initial data")
    p.add_argument("--kind", choices=("inf", "sup"), default="sup")
    p = add("convergence", cmd_convergence, "self-convergence ladder")
    p.add_argument("--ladder", choices=("spatial", "temporal", "mollifier"), required=True)
    p.add_argument("--workers", type=int, default=1)
    add("equivalence", cmd_equivalence, "third-order residual along a short run")
    add("mollifier-check", cmd_mollifier, "mollifier property suite on the initial data")
    p = add("sweep", cmd_sweep, "breaking sweep over amplitudes")
    p.add_argument("--amplitudes", type=_amplitudes, required=True,
                   help="comma-separated, increasing (empty allowed)")
    p.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (hs.ConfigError, ValueError, OSError, RuntimeError) as exc:
        log.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
