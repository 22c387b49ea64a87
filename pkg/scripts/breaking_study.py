"""Amplitude sweep on a breaking config: predicted T0 against the observed slope-threshold time.

Usage: python3 scripts/breaking_study.py configs/breaking.cfg \
           --amplitudes 0.2,0.3,0.5 --output-dir runs/study [--workers N]
"""
import argparse
import sys

from freesurf.harness import breaking_sweep, load_config


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--amplitudes", required=True, help="comma-separated, increasing")
    ap.add_argument("--output-dir", default=None)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    cfg = load_config(args.config)
    amps = [float(a) for a in args.amplitudes.split(",") if a.strip()]
    rows = breaking_sweep(cfg, amps, workers=args.workers, output_dir=args.output_dir)
    print(f"{'amp':>8} {'M0':>8} {'sigma':>7} {'T0':>9} {'stop':>16} {'t_stop':>9} "
          f"{'margin':>10} {'margin7/4':>10} {'env.viol':>8}")
    for r in rows:
        if r["error"]:
            print(f"{r['amplitude']:>8g}  error: {r['error']}")
            continue
        sig = f"{r['sigma_sup']:.3f}" if r["sigma_sup"] is not None else "-"
        t0 = f"{r['T0_sup']:.5f}" if r["T0_sup"] is not None else "-"
        m = r["riccati_margin"]
        mf = r["riccati_margin_full"]
        print(f"{r['amplitude']:>8g} {r['M0_sup']:>8.3f} {sig:>7} {t0:>9} {r['stop_reason']:>16} "
              f"{r['stop_time']:>9.5f} {m if m == '' else format(m, '.3g'):>10} "
              f"{mf if mf == '' else format(mf, '.3g'):>10} {str(r['envelope_violations']):>8}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
