"""Command-line entry point: ``ssdc run|sweep|robustness --config FILE``.

Exit codes: 0 clean finish, 10 blow-up, 2 configuration error, 3 run stopped
by the step limit, the wall-clock limit or a vanishing step size, 1 sweep or
matrix expectation not met.  ``SSDC_NUM_THREADS`` sets the number of compiled-kernel threads.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import load_robustness, load_run, load_sweep
from .driver import EXIT_CONFIG, robustness, run, sweep
from .sbp import ConfigurationError


def _threads():
    n = os.environ.get("SSDC_NUM_THREADS")
    if n:
        import numba
        numba.set_num_threads(int(n))


def main(argv=None):
    ap = argparse.ArgumentParser(prog="ssdc", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=("run", "sweep", "robustness"))
    ap.add_argument("--config", required=True, help="INI-style configuration file")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _threads()
        if args.command == "run":
            cfg = load_run(args.config)
            res = run(cfg)
            s = res.summary
            print(f"{cfg.case} {cfg.scheme} p={cfg.p} K={cfg.elements}: {res.status} "
                  f"at t={s['t_reached']:.6g} ({s['n_steps']} steps) -> {cfg.output}")
            return res.exit_code
        if args.command == "sweep":
            spec = load_sweep(args.config)
            rows, orders, code = sweep(spec)
            for r in rows:
                print(f"p={r['p']} K={r['K']} dofs={r['dofs']} err_rho={r['err_rho']:.6e} "
                      f"{r['status']}")
            for p, o in orders.items():
                print(f"p={p}: fitted order {o:.3f}")
            return code
        spec = load_robustness(args.config)
        cells = robustness(spec, progress=lambda c: print(
            f"seed={c['seed']} {c['scheme']} p={c['p']} K={c['K']}: {c['status']} "
            f"t={c['t_reached']:.4g}", flush=True))
        incomplete = any(c["status"] in ("skipped", "deadline") for c in cells)
        return 1 if incomplete else 0
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
