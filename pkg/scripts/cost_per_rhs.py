"""Wall-clock per right-hand-side evaluation for the three schemes at fixed DOFs.

    python scripts/cost_per_rhs.py --p 3 --K 16 --repeat 20
"""
import argparse
import statistics
import time

from ssdc.cases import setup_tgv
from ssdc.fluxes import SCHEMES, FluxScheme
from ssdc.solver import SemiDiscretization
from ssdc.viscous import ViscousConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--K", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--inviscid", action="store_true", help="Euler RHS only")
    args = ap.parse_args()

    setup = setup_tgv(args.p, (args.K,) * 3, viscous=not args.inviscid)
    sds = {s: SemiDiscretization(setup.grid, setup.gas, FluxScheme(s),
                                 ViscousConfig(enabled=not args.inviscid)) for s in SCHEMES}
    times = {s: [] for s in SCHEMES}
    for sd in sds.values():
        sd.jrhs(setup.q0)
    for _ in range(args.repeat):
        for s, sd in sds.items():
            t0 = time.perf_counter()
            sd.jrhs(setup.q0)
            times[s].append(time.perf_counter() - t0)
    n = args.K * (args.p + 1)
    print(f"{n}^3 DOFs (p={args.p}, K={args.K}^3), median of {args.repeat}")
    for s in SCHEMES:
        print(f"  {s:6s} {statistics.median(times[s]):.4f} s")


if __name__ == "__main__":
    main()
