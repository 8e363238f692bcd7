"""Sweep perturbation size for each perturbation class and fit the log-log slope.

At lambda = 0 a shift is itself a symmetry of the trap-free problem, so the
shift class only gives a meaningful slope for lambda > 0.
"""
import argparse
import time
from concurrent.futures import ProcessPoolExecutor

from hartree_lab.waves import Perturbation, StabilityConfig, slope_fit, stability_trial


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="H")
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--s", type=float, default=1.0)
    ap.add_argument("--periods", type=float, default=20.0)
    ap.add_argument("--deltas", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4])
    ap.add_argument("--kinds", nargs="+", default=["mode", "boost", "shift", "mass"])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    jobs = [StabilityConfig(model=args.model, n=(args.n,), lam=args.lam, eta=args.eta, s=args.s,
                            delta=d, periods=args.periods, perturbations=(Perturbation(k, (args.n + 2,)),))
            for k in args.kinds for d in args.deltas]
    t0 = time.perf_counter()
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            reports = list(pool.map(stability_trial, jobs))
    else:
        reports = [stability_trial(j) for j in jobs]
    nd = len(args.deltas)
    print(f"{'kind':>6} " + " ".join(f"{'d=' + format(d, 'g'):>10}" for d in args.deltas) + f" {'slope':>7} {'max/d':>6}")
    for i, kind in enumerate(args.kinds):
        sups = [r.sup_dist for r in reports[i * nd:(i + 1) * nd]]
        ratio = max(s / d for s, d in zip(sups, args.deltas))
        row = " ".join(f"{s:10.3e}" for s in sups)
        print(f"{kind:>6} {row} {slope_fit(args.deltas, sups):7.3f} {ratio:6.2f}")
    print(f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
