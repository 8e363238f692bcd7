"""Exact propagator against the split-step oracle for a batch of random boosted states.

    python3 scripts/oracle_compare.py --states 5 --model Hprime
"""
import argparse
import math
import time

import numpy as np

from hartree_lab.galilean import GalileanParams, apply_galilean
from hartree_lab.grid import GridSpec
from hartree_lab.hermite import BasisSpec, random_state, synthesize
from hartree_lab.oracle import integrate
from hartree_lab.propagator import ExactPropagator


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=10)
    ap.add_argument("--model", default="H")
    ap.add_argument("--lam", type=float, default=0.0)
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--boost", type=float, default=1.0, help="max |a|, |b|")
    ap.add_argument("--steps", type=int, default=1024, help="oracle steps per 2 pi")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    grid = GridSpec(1, 16.0, 1024)
    rng = np.random.default_rng(args.seed)
    T = 2 * math.pi
    print(f"{'#':>3} {'a':>7} {'b':>7} {'rel_err':>10} {'richardson':>10} {'sec':>6}")
    for k in range(args.states):
        a, b = rng.uniform(-args.boost, args.boost, 2)
        c = random_state(BasisSpec(1, 1.0, 32), rng, modes=8, decay=0.3)
        u0 = apply_galilean(GalileanParams(0.0, 1.0, [a], [b]), synthesize(c, grid))
        t0 = time.perf_counter()
        prop = ExactPropagator(args.model, u0, args.lam, args.eta)
        snaps = integrate(u0, T, args.lam, args.eta, args.model, samples=8, dt=T / args.steps, extrapolate=True)
        err = max(np.linalg.norm(prop.at(t).state.values - s.values) / np.linalg.norm(s.values)
                  for t, s in zip(np.linspace(0, T, 9), snaps))
        rich = snaps[-1].diagnostics["richardson_error"]
        print(f"{k:>3} {a:7.3f} {b:7.3f} {err:10.2e} {rich:10.2e} {time.perf_counter() - t0:6.2f}")


if __name__ == "__main__":
    main()
