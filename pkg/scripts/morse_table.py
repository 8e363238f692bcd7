"""Print the negative-direction counts of the linearized operator for even modes."""
import argparse

from hartree_lab.morse import assemble_hessian


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=10, help="largest even mode")
    ap.add_argument("--cutoff", type=int, nargs="+", default=[200, 400])
    ap.add_argument("--subspace", choices=["even", "full"], default="even")
    args = ap.parse_args()

    cols = " ".join(f"N={c:<5}" for c in args.cutoff)
    print(f"{'case':>4} {'n':>3} {cols} {'n_zero':>6} {'dpp':>4} {'dM/dw':>8}")
    for case in ("I", "II"):
        for n in range(2, args.nmax + 1, 2):
            reps = [assemble_hessian(case, n, c, args.subspace) for c in args.cutoff]
            counts = " ".join(f"{r.n_minus:<7}" for r in reps)
            r = reps[0]
            print(f"{case:>4} {n:>3} {counts} {r.n_zero:>6} {r.dpp_sign:>+4d} {r.dM_domega:8.4f}")


if __name__ == "__main__":
    main()
