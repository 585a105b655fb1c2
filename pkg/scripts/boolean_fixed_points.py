"""Tabulate the candidate optimal controls delta_{2^m}^i and whether each
closes a fixed point of the row-transition network."""
import argparse
import sys

from stpgame import boolnet


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-m", type=int, default=3)
    ap.add_argument("--max-n", type=int, default=3)
    args = ap.parse_args(argv)

    print(f"{'m':>2} {'n':>2} {'i':>3}  verified  delta solutions  rhs shape")
    failures = 0
    for m in range(1, args.max_m + 1):
        for n in range(1, args.max_n + 1):
            shape = boolnet.optimal_rhs_dims(m, n)
            for i in range(1, min(2**m, 2**n) + 1):
                ok = boolnet.verify_optimal_fixed_point(m, n, i)
                sols = boolnet.fixed_point_candidates(m, n, i)
                failures += not ok
                print(f"{m:>2} {n:>2} {i:>3}  {str(ok):<8}  {str(sols):<15}  {shape}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
