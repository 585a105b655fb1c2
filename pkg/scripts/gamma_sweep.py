"""Sweep the attenuation level over a plant and print the radii table as CSV.

    python scripts/gamma_sweep.py --plant paper-sec8-plant --lo 1.1 --hi 12 --num 45
"""
import argparse
import sys

import numpy as np

from stpgame import hinf
from stpgame import serialize as ser
from stpgame.bundled import resolve_input
from stpgame.errors import StpGameError


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--plant", default="paper-sec8-plant", help="plant JSON path or bundled name")
    ap.add_argument("--lo", type=float, default=1.1)
    ap.add_argument("--hi", type=float, default=12.0)
    ap.add_argument("--num", type=int, default=45)
    ap.add_argument("--convention", default="max_modulus", choices=hinf.CONVENTIONS)
    ap.add_argument("--thresholds", action="store_true", help="also bisect each radius condition")
    args = ap.parse_args(argv)

    plant = ser.plant_from_json(ser.load_json(resolve_input(args.plant)))
    rows = []
    for g in np.linspace(args.lo, args.hi, args.num):
        try:
            r = hinf.gamma_report(plant, float(g), args.convention)
        except StpGameError as exc:
            print(f"# gamma={g:.6g}: {exc}", file=sys.stderr)
            rows.append((float(g), np.nan, np.nan, np.nan, np.nan, "", ""))
            continue
        rows.append((r.gamma, r.rho_MS, r.rho_SigmaTildeS, r.rho_SigmaQ, r.rho_SigmaSbar,
                     r.branch1_feasible, r.branch2_feasible))
    sys.stdout.write(ser.rows_to_csv(ser.GAMMA_CSV_HEADER, rows))

    if args.thresholds:
        for name in hinf.RADII:
            try:
                lo = 2.01 if name == "SigmaTildeS" else args.lo
                t = hinf.gamma_threshold(plant, name, (lo, max(args.hi, 50.0)), args.convention)
                print(f"# threshold {name}: {t:.7f}", file=sys.stderr)
            except StpGameError as exc:
                print(f"# threshold {name}: {exc}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
