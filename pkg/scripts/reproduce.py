"""Run every reproduction check and print a one-line verdict per record."""
import argparse
import sys
from pathlib import Path

from stpgame import serialize as ser
from stpgame.repro import run_repro


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", type=Path, help="also write the full report here")
    args = ap.parse_args(argv)

    rep = run_repro()
    for r in rep.records:
        crit = f"[{r.criterion}]" if r.criterion is not None else "[-]"
        bar = "bar met" if r.bar_met else "BAR NOT MET"
        print(f"{crit:>4} {r.name:<36} {r.status:<15} {bar}")
    if args.json:
        ser.write_text(args.json, ser.dumps_report(rep.to_json()))
    return 0 if all(r.bar_met for r in rep.records) else 1


if __name__ == "__main__":
    sys.exit(main())
