"""Scan for level-raising primes and print a table with the local data at each hit.

    python scripts/level_raising_scan.py --form x0_11 --p 11 --lmax 2200
"""

import argparse

from iwalab.cli import resolve_form
from iwalab.iwasawa import level_raising_scan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--form", required=True)
    ap.add_argument("--p", type=int, required=True)
    ap.add_argument("--lmax", type=int, default=1500)
    args = ap.parse_args()
    f = resolve_form(args.form)
    print(f"{'l':>6} {'a_l':>6} {'a_l mod p':>9} {'l mod p':>7} {'cases':>8} {'i':>10} {'places':>6}")
    for h in level_raising_scan(f, args.p, args.lmax):
        a = f.a(h.ell)
        cases = ",".join(map(str, h.cases))
        ivals = ",".join(map(str, h.i_values)) or "-"
        print(f"{h.ell:>6} {a:>6} {a % args.p:>9} {h.ell % args.p:>7} {cases:>8} {ivals:>10} {h.places:>6}")


if __name__ == "__main__":
    main()
