"""Tabulate e_l (analytic and literal substitution) against the residual-root count.

    python scripts/euler_table.py --form e1_52 --p 5 --lmax 60
"""

import argparse

from iwalab.cli import resolve_form
from iwalab.forms import branch_data, primes_up_to
from iwalab.iwasawa import e_ell, e_ell_oracle, euler_factor, primes_above


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--form", required=True)
    ap.add_argument("--p", type=int, required=True)
    ap.add_argument("--i", type=int, default=0)
    ap.add_argument("--lmax", type=int, default=60)
    args = ap.parse_args()
    f = resolve_form(args.form)
    b = branch_data(f, args.p)
    print(f"{'l':>5} {'places':>6} {'e':>4} {'oracle':>6} {'literal':>7}")
    for ell in primes_up_to(args.lmax):
        if ell == args.p:
            continue
        ef = euler_factor(b, ell)
        e = e_ell(b, ell, args.i)
        lit = e_ell(b, ell, args.i, variant="literal")
        print(f"{ell:>5} {primes_above(ell, args.p).count:>6} {e:>4} {e_ell_oracle(ef, args.p, args.i):>6} {lit:>7}")


if __name__ == "__main__":
    main()
