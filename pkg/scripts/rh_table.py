"""Both sides of the Riemann-Hurwitz formula on every built-in cover, for a few random sheaves."""
import argparse
import random

from rhchi import SheafClass, builtins
from rhchi.cover import determine_sign, rh_lhs, rh_rhs_corollary, rh_rhs_theorem
from rhchi.exactring import format_rational
from rhchi.suite import random_sheaf


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sheaves", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    covers = [builtins.cover(n) for n in builtins.cover_names()]
    sign = determine_sign([c for c in covers if c.name in builtins.rh_cover_names()])
    print(f"global sign {sign:+d}")
    print(f"{'cover':<20}{'sheaf':>6}{'lhs':>12}{'theorem':>12}{'corollary':>12}")
    for c in covers:
        for k in range(args.sheaves):
            s = random_sheaf(c.codomain, rng) if k else SheafClass.trivial()
            row = [rh_lhs(c, s), rh_rhs_theorem(c, s, sign), rh_rhs_corollary(c, s, sign)]
            print(f"{c.name:<20}{k:>6}" + "".join(f"{format_rational(v):>12}" for v in row))


if __name__ == "__main__":
    main()
