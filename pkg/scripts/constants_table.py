"""Print delta, signed count and lambda for every monomial type up to a weight."""
import argparse

from rhchi.combinat import delta, lambda_, signed_count, types_of_weight
from rhchi.exactring import format_rational


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-weight", type=int, default=5)
    args = ap.parse_args()
    print(f"{'type':<18}{'delta':>14}{'signed':>8}{'lambda':>14}")
    for w in range(args.max_weight + 1):
        for t in types_of_weight(w):
            print(f"{str(t):<18}{format_rational(delta(t)):>14}{signed_count(t):>8}"
                  f"{format_rational(lambda_(t)):>14}")


if __name__ == "__main__":
    main()
