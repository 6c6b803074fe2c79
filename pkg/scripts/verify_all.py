"""Run the full identity suite and write the report as JSON."""
import argparse
import json
import sys

from rhchi.suite import run_selftest


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="selftest_report.json")
    args = ap.parse_args()
    report = run_selftest()
    with open(args.out, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    summ = report.summary()
    print(f"{summ['passed']}/{summ['total']} checks passed in {report.seconds:.1f}s, sign {report.sign:+d}")
    print(f"report written to {args.out}")
    sys.exit(report.exit_code())


if __name__ == "__main__":
    main()
