"""Run the randomized property battery for a range of N and print a table."""
import argparse
import json

from izcorr.verify import VerifyConfig, run_verification


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-n", type=int, default=5)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--json", action="store_true", help="print full reports as JSON lines")
    a = p.parse_args()
    for n in range(1, a.max_n + 1):
        report = run_verification(VerifyConfig(n=n, trials=a.trials, seed=a.seed))
        if a.json:
            print(json.dumps(report.to_dict()))
            continue
        worst = ", ".join(f"{c.name}={c.max_error:.1e}" for c in report.checks)
        print(f"N={n} {'PASS' if report.passed else 'FAIL'}  {worst}")


if __name__ == "__main__":
    main()
