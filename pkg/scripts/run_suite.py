"""Benchmark both solvers over the catalog crossed with the constraint families.

    python3 scripts/run_suite.py --budget 500 --jobs 4 --out results/b500

Writes the benchmark tree, metrics.csv and one profile_<metric>.csv per metric.
"""

import argparse
import sys
from pathlib import Path

from dmsfir.catalog import available_problems, default_dimension
from dmsfir.cli import main as cli
from dmsfir.problem import ConfigError, family_constraints


def suite_rows(n_override):
    for name in available_problems():
        n = n_override or default_dimension(name)
        for family in range(1, 7):
            try:
                family_constraints(family, n)
            except ConfigError:
                continue
            yield name, family, n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--budget", type=int, default=500)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--n", type=int, default=None, help="override every catalog dimension")
    ap.add_argument("--out", default="results/suite")
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suite = out / "suite.csv"
    with open(suite, "w") as fh:
        fh.write("problem,family,n\n")
        for name, family, n in suite_rows(args.n):
            fh.write(f"{name},{family},{n}\n")
    code = cli(["benchmark", "--suite", str(suite), "--budget", str(args.budget),
                "--jobs", str(args.jobs), "--out", str(out)])
    if code:
        return code
    return cli(["profile", "--in", str(out)])


if __name__ == "__main__":
    sys.exit(main())
