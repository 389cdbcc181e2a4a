"""Restoration accuracy against a 1e-3 grid oracle on random 2-D hinge instances.

    python3 scripts/restoration_study.py --instances 200 --seed 0

Prints one line per instance and a summary of the objective gaps.
"""

import argparse

import numpy as np

from dmsfir.problem import Problem, constraint_violation
from dmsfir.restoration import RestorationConfig, restore


def grid_oracle(lin, xk, target, step=1e-3):
    g = np.arange(0.0, 2.0 + step / 2, step)
    y1, y2 = np.meshgrid(g, g, indexing="ij")
    h = np.zeros_like(y1)
    for a, b, c in lin:
        h += np.maximum(a * y1 + b * y2 - c, 0.0) ** 2
    d = 0.5 * ((y1 - xk[0]) ** 2 + (y2 - xk[1]) ** 2)
    d[h > target] = np.inf
    return float(d.min())


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=None, help="inner h evaluations (default 200 n)")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    cfg = RestorationConfig(inner_budget=args.budget)
    gaps, unsat, done = [], 0, 0
    while done < args.instances:
        lin = [(a, b, rng.uniform(-0.5, 1.0)) for a, b in rng.normal(size=(rng.integers(1, 3), 2))]
        cons = tuple((lambda x, a=a, b=b, c=c: a * x[0] + b * x[1] - c) for a, b, c in lin)
        prob = Problem("hinge", np.zeros(2), np.full(2, 2.0), (lambda x: x[0], lambda x: x[1]), cons)
        xk = rng.uniform(0, 2, size=2)
        if constraint_violation(prob, xk) == 0:
            continue
        done += 1
        alpha = float(rng.choice([1.0, 0.5, 0.25]))
        out = restore(prob, xk, alpha, cfg)
        oracle = grid_oracle(lin, xk, out.target_h)
        obj = 0.5 * float(np.sum((out.y_star - xk) ** 2))
        if out.satisfied:
            gaps.append(obj - oracle)
        else:
            unsat += 1
        print(f"{done:4d} p={len(lin)} alpha={alpha:<5} satisfied={out.satisfied!s:5} "
              f"evals={out.inner_evals:4d} obj={obj:.6f} oracle={oracle:.6f}")
    gaps = np.array(gaps)
    print(f"satisfied {len(gaps)}/{done}, unsatisfied {unsat}")
    if gaps.size:
        print(f"gap obj - oracle: min {gaps.min():.2e} median {np.median(gaps):.2e} max {gaps.max():.2e}")


if __name__ == "__main__":
    main()
