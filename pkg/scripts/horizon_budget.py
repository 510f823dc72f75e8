"""Theoretical horizon and grid size against what early stopping uses.

For each reference model and accuracy, reports the stopping parameters, the
certified horizon T, the grid resolution k, the number of grid points actually
explored and the sweep count at which the value converged.
"""

import argparse
import sys

from revpomdp import fixtures
from revpomdp.model import format_fraction
from revpomdp.quantitative import ResourceLimitExceeded, belief_reach_value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsilons", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.01])
    ap.add_argument("--max-grid", type=int, default=200_000)
    args = ap.parse_args(argv)
    models = {"chain": fixtures.revealing_chain(), "noisy_pair": fixtures.noisy_pair(), "guess": fixtures.guess_model(),
              "wait_commit": fixtures.wait_commit_revealing()}
    print(f"{'model':12} {'eps':>6} {'n':>3} {'q':>14} {'T':>10} {'k':>14} {'explored':>9} {'sweeps':>7} value")
    for name, m in models.items():
        for eps in args.epsilons:
            try:
                rep = belief_reach_value(m, None, eps, max_grid=args.max_grid)
            except ResourceLimitExceeded as exc:
                print(f"{name:12} {eps:6.3f}  {exc}")
                continue
            p = rep.plan
            print(f"{name:12} {eps:6.3f} {p.n:3d} {format_fraction(p.q):>14} {p.theoretical:10d} "
                  f"{rep.solution.solver.k:14d} {len(rep.solution.solver.points):9d} {p.effective:7d} "
                  f"{rep.value:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
