"""Grid T-step values against the exact rational oracle on random models.

Prints one CSV row per model plus a summary line.
"""

import argparse
import csv
import random
import sys
import time

from revpomdp import fixtures
from revpomdp.oracle import exact_tstep_value
from revpomdp.quantitative import solve_tstep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--models", type=int, default=100)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--max-horizon", type=int, default=6)
    ap.add_argument("--max-states", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["model", "states", "actions", "signals", "T", "k", "grid_points", "exact", "grid", "error"])
    worst, began = 0.0, time.perf_counter()
    for i in range(args.models):
        S = rng.randint(2, args.max_states)
        A = rng.randint(1, 3)
        m = fixtures.random_revealing(rng, S, A, n_noise=rng.randint(0, 2), max_successors=3, noise_prob=0.7)
        T = rng.randint(0, args.max_horizon)
        X = m.require_targets()
        exact = exact_tstep_value(m, X, T)
        sol = solve_tstep(m, X, T, args.epsilon)
        err = abs(sol.value - float(exact))
        worst = max(worst, err)
        out.writerow([i, S, A, m.n_signals, T, sol.solver.k, len(sol.solver.points), exact, f"{sol.value:.6f}",
                      f"{err:.2e}"])
    print(f"# {args.models} models, epsilon {args.epsilon}, worst error {worst:.3e}, "
          f"{time.perf_counter() - began:.1f}s", file=sys.stderr)
    return 0 if worst <= args.epsilon else 1


if __name__ == "__main__":
    sys.exit(main())
