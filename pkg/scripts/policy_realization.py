"""Simulate extracted two-phase policies and compare with the parity value."""

import argparse
import random
import sys

from revpomdp import fixtures
from revpomdp.oracle import simulate
from revpomdp.quantitative import extract_policy, parity_value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--runs", type=int, default=10_000)
    ap.add_argument("--cutoff", type=int, default=400)
    ap.add_argument("--random", type=int, default=6, help="number of extra random models")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    models = {"chain": fixtures.revealing_chain(), "noisy_pair": fixtures.noisy_pair(), "guess": fixtures.guess_model(),
              "wait_commit": fixtures.wait_commit_revealing()}
    rng = random.Random(args.seed)
    for i in range(args.random):
        models[f"random{i}"] = fixtures.random_revealing(rng, rng.randint(2, 4), rng.randint(1, 3),
                                                         single_source_noise=True, max_priority=3)
    print(f"{'model':12} {'value':>9} {'rate':>9} {'stderr':>8} {'margin':>8}")
    failures = 0
    for name, m in models.items():
        rep = parity_value(m, None, args.epsilon, record_policy=True)
        pol = extract_policy(m, rep.solution, region=rep.region)
        stats = simulate(m, pol, "parity", cutoff=args.cutoff, runs=args.runs, seed=args.seed,
                         targets=rep.region.states)
        margin = stats.rate - (rep.value - args.epsilon - 3 * stats.stderr)
        failures += margin < 0
        print(f"{name:12} {rep.value:9.6f} {stats.rate:9.6f} {stats.stderr:8.5f} {margin:8.4f}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
