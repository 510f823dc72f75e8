"""Write the reference models as JSON documents, e.g. for trying the CLI."""

import argparse
import random
from pathlib import Path

from revpomdp import fixtures
from revpomdp.modelio import save_model


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--random", type=int, default=0, help="also write this many random revealing models")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    args.outdir.mkdir(parents=True, exist_ok=True)
    models = {
        "noisy_pair": fixtures.noisy_pair(), "chain": fixtures.revealing_chain(), "wait_commit": fixtures.wait_commit_revealing(),
        "wait_commit_blind": fixtures.wait_commit_blind(), "guess": fixtures.guess_model(),
    }
    rng = random.Random(args.seed)
    for i in range(args.random):
        models[f"random{i:03d}"] = fixtures.random_revealing(rng, rng.randint(2, 4), rng.randint(1, 3),
                                                             single_source_noise=True)
    for name, m in models.items():
        save_model(m, args.outdir / f"{name}.json")
        print(args.outdir / f"{name}.json")


if __name__ == "__main__":
    main()
