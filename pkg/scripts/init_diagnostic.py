"""Regret reduction from uniform versus random initialisation across grid seeds."""

import argparse

import numpy as np

from saff.config import RunConfig
from saff.learner import LearnerConfig
from saff.simulation import ExperimentGrid, run_grid


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--repetitions", type=int, default=10)
    parser.add_argument("--step-size", type=float, default=0.1)
    parser.add_argument("--epochs", type=int, default=20)
    args = parser.parse_args()

    bias = RunConfig().bias_config()
    learner = LearnerConfig(step_size=args.step_size, epochs=args.epochs)
    for seed in range(args.seeds):
        grid = ExperimentGrid((25, 100), (5, 15), repetitions=args.repetitions, learner=learner, bias=bias, seed=seed)
        runs = {mode: run_grid(grid, mode) for mode in ("random", "uniform")}
        ratios = {m: np.array([[r.reduction_ratio() for r in c.runs] for c in cells]) for m, cells in runs.items()}
        wins = np.mean(ratios["uniform"] < ratios["random"])
        print(
            f"seed {seed}: random {ratios['random'].mean():.3e}  uniform {ratios['uniform'].mean():.3e}  "
            f"uniform smaller in {wins:.0%} of runs"
        )


if __name__ == "__main__":
    main()
