"""Preference recovery: a population that fully weights one notion, learned back from scores."""

import argparse

import numpy as np

from saff.fairness import NOTIONS
from saff.feedback import FeedbackParams
from saff.learner import LearnerConfig
from saff.simulation import recovery_trial


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=50)
    parser.add_argument("--sigma", type=float, default=0.5)
    parser.add_argument("--lam", type=float, default=10.0)
    parser.add_argument("--epochs", type=int, nargs="+", default=[20, 50, 200])
    parser.add_argument("--step-size", type=float, default=0.1)
    args = parser.parse_args()

    params = FeedbackParams(args.sigma, args.lam)
    for epochs in args.epochs:
        learner = LearnerConfig(step_size=args.step_size, epochs=epochs, params=params)
        trials = [recovery_trial(seed, learner=learner) for seed in range(args.runs)]
        mean_beta = np.mean([t.learned_beta for t in trials], axis=0)
        rate = np.mean([t.recovered for t in trials])
        weights = " ".join(f"{n}={b:.3f}" for n, b in zip(NOTIONS, mean_beta))
        print(f"epochs={epochs:>4}  AE recovered {rate:6.1%}  mean beta: {weights}")


if __name__ == "__main__":
    main()
