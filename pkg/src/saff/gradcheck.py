"""Finite-difference check of the analytic regret gradient.

The reference uses only the forward model (regret as a function of beta);
it never touches the gradient code it checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fairness import ATTRIBUTES, N_NOTIONS, GroupSpec, fairness_profile, profile_matrix
from .feedback import FeedbackParams
from .learner import ResponseSet, regret_at, srg
from .simulation import BiasConfig, generate_tuples


@dataclass
class GradcheckResult:
    max_rel_error: float
    n_instances: int
    n_directions: int


def feasible_directions(n: int = N_NOTIONS) -> np.ndarray:
    """Unit vectors e_i - e_j (i < j): they sum to zero, so they stay in the simplex plane."""
    eye = np.eye(n)
    dirs = [(eye[i] - eye[j]) / np.sqrt(2.0) for i in range(n) for j in range(i + 1, n)]
    return np.array(dirs)


def directional_fd(beta, d, phi, responses, params, h: float = 1e-3) -> float:
    """Five-point central difference of the regret along ``d``.

    Fourth-order accuracy lets ``h`` stay large enough that rounding noise in
    the regret does not swamp directions whose true derivative is zero.
    """
    f = lambda t: regret_at(beta + t * d, phi, responses, params)  # noqa: E731
    return (8 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12 * h)


def rel_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    """Relative error; the floor keeps exactly-zero derivatives from amplifying difference noise."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def _random_bias(rng: np.random.Generator) -> BiasConfig:
    keys = [("age", "old"), ("gender", "Female"), ("race", "Black")]
    return BiasConfig(
        offsets={k: float(rng.uniform(-0.4, 0.4)) for k in keys},
        decision_noise=float(rng.uniform(0.0, 0.3)),
        noise_offsets={k: float(rng.uniform(0.0, 0.2)) for k in keys},
    )


def random_instance(rng: np.random.Generator, max_n: int = 10, max_m: int = 5, k: int = 10):
    """Random (responses, phi, beta, params) in the ranges used for gradient checks.

    Profiles come from generated tuples of ``k`` records under a random bias.
    """
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    attribute = str(rng.choice(ATTRIBUTES))
    tuples = generate_tuples(m, k, _random_bias(rng), rng)
    phi = profile_matrix([fairness_profile(t, GroupSpec.default(attribute)) for t in tuples])
    beta = rng.dirichlet(np.ones(N_NOTIONS))
    params = FeedbackParams(sigma=float(rng.uniform(0.3, 2.0)), lam=float(rng.uniform(1.0, 20.0)))
    responses = ResponseSet(rng.integers(1, 8, size=(n, m)))
    return responses, phi, beta, params


def gradient_check(n_instances: int = 100, seed: int = 0, h: float = 1e-3) -> GradcheckResult:
    rng = np.random.default_rng(seed)
    dirs = feasible_directions()
    worst = 0.0
    for _ in range(n_instances):
        responses, phi, beta, params = random_instance(rng)
        grad = srg(responses, phi, beta, params)
        for d in dirs:
            worst = max(worst, rel_error(grad @ d, directional_fd(beta, d, phi, responses, params, h)))
    return GradcheckResult(worst, n_instances, len(dirs))
