"""Logit-normal Likert feedback model.

A participant with preference weight ``beta`` collapses a fairness profile
into one evaluation ``psi = beta @ phi``. The evaluation is blurred by a
normal in logit space, and the mass falling in each of seven symmetric
regions of a 14-cell partition of [-1, 1] is the utility of that Likert
score. Scores are drawn from a softmax over ``lambda * utility``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .fairness import N_NOTIONS, ValidationError

N_SCORES = 7
N_CELLS = 2 * N_SCORES
CELL_WIDTH = 1.0 / N_SCORES
SIMPLEX_TOL = 1e-12
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class FeedbackParams:
    sigma: float = 1.0
    lam: float = 10.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if not self.lam >= 0:
            raise ValidationError(f"lambda must be non-negative, got {self.lam}")


@dataclass(frozen=True)
class LikertPartition:
    raw_boundaries: np.ndarray
    logit_boundaries: np.ndarray
    width: float = CELL_WIDTH


def build_partition() -> LikertPartition:
    """Boundaries b_i = -1 + i/7 and their logit images z_i = logit((1 + b_i) / 2)."""
    i = np.arange(N_CELLS + 1)
    b = -1.0 + i * CELL_WIDTH
    b[N_SCORES] = 0.0
    # (1 + b_i) / 2 == i / 14 exactly, so take the logit of the ratio directly.
    with np.errstate(divide="ignore"):
        z = np.log(i / (N_CELLS - i))
    z[N_SCORES] = 0.0
    # antisymmetry z_{14-i} = -z_i holds bitwise
    z[N_SCORES + 1 :] = -z[N_SCORES - 1 :: -1]
    return LikertPartition(b, z)


PARTITION = build_partition()
Z = PARTITION.logit_boundaries


def check_weight(beta, tol: float = SIMPLEX_TOL) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (N_NOTIONS,):
        raise ValidationError(f"preference weight must have {N_NOTIONS} entries, got shape {beta.shape}")
    if np.any(beta < -tol) or np.any(beta > 1 + tol) or abs(beta.sum() - 1.0) > tol:
        raise ValidationError(f"preference weight {beta} is not on the probability simplex")
    return beta


def aggregate_evaluation(beta, phi) -> float | np.ndarray:
    """psi = sum_l beta_l * phi_l. Broadcasts over leading axes of ``phi``."""
    return np.asarray(phi, dtype=float) @ np.asarray(beta, dtype=float)


def normal_cdf(x):
    """Standard normal CDF via erf, with exact limits at +-inf."""
    return 0.5 * (1.0 + erf(np.asarray(x, dtype=float) / _SQRT2))


def _cell_cdf(psi, sigma):
    """Phi((z_i - psi) / sigma) for i = 0..14, shape psi.shape + (15,)."""
    psi = np.asarray(psi, dtype=float)[..., None]
    return normal_cdf((Z - psi) / sigma)


def interval_masses(psi, sigma: float) -> np.ndarray:
    """All fourteen cell masses V_1..V_14 (last axis)."""
    return np.diff(_cell_cdf(psi, sigma), axis=-1)


def interval_mass(i: int, psi: float, sigma: float) -> float:
    """Probability that the logit-normal evaluation lands in cell ``i`` (1..14)."""
    if not 1 <= i <= N_CELLS:
        raise ValidationError(f"cell index {i} not in 1..{N_CELLS}")
    return float(interval_masses(psi, sigma)[i - 1])


def utility_vector(psi, sigma: float) -> np.ndarray:
    """u_i = V_i + V_{15-i} for scores i = 1..7 (last axis)."""
    v = interval_masses(psi, sigma)
    return v[..., :N_SCORES] + v[..., ::-1][..., :N_SCORES]


def feedback_distribution(u, lam: float) -> np.ndarray:
    """Softmax of ``lam * u`` along the last axis."""
    x = lam * np.asarray(u, dtype=float)
    x = x - x.max(axis=-1, keepdims=True)
    e = np.exp(x)
    return e / e.sum(axis=-1, keepdims=True)


def social_distribution(beta, phi, params: FeedbackParams) -> np.ndarray:
    """Likert distribution(s) implied by ``beta`` for profile(s) ``phi``."""
    psi = aggregate_evaluation(beta, phi)
    return feedback_distribution(utility_vector(psi, params.sigma), params.lam)


def sample_scores(dist, rng: np.random.Generator) -> np.ndarray:
    """Draw one score (1..7) per distribution in ``dist`` by inverse CDF."""
    dist = np.asarray(dist, dtype=float)
    cdf = np.cumsum(dist, axis=-1)
    draws = rng.random(dist.shape[:-1])
    idx = (cdf <= draws[..., None]).sum(axis=-1)
    return np.minimum(idx, N_SCORES - 1) + 1


def sample_score(dist, rng: np.random.Generator) -> int:
    return int(sample_scores(np.asarray(dist, dtype=float)[None, :], rng)[0])
