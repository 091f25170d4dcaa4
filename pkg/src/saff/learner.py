"""Feedback regret, its analytic gradient, and the projected-gradient learner."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fairness import ATTRIBUTES, N_NOTIONS, ValidationError
from .feedback import (
    N_CELLS,
    N_SCORES,
    Z,
    FeedbackParams,
    _INV_SQRT_2PI,
    _SQRT2,
    aggregate_evaluation,
    check_weight,
    erf,
    feedback_distribution,
    social_distribution,
    utility_vector,
)

INIT_MODES = ("random", "uniform")
QUESTIONS = ("overall", *ATTRIBUTES)


@dataclass(frozen=True)
class ResponseSet:
    """Likert scores, one row per participant and one column per tuple."""

    scores: np.ndarray
    attribute: str = "age"
    participant_ids: tuple[str, ...] = ()

    def __post_init__(self):
        scores = np.asarray(self.scores)
        if scores.ndim != 2 or scores.shape[0] < 1 or scores.shape[1] < 1:
            raise ValidationError(f"scores must be a non-empty N x M array, got shape {scores.shape}")
        if not np.issubdtype(scores.dtype, np.integer):
            if not np.all(scores == np.round(scores)):
                raise ValidationError("scores must be integers")
            scores = scores.astype(int)
        if scores.min() < 1 or scores.max() > N_SCORES:
            raise ValidationError(f"scores must lie in 1..{N_SCORES}")
        if self.attribute not in QUESTIONS:
            raise ValidationError(f"unknown question {self.attribute!r}; expected one of {QUESTIONS}")
        object.__setattr__(self, "scores", scores)

    @property
    def n_participants(self) -> int:
        return self.scores.shape[0]

    @property
    def n_tuples(self) -> int:
        return self.scores.shape[1]

    def mean_one_hot(self) -> np.ndarray:
        """(M, 7) array of per-tuple empirical score frequencies."""
        return one_hot(self.scores).mean(axis=0)


@dataclass(frozen=True)
class LearnerConfig:
    step_size: float = 0.1
    epochs: int = 20
    init_mode: str = "random"
    seed: int = 0
    params: FeedbackParams = field(default_factory=FeedbackParams)

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValidationError(f"step_size must be positive, got {self.step_size}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.init_mode not in INIT_MODES:
            raise ValidationError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")


@dataclass
class LearnRun:
    beta_trajectory: list[np.ndarray]
    regret_trajectory: list[float]
    init_mode: str = "random"

    @property
    def final_beta(self) -> np.ndarray:
        return self.beta_trajectory[-1]

    @property
    def initial_regret(self) -> float:
        return self.regret_trajectory[0]

    @property
    def final_regret(self) -> float:
        return self.regret_trajectory[-1]

    def reduction_ratio(self) -> float:
        """Fraction of the first-epoch regret removed by the last epoch."""
        first = self.regret_trajectory[0]
        return (first - self.regret_trajectory[-1]) / first if first > 0 else 0.0


def one_hot(scores) -> np.ndarray:
    """Map scores in 1..7 to unit vectors along a new trailing axis."""
    scores = np.asarray(scores)
    if np.any(scores < 1) or np.any(scores > N_SCORES):
        raise ValidationError(f"scores must lie in 1..{N_SCORES}")
    return np.eye(N_SCORES)[scores - 1]


def _check_dims(responses: ResponseSet, n_tuples: int):
    if responses.n_tuples != n_tuples:
        raise ValidationError(f"responses cover {responses.n_tuples} tuples but {n_tuples} were given")


def feedback_regret(responses: ResponseSet, social_dists) -> float:
    """Mean over tuples and participants of ||one_hot(s) - social_dist||^2."""
    social_dists = np.asarray(social_dists, dtype=float)
    if social_dists.ndim != 2 or social_dists.shape[1] != N_SCORES:
        raise ValidationError(f"social distributions must be (M, {N_SCORES}), got {social_dists.shape}")
    _check_dims(responses, social_dists.shape[0])
    diff = one_hot(responses.scores) - social_dists[None, :, :]
    return float(np.mean(np.sum(diff**2, axis=-1)))


def regret_at(beta, phi: np.ndarray, responses: ResponseSet, params: FeedbackParams) -> float:
    return feedback_regret(responses, social_distribution(beta, phi, params))


def _boundary_kernel(psi, sigma):
    """exp(-(z_i - psi)^2 / 2 sigma^2) for i = 0..14; exactly zero at z = +-inf."""
    return np.exp(-((Z - psi) ** 2) / (2.0 * sigma**2))


def utility_gradient(psi, sigma: float) -> np.ndarray:
    """du/dpsi for scores 1..7 (last axis), as differences of boundary densities."""
    psi = np.asarray(psi, dtype=float)[..., None]
    g = _boundary_kernel(psi, sigma)  # indices 0..14
    lo, hi = g[..., :N_SCORES], g[..., 1 : N_SCORES + 1]  # z_{i-1}, z_i
    mlo = g[..., N_SCORES:N_CELLS][..., ::-1]  # z_{14-i}
    mhi = g[..., N_SCORES + 1 :][..., ::-1]  # z_{15-i}
    return _INV_SQRT_2PI / sigma * (lo - hi + mlo - mhi)


def utility_gradient_expanded(psi, sigma: float) -> np.ndarray:
    """du/dpsi written out term by term with the erf and -psi*u pieces kept.

    Those pieces cancel identically; this form exists to cross-check
    :func:`utility_gradient`.
    """
    psi = np.asarray(psi, dtype=float)[..., None]
    i = np.arange(1, N_SCORES + 1)
    dens = sigma * _INV_SQRT_2PI * _boundary_kernel(psi, sigma)
    e = erf((Z - psi) / (sigma * _SQRT2))
    u = utility_vector(psi[..., 0], sigma)
    total = (
        dens[..., i - 1]
        - dens[..., i]
        + psi / 2 * e[..., i]
        - psi / 2 * e[..., i - 1]
        - psi * u
        + dens[..., N_CELLS - i]
        - dens[..., N_CELLS - i + 1]
        + psi / 2 * e[..., N_CELLS - i + 1]
        - psi / 2 * e[..., N_CELLS - i]
    )
    return total / sigma**2


def softmax_jacobian(u, lam: float) -> np.ndarray:
    """d(softmax(lam*u))/du as lam * (diag(s) - s s^T); batched over leading axes."""
    s = feedback_distribution(u, lam)
    outer = s[..., :, None] * s[..., None, :]
    diag = s[..., :, None] * np.eye(N_SCORES)
    return lam * (diag - outer)


def srg(responses: ResponseSet, phi, beta, params: FeedbackParams) -> np.ndarray:
    """Full-batch gradient of the feedback regret with respect to ``beta``.

    ``phi`` is the (M, 6) profile matrix. The chain is applied per tuple and
    averaged, which is the exact derivative of the regret.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[1] != N_NOTIONS:
        raise ValidationError(f"profiles must be (M, {N_NOTIONS}), got {phi.shape}")
    _check_dims(responses, phi.shape[0])
    beta = np.asarray(beta, dtype=float)
    psi = aggregate_evaluation(beta, phi)  # (M,)
    u = utility_vector(psi, params.sigma)  # (M, 7)
    s = feedback_distribution(u, params.lam)
    eta = softmax_jacobian(u, params.lam)  # (M, 7, 7)
    du = utility_gradient(psi, params.sigma)  # (M, 7)
    dl_ds = 2.0 * (s - responses.mean_one_hot())  # (M, 7)
    dl_dpsi = np.einsum("mi,mik,mk->m", dl_ds, eta, du)
    return dl_dpsi @ phi / phi.shape[0]


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError(f"expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"cannot project non-finite vector {v}")
    if np.all(v >= 0) and abs(v.sum() - 1.0) <= 4 * np.finfo(float).eps:
        return v.copy()
    srt = np.sort(v)[::-1]
    css = np.cumsum(srt) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(srt - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(v - tau, 0.0)


def initial_weight(mode: str, rng: np.random.Generator) -> np.ndarray:
    if mode == "uniform":
        return np.full(N_NOTIONS, 1.0 / N_NOTIONS)
    if mode == "random":
        while True:
            draw = rng.random(N_NOTIONS)
            if draw.sum() > 0:
                return draw / draw.sum()
    raise ValidationError(f"init_mode must be one of {INIT_MODES}, got {mode!r}")


def saff_learn(
    phi,
    responses: ResponseSet,
    config: LearnerConfig = LearnerConfig(),
    beta0=None,
) -> LearnRun:
    """Learn the social preference weight by projected gradient descent.

    Regret is recorded at the start of each epoch, so ``regret_trajectory``
    has ``epochs`` entries and ``beta_trajectory`` has ``epochs + 1``.
    ``beta0`` overrides the configured initialisation.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[0] == 0:
        raise ValidationError("at least one fairness profile is required")
    _check_dims(responses, phi.shape[0])
    params = config.params
    if beta0 is None:
        beta = initial_weight(config.init_mode, np.random.default_rng(config.seed))
    else:
        beta = check_weight(beta0)
    betas = [beta]
    regrets = []
    for _ in range(config.epochs):
        regrets.append(regret_at(beta, phi, responses, params))
        grad = srg(responses, phi, beta, params)
        beta = project_simplex(beta - config.step_size * grad)
        betas.append(beta)
    return LearnRun(betas, regrets, init_mode="custom" if beta0 is not None else config.init_mode)
