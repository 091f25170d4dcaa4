"""Synthetic populations, data tuples and responses, plus the convergence grid.

The tuple generator is a parameterised stand-in for registry-derived data:
its knobs control how far fairness profiles drift from zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .fairness import (
    DEFAULT_AGE_CUTOFF,
    N_NOTIONS,
    NOTIONS,
    DataTuple,
    DonorRecord,
    FairnessProfile,
    GroupSpec,
    MatchRecord,
    fairness_profile,
    profile_matrix,
)
from .feedback import FeedbackParams, feedback_distribution, sample_scores, utility_vector
from .learner import LearnerConfig, LearnRun, ResponseSet, saff_learn

def _record_groups(age: int, gender: str, race: str) -> dict[str, str]:
    return {"age": "young" if age <= DEFAULT_AGE_CUTOFF else "old", "gender": gender, "race": race}


@dataclass(frozen=True)
class BiasConfig:
    """Knobs for the synthetic tuple generator.

    ``offsets`` shift the predicted acceptance probability of every record in
    the named group; ``noise_offsets`` add to ``decision_noise`` (the chance a
    surgeon decision disagrees with the thresholded prediction) for that group.
    ``spread`` is the standard deviation of per-record probability jitter.
    Per-record noise is clipped to [0, 0.5].
    """

    offsets: Mapping[tuple[str, str], float] = field(default_factory=dict)
    base_rate: float = 0.5
    decision_noise: float = 0.0
    noise_offsets: Mapping[tuple[str, str], float] = field(default_factory=dict)
    spread: float = 0.2
    threshold: float = 0.5

    def __post_init__(self):
        for key, off in self.offsets.items():
            if not -0.5 <= off <= 0.5:
                raise ValueError(f"offset for {key} must lie in [-0.5, 0.5], got {off}")
        if not 0.0 < self.base_rate < 1.0:
            raise ValueError(f"base_rate must lie in (0, 1), got {self.base_rate}")
        if not 0.0 <= self.decision_noise <= 0.5:
            raise ValueError(f"decision_noise must lie in [0, 0.5], got {self.decision_noise}")
        if self.spread < 0:
            raise ValueError("spread must be non-negative")


@dataclass(frozen=True)
class ExperimentGrid:
    participant_counts: Sequence[int] = (25, 50, 75, 100)
    tuple_counts: Sequence[int] = (5, 10, 15)
    pairs_per_tuple: int = 10
    repetitions: int = 100
    attribute: str = "age"
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    bias: BiasConfig = field(default_factory=BiasConfig)
    seed: int = 0
    group: GroupSpec | None = None

    def __post_init__(self):
        counts = [*self.participant_counts, *self.tuple_counts, self.pairs_per_tuple, self.repetitions]
        if any(c < 1 for c in counts):
            raise ValueError("all grid counts must be positive")


@dataclass
class CellResult:
    n_participants: int
    n_tuples: int
    runs: list[LearnRun]
    flagged_fraction: float

    @property
    def regrets(self) -> np.ndarray:
        """(repetitions, epochs) array of regret trajectories."""
        return np.array([r.regret_trajectory for r in self.runs])

    @property
    def mean_curve(self) -> np.ndarray:
        return self.regrets.mean(axis=0)

    @property
    def std_curve(self) -> np.ndarray:
        return self.regrets.std(axis=0)


def sample_preference(rng: np.random.Generator) -> np.ndarray:
    """Six independent uniforms normalised to sum to one."""
    while True:
        draw = rng.random(N_NOTIONS)
        if draw.sum() > 0:
            return draw / draw.sum()


def sample_population(n: int, rng: np.random.Generator) -> np.ndarray:
    return np.array([sample_preference(rng) for _ in range(n)])


def _sample_record(
    rng: np.random.Generator, bias: BiasConfig, rid: str, age: int, gender: str, race: str
) -> MatchRecord:
    groups = _record_groups(age, gender, race)
    prob = bias.base_rate + sum(bias.offsets.get((a, g), 0.0) for a, g in groups.items())
    prob += bias.spread * rng.standard_normal()
    prob = float(np.clip(prob, 0.0, 1.0))
    noise = bias.decision_noise + sum(bias.noise_offsets.get((a, g), 0.0) for a, g in groups.items())
    noise = float(np.clip(noise, 0.0, 0.5))
    decision = int(prob >= bias.threshold)
    if rng.random() < noise:
        decision = 1 - decision
    return MatchRecord(
        recipient_age=age,
        recipient_race=race,
        recipient_gender=gender,
        epts=float(np.round(rng.uniform(0, 100), 1)),
        distance=float(np.round(rng.exponential(150.0), 1)),
        arp_probability=prob,
        surgeon_decision=decision,
        recipient_id=rid,
    )


def generate_tuples(m: int, k: int, bias: BiasConfig, rng: np.random.Generator) -> list[DataTuple]:
    """Draw ``m`` donors with ``k`` recipients each.

    The first two recipients of every tuple are all-privileged and
    all-underprivileged so each attribute's groups are non-empty.
    """
    if m < 1 or k < 2:
        raise ValueError("need m >= 1 and k >= 2")
    tuples = []
    for j in range(m):
        donor = DonorRecord(
            donor_age=int(rng.integers(18, 76)),
            donor_race=str(rng.choice(["Black", "Other"])),
            donor_gender=str(rng.choice(["Male", "Female"])),
            kdpi=float(rng.integers(0, 101)),
            donor_id=f"D{j:04d}",
        )
        records = []
        for r in range(k):
            if r == 0:
                age, gender, race = int(rng.integers(18, DEFAULT_AGE_CUTOFF + 1)), "Male", "Other"
            elif r == 1:
                age, gender, race = int(rng.integers(DEFAULT_AGE_CUTOFF + 1, 81)), "Female", "Black"
            else:
                age = int(rng.integers(18, 81))
                gender = str(rng.choice(["Male", "Female"]))
                race = str(rng.choice(["Black", "Other"]))
            records.append(_sample_record(rng, bias, f"T{j:04d}R{r:02d}", age, gender, race))
        tuples.append(DataTuple(f"T{j:04d}", donor, records))
    return tuples


def simulate_responses(
    population: np.ndarray,
    profiles: Sequence[FairnessProfile] | np.ndarray,
    params: FeedbackParams,
    rng: np.random.Generator,
    attribute: str = "age",
) -> ResponseSet:
    """Each participant scores each tuple by sampling their own feedback distribution."""
    phi = profiles if isinstance(profiles, np.ndarray) else profile_matrix(profiles)
    population = np.asarray(population, dtype=float)
    psi = np.einsum("nl,ml->nm", population, phi)
    dist = feedback_distribution(utility_vector(psi, params.sigma), params.lam)
    return ResponseSet(sample_scores(dist, rng), attribute)


def cell_seed(master: int, n: int, m: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, n, m, rep])


def run_repetition(
    n: int,
    m: int,
    grid: ExperimentGrid,
    rep: int,
    init_mode: str | None = None,
) -> tuple[LearnRun, np.ndarray]:
    """One population/tuples/responses draw followed by one learner run.

    Returns the run and the profiles' undefined flags.
    """
    seq = cell_seed(grid.seed, n, m, rep)
    data_rng, learn_seed = np.random.default_rng(seq.spawn(1)[0]), int(seq.generate_state(1)[0])
    population = sample_population(n, data_rng)
    tuples = generate_tuples(m, grid.pairs_per_tuple, grid.bias, data_rng)
    group = grid.group or GroupSpec.default(grid.attribute, grid.bias.threshold)
    profiles = [fairness_profile(t, group) for t in tuples]
    responses = simulate_responses(population, profiles, grid.learner.params, data_rng, grid.attribute)
    config = replace(grid.learner, seed=learn_seed, init_mode=init_mode or grid.learner.init_mode)
    run = saff_learn(profile_matrix(profiles), responses, config)
    flags = np.array([p.undefined_flags for p in profiles])
    return run, flags


def run_grid(grid: ExperimentGrid, init_mode: str | None = None) -> list[CellResult]:
    """Average learner regret curves over repetitions for every (N, M) cell.

    Populations and tuples are redrawn on every repetition. Seeds depend only
    on (grid.seed, N, M, repetition), so different init modes see identical data.
    """
    cells = []
    for n in grid.participant_counts:
        for m in grid.tuple_counts:
            runs, flags = [], []
            for rep in range(grid.repetitions):
                run, f = run_repetition(n, m, grid, rep, init_mode)
                runs.append(run)
                flags.append(f)
            cells.append(CellResult(n, m, runs, float(np.mean(flags))))
    return cells


def ae_only_bias() -> BiasConfig:
    """Every prediction is a rejection and only older recipients get noisy decisions.

    With all predictions at 0 the SP, EO, PE and OMR differences vanish and C is
    flagged, so accuracy equality is the only notion carrying signal.
    """
    return BiasConfig(base_rate=0.2, spread=0.05, noise_offsets={("age", "old"): 0.5})


@dataclass(frozen=True)
class RecoveryTrial:
    true_notion: str
    learned_beta: np.ndarray
    run: LearnRun

    @property
    def recovered(self) -> bool:
        return NOTIONS[int(np.argmax(self.learned_beta))] == self.true_notion


def recovery_trial(
    seed: int,
    notion: str = "AE",
    n: int = 50,
    m: int = 10,
    k: int = 10,
    bias: BiasConfig | None = None,
    learner: LearnerConfig | None = None,
    attribute: str = "age",
) -> RecoveryTrial:
    """Learn from a homogeneous population whose members all weight one notion fully."""
    seq = np.random.SeedSequence([seed, NOTIONS.index(notion)])
    rng = np.random.default_rng(seq.spawn(1)[0])
    learner = learner or LearnerConfig(params=FeedbackParams(sigma=0.5, lam=10.0))
    population = np.tile(np.eye(N_NOTIONS)[NOTIONS.index(notion)], (n, 1))
    tuples = generate_tuples(m, k, bias or ae_only_bias(), rng)
    profiles = [fairness_profile(t, GroupSpec.default(attribute)) for t in tuples]
    responses = simulate_responses(population, profiles, learner.params, rng, attribute)
    config = replace(learner, seed=int(seq.generate_state(1)[0]))
    run = saff_learn(profile_matrix(profiles), responses, config)
    return RecoveryTrial(notion, run.final_beta, run)
