"""Group-fairness rates and signed privileged-minus-underprivileged differences.

Six notions are supported, always in the order (SP, C, AE, EO, PE, OMR).
Rates are counted exactly with :class:`fractions.Fraction`; floats appear only
in the returned :class:`FairnessProfile`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

NOTIONS = ("SP", "C", "AE", "EO", "PE", "OMR")
N_NOTIONS = len(NOTIONS)
ATTRIBUTES = ("age", "gender", "race")
RACES = ("Black", "Other")
GENDERS = ("Male", "Female")
MIN_RECIPIENT_AGE = 17
DEFAULT_THRESHOLD = 0.5
DEFAULT_AGE_CUTOFF = 50


class ValidationError(ValueError):
    """Raised when an input record or collection violates its schema."""


@dataclass(frozen=True)
class MatchRecord:
    recipient_age: int
    recipient_race: str
    recipient_gender: str
    epts: float
    distance: float
    arp_probability: float
    surgeon_decision: int
    recipient_id: str = ""

    def __post_init__(self):
        where = f"record {self.recipient_id!r}" if self.recipient_id else "record"
        if not 0.0 <= self.arp_probability <= 1.0:
            raise ValidationError(f"{where}: arp_probability {self.arp_probability} not in [0, 1]")
        if self.surgeon_decision not in (0, 1):
            raise ValidationError(f"{where}: surgeon_decision {self.surgeon_decision} not in {{0, 1}}")
        if self.recipient_age < MIN_RECIPIENT_AGE:
            raise ValidationError(f"{where}: recipient_age {self.recipient_age} < {MIN_RECIPIENT_AGE}")
        if self.recipient_race not in RACES:
            raise ValidationError(f"{where}: recipient_race {self.recipient_race!r} not in {RACES}")
        if self.recipient_gender not in GENDERS:
            raise ValidationError(f"{where}: recipient_gender {self.recipient_gender!r} not in {GENDERS}")
        if not 0.0 <= self.epts <= 100.0:
            raise ValidationError(f"{where}: epts {self.epts} not in [0, 100]")
        if self.distance < 0:
            raise ValidationError(f"{where}: distance {self.distance} is negative")


@dataclass(frozen=True)
class DonorRecord:
    donor_age: int
    donor_race: str
    donor_gender: str
    kdpi: float
    donor_id: str = ""

    def __post_init__(self):
        if not 0.0 <= self.kdpi <= 100.0:
            raise ValidationError(f"donor {self.donor_id!r}: kdpi {self.kdpi} not in [0, 100]")


@dataclass(frozen=True)
class DataTuple:
    tuple_id: str
    donor: DonorRecord
    records: tuple[MatchRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if len(self.records) < 2:
            raise ValidationError(f"tuple {self.tuple_id!r}: needs K >= 2 records, got {len(self.records)}")

    @property
    def k(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class GroupSpec:
    """Splits records into a privileged and an underprivileged group.

    Age uses ``age <= age_cutoff`` for the privileged side; categorical
    attributes use membership in ``privileged_values``.
    """

    attribute: str
    privileged_values: tuple[str, ...] = ()
    age_cutoff: int = DEFAULT_AGE_CUTOFF
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if self.attribute not in ATTRIBUTES:
            raise ValidationError(f"unknown attribute {self.attribute!r}; expected one of {ATTRIBUTES}")
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError(f"threshold {self.threshold} not in (0, 1)")
        object.__setattr__(self, "privileged_values", tuple(self.privileged_values))

    @classmethod
    def default(cls, attribute: str, threshold: float = DEFAULT_THRESHOLD) -> "GroupSpec":
        privileged = {"age": (), "gender": ("Male",), "race": ("Other",)}
        if attribute not in privileged:
            raise ValidationError(f"unknown attribute {attribute!r}; expected one of {ATTRIBUTES}")
        return cls(attribute, privileged[attribute], threshold=threshold)

    def is_privileged(self, record: MatchRecord) -> bool:
        if self.attribute == "age":
            return record.recipient_age <= self.age_cutoff
        value = record.recipient_gender if self.attribute == "gender" else record.recipient_race
        return value in self.privileged_values

    def swapped(self) -> "SwappedGroupSpec":
        return SwappedGroupSpec(self)


@dataclass(frozen=True)
class SwappedGroupSpec:
    """A GroupSpec with the two groups exchanged."""

    base: GroupSpec

    @property
    def attribute(self) -> str:
        return self.base.attribute

    @property
    def threshold(self) -> float:
        return self.base.threshold

    def is_privileged(self, record: MatchRecord) -> bool:
        return not self.base.is_privileged(record)


@dataclass(frozen=True)
class FairnessProfile:
    values: np.ndarray
    undefined_flags: np.ndarray = field(default_factory=lambda: np.zeros(N_NOTIONS, dtype=bool))

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        flags = np.asarray(self.undefined_flags, dtype=bool)
        if values.shape != (N_NOTIONS,) or flags.shape != (N_NOTIONS,):
            raise ValidationError(f"profile must have {N_NOTIONS} entries")
        if np.any(np.abs(values) > 1.0):
            raise ValidationError(f"profile entries must lie in [-1, 1], got {values}")
        if np.any(values[flags] != 0.0):
            raise ValidationError("flagged profile entries must be zero")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "undefined_flags", flags)

    def as_dict(self) -> dict:
        return {
            "values": dict(zip(NOTIONS, map(float, self.values))),
            "undefined": [n for n, f in zip(NOTIONS, self.undefined_flags) if f],
        }


def discretize_prediction(prob: float, threshold: float = DEFAULT_THRESHOLD, *, where: str = "") -> int:
    if not 0.0 <= prob <= 1.0:
        raise ValidationError(f"{where or 'prediction'}: probability {prob} not in [0, 1]")
    if not 0.0 < threshold < 1.0:
        raise ValidationError(f"threshold {threshold} not in (0, 1)")
    return int(prob >= threshold)


# (numerator event, conditioning event) over (y, y_hat) per notion, following
# the groupwise rates: P(numerator | conditioning, group).
_EVENTS: tuple[tuple[Callable[[int, int], bool], Callable[[int, int], bool]], ...] = (
    (lambda y, yh: yh == 1, lambda y, yh: True),  # SP
    (lambda y, yh: y == 1, lambda y, yh: yh == 1),  # C
    (lambda y, yh: yh == y, lambda y, yh: True),  # AE
    (lambda y, yh: yh == 1, lambda y, yh: y == 1),  # EO
    (lambda y, yh: yh == 1, lambda y, yh: y == 0),  # PE
    (lambda y, yh: yh == 0, lambda y, yh: y == 1),  # OMR
)


def _outcomes(records: Iterable[MatchRecord], threshold: float) -> list[tuple[int, int]]:
    return [
        (r.surgeon_decision, discretize_prediction(r.arp_probability, threshold, where=f"record {r.recipient_id!r}"))
        for r in records
    ]


def rate_from_outcomes(outcomes: Sequence[tuple[int, int]], notion: int) -> Fraction | None:
    """Exact groupwise rate for ``notion`` (1-based) over ``(y, y_hat)`` pairs; None if undefined."""
    numerator, condition = _EVENTS[notion - 1]
    hits = total = 0
    for y, yh in outcomes:
        if condition(y, yh):
            total += 1
            hits += numerator(y, yh)
    return Fraction(hits, total) if total else None


def groupwise_rate(
    records: Sequence[MatchRecord],
    group: Callable[[MatchRecord], bool],
    notion: int,
    threshold: float = DEFAULT_THRESHOLD,
) -> Fraction | None:
    """Empirical rate of ``notion`` (1..6) among records satisfying ``group``.

    Returns None when the conditioning set is empty.
    """
    if not records:
        raise ValidationError("groupwise_rate needs at least one record")
    if not 1 <= notion <= N_NOTIONS:
        raise ValidationError(f"notion index {notion} not in 1..{N_NOTIONS}")
    return rate_from_outcomes(_outcomes([r for r in records if group(r)], threshold), notion)


def profile_from_outcomes(
    privileged: Sequence[tuple[int, int]], underprivileged: Sequence[tuple[int, int]]
) -> tuple[list[Fraction | None], np.ndarray, np.ndarray]:
    """Exact per-notion differences plus the float profile arrays."""
    diffs: list[Fraction | None] = []
    for notion in range(1, N_NOTIONS + 1):
        a = rate_from_outcomes(privileged, notion)
        b = rate_from_outcomes(underprivileged, notion)
        diffs.append(None if a is None or b is None else a - b)
    flags = np.array([d is None for d in diffs])
    values = np.array([0.0 if d is None else float(d) for d in diffs])
    return diffs, values, flags


def _profile(records: Sequence[MatchRecord], group: GroupSpec, label: str) -> FairnessProfile:
    outcomes = _outcomes(records, group.threshold)
    priv_mask = [group.is_privileged(r) for r in records]
    privileged = [o for o, p in zip(outcomes, priv_mask) if p]
    underprivileged = [o for o, p in zip(outcomes, priv_mask) if not p]
    if not privileged or not underprivileged:
        logger.warning("%s: all records fall in one %s group; profile zeroed", label, group.attribute)
    _, values, flags = profile_from_outcomes(privileged, underprivileged)
    return FairnessProfile(values, flags)


def fairness_profile(data: DataTuple, group: GroupSpec) -> FairnessProfile:
    return _profile(data.records, group, f"tuple {data.tuple_id!r}")


def pooled_profile(tuples: Sequence[DataTuple], group: GroupSpec) -> FairnessProfile:
    """Profile over the union of records from every tuple."""
    if not tuples:
        raise ValidationError("pooled_profile needs at least one tuple")
    records = [r for t in tuples for r in t.records]
    return _profile(records, group, f"pool of {len(tuples)} tuples")


def profile_matrix(profiles: Sequence[FairnessProfile]) -> np.ndarray:
    """Stack profiles into an (M, 6) array."""
    return np.vstack([p.values for p in profiles]) if profiles else np.zeros((0, N_NOTIONS))
