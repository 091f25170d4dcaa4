"""CSV ingestion and report emission.

Tuple CSV, one row per donor-recipient pair::

    tuple_id,donor_id,donor_age,donor_race,donor_gender,kdpi,recipient_id,
    recipient_age,recipient_race,recipient_gender,epts,distance,
    arp_probability,surgeon_decision

Response CSV, one row per (participant, tuple, question)::

    participant_id,tuple_id,question,score
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .fairness import (
    ATTRIBUTES,
    NOTIONS,
    DataTuple,
    DonorRecord,
    FairnessProfile,
    GroupSpec,
    MatchRecord,
    ValidationError,
    fairness_profile,
    pooled_profile,
)
from .learner import QUESTIONS, ResponseSet

logger = logging.getLogger(__name__)

TUPLE_COLUMNS = (
    "tuple_id",
    "donor_id",
    "donor_age",
    "donor_race",
    "donor_gender",
    "kdpi",
    "recipient_id",
    "recipient_age",
    "recipient_race",
    "recipient_gender",
    "epts",
    "distance",
    "arp_probability",
    "surgeon_decision",
)
RESPONSE_COLUMNS = ("participant_id", "tuple_id", "question", "score")
DONOR_FIELDS = ("donor_id", "donor_age", "donor_race", "donor_gender", "kdpi")


class LoadError(ValidationError):
    def __init__(self, path, line: int | None, field: str | None, message: str):
        self.path, self.line, self.field = str(path), line, field
        where = self.path + (f":{line}" if line is not None else "") + (f" [{field}]" if field else "")
        super().__init__(f"{where}: {message}")


def _read_rows(path, columns: Sequence[str], what: str):
    """Yield (line_number, row) after checking the header."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise LoadError(path, None, None, f"empty file: no {what}")
        missing = [c for c in columns if c not in reader.fieldnames]
        if missing:
            raise LoadError(path, 1, missing[0], f"missing column(s) {missing}")
        for row in reader:
            yield reader.line_num, row


def _parse(path, line, field, raw, kind):
    try:
        if kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return kind(raw)
    except (TypeError, ValueError):
        raise LoadError(path, line, field, f"cannot parse {raw!r} as {kind.__name__}") from None


def _donor(path, line, d: dict) -> DonorRecord:
    try:
        return DonorRecord(
            donor_age=_parse(path, line, "donor_age", d["donor_age"], int),
            donor_race=d["donor_race"],
            donor_gender=d["donor_gender"],
            kdpi=_parse(path, line, "kdpi", d["kdpi"], float),
            donor_id=d["donor_id"],
        )
    except LoadError:
        raise
    except ValidationError as exc:
        raise LoadError(path, line, "kdpi", str(exc)) from None


def load_tuples(path) -> list[DataTuple]:
    """Read and validate a tuple CSV; tuples keep first-appearance order."""
    donors: dict[str, tuple[dict, DonorRecord]] = {}
    records: dict[str, list[MatchRecord]] = {}
    seen: set[tuple[str, str]] = set()
    first_line: dict[str, int] = {}
    for line, row in _read_rows(path, TUPLE_COLUMNS, "tuples"):
        tid, rid = row["tuple_id"].strip(), row["recipient_id"].strip()
        if not tid:
            raise LoadError(path, line, "tuple_id", "empty tuple_id")
        if (tid, rid) in seen:
            raise LoadError(path, line, "recipient_id", f"duplicate recipient {rid!r} in tuple {tid!r}")
        seen.add((tid, rid))
        donor = {f: row[f].strip() for f in DONOR_FIELDS}
        if tid in donors:
            if donors[tid][0] != donor:
                raise LoadError(path, line, "donor_id", f"donor fields differ within tuple {tid!r}")
        else:
            donors[tid] = (donor, _donor(path, line, donor))
            first_line[tid] = line
        fields = {
            "recipient_age": _parse(path, line, "recipient_age", row["recipient_age"], int),
            "recipient_race": row["recipient_race"].strip(),
            "recipient_gender": row["recipient_gender"].strip(),
            "epts": _parse(path, line, "epts", row["epts"], float),
            "distance": _parse(path, line, "distance", row["distance"], float),
            "arp_probability": _parse(path, line, "arp_probability", row["arp_probability"], float),
            "surgeon_decision": _parse(path, line, "surgeon_decision", row["surgeon_decision"], int),
        }
        for name in ("epts", "distance", "arp_probability"):
            if not np.isfinite(fields[name]):
                raise LoadError(path, line, name, "value must be finite")
        try:
            record = MatchRecord(**fields, recipient_id=rid)
        except ValidationError as exc:
            field = next((f for f in fields if f in str(exc)), None)
            raise LoadError(path, line, field, str(exc)) from None
        records.setdefault(tid, []).append(record)
    if not records:
        raise LoadError(path, None, None, "no tuples")
    tuples = []
    for tid, recs in records.items():
        try:
            tuples.append(DataTuple(tid, donors[tid][1], recs))
        except ValidationError as exc:
            raise LoadError(path, first_line[tid], "tuple_id", str(exc)) from None
    return tuples


def load_responses(path, tuple_ids: Sequence[str]) -> dict[str, ResponseSet]:
    """One ResponseSet per question present, columns in ``tuple_ids`` order.

    Participants lacking any (tuple, question) cell among the questions that
    appear in the file are dropped from every set.
    """
    index = {t: j for j, t in enumerate(tuple_ids)}
    cells: dict[tuple[str, str, str], int] = {}
    participants: dict[str, None] = {}
    questions: set[str] = set()
    for line, row in _read_rows(path, RESPONSE_COLUMNS, "responses"):
        pid, tid, q = row["participant_id"].strip(), row["tuple_id"].strip(), row["question"].strip()
        if q not in QUESTIONS:
            raise LoadError(path, line, "question", f"unknown question {q!r}; expected one of {QUESTIONS}")
        if tid not in index:
            raise LoadError(path, line, "tuple_id", f"tuple {tid!r} not found in loaded tuples")
        score = _parse(path, line, "score", row["score"], int)
        if not 1 <= score <= 7:
            raise LoadError(path, line, "score", f"score {score} not in 1..7")
        if (pid, tid, q) in cells:
            raise LoadError(path, line, "participant_id", f"duplicate response for ({pid}, {tid}, {q})")
        cells[(pid, tid, q)] = score
        participants.setdefault(pid)
        questions.add(q)
    if not cells:
        raise LoadError(path, None, None, "no responses")
    questions = [q for q in QUESTIONS if q in questions]
    complete = [p for p in participants if all((p, t, q) in cells for t in tuple_ids for q in questions)]
    dropped = [p for p in participants if p not in complete]
    if dropped:
        logger.warning("dropping %d incomplete participant(s): %s", len(dropped), ", ".join(dropped))
    if not complete:
        raise LoadError(path, None, None, "no participant answered every tuple and question")
    out = {}
    for q in questions:
        scores = np.array([[cells[(p, t, q)] for t in tuple_ids] for p in complete], dtype=int)
        out[q] = ResponseSet(scores, q, tuple(complete))
    return out


def write_tuples(tuples: Sequence[DataTuple], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TUPLE_COLUMNS)
        for t in tuples:
            d = t.donor
            for r in t.records:
                w.writerow(
                    [
                        t.tuple_id, d.donor_id, d.donor_age, d.donor_race, d.donor_gender, _num(d.kdpi),
                        r.recipient_id, r.recipient_age, r.recipient_race, r.recipient_gender,
                        _num(r.epts), _num(r.distance), repr(float(r.arp_probability)), r.surgeon_decision,
                    ]
                )


def write_responses(responses: Mapping[str, ResponseSet], tuple_ids: Sequence[str], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESPONSE_COLUMNS)
        for q, rs in responses.items():
            pids = rs.participant_ids or tuple(f"P{n:03d}" for n in range(rs.n_participants))
            for n, pid in enumerate(pids):
                for j, tid in enumerate(tuple_ids):
                    w.writerow([pid, tid, q, int(rs.scores[n, j])])


def _num(x: float):
    x = float(x)
    return int(x) if x == int(x) else repr(x)


# -- reports -----------------------------------------------------------------


@dataclass
class AuditReport:
    per_tuple: dict[str, dict[str, FairnessProfile]]  # attribute -> tuple_id -> profile
    pooled: dict[str, FairnessProfile]
    per_tuple_mean: dict[str, np.ndarray]
    flag_counts: dict[str, dict[str, int]]

    def to_dict(self) -> dict:
        return {
            "notions": list(NOTIONS),
            "attributes": {
                a: {
                    "pooled": self.pooled[a].as_dict(),
                    "per_tuple_mean": dict(zip(NOTIONS, map(float, self.per_tuple_mean[a]))),
                    "flag_counts": self.flag_counts[a],
                    "per_tuple": {tid: p.as_dict() for tid, p in self.per_tuple[a].items()},
                }
                for a in self.pooled
            },
        }


def build_audit(tuples: Sequence[DataTuple], groups: Mapping[str, GroupSpec]) -> AuditReport:
    per_tuple, pooled, means, flags = {}, {}, {}, {}
    for attr in ATTRIBUTES:
        if attr not in groups:
            continue
        profiles = {t.tuple_id: fairness_profile(t, groups[attr]) for t in tuples}
        per_tuple[attr] = profiles
        pooled[attr] = pooled_profile(tuples, groups[attr])
        means[attr] = np.mean([p.values for p in profiles.values()], axis=0)
        counts = np.sum([p.undefined_flags for p in profiles.values()], axis=0)
        flags[attr] = dict(zip(NOTIONS, map(int, counts)))
    return AuditReport(per_tuple, pooled, means, flags)


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_beta_table(betas: Mapping[str, np.ndarray], path) -> None:
    """attribute x notion table of learned weights."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["attribute", *NOTIONS])
        for attr, beta in betas.items():
            w.writerow([attr, *(repr(float(b)) for b in beta)])


def read_beta_table(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return {row["attribute"]: np.array([float(row[n]) for n in NOTIONS]) for row in csv.DictReader(fh)}


def write_trajectories(curves: Mapping[str, Sequence[float]], path) -> None:
    """Wide CSV: an epoch column plus one regret column per named curve."""
    names = list(curves)
    length = len(next(iter(curves.values()))) if curves else 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", *names])
        for e in range(length):
            w.writerow([e, *(repr(float(curves[n][e])) for n in names)])


def emit_reports(
    out_dir,
    *,
    audit: AuditReport | None = None,
    preference: dict | None = None,
    trajectories: Mapping[str, Sequence[float]] | None = None,
    betas: Mapping[str, np.ndarray] | None = None,
) -> list[Path]:
    """Write whichever reports are given; returns the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    if audit is not None:
        _dump_json(audit.to_dict(), out / "audit_report.json")
        written.append(out / "audit_report.json")
    if preference is not None:
        _dump_json(preference, out / "preference_report.json")
        written.append(out / "preference_report.json")
    if trajectories is not None:
        write_trajectories(trajectories, out / "regret_trajectories.csv")
        written.append(out / "regret_trajectories.csv")
    if betas is not None:
        write_beta_table(betas, out / "beta_table.csv")
        written.append(out / "beta_table.csv")
    return written
