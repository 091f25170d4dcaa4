import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from saff.fairness import DataTuple, DonorRecord, MatchRecord  # noqa: E402


def make_record(y, prob, *, age=30, gender="Male", race="Other", rid=""):
    return MatchRecord(
        recipient_age=age,
        recipient_race=race,
        recipient_gender=gender,
        epts=50.0,
        distance=10.0,
        arp_probability=prob,
        surgeon_decision=y,
        recipient_id=rid,
    )


def make_tuple(records, tid="T0"):
    return DataTuple(tid, DonorRecord(40, "Other", "Male", 30.0, donor_id="D0"), records)


@pytest.fixture
def donor():
    return DonorRecord(28, "Other", "Male", 18.0, donor_id="D0")
