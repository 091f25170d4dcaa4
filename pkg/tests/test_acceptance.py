"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s -v``.
"""

import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from conftest import make_record
from oracles import brute_profile, brute_rate, simplex_grid

from saff import cli, io
from saff.config import RunConfig
from saff.fairness import NOTIONS, GroupSpec, groupwise_rate, profile_from_outcomes
from saff.feedback import feedback_distribution, utility_vector
from saff.gradcheck import gradient_check
from saff.learner import LearnerConfig, project_simplex, softmax_jacobian, utility_gradient, utility_gradient_expanded
from saff.feedback import FeedbackParams
from saff.simulation import ExperimentGrid, recovery_trial, run_grid

DATA = Path(__file__).parent / "data"


@pytest.fixture
def verdict(capsys):
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return report


def test_criterion_1_gradient_check(verdict):
    start = time.perf_counter()
    res = gradient_check(n_instances=100, seed=0)
    elapsed = time.perf_counter() - start
    verdict(1, res.max_rel_error < 1e-5 and elapsed < 30, f"max rel error {res.max_rel_error:.2e}, {elapsed:.1f} s")


def test_criterion_2_compact_equals_expanded(verdict):
    rng = np.random.default_rng(2)
    psi = rng.uniform(-1, 1, 1000)
    sigma = rng.uniform(0.1, 3, 1000)
    diff = max(np.max(np.abs(utility_gradient(p, s) - utility_gradient_expanded(p, s))) for p, s in zip(psi, sigma))
    verdict(2, diff < 1e-10, f"max abs difference {diff:.2e}")


def test_criterion_3_model_invariants(verdict):
    rng = np.random.default_rng(3)
    psi = rng.uniform(-1, 1, 1000)
    sigma = rng.uniform(0.1, 3, 1000)
    lam = rng.uniform(0, 50, 1000)
    u = utility_vector(psi, sigma[:, None])
    sum_err = np.max(np.abs(u.sum(axis=1) - 1))
    even_err = np.max(np.abs(u - utility_vector(-psi, sigma[:, None])))
    s_err = max(abs(feedback_distribution(ui, li).sum() - 1) for ui, li in zip(u, lam))
    jac_err = max(np.max(np.abs(softmax_jacobian(ui, li).sum(axis=1))) for ui, li in zip(u, lam))
    ok = sum_err < 1e-9 and even_err < 1e-12 and s_err < 1e-12 and jac_err < 1e-12
    detail = f"sum(u) {sum_err:.1e}, evenness {even_err:.1e}, sum(s) {s_err:.1e}, Jacobian rows {jac_err:.1e}"
    verdict(3, ok, detail)


def test_criterion_4_metric_oracle(verdict):
    rng = np.random.default_rng(4)
    age = GroupSpec.default("age")
    mismatches, flagged = 0, 0
    for _ in range(1000):
        size = int(rng.integers(1, 21))
        records = [
            make_record(int(rng.integers(0, 2)), float(rng.choice([0.1, 0.5, 0.9])), age=int(rng.integers(17, 90)))
            for _ in range(size)
        ]
        pairs = [(r.surgeon_decision, int(r.arp_probability >= 0.5)) for r in records]
        priv = [p for p, r in zip(pairs, records) if r.recipient_age <= 50]
        under = [p for p, r in zip(pairs, records) if r.recipient_age > 50]
        for l, name in enumerate(NOTIONS, start=1):
            for pred, group in ((age.is_privileged, priv), (lambda r: not age.is_privileged(r), under)):
                got, want = groupwise_rate(records, pred, l), brute_rate(group, name)
                mismatches += got != want or (got is not None and not isinstance(got, Fraction))
        diffs, values, flags = profile_from_outcomes(priv, under)
        want_diffs, want_values, want_flags = brute_profile(priv, under)
        mismatches += diffs != want_diffs or list(values) != want_values or list(flags) != want_flags
        flagged += any(want_flags)
    verdict(4, mismatches == 0, f"{mismatches} mismatches over 1000 record sets, {flagged} with flagged notions")


def test_criterion_5_projection(verdict):
    rng = np.random.default_rng(5)
    grid = simplex_grid(3, 0.01)
    diameter = np.sqrt(2) * 0.01
    worst_gap = -np.inf
    for _ in range(200):
        v = rng.normal(0, 1.5, 3)
        p = project_simplex(v)
        best = np.min(np.linalg.norm(grid - v, axis=1))
        worst_gap = max(worst_gap, abs(np.linalg.norm(p - v) - best))
    drift = 0.0
    for _ in range(1000):
        x = rng.dirichlet(np.ones(int(rng.integers(2, 8))))
        drift = max(drift, np.max(np.abs(project_simplex(x) - x)))
    ok = worst_gap <= diameter and drift == 0.0
    verdict(5, ok, f"worst distance gap {worst_gap:.2e} vs grid diameter {diameter:.2e}, idempotence drift {drift:.1e}")


def _criterion_6_grid():
    cfg = RunConfig()
    return ExperimentGrid(
        participant_counts=(25, 100),
        tuple_counts=(5, 15),
        repetitions=10,
        learner=LearnerConfig(step_size=0.1, epochs=20),
        bias=cfg.bias_config(),
        seed=0,
    )


@pytest.fixture(scope="module")
def criterion_6_cells():
    start = time.perf_counter()
    cells = run_grid(_criterion_6_grid(), "random")
    return cells, time.perf_counter() - start


def test_criterion_6_convergence(verdict, criterion_6_cells):
    cells, elapsed = criterion_6_cells
    ok = all(c.mean_curve[-1] < c.mean_curve[0] for c in cells) and elapsed < 120
    detail = ", ".join(
        f"N={c.n_participants} M={c.n_tuples}: {c.mean_curve[0]:.6f} -> {c.mean_curve[-1]:.6f}" for c in cells
    )
    verdict(6, ok, f"{detail}; {elapsed:.1f} s")


def test_criterion_7_recovery(verdict, capsys):
    params = FeedbackParams(sigma=0.5, lam=10.0)
    default = [recovery_trial(seed, learner=LearnerConfig(params=params)).recovered for seed in range(50)]
    longer = [recovery_trial(seed, learner=LearnerConfig(epochs=200, params=params)).recovered for seed in range(50)]
    rate = np.mean(default)
    verdict(7, rate >= 0.9, f"AE recovered in {rate:.0%} of 50 runs at 20 epochs, {np.mean(longer):.0%} at 200 epochs")


def test_criterion_8_uniform_init(verdict, criterion_6_cells, tmp_path):
    random_cells, _ = criterion_6_cells
    uniform_cells = run_grid(_criterion_6_grid(), "uniform")

    def ratio(cells):
        return float(np.mean([[r.reduction_ratio() for r in c.runs] for c in cells]))

    r_random, r_uniform = ratio(random_cells), ratio(uniform_cells)
    code = cli.main(
        ["learn", "--tuples", str(DATA / "golden_tuples.csv"), "--responses", str(DATA / "golden_responses.csv"),
         "--out", str(tmp_path)]
    )
    report = (tmp_path / "preference_report.json").read_text()
    surfaced = code == 0 and '"init_diagnostic"' in report and '"uniform_reduction_ratio"' in report
    ok = surfaced and r_uniform < r_random
    detail = f"mean reduction ratio uniform {r_uniform:.3e} vs random {r_random:.3e}; surfaced in report: {surfaced}"
    verdict(8, ok, detail)


def test_criterion_9_determinism(verdict, tmp_path):
    outputs = []
    for run in ("a", "b"):
        sim, learned = tmp_path / run / "sim", tmp_path / run / "learn"
        assert cli.main(["simulate", "--out", str(sim), "--seed", "7", "--repetitions", "2"]) == 0
        assert cli.main(
            ["learn", "--tuples", str(sim / "tuples.csv"), "--responses", str(sim / "responses.csv"),
             "--out", str(learned), "--seed", "7"]
        ) == 0
        outputs.append({p.relative_to(tmp_path / run): p.read_bytes() for p in sorted((tmp_path / run).rglob("*.*"))})
    same = outputs[0] == outputs[1]
    verdict(9, same and len(outputs[0]) >= 8, f"{len(outputs[0])} files compared, identical: {same}")
