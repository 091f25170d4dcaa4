"""Command-line entry point: audit, learn, simulate, gradcheck."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig
from .fairness import ATTRIBUTES, NOTIONS, ValidationError, fairness_profile, profile_matrix
from .gradcheck import gradient_check
from .learner import saff_learn
from .simulation import generate_tuples, run_grid, sample_population, simulate_responses

logger = logging.getLogger("saff")

EXIT_CODES = {"validation_error": 2, "config_error": 3, "io_error": 4}


def _groups(cfg: RunConfig) -> dict:
    return {a: cfg.group_spec(a) for a in ATTRIBUTES}


def _named(beta) -> dict:
    return dict(zip(NOTIONS, map(float, beta)))


def learn_preferences(tuples, responses: dict, cfg: RunConfig, attributes) -> tuple[dict, dict, dict]:
    """Run the learner per attribute from the configured init and from uniform init.

    Returns (preference report, regret curves, learned betas).
    """
    report = {"config": cfg.to_dict(), "notions": list(NOTIONS), "attributes": {}}
    curves, betas = {}, {}
    tuple_ids = [t.tuple_id for t in tuples]
    for attr in attributes:
        if attr not in responses:
            raise ValidationError(f"no responses for question {attr!r}")
        rs = responses[attr]
        phi = profile_matrix([fairness_profile(t, cfg.group_spec(attr)) for t in tuples])
        run = saff_learn(phi, rs, cfg.learner_config())
        other = "uniform" if cfg.init_mode == "random" else "random"
        alt = saff_learn(phi, rs, cfg.learner_config(init_mode=other))
        by_mode = {cfg.init_mode: run, other: alt}
        report["attributes"][attr] = {
            "final_beta": _named(run.final_beta),
            "initial_beta": _named(run.beta_trajectory[0]),
            "regret_trajectory": [float(r) for r in run.regret_trajectory],
            "init_mode": cfg.init_mode,
            "n_participants": rs.n_participants,
            "n_tuples": len(tuple_ids),
            "init_diagnostic": {
                "random_reduction_ratio": by_mode["random"].reduction_ratio(),
                "uniform_reduction_ratio": by_mode["uniform"].reduction_ratio(),
                "uniform_smaller": by_mode["uniform"].reduction_ratio() < by_mode["random"].reduction_ratio(),
                "uniform_final_beta": _named(by_mode["uniform"].final_beta),
            },
        }
        curves[attr] = run.regret_trajectory
        betas[attr] = run.final_beta
    if "overall" in responses:
        scores = responses["overall"].scores
        report["overall_scores"] = {
            "mean_per_tuple": dict(zip(tuple_ids, map(float, scores.mean(axis=0)))),
            "mean": float(scores.mean()),
        }
    return report, curves, betas


def cmd_audit(args, cfg: RunConfig) -> dict:
    tuples = io.load_tuples(args.tuples)
    audit = io.build_audit(tuples, _groups(cfg))
    io.emit_reports(args.out, audit=audit)
    return {"tuples": len(tuples), "flag_counts": audit.flag_counts}


def cmd_learn(args, cfg: RunConfig) -> dict:
    tuples = io.load_tuples(args.tuples)
    responses = io.load_responses(args.responses, [t.tuple_id for t in tuples])
    attributes = [args.attribute] if args.attribute else [a for a in ATTRIBUTES if a in responses]
    if not attributes:
        raise ValidationError("responses contain no age, gender or race question")
    audit = io.build_audit(tuples, _groups(cfg))
    report, curves, betas = learn_preferences(tuples, responses, cfg, attributes)
    io.emit_reports(args.out, audit=audit, preference=report, trajectories=curves, betas=betas)
    return {a: report["attributes"][a]["final_beta"] for a in attributes}


def simulate_dataset(cfg: RunConfig):
    """A synthetic survey: tuples plus age/gender/race responses from one population."""
    sim = cfg.simulation
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xDA7A]))
    population = sample_population(sim.dataset_participants, rng)
    tuples = generate_tuples(sim.dataset_tuples, sim.pairs_per_tuple, cfg.bias_config(), rng)
    pids = tuple(f"P{n:03d}" for n in range(sim.dataset_participants))
    responses = {}
    for attr in ATTRIBUTES:
        profiles = [fairness_profile(t, cfg.group_spec(attr)) for t in tuples]
        rs = simulate_responses(population, profiles, cfg.feedback_params(), rng, attr)
        responses[attr] = replace(rs, participant_ids=pids)
    return population, tuples, responses


def grid_summary(cfg: RunConfig) -> tuple[dict, dict]:
    grid = cfg.grid()
    other = "uniform" if cfg.init_mode == "random" else "random"
    results = {mode: run_grid(grid, mode) for mode in (cfg.init_mode, other)}
    curves, cells = {}, []
    for cell, alt in zip(results[cfg.init_mode], results[other]):
        key = f"N{cell.n_participants}_M{cell.n_tuples}"
        curves[f"{key}_mean"] = cell.mean_curve
        curves[f"{key}_std"] = cell.std_curve
        ratio = {
            mode: float((c.mean_curve[0] - c.mean_curve[-1]) / c.mean_curve[0])
            for mode, c in ((cfg.init_mode, cell), (other, alt))
        }
        cells.append(
            {
                "n_participants": cell.n_participants,
                "n_tuples": cell.n_tuples,
                "initial_mean_regret": float(cell.mean_curve[0]),
                "final_mean_regret": float(cell.mean_curve[-1]),
                "flagged_fraction": cell.flagged_fraction,
                "random_reduction_ratio": ratio["random"],
                "uniform_reduction_ratio": ratio["uniform"],
            }
        )
    summary = {
        "config": cfg.to_dict(),
        "cells": cells,
        "init_diagnostic": {
            "mean_random_reduction_ratio": float(np.mean([c["random_reduction_ratio"] for c in cells])),
            "mean_uniform_reduction_ratio": float(np.mean([c["uniform_reduction_ratio"] for c in cells])),
        },
    }
    return summary, curves


def cmd_simulate(args, cfg: RunConfig) -> dict:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _, tuples, responses = simulate_dataset(cfg)
    io.write_tuples(tuples, out / "tuples.csv")
    io.write_responses(responses, [t.tuple_id for t in tuples], out / "responses.csv")
    summary, curves = grid_summary(cfg)
    io.write_trajectories(curves, out / "regret_curves.csv")
    (out / "grid_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary["init_diagnostic"]


def cmd_gradcheck(args, cfg: RunConfig) -> dict:
    res = gradient_check(args.instances, cfg.seed)
    return {"max_rel_error": float(res.max_rel_error), "instances": res.n_instances, "directions": res.n_directions}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saff", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("audit", help="fairness profiles for a tuple file")
    p.add_argument("--tuples", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("learn", help="learn social preference weights from responses")
    p.add_argument("--tuples", required=True)
    p.add_argument("--responses", required=True)
    p.add_argument("--attribute", choices=ATTRIBUTES, help="default: every attribute present")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("simulate", help="synthetic survey data and convergence curves")
    p.add_argument("--out", required=True)
    p.add_argument("--attribute", choices=ATTRIBUTES, help="attribute for the convergence grid")
    p.add_argument("--repetitions", type=int, help="override simulation.repetitions")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gradcheck", help="max relative error of the analytic gradient")
    p.add_argument("--instances", type=int, default=100)
    common(p)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def _fail(category: str, exc: Exception) -> int:
    print(json.dumps({"error": category, "message": str(exc)}), file=sys.stderr)
    return EXIT_CODES[category]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig.load(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if getattr(args, "attribute", None) and args.command == "simulate":
            overrides["attribute"] = args.attribute
        if overrides:
            cfg = RunConfig.from_dict({**cfg.to_dict(), **overrides})
        if getattr(args, "repetitions", None):
            cfg.simulation.repetitions = args.repetitions
        result = args.func(args, cfg)
    except ConfigError as exc:
        return _fail("config_error", exc)
    except ValidationError as exc:
        return _fail("validation_error", exc)
    except OSError as exc:
        return _fail("io_error", exc)
    print(json.dumps(result, indent=2, sort_keys=True, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
