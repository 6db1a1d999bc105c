"""Acceptance gate: one test per shipping criterion.

Run with `pytest -v tests/test_acceptance.py` to get a pass/fail line per
criterion.  Everything here checks the package against independent oracles
(tests/oracles.py), bundled datasets, or generated scenario families; no
test depends on the browser client.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

import oracles
from planverb.bench import (
    InstanceSkipped,
    aggregate,
    dataset_config,
    load_goal_pool,
    run_benchmark,
    setup_instance,
)
from planverb.mirror import (
    ALL_ELIMINATED,
    MirrorModel,
    cross_entropy,
    find_most_informative,
    information_gain,
    posterior,
)
from planverb.pddl import parse_domain, parse_problem, ground
from planverb.planner import plan_optimal
from planverb.service import create_app, recompute_results
from planverb.strategies import Strategy, select
from planverb.warehouse import significance_test, simulate_study
from test_mirror import _random_toy_model, ga, hyp, make_plan

DATASETS = Path(__file__).parent.parent / "datasets"
DOMAINS = ("blocks", "logistics")


def bundled_instances():
    """(domain, problem, goal pool, per-instance seed) for every dataset entry."""
    for name in DOMAINS:
        config = dataset_config(DATASETS, name, seed=0)
        domain = parse_domain(Path(config.domain_path).read_text())
        for idx, (problem_path, pool_path) in enumerate(config.instances):
            problem = parse_problem(Path(problem_path).read_text(), domain)
            pool = load_goal_pool(pool_path, domain, problem)
            yield domain, Path(problem_path).stem, problem, pool, config.seed + idx


def bundled_models(seeds=range(6), max_plan_length=12):
    models = []
    for domain, stem, problem, pool, _ in bundled_instances():
        for seed in seeds:
            try:
                model = setup_instance(domain, problem, pool, seed)
            except InstanceSkipped:
                continue
            if len(model.robot_plan.actions) <= max_plan_length:
                models.append(model)
    return models


def test_informative_selection_matches_exhaustive_oracle():
    """The chosen subset's gain equals a brute-force maximum on 50+ models."""
    started = time.monotonic()
    models = bundled_models()
    assert len(models) >= 50
    for model in models:
        assert len(model.robot_plan.actions) <= 12
        assert len({h.belief.goal for h in model.hypotheses}) <= 4
        for size in range(1, min(3, len(model.distinct_actions())) + 1):
            chosen = find_most_informative(model, size)
            got = information_gain(model, chosen)
            _, want = oracles.best_subset_oracle(model, size)
            assert math.isfinite(got)
            assert got == pytest.approx(want, abs=1e-9)
    assert time.monotonic() - started < 60.0


def test_single_hypothesis_observer_has_zero_surprise():
    """An observer certain of the robot's belief and plan has zero entropy."""
    plan = make_plan("a", "b", "c")
    model = MirrorModel((hyp("g0", 1.0, (plan, 1.0)),), 0, plan)
    assert cross_entropy(model) == 0.0
    # and announcements cannot gain anything: the observer already knows
    assert information_gain(model, [ga("a")]) == 0.0
    assert information_gain(model, [ga("a"), ga("c")]) == 0.0


def test_foreign_action_announcement_scores_negative_infinity():
    """Any announcement with an action outside the robot plan gains -inf."""
    rng = random.Random(2024)
    cases = 0
    while cases < 200:
        model = _random_toy_model(rng)
        plan_actions = set(model.robot_plan.actions)
        # a name no toy plan uses, and any in-model action off the plan
        foreign = [ga(rng.choice("xyz"))]
        off_plan = [a for a in model.distinct_actions() if a not in plan_actions]
        for h in model.hypotheses:
            for p in h.plans.plans:
                off_plan.extend(a for a in p.actions if a not in plan_actions)
        if off_plan:
            foreign.append(rng.choice(off_plan))
        for bad in foreign:
            inside = rng.sample(
                sorted(plan_actions, key=str),
                rng.randint(0, min(2, len(plan_actions))),
            )
            announcement = inside + [bad]
            rng.shuffle(announcement)
            assert information_gain(model, announcement) == -math.inf
            cases += 1


def test_informative_entropy_never_above_baselines():
    """Exact dominance on every bundled instance at every verbalization size."""
    for domain, stem, problem, pool, seed in bundled_instances():
        model = setup_instance(domain, problem, pool, seed)
        base = cross_entropy(model)
        for size in range(1, len(model.distinct_actions()) + 1):
            h = {
                key: base - information_gain(model, select(strategy, model, size))
                for key, strategy in (
                    ("inc", Strategy.INCREASING),
                    ("dec", Strategy.DECREASING),
                    ("ent", Strategy.INFORMATIVE),
                )
            }
            assert h["ent"] <= h["inc"], (stem, size)
            assert h["ent"] <= h["dec"], (stem, size)


def test_strategy_direction_on_bundled_domains():
    """Averaged over both domains: early decreasing beats increasing on
    entropy, and the first informative action sits nearer the goal."""
    started = time.monotonic()
    records = []
    domains_used = 0
    for name in DOMAINS:
        result = run_benchmark(dataset_config(DATASETS, name, seed=0))
        assert not result.skipped
        records.extend(result.instances)
        domains_used += 1
    assert domains_used >= 2
    assert len(records) >= 10
    rows = aggregate((0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0), records)
    for row in rows:
        if row.x <= 0.3:
            assert row.h["dec"] <= row.h["inc"], row.x
    first = rows[0]
    assert first.x == 0.1
    # every bundled plan is short enough that x=0.1 announces one action
    assert all(r.fractions[0].size == 1 for r in records)
    assert first.g_dist["ent"] < first.g_dist["inc"]
    assert time.monotonic() - started < 600.0


def test_simulated_observer_direction():
    """Hit-ratio curves order informative >= decreasing >= increasing early,
    every strategy ends certain, and earliest-correct separation is
    significant at one hundred scenarios."""
    sim = simulate_study(100, seed=0)
    curve = sim.curve()
    margin = 0.02
    for bucket in (0.2, 0.4, 0.6):
        inf = curve["informative"][bucket]
        dec = curve["decreasing"][bucket]
        inc = curve["increasing"][bucket]
        assert inf >= dec - margin, bucket
        assert dec >= inc - margin, bucket
    for strategy, ratio in sim.final_step_hit_ratio().items():
        assert ratio == 1.0, strategy
    earliest = sim.earliest()
    assert len(earliest["informative"]) == len(earliest["increasing"]) == 100
    p = significance_test(earliest["informative"], earliest["increasing"])
    assert p < 0.01


def test_planner_cost_matches_breadth_first_oracle():
    """Optimal plan cost equals an independent breadth-first search on every
    bundled instance whose state space fits the oracle bound."""
    checked = 0
    for name in DOMAINS:
        domain = parse_domain((DATASETS / name / "domain.pddl").read_text())
        for path in sorted((DATASETS / name / "instances").glob("*.pddl")):
            problem = parse_problem(path.read_text(), domain)
            instance = ground(domain, problem)
            try:
                oracle_cost = oracles.bfs_optimal_cost(instance)
            except RuntimeError:
                continue
            plan = plan_optimal(instance)
            cost = None if plan is None else len(plan.actions)
            assert cost == oracle_cost, path.name
            checked += 1
    assert checked >= 10


def test_posterior_filtering_monotone_and_safe_on_random_cases():
    """1000 random (model, announcement) cases: growing an announcement
    inside the robot plan never lowers the truth's mass, and the truth is
    never eliminated."""
    rng = random.Random(77)
    for _ in range(1000):
        model = _random_toy_model(rng)
        hi, pi = oracles.robot_pair(model)
        actions = sorted(set(model.robot_plan.actions), key=str)
        big = rng.sample(actions, rng.randint(0, len(actions)))
        small = rng.sample(big, rng.randint(0, len(big)))
        post_small = posterior(model, small)
        post_big = posterior(model, big)
        assert post_small is not ALL_ELIMINATED
        assert post_big is not ALL_ELIMINATED
        mass_small = post_small.probability(hi, pi)
        mass_big = post_big.probability(hi, pi)
        assert mass_small > 0.0
        assert mass_big > 0.0
        assert mass_big >= mass_small - 1e-12


def test_headless_client_completes_study_protocol(tmp_path):
    """A scripted client finishes a 12-scenario session; step n always shows
    n sentences; results recomputed from the log match live byte-for-byte."""
    client = TestClient(create_app(seed=3, out_dir=tmp_path))
    opening = client.post("/sessions").json()
    sid = opening["session"]
    script = itertools.cycle([0, 1, 2, None])
    answered = 0
    for _ in range(opening["total_answer_steps"]):
        step = client.get(f"/sessions/{sid}/step").json()
        assert step["done"] is False
        assert len(step["sentences"]) == step["step"]
        posted = client.post(
            f"/sessions/{sid}/answer",
            json={
                "answer": next(script),
                "scenario_index": step["scenario_index"],
                "step": step["step"],
                "client_elapsed_ms": 100,
            },
        )
        assert posted.status_code == 200
        answered += 1
    assert client.get(f"/sessions/{sid}/step").json()["done"] is True
    assert answered == opening["total_answer_steps"]
    live = client.get(f"/sessions/{sid}/results").json()
    assert live["complete"] is True
    replayed = recompute_results(tmp_path / f"{sid}.jsonl")
    assert json.dumps(live, sort_keys=True) == json.dumps(replayed, sort_keys=True)
