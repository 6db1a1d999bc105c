"""Observer-model tests.

Small ensembles are hand-built so posteriors and entropies can be derived
on paper; bigger ones come from build_model on the bundled blocks data and
are cross-checked against the set-based oracles in tests/oracles.py.
"""

from __future__ import annotations

import math
import random

import pytest

from planverb.mirror import (
    ALL_ELIMINATED,
    AllEliminated,
    Belief,
    BeliefPrior,
    Hypothesis,
    MirrorModel,
    ModelBuildError,
    Verbalization,
    build_model,
    cross_entropy,
    find_most_informative,
    find_most_informative_nested,
    information_gain,
    nested_chain,
    posterior,
    uncertain_from_plan,
)
from planverb.pddl import GroundAction, GroundAtom, parse_domain, parse_problem
from planverb.planner import Plan, WeightedPlanSet

import oracles


def ga(name: str, *args: str) -> GroundAction:
    return GroundAction(name, tuple(args), frozenset(), frozenset(), frozenset(), frozenset())


def make_plan(*names: str) -> Plan:
    return Plan(tuple(ga(n) for n in names))


def hyp(goal_name: str, prior: float, *plans: tuple[Plan, float]) -> Hypothesis:
    belief = Belief(frozenset(), frozenset({GroundAtom(goal_name)}))
    return Hypothesis(
        belief,
        prior,
        WeightedPlanSet(tuple(p for p, _ in plans), tuple(w for _, w in plans)),
    )


def two_hypothesis_model() -> MirrorModel:
    # observer hesitates between plan [a, b] (the truth) and plan [a, c]
    a_hyp = hyp("g1", 0.5, (make_plan("a", "b"), 1.0))
    b_hyp = hyp("g2", 0.5, (make_plan("a", "c"), 1.0))
    return MirrorModel((a_hyp, b_hyp), 0, make_plan("a", "b"))


def blocks_setup(blocks_domain_text, datasets_dir):
    domain = parse_domain(blocks_domain_text)
    problem = parse_problem(
        (datasets_dir / "blocks" / "instances" / "p01.pddl").read_text(), domain
    )
    return domain, problem


def test_single_hypothesis_cross_entropy_is_exactly_zero(blocks_domain_text, datasets_dir):
    domain, problem = blocks_setup(blocks_domain_text, datasets_dir)
    prior = BeliefPrior(
        base_init=problem.init,
        uncertain_atoms=(),
        atom_probs=(),
        goal_pool=(problem.goal,),
        goal_probs=(1.0,),
    )
    model = build_model(domain, problem, prior, 0, ())
    assert len(model.hypotheses) == 1
    assert model.hypotheses[0].prior == 1.0
    assert cross_entropy(model) == 0.0


def test_two_goal_cross_entropy_is_ln_two(blocks_domain_text, datasets_dir):
    domain, problem = blocks_setup(blocks_domain_text, datasets_dir)
    other = frozenset({GroundAtom("on", ("c", "a"))})
    prior = BeliefPrior(
        base_init=problem.init,
        uncertain_atoms=(),
        atom_probs=(),
        goal_pool=(problem.goal, other),
        goal_probs=(0.5, 0.5),
    )
    model = build_model(domain, problem, prior, 0, ())
    assert cross_entropy(model) == pytest.approx(math.log(2.0), abs=1e-12)


def test_unsolvable_hypotheses_are_pruned_and_priors_renormalized(
    blocks_domain_text, datasets_dir
):
    domain, problem = blocks_setup(blocks_domain_text, datasets_dir)
    uncertain = (GroundAtom("clear", ("c",)), GroundAtom("ontable", ("c",)))
    prior = BeliefPrior(
        base_init=problem.init - set(uncertain),
        uncertain_atoms=uncertain,
        atom_probs=(0.5, 0.5),
        goal_pool=(
            frozenset({GroundAtom("on", ("a", "b"))}),
            frozenset({GroundAtom("on", ("c", "a"))}),
        ),
        goal_probs=(0.5, 0.5),
    )
    model = build_model(domain, problem, prior, 0, (True, True))
    # (on c a) needs c clear and on the table; only 1 of 4 init variants works
    assert len(model.hypotheses) == 5
    assert sum(h.prior for h in model.hypotheses) == pytest.approx(1.0, abs=1e-12)
    assert all(h.prior == pytest.approx(0.2, abs=1e-12) for h in model.hypotheses)
    assert cross_entropy(model) == pytest.approx(math.log(5.0), abs=1e-12)


def test_build_rejects_unsolvable_robot_task(blocks_domain_text, datasets_dir):
    domain, problem = blocks_setup(blocks_domain_text, datasets_dir)
    uncertain = (GroundAtom("clear", ("c",)), GroundAtom("ontable", ("c",)))
    prior = BeliefPrior(
        base_init=problem.init - set(uncertain),
        uncertain_atoms=uncertain,
        atom_probs=(0.5, 0.5),
        goal_pool=(
            frozenset({GroundAtom("on", ("a", "b"))}),
            frozenset({GroundAtom("on", ("c", "a"))}),
        ),
        goal_probs=(0.5, 0.5),
    )
    with pytest.raises(ModelBuildError):
        build_model(domain, problem, prior, 1, (False, False))


def test_build_rejects_zero_prior_robot(blocks_domain_text, datasets_dir):
    domain, problem = blocks_setup(blocks_domain_text, datasets_dir)
    atom = GroundAtom("clear", ("c",))
    prior = BeliefPrior(
        base_init=problem.init - {atom},
        uncertain_atoms=(atom,),
        atom_probs=(0.0,),
        goal_pool=(problem.goal,),
        goal_probs=(1.0,),
    )
    with pytest.raises(ModelBuildError):
        build_model(domain, problem, prior, 0, (True,))


def test_build_enforces_enumeration_guard(blocks_domain_text, datasets_dir):
    domain, problem = blocks_setup(blocks_domain_text, datasets_dir)
    fake = tuple(GroundAtom("on", (f"x{i}", f"y{i}")) for i in range(17))
    prior = BeliefPrior(
        base_init=problem.init,
        uncertain_atoms=fake,
        atom_probs=(0.5,) * 17,
        goal_pool=(problem.goal,),
        goal_probs=(1.0,),
    )
    with pytest.raises(ModelBuildError):
        build_model(domain, problem, prior, 0, (True,) * 17)


def test_belief_prior_validation():
    g = frozenset({GroundAtom("g")})
    with pytest.raises(ValueError):
        BeliefPrior(frozenset(), (), (), (g,), (0.7,))  # goal probs not normalized
    with pytest.raises(ValueError):
        BeliefPrior(frozenset(), (GroundAtom("p"),), (1.5,), (g,), (1.0,))
    with pytest.raises(ValueError):
        BeliefPrior(frozenset({GroundAtom("p")}), (GroundAtom("p"),), (0.5,), (g,), (1.0,))
    with pytest.raises(ValueError):
        BeliefPrior(frozenset(), (), (), (g, g), (0.5, 0.5))  # duplicate goals
    with pytest.raises(ValueError):
        BeliefPrior(frozenset(), (), (), (), ())  # empty pool


def test_posterior_on_empty_observation_is_the_prior():
    model = two_hypothesis_model()
    post = posterior(model, Verbalization(()))
    assert post.probability(0, 0) == pytest.approx(0.5)
    assert post.probability(1, 0) == pytest.approx(0.5)


def test_posterior_keeps_only_consistent_plans():
    model = two_hypothesis_model()
    shared = posterior(model, [ga("a")])
    assert shared.probability(0, 0) == pytest.approx(0.5)
    assert shared.probability(1, 0) == pytest.approx(0.5)
    decisive = posterior(model, [ga("b")])
    assert decisive.probability(0, 0) == pytest.approx(1.0)
    assert decisive.probability(1, 0) == 0.0
    assert sum(decisive.table.values()) == pytest.approx(1.0, abs=1e-12)


def test_posterior_order_insensitive():
    model = two_hypothesis_model()
    forward = posterior(model, [ga("a"), ga("b")])
    backward = posterior(model, [ga("b"), ga("a")])
    assert forward.table == backward.table


def test_posterior_all_eliminated():
    model = two_hypothesis_model()
    result = posterior(model, [ga("zz")])
    assert result is ALL_ELIMINATED
    assert isinstance(result, AllEliminated)


def test_information_gain_matches_hand_derivation():
    model = two_hypothesis_model()
    # "a" appears in both plans: no information
    assert information_gain(model, [ga("a")]) == pytest.approx(0.0, abs=1e-12)
    # "b" rules out the second hypothesis: gain is ln 2
    assert information_gain(model, [ga("b")]) == pytest.approx(math.log(2.0), abs=1e-12)


def test_information_gain_minus_infinity_outside_robot_plan():
    model = two_hypothesis_model()
    assert information_gain(model, [ga("c")]) == -math.inf
    assert information_gain(model, [ga("zz")]) == -math.inf


def test_goal_marginals_follow_filtering():
    model = two_hypothesis_model()
    post = posterior(model, [ga("b")])
    marg = post.goal_marginals()
    assert marg[frozenset({GroundAtom("g1")})] == pytest.approx(1.0)
    assert frozenset({GroundAtom("g2")}) not in marg


def test_find_most_informative_picks_the_discriminating_action():
    model = two_hypothesis_model()
    best = find_most_informative(model, 1)
    assert [a.name for a in best.actions] == ["b"]


def test_find_most_informative_tie_breaks_toward_plan_order():
    # both actions are equally informative (none discriminates): keep "a"
    a_hyp = hyp("g1", 0.5, (make_plan("a", "b"), 1.0))
    b_hyp = hyp("g2", 0.5, (make_plan("a", "b", "c"), 1.0))
    model = MirrorModel((a_hyp, b_hyp), 0, make_plan("a", "b"))
    best = find_most_informative(model, 1)
    assert [a.name for a in best.actions] == ["a"]


def test_find_most_informative_size_bounds():
    model = two_hypothesis_model()
    with pytest.raises(ValueError):
        find_most_informative(model, 0)
    with pytest.raises(ValueError):
        find_most_informative(model, 3)


def test_verbalization_rejects_duplicates():
    with pytest.raises(ValueError):
        Verbalization((ga("a"), ga("a")))


def _random_toy_model(rng: random.Random) -> MirrorModel:
    alphabet = "abcdef"
    n_hyp = rng.randint(1, 5)
    hypotheses = []
    priors = [rng.uniform(0.1, 1.0) for _ in range(n_hyp)]
    total = sum(priors)
    for i in range(n_hyp):
        n_plans = rng.randint(1, 3)
        plans = []
        seen = set()
        for _ in range(n_plans):
            length = rng.randint(1, 5)
            actions = tuple(ga(rng.choice(alphabet)) for _ in range(length))
            if actions in seen:
                continue
            seen.add(actions)
            plans.append(Plan(actions))
        weights = [rng.uniform(0.1, 1.0) for _ in plans]
        wsum = sum(weights)
        hypotheses.append(
            Hypothesis(
                Belief(frozenset(), frozenset({GroundAtom(f"g{i}")})),
                priors[i] / total,
                WeightedPlanSet(tuple(plans), tuple(w / wsum for w in weights)),
            )
        )
    robot_hi = rng.randrange(n_hyp)
    robot_plan = hypotheses[robot_hi].plans.plans[0]
    return MirrorModel(tuple(hypotheses), robot_hi, robot_plan)


def test_posterior_and_gain_match_oracle_on_random_models():
    rng = random.Random(7)
    for _ in range(300):
        model = _random_toy_model(rng)
        obs = [ga(rng.choice("abcdefgh")) for _ in range(rng.randint(0, 3))]
        expected = oracles.posterior_table(model, obs)
        got = posterior(model, obs)
        if expected is None:
            assert got is ALL_ELIMINATED
        else:
            assert set(got.table) == set(expected)
            for key, value in expected.items():
                assert got.table[key] == pytest.approx(value, abs=1e-9)
        gain = information_gain(model, obs)
        want = oracles.information_gain_oracle(model, obs)
        if math.isinf(want):
            assert gain == want
        else:
            assert gain == pytest.approx(want, abs=1e-9)


def test_gain_equals_expectation_form_on_random_models():
    # ln P(o | robot plan) - ln E[P(o | plan)] is the same number computed
    # the other way around; check on every subset of the robot plan
    rng = random.Random(21)
    import itertools as it

    for _ in range(60):
        model = _random_toy_model(rng)
        distinct = model.distinct_actions()
        for size in range(len(distinct) + 1):
            for combo in it.combinations(distinct, size):
                direct = information_gain(model, combo)
                expect = oracles.expectation_form_gain(model, combo)
                if math.isinf(direct) or math.isinf(expect):
                    assert direct == expect
                else:
                    assert direct == pytest.approx(expect, abs=1e-9)


def test_monotone_filtering_and_robot_safety():
    # growing an announcement inside the robot plan never resurrects
    # hypotheses, never eliminates the truth, and never loses gain
    rng = random.Random(42)
    for _ in range(200):
        model = _random_toy_model(rng)
        distinct = list(model.distinct_actions())
        rng.shuffle(distinct)
        robot_pair = oracles.robot_pair(model)
        prev_survivors = None
        prev_gain = None
        for size in range(len(distinct) + 1):
            obs = distinct[:size]
            post = posterior(model, obs)
            assert not isinstance(post, AllEliminated)
            survivors = set(post.table)
            assert robot_pair in survivors
            if prev_survivors is not None:
                assert survivors <= prev_survivors
            gain = information_gain(model, obs)
            assert not math.isinf(gain)
            if prev_gain is not None:
                assert gain >= prev_gain - 1e-9
            prev_survivors = survivors
            prev_gain = gain


def test_exhaustive_search_matches_subset_oracle_on_toys():
    rng = random.Random(99)
    checked = 0
    for _ in range(80):
        model = _random_toy_model(rng)
        n = len(model.distinct_actions())
        for size in range(1, n + 1):
            combo, gain = oracles.best_subset_oracle(model, size)
            best = find_most_informative(model, size)
            got_gain = information_gain(model, best)
            assert got_gain == pytest.approx(gain, abs=1e-9)
            distinct = model.distinct_actions()
            assert best.actions == tuple(distinct[i] for i in combo)
            checked += 1
    assert checked >= 100


def test_nested_chain_is_nested_and_plan_ordered():
    rng = random.Random(5)
    for _ in range(60):
        model = _random_toy_model(rng)
        n = len(model.distinct_actions())
        chain = nested_chain(model, n)
        assert [len(v) for v in chain] == list(range(1, n + 1))
        for small, big in zip(chain, chain[1:]):
            assert set(small.actions) <= set(big.actions)
        distinct = list(model.distinct_actions())
        for verb in chain:
            order = [distinct.index(a) for a in verb.actions]
            assert order == sorted(order)
        # greedy can only do as well as the exhaustive optimum
        final = information_gain(model, chain[-1])
        best = information_gain(model, find_most_informative(model, n))
        assert final <= best + 1e-9


def test_nested_first_step_matches_exhaustive_size_one():
    rng = random.Random(17)
    for _ in range(40):
        model = _random_toy_model(rng)
        a = find_most_informative(model, 1)
        b = find_most_informative_nested(model, 1)
        assert a.actions == b.actions


def test_built_model_matches_subset_oracle(blocks_domain_text, datasets_dir):
    domain, problem = blocks_setup(blocks_domain_text, datasets_dir)
    uncertain = (GroundAtom("clear", ("c",)), GroundAtom("ontable", ("c",)))
    prior = BeliefPrior(
        base_init=problem.init - set(uncertain),
        uncertain_atoms=uncertain,
        atom_probs=(0.5, 0.5),
        goal_pool=(
            frozenset({GroundAtom("on", ("a", "b")), GroundAtom("on", ("b", "c"))}),
            frozenset({GroundAtom("on", ("c", "a"))}),
            frozenset({GroundAtom("on", ("b", "a"))}),
        ),
        goal_probs=(1 / 3, 1 / 3, 1 / 3),
    )
    model = build_model(domain, problem, prior, 0, (True, True), k=2)
    for size in range(1, len(model.distinct_actions()) + 1):
        combo, gain = oracles.best_subset_oracle(model, size)
        best = find_most_informative(model, size)
        assert best.actions == tuple(model.distinct_actions()[i] for i in combo)
        assert information_gain(model, best) == pytest.approx(gain, abs=1e-9)


def test_uncertain_from_plan_sampling(blocks_domain_text, datasets_dir):
    domain, problem = blocks_setup(blocks_domain_text, datasets_dir)
    from planverb.pddl import ground
    from planverb.planner import plan_optimal

    plan = plan_optimal(ground(domain, problem))
    rng = random.Random(3)
    atoms = uncertain_from_plan(plan, problem.init, 4, rng)
    assert len(atoms) == 4
    assert len(set(atoms)) == 4
    assert all(a in problem.init for a in atoms)
    pres = {p for action in plan.actions for p in action.pre}
    assert all(a in pres for a in atoms)
    again = uncertain_from_plan(plan, problem.init, 4, random.Random(3))
    assert atoms == again
    everything = uncertain_from_plan(plan, problem.init, 99, rng)
    assert set(everything) == pres & problem.init
