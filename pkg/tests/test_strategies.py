"""Strategy selection and sentence rendering tests."""

from __future__ import annotations

import random

import pytest

from planverb.mirror import Belief, Hypothesis, MirrorModel, information_gain
from planverb.pddl import GroundAction, GroundAtom
from planverb.planner import Plan, WeightedPlanSet
from planverb.strategies import (
    Strategy,
    TemplateTable,
    distinct_from_end,
    load_template_table,
    render,
    select,
)


def ga(name: str, *args: str) -> GroundAction:
    return GroundAction(name, tuple(args), frozenset(), frozenset(), frozenset(), frozenset())


def model_with_plans(robot: Plan, others: list[Plan]) -> MirrorModel:
    hypotheses = []
    total = 1 + len(others)
    for i, plan in enumerate([robot] + others):
        hypotheses.append(
            Hypothesis(
                Belief(frozenset(), frozenset({GroundAtom(f"g{i}")})),
                1.0 / total,
                WeightedPlanSet((plan,), (1.0,)),
            )
        )
    return MirrorModel(tuple(hypotheses), 0, robot)


def letters(verbalization) -> list[str]:
    return [a.name for a in verbalization.actions]


def test_strategy_parsing():
    assert Strategy.parse("increasing") is Strategy.INCREASING
    assert Strategy.parse("Informative") is Strategy.INFORMATIVE
    assert Strategy.parse("informative_nested") is Strategy.INFORMATIVE_NESTED
    with pytest.raises(ValueError):
        Strategy.parse("psychic")


def test_increasing_takes_a_plan_prefix():
    model = model_with_plans(Plan((ga("a"), ga("b"), ga("c"), ga("d"))), [])
    assert letters(select(Strategy.INCREASING, model, 2)) == ["a", "b"]
    assert letters(select(Strategy.INCREASING, model, 4)) == ["a", "b", "c", "d"]


def test_decreasing_walks_back_from_the_goal():
    model = model_with_plans(Plan((ga("a"), ga("b"), ga("c"), ga("d"))), [])
    assert letters(select(Strategy.DECREASING, model, 2)) == ["d", "c"]
    assert letters(select(Strategy.DECREASING, model, 4)) == ["d", "c", "b", "a"]


def test_duplicate_actions_collapse_per_direction():
    # plan a b a c: three distinct actions; from the front a,b,c; from the
    # back c,a,b (the trailing occurrence wins)
    model = model_with_plans(Plan((ga("a"), ga("b"), ga("a"), ga("c"))), [])
    assert letters(select(Strategy.INCREASING, model, 3)) == ["a", "b", "c"]
    assert distinct_from_end(model) == (ga("c"), ga("a"), ga("b"))
    assert letters(select(Strategy.DECREASING, model, 2)) == ["c", "a"]


def test_selection_size_bounds():
    model = model_with_plans(Plan((ga("a"), ga("b"))), [])
    for strategy in Strategy:
        with pytest.raises(ValueError):
            select(strategy, model, 0)
        with pytest.raises(ValueError):
            select(strategy, model, 3)


def test_informative_beats_prefix_and_suffix():
    # only the middle action separates the robot plan from the decoys
    robot = Plan((ga("a"), ga("x"), ga("b")))
    decoys = [Plan((ga("a"), ga("y"), ga("b"))), Plan((ga("a"), ga("z"), ga("b")))]
    model = model_with_plans(robot, decoys)
    best = select(Strategy.INFORMATIVE, model, 1)
    assert letters(best) == ["x"]
    gain_inf = information_gain(model, best)
    gain_inc = information_gain(model, select(Strategy.INCREASING, model, 1))
    gain_dec = information_gain(model, select(Strategy.DECREASING, model, 1))
    assert gain_inf >= gain_inc
    assert gain_inf >= gain_dec
    assert gain_inf > 0.0


def test_informative_dominates_on_random_models():
    rng = random.Random(31)
    for _ in range(100):
        length = rng.randint(2, 6)
        alphabet = "abcdefgh"
        robot = Plan(tuple(ga(c) for c in rng.sample(alphabet, length)))
        others = []
        for _ in range(rng.randint(1, 4)):
            others.append(
                Plan(tuple(ga(c) for c in rng.sample(alphabet, rng.randint(1, 6))))
            )
        model = model_with_plans(robot, others)
        n = len(model.distinct_actions())
        for size in range(1, n + 1):
            gain_inf = information_gain(model, select(Strategy.INFORMATIVE, model, size))
            for strategy in (Strategy.INCREASING, Strategy.DECREASING, Strategy.INFORMATIVE_NESTED):
                assert gain_inf >= information_gain(model, select(strategy, model, size))


def test_full_plan_selection_is_equivalent_for_all_strategies():
    # at size n every strategy announces the same set
    robot = Plan((ga("a"), ga("b"), ga("c")))
    model = model_with_plans(robot, [Plan((ga("a"),))])
    n = len(model.distinct_actions())
    sets = {
        strategy: frozenset(select(strategy, model, n).actions) for strategy in Strategy
    }
    assert len(set(sets.values())) == 1
    gains = {
        strategy: information_gain(model, select(strategy, model, n))
        for strategy in Strategy
    }
    assert len({round(g, 12) for g in gains.values()}) == 1


def test_render_with_attributes_and_args():
    table = TemplateTable(
        templates={
            "grab": "I will grab a {color} {shape}.",
            "move": "I will move from {arg1} to {arg2}.",
        },
        objects={
            "obj1": {"color": "red", "shape": "circle"},
            "cell_a": {"name": "the corridor"},
            "cell_b": {"name": "the left room"},
        },
    )
    grabbed = render_one(table, ga("grab", "obj1"))
    assert grabbed == "I will grab a red circle."
    moved = render_one(table, ga("move", "cell_a", "cell_b"))
    assert moved == "I will move from the corridor to the left room."


def render_one(table: TemplateTable, action: GroundAction) -> str:
    from planverb.mirror import Verbalization

    return render(Verbalization((action,)), table)[0]


def test_render_attribute_of_second_argument():
    table = TemplateTable(
        templates={"paint": "I will paint {arg1} {color:2}."},
        objects={"wall": {}, "dye": {"color": "blue"}},
    )
    assert render_one(table, ga("paint", "wall", "dye")) == "I will paint wall blue."


def test_render_falls_back_gracefully():
    table = TemplateTable(templates={"grab": "grab {color} {arg3}"}, objects={})
    # unknown operator: bare form
    assert render_one(table, ga("warp", "x", "y")) == "(warp x y)"
    # missing attribute: raw object name; out-of-range arg: slot kept
    assert render_one(table, ga("grab", "o9")) == "grab o9 {arg3}"


def test_render_preserves_announcement_order():
    from planverb.mirror import Verbalization

    table = TemplateTable(templates={"a": "first", "b": "second"})
    sentences = render(Verbalization((ga("b"), ga("a"))), table)
    assert sentences == ["second", "first"]


def test_load_template_table(tmp_path):
    path = tmp_path / "templates.txt"
    path.write_text(
        "# warehouse sentences\n"
        "grab: I will grab a {color} {shape}.\n"
        "move: I will move to {arg2}.\n"
        "\n"
    )
    table = load_template_table(path, objects={"o": {"color": "red", "shape": "square"}})
    assert table.render_action(ga("grab", "o")) == "I will grab a red square."
    assert table.render_action(ga("move", "x", "y")) == "I will move to y."
    with pytest.raises(ValueError):
        load_template_table(write_bad(tmp_path))


def write_bad(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("grab I will grab\n")
    return bad
