"""Seeded warehouse scenarios with a simulated Bayesian observer.

Each scenario puts a robot in the corridor between two stocked rooms on a
small cell grid.  The robot's goal is to grab two of the objects and leave
through one of three corner doors; in half of the scenarios it must visit the
recharge station first.  The observer knows the map and the three candidate
goals but not which goal is true nor whether the robot starts charged, which
makes the scenario family a ready-made model for the observer simulation:
announce part of the plan, filter the observer's hypotheses, and ask it to
name the goal once one candidate's marginal clears a confidence threshold.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .mirror import (
    AllEliminated,
    BeliefPrior,
    MirrorModel,
    build_model,
    posterior,
)
from .pddl import Domain, GroundAction, GroundAtom, Problem, parse_domain, parse_problem
from .pddl.parser import problem_to_pddl
from .strategies import Strategy, TemplateTable, select

WAREHOUSE_DOMAIN = """\
(define (domain warehouse)
  (:requirements :strips :typing)
  (:types cell item - object)
  (:predicates
    (robot-at ?c - cell)
    (adjacent ?a - cell ?b - cell)
    (at ?o - item ?c - cell)
    (holding ?o - item)
    (charged)
    (station ?c - cell))
  (:action move
    :parameters (?from - cell ?to - cell)
    :precondition (and (robot-at ?from) (adjacent ?from ?to))
    :effect (and (robot-at ?to) (not (robot-at ?from))))
  (:action grab
    :parameters (?o - item ?c - cell)
    :precondition (and (robot-at ?c) (at ?o ?c) (charged))
    :effect (and (holding ?o) (not (at ?o ?c))))
  (:action recharge
    :parameters (?c - cell)
    :precondition (and (robot-at ?c) (station ?c))
    :effect (and (charged)))
)
"""

SHAPES = ("circle", "square", "triangle")
COLORS = ("red", "blue")

#: Fixed floor plan: doors in columns 0 and 8, rooms 1-2 and 6-7, corridor
#: in the middle of row 1.  (col, row) with row 0 on top.
LEFT_ROOM_CELLS = (("c10", 1, 0), ("c20", 2, 0), ("c11", 1, 1), ("c21", 2, 1))
RIGHT_ROOM_CELLS = (("c60", 6, 0), ("c70", 7, 0), ("c61", 6, 1), ("c71", 7, 1))
CORRIDOR_CELLS = (("c31", 3, 1), ("c41", 4, 1), ("c51", 5, 1))
STATION_CELL = "c41"

#: The four floor corners a door can occupy: (door id, display name,
#: door cell coordinates, the corner cell it opens onto).
DOOR_SPOTS = (
    ("door-tl", "top left", 0, 0, "c10"),
    ("door-bl", "bottom left", 0, 1, "c11"),
    ("door-tr", "top right", 8, 0, "c70"),
    ("door-br", "bottom right", 8, 1, "c71"),
)

CORRIDOR_PHRASES = {
    "c31": "navigate to the left corridor",
    "c41": "navigate to the central corridor",
    "c51": "navigate to the right corridor",
}

GRID_WIDTH = 9
GRID_HEIGHT = 2


@dataclass(frozen=True)
class Cell:
    id: str
    x: int
    y: int
    kind: str  # "room-left", "room-right", "corridor" or "door"


@dataclass(frozen=True)
class ScenarioObject:
    id: str
    shape: str
    color: str
    room: str  # "left" or "right"
    cell: str


@dataclass(frozen=True)
class ScenarioDoor:
    id: str
    name: str
    x: int
    y: int
    corner: str  # the room cell the door opens onto


@dataclass(frozen=True)
class CandidateGoal:
    objects: tuple[str, str]
    door: str
    description: str
    atoms: frozenset[GroundAtom]


@dataclass(frozen=True)
class Scenario:
    """One generated study scenario, fully determined by its seed."""

    seed: int
    needs_recharge: bool
    robot_cell: str
    station_cell: str
    cells: tuple[Cell, ...]
    objects: tuple[ScenarioObject, ...]
    doors: tuple[ScenarioDoor, ...]
    goals: tuple[CandidateGoal, ...]
    true_goal_index: int
    domain_text: str
    problem_text: str

    def goal_atom_sets(self) -> tuple[frozenset[GroundAtom], ...]:
        return tuple(g.atoms for g in self.goals)

    def problem_text_for_goal(self, index: int) -> str:
        """The same problem re-targeted at candidate goal `index`."""
        domain = parse_domain(self.domain_text)
        problem = parse_problem(self.problem_text, domain)
        return problem_to_pddl(problem.replace_goal(self.goals[index].atoms))

    def object_attributes(self) -> dict[str, dict[str, str]]:
        """Display names and template attributes for every referenced id."""
        attrs: dict[str, dict[str, str]] = {}
        room_color = {o.room: o.color for o in self.objects}
        for cell in self.cells:
            if cell.kind == "corridor":
                attrs[cell.id] = {
                    "name": cell.id,
                    "enter": CORRIDOR_PHRASES[cell.id],
                }
            elif cell.kind.startswith("room-"):
                color = room_color[cell.kind.removeprefix("room-")]
                attrs[cell.id] = {
                    "name": cell.id,
                    "enter": f"enter the {color} warehouse",
                }
        for door in self.doors:
            attrs[door.id] = {
                "name": f"the {door.name} door",
                "enter": f"exit from the {door.name} door",
            }
        for obj in self.objects:
            attrs[obj.id] = {
                "name": f"the {obj.color} {obj.shape}",
                "desc": f"a {obj.color} {obj.shape}",
            }
        return attrs

    def template_table(self) -> TemplateTable:
        return TemplateTable(
            templates={
                "move": "I will {enter:2}.",
                "grab": "I will grab {desc}.",
                "recharge": "I will recharge at the station.",
            },
            objects=self.object_attributes(),
        )

    def sentences(self, actions: Iterable[GroundAction]) -> list[str]:
        table = self.template_table()
        return [table.render_action(a) for a in actions]

    def image_model(self) -> dict:
        """Everything a renderer needs to draw the scenario, as plain data."""
        return {
            "width": GRID_WIDTH,
            "height": GRID_HEIGHT,
            "cells": [
                {"id": c.id, "x": c.x, "y": c.y, "kind": c.kind} for c in self.cells
            ],
            "objects": [
                {
                    "id": o.id,
                    "shape": o.shape,
                    "color": o.color,
                    "cell": o.cell,
                }
                for o in self.objects
            ],
            "doors": [
                {"id": d.id, "name": d.name, "x": d.x, "y": d.y} for d in self.doors
            ],
            "station": self.station_cell,
            "robot": self.robot_cell,
        }

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "needs_recharge": self.needs_recharge,
            "layout": self.image_model(),
            "goals": [
                {
                    "objects": list(g.objects),
                    "door": g.door,
                    "description": g.description,
                }
                for g in self.goals
            ],
            "true_goal_index": self.true_goal_index,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _adjacency() -> list[tuple[str, str]]:
    """Directed adjacency over the fixed floor plan (both directions)."""
    coords = {c[0]: (c[1], c[2]) for c in LEFT_ROOM_CELLS + RIGHT_ROOM_CELLS + CORRIDOR_CELLS}
    edges = []
    ids = sorted(coords)
    for a, b in itertools.combinations(ids, 2):
        (ax, ay), (bx, by) = coords[a], coords[b]
        if abs(ax - bx) + abs(ay - by) == 1:
            edges.append((a, b))
            edges.append((b, a))
    return edges


def generate_scenario(seed: int) -> Scenario:
    """Deterministic scenario build: same seed, byte-identical PDDL."""
    rng = random.Random(seed)
    needs_recharge = seed % 2 == 0
    red_room = rng.choice(("left", "right"))

    objects: list[ScenarioObject] = []
    next_id = 1
    for room, room_cells in (("left", LEFT_ROOM_CELLS), ("right", RIGHT_ROOM_CELLS)):
        color = "red" if room == red_room else "blue"
        count = rng.randint(1, 3)
        cells = rng.sample([c[0] for c in room_cells], count)
        for cell in cells:
            objects.append(
                ScenarioObject(
                    id=f"obj{next_id}",
                    shape=rng.choice(SHAPES),
                    color=color,
                    room=room,
                    cell=cell,
                )
            )
            next_id += 1

    robot_cell = rng.choice([c[0] for c in CORRIDOR_CELLS])

    spots = rng.sample(range(len(DOOR_SPOTS)), 3)
    doors = tuple(
        ScenarioDoor(id=d[0], name=d[1], x=d[2], y=d[3], corner=d[4])
        for d in (DOOR_SPOTS[i] for i in sorted(spots))
    )

    candidates = [
        (pair, door)
        for pair in itertools.combinations([o.id for o in objects], 2)
        for door in doors
    ]
    true = rng.choice(candidates)
    decoys = rng.sample([c for c in candidates if c != true], 2)
    chosen = [true, *decoys]
    rng.shuffle(chosen)
    true_goal_index = chosen.index(true)

    object_by_id = {o.id: o for o in objects}
    goals = []
    for pair, door in chosen:
        descs = [
            f"a {object_by_id[i].color} {object_by_id[i].shape}" for i in pair
        ]
        goals.append(
            CandidateGoal(
                objects=pair,
                door=door.id,
                description=(
                    f"Grab {descs[0]} and {descs[1]},"
                    f" then exit from the {door.name} door."
                ),
                atoms=frozenset(
                    {
                        GroundAtom("holding", (pair[0],)),
                        GroundAtom("holding", (pair[1],)),
                        GroundAtom("robot-at", (door.id,)),
                    }
                ),
            )
        )

    cells = [
        Cell(cid, x, y, kind)
        for group, kind in (
            (LEFT_ROOM_CELLS, "room-left"),
            (CORRIDOR_CELLS, "corridor"),
            (RIGHT_ROOM_CELLS, "room-right"),
        )
        for cid, x, y in group
    ]
    cells.extend(Cell(d.id, d.x, d.y, "door") for d in doors)

    domain = parse_domain(WAREHOUSE_DOMAIN)
    problem = _build_problem(
        domain, seed, cells, objects, doors, robot_cell, needs_recharge,
        goals[true_goal_index].atoms,
    )
    return Scenario(
        seed=seed,
        needs_recharge=needs_recharge,
        robot_cell=robot_cell,
        station_cell=STATION_CELL,
        cells=tuple(cells),
        objects=tuple(objects),
        doors=doors,
        goals=tuple(goals),
        true_goal_index=true_goal_index,
        domain_text=WAREHOUSE_DOMAIN,
        problem_text=problem_to_pddl(problem),
    )


def _build_problem(
    domain: Domain,
    seed: int,
    cells: list[Cell],
    objects: list[ScenarioObject],
    doors: tuple[ScenarioDoor, ...],
    robot_cell: str,
    needs_recharge: bool,
    goal: frozenset[GroundAtom],
) -> Problem:
    pddl_objects = {c.id: "cell" for c in cells}
    pddl_objects.update({o.id: "item" for o in objects})
    init = {GroundAtom("adjacent", pair) for pair in _adjacency()}
    for door in doors:
        init.add(GroundAtom("adjacent", (door.corner, door.id)))
        init.add(GroundAtom("adjacent", (door.id, door.corner)))
    init.add(GroundAtom("robot-at", (robot_cell,)))
    init.add(GroundAtom("station", (STATION_CELL,)))
    for obj in objects:
        init.add(GroundAtom("at", (obj.id, obj.cell)))
    if not needs_recharge:
        init.add(GroundAtom("charged", ()))
    return Problem(
        name=f"warehouse-{seed}",
        domain_name=domain.name,
        objects=pddl_objects,
        init=frozenset(init),
        goal=goal,
    )


def generate_batch(seed: int, count: int) -> tuple[Scenario, ...]:
    """`count` scenarios at consecutive seeds; exactly half (rounding down)
    of any even-length batch needs a recharge, by the seed parity rule."""
    return tuple(generate_scenario(seed + i) for i in range(count))


CHARGED = GroundAtom("charged", ())


def build_scenario_model(
    scenario: Scenario, *, k: int = 1, tau: float = 1.0
) -> MirrorModel:
    """Observer model: three equiprobable goals, initial charge uncertain."""
    domain = parse_domain(scenario.domain_text)
    problem = parse_problem(scenario.problem_text, domain)
    prior = BeliefPrior(
        base_init=problem.init - {CHARGED},
        uncertain_atoms=(CHARGED,),
        atom_probs=(0.5,),
        goal_pool=scenario.goal_atom_sets(),
        goal_probs=(1 / 3, 1 / 3, 1 / 3),
    )
    return build_model(
        domain,
        problem,
        prior,
        robot_goal_index=scenario.true_goal_index,
        robot_init_choices=(not scenario.needs_recharge,),
        k=k,
        tau=tau,
    )


@dataclass
class ObserverState:
    """The simulated observer: the model plus what has been announced."""

    model: MirrorModel
    scenario: Scenario
    communicated: tuple[GroundAction, ...] = ()

    def goal_probabilities(self) -> tuple[float, ...]:
        post = posterior(self.model, self.communicated)
        # announcements from the robot's own plan never eliminate everything
        if isinstance(post, AllEliminated):
            return (0.0,) * len(self.scenario.goals)
        marginals = post.goal_marginals()
        return tuple(
            marginals.get(g.atoms, 0.0) for g in self.scenario.goals
        )


def observer_predict(state: ObserverState, threshold: float = 0.5) -> int | None:
    """Goal index whose marginal strictly exceeds the threshold, if unique;
    None (don't know) otherwise."""
    probs = state.goal_probabilities()
    best = max(probs)
    if best <= threshold:
        return None
    winners = [i for i, p in enumerate(probs) if p == best]
    if len(winners) > 1:
        return None
    return winners[0]


@dataclass(frozen=True)
class StepRecord:
    """One observer prediction: scenario, strategy, step and outcome."""

    scenario_seed: int
    strategy: str
    step: int
    total_steps: int
    predicted: int | None
    correct: bool

    @property
    def fraction(self) -> float:
        return self.step / self.total_steps

    @property
    def bucket(self) -> float:
        return fraction_bucket(self.step, self.total_steps)


def fraction_bucket(step: int, total: int) -> float:
    """Smallest of the five 0.2-wide buckets containing step/total."""
    return math.ceil(5 * step / total) / 5


def hit_ratio_curve(records: Sequence[StepRecord]) -> dict[str, dict[float, float]]:
    """Per strategy and fraction bucket: correct predictions / predictions.
    A don't-know answer counts as a prediction that missed."""
    curve: dict[str, dict[float, list[int]]] = {}
    for rec in records:
        cell = curve.setdefault(rec.strategy, {}).setdefault(rec.bucket, [0, 0])
        cell[0] += 1
        cell[1] += int(rec.correct)
    return {
        strategy: {b: hits / total for b, (total, hits) in sorted(buckets.items())}
        for strategy, buckets in curve.items()
    }


def earliest_correct_samples(records: Sequence[StepRecord]) -> dict[str, list[float]]:
    """Per strategy, one sample per scenario: the earliest step fraction from
    which the observer stays correct to the end, or (n+1)/n if it never does."""
    grouped: dict[tuple[str, int], list[StepRecord]] = {}
    for rec in records:
        grouped.setdefault((rec.strategy, rec.scenario_seed), []).append(rec)
    samples: dict[str, list[float]] = {}
    for (strategy, _), recs in sorted(grouped.items()):
        recs.sort(key=lambda r: r.step)
        total = recs[-1].total_steps
        earliest = total + 1
        for rec in reversed(recs):
            if rec.correct:
                earliest = rec.step
            else:
                break
        samples.setdefault(strategy, []).append(earliest / total)
    return samples


DEFAULT_STRATEGIES = (
    Strategy.INCREASING,
    Strategy.DECREASING,
    Strategy.INFORMATIVE,
)


@dataclass
class StudySimulation:
    """All records of one simulated study plus the derived statistics."""

    records: list[StepRecord]
    plan_lengths: list[int]
    threshold: float

    @property
    def mean_plan_length(self) -> float:
        return statistics.fmean(self.plan_lengths)

    def curve(self) -> dict[str, dict[float, float]]:
        return hit_ratio_curve(self.records)

    def earliest(self) -> dict[str, list[float]]:
        return earliest_correct_samples(self.records)

    def final_step_hit_ratio(self) -> dict[str, float]:
        totals: dict[str, list[int]] = {}
        for rec in self.records:
            if rec.step == rec.total_steps:
                cell = totals.setdefault(rec.strategy, [0, 0])
                cell[0] += 1
                cell[1] += int(rec.correct)
        return {s: hits / total for s, (total, hits) in sorted(totals.items())}

    def csv(self) -> str:
        lines = ["fraction,strategy,hit_ratio,n"]
        counts: dict[tuple[str, float], list[int]] = {}
        for rec in self.records:
            cell = counts.setdefault((rec.strategy, rec.bucket), [0, 0])
            cell[0] += 1
            cell[1] += int(rec.correct)
        for (strategy, bucket), (total, hits) in sorted(counts.items()):
            lines.append(f"{bucket:.1f},{strategy},{hits / total:.6f},{total}")
        return "\n".join(lines) + "\n"


def simulate_study(
    num_scenarios: int,
    seed: int = 0,
    strategies: Sequence[Strategy] = DEFAULT_STRATEGIES,
    threshold: float = 0.5,
    *,
    k: int = 1,
    tau: float = 1.0,
) -> StudySimulation:
    """Run the incremental-verbalization protocol with the simulated observer.

    Every scenario is evaluated under every strategy (paired samples): at
    step n the observer sees the strategy's size-n verbalization and answers.
    """
    if not strategies:
        raise ValueError("at least one strategy required")
    records: list[StepRecord] = []
    plan_lengths: list[int] = []
    for scenario in generate_batch(seed, num_scenarios):
        model = build_scenario_model(scenario, k=k, tau=tau)
        n = len(model.distinct_actions())
        plan_lengths.append(len(model.robot_plan.actions))
        for strategy in strategies:
            for step in range(1, n + 1):
                selection = select(strategy, model, step)
                state = ObserverState(model, scenario, tuple(selection))
                predicted = observer_predict(state, threshold)
                records.append(
                    StepRecord(
                        scenario_seed=scenario.seed,
                        strategy=strategy.value,
                        step=step,
                        total_steps=n,
                        predicted=predicted,
                        correct=predicted == scenario.true_goal_index,
                    )
                )
    return StudySimulation(records, plan_lengths, threshold)


def significance_test(
    samples_a: Sequence[float],
    samples_b: Sequence[float],
    *,
    resamples: int = 10**5,
    seed: int = 0,
) -> float:
    """One-sided permutation test that mean(a) < mean(b).

    Monte-Carlo over `resamples` seeded relabelings; the add-one estimate
    (count + 1) / (resamples + 1) never reports an exact zero.  Identical
    samples give p = 1.0.
    """
    if len(samples_a) < 2 or len(samples_b) < 2:
        raise ValueError("need at least two samples per group")
    observed = statistics.fmean(samples_a) - statistics.fmean(samples_b)
    pool = list(samples_a) + list(samples_b)
    na = len(samples_a)
    total = sum(pool)
    rng = random.Random(seed)
    count = 0
    for _ in range(resamples):
        rng.shuffle(pool)
        mean_a = sum(pool[:na]) / na
        mean_b = (total - sum(pool[:na])) / (len(pool) - na)
        if mean_a - mean_b <= observed + 1e-12:
            count += 1
    return (count + 1) / (resamples + 1)
