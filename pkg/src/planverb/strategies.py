"""Verbalization strategies and sentence rendering.

Three ways to pick N of the robot's distinct plan actions:

* increasing: the first N in plan order, announced start to finish;
* decreasing: the N closest to the plan's end, announced end first;
* informative: the subset maximizing information gain against the observer
  model (with a greedy nested variant whose step n extends step n-1).

Rendering turns the selected actions into sentences through per-operator
templates with argument and attribute slots.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path

from .mirror import (
    MirrorModel,
    Verbalization,
    find_most_informative,
    find_most_informative_nested,
)
from .pddl import GroundAction


class Strategy(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    INFORMATIVE = "informative"
    INFORMATIVE_NESTED = "informative-nested"

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        normalized = name.strip().lower().replace("_", "-")
        for member in cls:
            if member.value == normalized:
                return member
        raise ValueError(f"unknown strategy {name!r}")


def distinct_from_end(model: MirrorModel) -> tuple[GroundAction, ...]:
    """Distinct robot-plan actions by first occurrence walking backwards."""
    seen: list[GroundAction] = []
    for action in reversed(model.robot_plan.actions):
        if action not in seen:
            seen.append(action)
    return tuple(seen)


def select(strategy: Strategy, model: MirrorModel, size: int) -> Verbalization:
    """Pick `size` distinct robot-plan actions under the given strategy."""
    n = len(model.distinct_actions())
    if not 1 <= size <= n:
        raise ValueError(f"subset size {size} out of range 1..{n}")
    if strategy is Strategy.INCREASING:
        return Verbalization(model.distinct_actions()[:size])
    if strategy is Strategy.DECREASING:
        return Verbalization(distinct_from_end(model)[:size])
    if strategy is Strategy.INFORMATIVE:
        return find_most_informative(model, size)
    if strategy is Strategy.INFORMATIVE_NESTED:
        return find_most_informative_nested(model, size)
    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass
class TemplateTable:
    """Operator sentence templates plus per-object display attributes.

    Template slots: ``{arg1}`` .. ``{argN}`` insert the pretty name of the
    N-th action argument; ``{attr}`` inserts that attribute of the first
    argument and ``{attr:K}`` of the K-th.  Unknown operators fall back to
    the bare ``(name args)`` form; missing attributes fall back to the raw
    object name, so rendering never fails.
    """

    templates: dict[str, str]
    objects: dict[str, dict[str, str]] = field(default_factory=dict)

    def _pretty(self, obj: str) -> str:
        return self.objects.get(obj, {}).get("name", obj)

    def _attribute(self, obj: str, attr: str) -> str:
        return self.objects.get(obj, {}).get(attr, obj)

    def render_action(self, action: GroundAction) -> str:
        template = self.templates.get(action.name)
        if template is None:
            return str(action)

        def fill(match: re.Match) -> str:
            name = match.group(1)
            arg_digits = re.fullmatch(r"arg(\d+)", name)
            index = match.group(2) or (arg_digits.group(1) if arg_digits else None)
            pos = int(index) - 1 if index else 0
            if not 0 <= pos < len(action.args):
                return match.group(0)
            obj = action.args[pos]
            if arg_digits:
                return self._pretty(obj)
            return self._attribute(obj, name)

        return re.sub(r"\{(\w+)(?::(\d+))?\}", fill, template)


def render(verbalization: Verbalization, table: TemplateTable) -> list[str]:
    """One sentence per selected action, in the verbalization's order."""
    return [table.render_action(a) for a in verbalization.actions]


def load_template_table(path: str | Path, objects: dict[str, dict[str, str]] | None = None) -> TemplateTable:
    """Read ``operator: template`` lines; '#' starts a comment."""
    templates: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ValueError(f"template line needs 'operator: sentence': {raw!r}")
        op, template = line.split(":", 1)
        templates[op.strip().lower()] = template.strip()
    return TemplateTable(templates, objects or {})
