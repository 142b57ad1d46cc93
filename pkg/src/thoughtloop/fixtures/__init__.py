"""Bundled golden data: exemplar sets, wiki corpus, catalogs, reference trajectories.

Everything under ``data/`` is frozen; ``scripts/build_fixtures.py`` in the
repo root regenerates the derived files (household exemplars, synthetic
catalog rows) but the checked-in bytes are the source of truth for tests.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

from ..envs.household import HouseholdInstance
from ..envs.shop import Catalog, ShopGoal
from ..envs.wiki import WikiCorpus
from ..prompts import Exemplar, ExemplarSet, IMThought
from ..trajectory import Step, StepKind, TaskSpec, task_from_dict


def data_path(name: str) -> Path:
    return Path(str(resources.files(__package__) / "data" / name))


def _load_json(name: str) -> Any:
    return json.loads(data_path(name).read_text(encoding="utf-8"))


def step_from_list(raw: list) -> Step:
    kind = StepKind(raw[0])
    if kind is StepKind.ACTION:
        return Step(kind, raw[1], verb=raw[2], args=tuple(raw[3]))
    return Step(kind, raw[1], text=raw[2])


def step_to_list(step: Step) -> list:
    if step.kind is StepKind.ACTION:
        return [step.kind.value, step.index, step.verb, list(step.args)]
    return [step.kind.value, step.index, step.text]


def _exemplar_from_dict(domain: str, raw: dict) -> Exemplar:
    return Exemplar(
        id=raw["id"],
        domain=domain,
        instruction=raw["instruction"],
        steps=tuple(step_from_list(s) for s in raw["steps"]),
        cot_marker=raw.get("cot_marker", False),
    )


def _exemplar_set_from_dict(raw: dict) -> ExemplarSet:
    domain = raw["domain"]
    return ExemplarSet(
        domain=domain,
        header=raw.get("header", ""),
        exemplars=tuple(_exemplar_from_dict(domain, e) for e in raw["exemplars"]),
    )


def hotpotqa_exemplars() -> ExemplarSet:
    return _exemplar_set_from_dict(_load_json("exemplars_hotpotqa.json"))


def fever_exemplars() -> ExemplarSet:
    return _exemplar_set_from_dict(_load_json("exemplars_fever.json"))


def household_exemplars() -> dict[str, ExemplarSet]:
    """One 3-exemplar set per task type."""
    raw = _load_json("exemplars_household.json")
    return {task_type: _exemplar_set_from_dict(d) for task_type, d in raw.items()}


def household_im_annotations() -> dict[str, tuple[IMThought, ...]]:
    raw = _load_json("im_household.json")
    return {
        exemplar_id: tuple(IMThought(n["before_action"], n["text"]) for n in notes)
        for exemplar_id, notes in raw.items()
    }


def shop_exemplars() -> ExemplarSet:
    return _exemplar_set_from_dict(_load_json("exemplars_shop.json"))


def wiki_corpus() -> WikiCorpus:
    return WikiCorpus.load(str(data_path("wiki_corpus.jsonl")))


def shop_catalog() -> Catalog:
    return Catalog.load(str(data_path("shop_catalog.jsonl")))


def shop_goals() -> dict[str, ShopGoal]:
    out: dict[str, ShopGoal] = {}
    with open(data_path("shop_goals.jsonl"), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                record = json.loads(line)
                out[record["id"]] = ShopGoal.from_dict(record)
    return out


def household_demo_instance() -> HouseholdInstance:
    return HouseholdInstance.from_dict(_load_json("household_demo.json"))


def reference_trajectory(name: str) -> tuple[TaskSpec, tuple[Step, ...]]:
    """A reference episode: (task, full step sequence including observations)."""
    raw = _load_json(name)
    task = task_from_dict(raw["task"])
    steps = tuple(step_from_list(s) for s in raw["steps"])
    return task, steps


def demo_tasks(name: str) -> list[TaskSpec]:
    out = []
    with open(data_path(name), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(task_from_dict(json.loads(line)))
    return out
