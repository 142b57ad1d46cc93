"""Miniature household text game: rooms of receptacles, portable objects, six goal types.

The world is a flat set of named locations ("cabinet 3", "sinkbasin 1", ...)
holding objects ("knife 1"). The agent stands at one location, can carry one
object, and acts through a small verb set. Legal actions mutate the world and
return a templated observation; anything illegal returns "Nothing happens."
with the world untouched, so a confused agent can never corrupt state.

Goal types: put an object of a kind on a target kind (``pick``), the same
with a clean/hot/cool flag (``clean``/``heat``/``cool``), examine an object
under a toggled-on desklamp (``look``), and place two objects of a kind
(``pick2``). ``generate_instances`` builds seeded solvable instances, each
bundled with an expert action script that provably reaches its goal.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from typing import Any, Iterable

from ..parsing import GAME, SurfaceSyntax, VerbPattern, VerbRegistry
from ..trajectory import Step, StepKind, TaskSpec

NOTHING_HAPPENS = "Nothing happens."
INVENTORY = "inventory"

TASK_TYPES = ("pick", "clean", "heat", "cool", "look", "pick2")

VERB_REGISTRY = VerbRegistry(
    (
        VerbPattern("go to"),
        VerbPattern("open"),
        VerbPattern("close"),
        VerbPattern("take", "from"),
        VerbPattern("put", "in/on"),
        VerbPattern("clean", "with"),
        VerbPattern("heat", "with"),
        VerbPattern("cool", "with"),
        VerbPattern("use"),
        VerbPattern("examine"),
    )
)

OPENABLE_KINDS = {"cabinet", "drawer", "fridge", "microwave"}
CLEANING_STATIONS = {"sinkbasin"}
HEATING_STATIONS = {"microwave"}
COOLING_STATIONS = {"fridge"}
TOGGLEABLE_KINDS = {"desklamp"}


def split_name(name: str) -> tuple[str, int]:
    """"cabinet 3" -> ("cabinet", 3)."""
    parts = name.rsplit(" ", 1)
    if len(parts) == 2 and parts[1].isdigit():
        return parts[0], int(parts[1])
    return name, 0


@dataclass
class Location:
    name: str
    openable: bool = False
    opened: bool = True

    @property
    def kind(self) -> str:
        return split_name(self.name)[0]

    @property
    def visible(self) -> bool:
        return not self.openable or self.opened


@dataclass
class Item:
    name: str
    location: str
    clean: bool = False
    hot: bool = False
    cool: bool = False
    toggled: bool = False

    @property
    def kind(self) -> str:
        return split_name(self.name)[0]


@dataclass
class WorldState:
    locations: dict[str, Location]
    items: dict[str, Item]
    agent_at: str

    def clone(self) -> "WorldState":
        # Manual copy: orders of magnitude faster than deepcopy, and the
        # functional step() clones on every action.
        return WorldState(
            locations={
                name: Location(loc.name, loc.openable, loc.opened)
                for name, loc in self.locations.items()
            },
            items={
                name: Item(i.name, i.location, i.clean, i.hot, i.cool, i.toggled)
                for name, i in self.items.items()
            },
            agent_at=self.agent_at,
        )

    @property
    def holding(self) -> Item | None:
        for item in self.items.values():
            if item.location == INVENTORY:
                return item
        return None

    def items_at(self, location: str) -> list[Item]:
        found = [i for i in self.items.values() if i.location == location]
        return sorted(found, key=lambda i: (i.kind, -split_name(i.name)[1]))

    def state_hash(self) -> str:
        parts = [self.agent_at]
        for name in sorted(self.locations):
            loc = self.locations[name]
            parts.append(f"{name}|{loc.opened}")
        for name in sorted(self.items):
            item = self.items[name]
            parts.append(
                f"{name}|{item.location}|{item.clean}|{item.hot}|{item.cool}|{item.toggled}"
            )
        return hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()

    def room_line(self) -> str:
        names = sorted(self.locations, key=lambda n: (split_name(n)[0], -split_name(n)[1]))
        return "You are in the middle of a room. Looking quickly around you, you see " + _listing(
            names
        ) + "."


def _listing(names: list[str]) -> str:
    phrased = [f"a {n}" for n in names]
    if not phrased:
        return "nothing"
    if len(phrased) == 1:
        return phrased[0]
    if len(phrased) == 2:
        return f"{phrased[0]} and {phrased[1]}"
    return ", ".join(phrased[:-1]) + f", and {phrased[-1]}"


def _contents_sentence(state: WorldState, location: str, preposition: str = "On") -> str:
    items = state.items_at(location)
    if not items:
        return f"{preposition} the {location}, you see nothing."
    return f"{preposition} the {location}, you see " + _listing([i.name for i in items]) + "."


def step(state: WorldState, act: Step) -> tuple[WorldState, str]:
    """Execute one domain action functionally: returns (new state, observation)."""
    if act.kind is not StepKind.ACTION:
        raise ValueError("step expects a domain action")
    new = state.clone()
    obs = _apply(new, act.verb, act.args)
    if obs is None:
        return state, NOTHING_HAPPENS
    return new, obs


def _apply(state: WorldState, verb: str, args: tuple[str, ...]) -> str | None:
    """Mutate ``state`` per the verb; ``None`` signals an illegal action."""
    if verb == "think":
        return "OK."
    if verb == "go to":
        (target,) = args if len(args) == 1 else (None,)
        loc = state.locations.get(target or "")
        if loc is None or state.agent_at == loc.name:
            return None
        state.agent_at = loc.name
        if not loc.visible:
            return f"The {loc.name} is closed."
        return _contents_sentence(state, loc.name)
    if verb == "open":
        (target,) = args if len(args) == 1 else (None,)
        loc = state.locations.get(target or "")
        if loc is None or state.agent_at != loc.name or not loc.openable or loc.opened:
            return None
        loc.opened = True
        listing = _contents_sentence(state, loc.name, "In")
        return f"You open the {loc.name}. The {loc.name} is open. {listing}"
    if verb == "close":
        (target,) = args if len(args) == 1 else (None,)
        loc = state.locations.get(target or "")
        if loc is None or state.agent_at != loc.name or not loc.openable or not loc.opened:
            return None
        loc.opened = False
        return f"You close the {loc.name}."
    if verb == "take":
        if len(args) != 2:
            return None
        obj_name, loc_name = args
        loc = state.locations.get(loc_name)
        item = state.items.get(obj_name)
        if (
            loc is None
            or item is None
            or state.agent_at != loc.name
            or item.location != loc.name
            or not loc.visible
            or state.holding is not None
        ):
            return None
        item.location = INVENTORY
        return f"You pick up the {item.name} from the {loc.name}."
    if verb == "put":
        if len(args) != 2:
            return None
        obj_name, loc_name = args
        loc = state.locations.get(loc_name)
        held = state.holding
        if (
            loc is None
            or held is None
            or held.name != obj_name
            or state.agent_at != loc.name
            or not loc.visible
        ):
            return None
        held.location = loc.name
        return f"You put the {held.name} in/on the {loc.name}."
    if verb in ("clean", "heat", "cool"):
        if len(args) != 2:
            return None
        obj_name, station_name = args
        station = state.locations.get(station_name)
        held = state.holding
        stations = {
            "clean": CLEANING_STATIONS,
            "heat": HEATING_STATIONS,
            "cool": COOLING_STATIONS,
        }[verb]
        if (
            station is None
            or held is None
            or held.name != obj_name
            or state.agent_at != station.name
            or station.kind not in stations
        ):
            return None
        if verb == "clean":
            held.clean = True
        elif verb == "heat":
            held.hot, held.cool = True, False
        else:
            held.cool, held.hot = True, False
        return f"You {verb} the {held.name} using the {station.name}."
    if verb == "use":
        (obj_name,) = args if len(args) == 1 else (None,)
        item = state.items.get(obj_name or "")
        if (
            item is None
            or item.kind not in TOGGLEABLE_KINDS
            or item.location not in (state.agent_at, INVENTORY)
        ):
            return None
        item.toggled = True
        return f"You turn on the {item.name}."
    if verb == "examine":
        (target,) = args if len(args) == 1 else (None,)
        loc = state.locations.get(target or "")
        if loc is not None:
            if state.agent_at != loc.name or not loc.visible:
                return None
            return _contents_sentence(state, loc.name)
        item = state.items.get(target or "")
        if item is not None and item.location in (state.agent_at, INVENTORY):
            return f"There's nothing special about the {item.name}."
        return None
    return None


# ── goals ──────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class GoalSpec:
    """Pure predicate parameters: what kind of object must end up where/how."""

    task_type: str
    object_kind: str
    target_kind: str | None = None

    def __post_init__(self) -> None:
        if self.task_type not in TASK_TYPES:
            raise ValueError(f"unknown task type {self.task_type!r}")
        if self.task_type != "look" and not self.target_kind:
            raise ValueError(f"{self.task_type} goal needs a target kind")

    def instruction(self) -> str:
        if self.task_type == "pick":
            return f"put a {self.object_kind} in {self.target_kind}."
        if self.task_type == "clean":
            return f"put a clean {self.object_kind} in {self.target_kind}."
        if self.task_type == "heat":
            return f"put a hot {self.object_kind} in {self.target_kind}."
        if self.task_type == "cool":
            return f"put a cool {self.object_kind} in {self.target_kind}."
        if self.task_type == "look":
            return f"examine the {self.object_kind} with the desklamp."
        return f"put two {self.object_kind} in {self.target_kind}."


def check_goal(state: WorldState, goal: GoalSpec) -> bool:
    def placed(item: Item) -> bool:
        if item.location in (INVENTORY,):
            return False
        loc = state.locations.get(item.location)
        return loc is not None and loc.kind == goal.target_kind

    matching = [i for i in state.items.values() if i.kind == goal.object_kind]
    if goal.task_type == "pick":
        return any(placed(i) for i in matching)
    if goal.task_type == "clean":
        return any(placed(i) and i.clean for i in matching)
    if goal.task_type == "heat":
        return any(placed(i) and i.hot for i in matching)
    if goal.task_type == "cool":
        return any(placed(i) and i.cool for i in matching)
    if goal.task_type == "look":
        lamp_here = any(
            i.kind in TOGGLEABLE_KINDS and i.toggled and i.location == state.agent_at
            for i in state.items.values()
        )
        held = state.holding
        return lamp_here and held is not None and held.kind == goal.object_kind
    # pick2
    return sum(1 for i in matching if placed(i)) >= 2


# ── instances ──────────────────────────────────────────────────────────────

STEP_LIMIT = 50

_PORTABLE_KINDS = (
    "apple",
    "book",
    "bowl",
    "bread",
    "cellphone",
    "creditcard",
    "cup",
    "egg",
    "fork",
    "keychain",
    "knife",
    "lettuce",
    "mug",
    "pen",
    "pencil",
    "plate",
    "potato",
    "spoon",
    "statue",
    "tomato",
    "vase",
)
_FOOD_KINDS = ("apple", "bread", "egg", "lettuce", "potato", "tomato")
_LOOKABLE_KINDS = ("book", "bowl", "cellphone", "creditcard", "keychain", "pen", "pencil", "statue")
_TARGET_KINDS = ("countertop", "shelf", "sidetable")


@dataclass(frozen=True)
class HouseholdInstance:
    id: str
    task: TaskSpec
    goal: GoalSpec
    world: WorldState
    expert: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "instruction": self.task.instruction,
            "step_limit": self.task.step_limit,
            "goal": {
                "task_type": self.goal.task_type,
                "object_kind": self.goal.object_kind,
                "target_kind": self.goal.target_kind,
            },
            "layout": [
                {"name": l.name, "openable": l.openable, "opened": l.opened}
                for l in self.world.locations.values()
            ],
            "objects": [
                {
                    "name": i.name,
                    "location": i.location,
                    "clean": i.clean,
                    "hot": i.hot,
                    "cool": i.cool,
                    "toggled": i.toggled,
                }
                for i in self.world.items.values()
            ],
            "agent_at": self.world.agent_at,
            "expert": list(self.expert),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "HouseholdInstance":
        world = WorldState(
            locations={
                l["name"]: Location(l["name"], l["openable"], l["opened"])
                for l in data["layout"]
            },
            items={
                o["name"]: Item(
                    o["name"],
                    o["location"],
                    o.get("clean", False),
                    o.get("hot", False),
                    o.get("cool", False),
                    o.get("toggled", False),
                )
                for o in data["objects"]
            },
            agent_at=data["agent_at"],
        )
        goal = GoalSpec(**data["goal"])
        task = TaskSpec(
            domain="household",
            instruction=data["instruction"],
            gold=data["id"],
            step_limit=data.get("step_limit", STEP_LIMIT),
        )
        return cls(data["id"], task, goal, world, tuple(data["expert"]))


def write_instances(path: str, instances: Iterable[HouseholdInstance]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps(inst.to_dict(), ensure_ascii=False) + "\n")


def read_instances(path: str) -> list[HouseholdInstance]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(HouseholdInstance.from_dict(json.loads(line)))
    return out


def _build_layout(rng: random.Random) -> dict[str, Location]:
    locations: dict[str, Location] = {}

    def add(kind: str, count: int, openable: bool = False) -> None:
        for i in range(1, count + 1):
            name = f"{kind} {i}"
            opened = False if openable else True
            locations[name] = Location(name, openable=openable, opened=opened)

    add("cabinet", rng.randint(2, 4), openable=True)
    add("drawer", rng.randint(1, 3), openable=True)
    add("countertop", rng.randint(2, 3))
    add("shelf", rng.randint(1, 3))
    add("sidetable", rng.randint(1, 2))
    add("fridge", 1, openable=True)
    add("microwave", 1, openable=True)
    add("sinkbasin", 1)
    add("garbagecan", 1)
    add("coffeemachine", 1)
    add("toaster", 1)
    return locations


def generate_instances(task_type: str, seed: int, count: int) -> list[HouseholdInstance]:
    """Seeded, solvable task instances with expert scripts.

    Deterministic: the same (task_type, seed, count) always yields identical
    instances. Every returned instance's expert script reaches its goal
    (asserted at generation time).
    """
    if task_type not in TASK_TYPES:
        raise ValueError(f"unknown task type {task_type!r}")
    instances = []
    for i in range(count):
        rng = random.Random(f"household/{task_type}/{seed}/{i}")
        instances.append(_generate_one(task_type, rng, f"{task_type}-{seed}-{i}"))
    return instances


def _generate_one(task_type: str, rng: random.Random, instance_id: str) -> HouseholdInstance:
    locations = _build_layout(rng)
    loc_names = list(locations)
    open_names = [n for n in loc_names if not locations[n].openable]

    if task_type in ("heat", "cool"):
        object_kind = rng.choice(_FOOD_KINDS)
    elif task_type == "look":
        object_kind = rng.choice(_LOOKABLE_KINDS)
    else:
        object_kind = rng.choice(_PORTABLE_KINDS)
    target_kind = rng.choice([k for k in _TARGET_KINDS if any(locations[n].kind == k for n in loc_names)])
    goal = GoalSpec(task_type, object_kind, None if task_type == "look" else target_kind)

    items: dict[str, Item] = {}

    def place(kind: str, location: str) -> Item:
        number = sum(1 for it in items.values() if it.kind == kind) + 1
        item = Item(f"{kind} {number}", location)
        items[item.name] = item
        return item

    # Goal objects start away from the target kind so no instance begins solved.
    non_target = [n for n in loc_names if locations[n].kind != target_kind]
    goal_count = 2 if task_type == "pick2" else 1
    goal_items = [place(object_kind, rng.choice(non_target)) for _ in range(goal_count)]

    lamp = None
    if task_type == "look":
        lamp_spot = rng.choice([n for n in open_names if locations[n].kind in _TARGET_KINDS])
        lamp = place("desklamp", lamp_spot)

    for _ in range(rng.randint(4, 9)):
        kind = rng.choice([k for k in _PORTABLE_KINDS if k != object_kind])
        place(kind, rng.choice(loc_names))

    # The agent starts in the middle of the room, at no particular receptacle.
    world = WorldState(locations=locations, items=items, agent_at="")

    expert = _expert_script(world, goal, goal_items, lamp)
    task = TaskSpec(
        domain="household",
        instruction=goal.instruction(),
        gold=instance_id,
        step_limit=STEP_LIMIT,
    )
    instance = HouseholdInstance(instance_id, task, goal, world, tuple(expert))
    ok, transcript = run_expert(instance)
    if not ok:
        raise AssertionError(
            f"generated instance {instance_id} has a failing expert script:\n" + transcript
        )
    return instance


def _expert_script(
    world: WorldState, goal: GoalSpec, goal_items: list[Item], lamp: Item | None
) -> list[str]:
    script: list[str] = []
    at = world.agent_at
    opened = {name for name, loc in world.locations.items() if loc.visible}

    def visit(location: str) -> None:
        nonlocal at
        if at != location:
            script.append(f"go to {location}")
            at = location
        if location not in opened:
            script.append(f"open {location}")
            opened.add(location)

    def first_target() -> str:
        names = [n for n, l in world.locations.items() if l.kind == goal.target_kind]
        return sorted(names, key=lambda n: split_name(n)[1])[0]

    if goal.task_type == "look":
        assert lamp is not None
        item = goal_items[0]
        visit(item.location)
        script.append(f"take {item.name} from {item.location}")
        visit(lamp.location)
        script.append(f"use {lamp.name}")
        return script

    target = first_target()
    for item in goal_items:
        visit(item.location)
        script.append(f"take {item.name} from {item.location}")
        if goal.task_type == "clean":
            visit("sinkbasin 1")
            script.append(f"clean {item.name} with sinkbasin 1")
        elif goal.task_type == "heat":
            visit("microwave 1")
            script.append(f"heat {item.name} with microwave 1")
        elif goal.task_type == "cool":
            visit("fridge 1")
            script.append(f"cool {item.name} with fridge 1")
        visit(target)
        script.append(f"put {item.name} in/on {target}")
    return script


def run_expert(instance: HouseholdInstance) -> tuple[bool, str]:
    """Execute the expert script from the initial state; returns (goal met, transcript)."""
    from ..parsing import parse_completion

    syntax = SurfaceSyntax(GAME, VERB_REGISTRY)
    state = instance.world.clone()
    lines = []
    for command in instance.expert:
        act = parse_completion(f"> {command}", syntax)
        state, obs = step(state, act)
        lines.append(f"> {command}\n{obs}")
        if obs == NOTHING_HAPPENS:
            return False, "\n".join(lines)
        if check_goal(state, instance.goal):
            return True, "\n".join(lines)
    return check_goal(state, instance.goal), "\n".join(lines)


class HouseholdEnv:
    """Environment adapter over one instance's world state."""

    echoes_thoughts = True

    def __init__(self, instance: HouseholdInstance) -> None:
        self.instance = instance
        self.syntax = SurfaceSyntax(GAME, VERB_REGISTRY)
        self.state = instance.world.clone()

    def reset(self) -> str | None:
        self.state = self.instance.world.clone()
        return f"{self.state.room_line()}\nYour task is to: {self.instance.task.instruction}"

    def execute(self, act: Step) -> str:
        self.state, obs = step(self.state, act)
        return obs

    def is_done(self) -> bool:
        return check_goal(self.state, self.instance.goal)

    def result(self) -> dict[str, Any]:
        return {"success": self.is_done()}

    def state_hash(self) -> str:
        return self.state.state_hash()
