"""Trajectory data model: steps, tasks, episode status, and the line-delimited log format.

A trajectory is the agent's context: the ordered record of thoughts, domain
actions, and environment observations for one episode. Values are immutable;
``append_step`` returns a new trajectory, so snapshots can be shared freely
across threads while a single writer drives the episode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Iterator

FINISH_VERB = "finish"

DOMAINS = ("wiki-qa", "wiki-fever", "household", "shop")


class StepKind(str, Enum):
    THOUGHT = "thought"
    ACTION = "action"
    OBSERVATION = "observation"


class TrajectoryError(Exception):
    """Base class for trajectory errors."""


class MalformedStep(TrajectoryError):
    """Step violates a structural invariant (empty verb, bad index, ...)."""


class AppendToTerminal(TrajectoryError):
    """Append was attempted on a trajectory that already terminated."""


class ParseError(TrajectoryError):
    """A persisted record could not be decoded.

    ``offset`` is the byte offset of the failure within the record.
    """

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Step:
    """One unit of a trajectory: a thought, a domain action, or an observation.

    ``index`` is the per-kind counter as printed in transcripts ("Thought 3"
    is the third thought of the episode, independent of how many actions or
    observations came before it). Thoughts and observations carry ``text``;
    actions carry ``verb`` plus ``args``.
    """

    kind: StepKind
    index: int
    text: str = ""
    verb: str = ""
    args: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.index < 1:
            raise MalformedStep(f"step index must be >= 1, got {self.index}")
        if self.kind is StepKind.ACTION:
            if not self.verb:
                raise MalformedStep("domain action requires a non-empty verb")
            if self.text:
                raise MalformedStep("domain action carries verb/args, not text")
        elif self.verb or self.args:
            raise MalformedStep(f"{self.kind.value} step cannot carry verb/args")

    @property
    def is_finish(self) -> bool:
        return self.kind is StepKind.ACTION and self.verb == FINISH_VERB


def thought(index: int, text: str) -> Step:
    return Step(StepKind.THOUGHT, index, text=text)


def action(index: int, verb: str, *args: str) -> Step:
    return Step(StepKind.ACTION, index, verb=verb, args=tuple(args))


def observation(index: int, text: str) -> Step:
    return Step(StepKind.OBSERVATION, index, text=text)


class StatusKind(str, Enum):
    RUNNING = "running"
    FINISHED = "finished"
    STEP_LIMIT = "step_limit"
    ERROR = "error"


@dataclass(frozen=True)
class Status:
    """Episode status; ``detail`` holds the answer (finished) or reason (error)."""

    kind: StatusKind
    detail: str = ""

    @staticmethod
    def running() -> "Status":
        return Status(StatusKind.RUNNING)

    @staticmethod
    def finished(answer: str) -> "Status":
        return Status(StatusKind.FINISHED, answer)

    @staticmethod
    def step_limit() -> "Status":
        return Status(StatusKind.STEP_LIMIT)

    @staticmethod
    def error(reason: str) -> "Status":
        return Status(StatusKind.ERROR, reason)

    @property
    def is_running(self) -> bool:
        return self.kind is StatusKind.RUNNING

    @property
    def is_terminal(self) -> bool:
        return not self.is_running


@dataclass(frozen=True)
class TaskSpec:
    """What the episode is about: domain, instruction, optional gold target.

    ``step_limit`` bounds domain actions only; thoughts are free (see the
    loop module for why). ``gold`` is the reference answer for QA domains or
    a goal/instance id for the game domains.
    """

    domain: str
    instruction: str
    gold: str | None = None
    step_limit: int = 7

    def __post_init__(self) -> None:
        if not self.instruction:
            raise ValueError("task instruction must be non-empty")
        if self.step_limit < 1:
            raise ValueError("step_limit must be >= 1")
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r} (expected one of {DOMAINS})")


@dataclass(frozen=True)
class Trajectory:
    """Append-only step sequence for one episode."""

    task: TaskSpec
    steps: tuple[Step, ...] = ()
    status: Status = field(default_factory=Status.running)

    def __iter__(self) -> Iterator[Step]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def last(self) -> Step | None:
        return self.steps[-1] if self.steps else None

    def count(self, kind: StepKind) -> int:
        return sum(1 for s in self.steps if s.kind is kind)

    def next_index(self, kind: StepKind) -> int:
        for s in reversed(self.steps):
            if s.kind is kind:
                return s.index + 1
        return 1

    @property
    def action_count(self) -> int:
        return self.count(StepKind.ACTION)

    @property
    def answer(self) -> str | None:
        if self.status.kind is StatusKind.FINISHED:
            return self.status.detail
        return None


def append_step(traj: Trajectory, step: Step) -> Trajectory:
    """Return ``traj`` extended by one step.

    Appending the ``finish`` action flips status to finished with the first
    argument as the answer. Appending the domain action that exhausts
    ``task.step_limit`` (without finishing) flips status to step-limit; that
    action is recorded but the episode is over, so it never receives an
    observation.
    """
    if traj.status.is_terminal:
        raise AppendToTerminal(f"cannot append to {traj.status.kind.value} trajectory")
    for prev in reversed(traj.steps):
        if prev.kind is step.kind:
            if step.index <= prev.index:
                raise MalformedStep(
                    f"{step.kind.value} index {step.index} not above previous {prev.index}"
                )
            break
    status = traj.status
    if step.is_finish:
        status = Status.finished(step.args[0].strip() if step.args else "")
    elif step.kind is StepKind.ACTION and traj.action_count + 1 >= traj.task.step_limit:
        status = Status.step_limit()
    return Trajectory(task=traj.task, steps=traj.steps + (step,), status=status)


def mark_finished(traj: Trajectory, answer: str = "") -> Trajectory:
    """Terminate an episode from outside the step stream (e.g. a game goal was met)."""
    if traj.status.is_terminal:
        raise AppendToTerminal("trajectory already terminal")
    return replace(traj, status=Status.finished(answer))


def mark_error(traj: Trajectory, reason: str) -> Trajectory:
    if traj.status.is_terminal:
        raise AppendToTerminal("trajectory already terminal")
    return replace(traj, status=Status.error(reason))


def check_observation_pairing(traj: Trajectory, thought_echo: str = "OK.") -> list[str]:
    """Scan for violations of the action/observation pairing rules.

    Every non-``finish`` domain action must be followed by exactly one
    observation before the next action; a trailing unobserved action is
    allowed only on a terminal trajectory (the episode was cut there). A
    thought may be followed only by the echo acknowledgment (game-style
    environments) or the loop's "Nothing happens." fallback. Returns a list
    of human-readable violations, empty when clean.
    """
    problems: list[str] = []
    pending: Step | None = None
    pending_obs = 0
    prev: Step | None = None
    for pos, step in enumerate(traj.steps):
        if step.kind is StepKind.ACTION:
            if pending is not None and pending_obs != 1:
                problems.append(
                    f"action {pending.verb!r} (#{pending.index}) has {pending_obs} observations"
                )
            pending, pending_obs = (None, 0) if step.is_finish else (step, 0)
        elif step.kind is StepKind.OBSERVATION:
            if pending is not None:
                pending_obs += 1
            elif prev is not None and prev.kind is StepKind.THOUGHT:
                if step.text not in (thought_echo, "Nothing happens."):
                    problems.append(
                        f"thought #{prev.index} followed by observation {step.text!r} at step {pos}"
                    )
        prev = step
    if pending is not None and pending_obs != 1:
        if pending_obs > 1 or not traj.status.is_terminal:
            problems.append(
                f"trailing action {pending.verb!r} (#{pending.index}) has {pending_obs} observations"
            )
    return problems


# ── persistence ────────────────────────────────────────────────────────────
# One trajectory per line, UTF-8 JSON with stable field names: task, steps[],
# status. See README for the schema.


def step_to_dict(step: Step) -> dict[str, Any]:
    d: dict[str, Any] = {"kind": step.kind.value, "index": step.index}
    if step.kind is StepKind.ACTION:
        d["verb"] = step.verb
        d["args"] = list(step.args)
    else:
        d["text"] = step.text
    return d


def step_from_dict(d: dict[str, Any]) -> Step:
    kind = StepKind(d["kind"])
    if kind is StepKind.ACTION:
        return Step(kind, d["index"], verb=d["verb"], args=tuple(d.get("args", ())))
    return Step(kind, d["index"], text=d.get("text", ""))


def task_to_dict(task: TaskSpec) -> dict[str, Any]:
    return {
        "domain": task.domain,
        "instruction": task.instruction,
        "gold": task.gold,
        "step_limit": task.step_limit,
    }


def task_from_dict(d: dict[str, Any]) -> TaskSpec:
    return TaskSpec(
        domain=d["domain"],
        instruction=d["instruction"],
        gold=d.get("gold"),
        step_limit=d.get("step_limit", 7),
    )


def serialize(traj: Trajectory) -> str:
    """Encode one trajectory as a single JSON line (no trailing newline)."""
    record = {
        "task": task_to_dict(traj.task),
        "steps": [step_to_dict(s) for s in traj.steps],
        "status": {"kind": traj.status.kind.value, "detail": traj.status.detail},
    }
    return json.dumps(record, ensure_ascii=False)


def deserialize(record: str) -> Trajectory:
    """Decode a record produced by :func:`serialize` (round-trip identity)."""
    try:
        data = json.loads(record)
    except json.JSONDecodeError as exc:
        offset = len(record[: exc.pos].encode("utf-8"))
        raise ParseError(f"bad JSON: {exc.msg}", offset) from exc
    try:
        task = task_from_dict(data["task"])
        steps = tuple(step_from_dict(s) for s in data["steps"])
        status = Status(StatusKind(data["status"]["kind"]), data["status"].get("detail", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad record structure: {exc}") from exc
    return Trajectory(task=task, steps=steps, status=status)


def write_log(path: str, trajectories: Iterable[Trajectory]) -> int:
    """Write a line-delimited trajectory log; returns the record count."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for traj in trajectories:
            fh.write(serialize(traj) + "\n")
            n += 1
    return n


def read_log(path: str) -> list[Trajectory]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line:
                out.append(deserialize(line))
    return out
