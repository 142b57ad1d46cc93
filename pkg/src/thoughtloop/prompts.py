"""Few-shot prompt assembly and the ablation transforms that derive each baseline.

An exemplar is an annotated reference trajectory (with thoughts). The full
interleaved prompt is the source of truth; every baseline is derived from it
mechanically:

* ``act`` deletes thoughts (and their "OK." echo observations), everything
  else byte-identical;
* ``cot`` keeps the instruction, concatenates the thoughts into a single
  "Thought:" block, and ends with "Answer: <final answer>";
* ``standard`` keeps instruction and answer only;
* ``react-im`` swaps the thoughts for inner-monologue-style annotations
  (goal decomposition / current subgoal only) from a sidecar table.

Prompt composition is a pure function of its inputs; golden-file tests pin
the exact byte layout.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .parsing import LABELED, THOUGHT_ECHO, Counters, SurfaceSyntax, render_step
from .trajectory import Step, StepKind, TaskSpec, Trajectory, action, observation, thought

COT_LEAD_IN = "Let's think step by step."

# Instruction line label per domain; None means the instruction is embedded
# in the environment's opening observation (text-game style).
INSTRUCTION_LABELS: dict[str, str | None] = {
    "wiki-qa": "Question",
    "wiki-fever": "Claim",
    "household": None,
    "shop": "Instruction",
}

# Domains whose environments acknowledge each thought with an echo
# observation; transforms that insert thoughts must insert the echo too.
ECHOING_DOMAINS = frozenset({"household", "shop"})


class AblationMode(str, Enum):
    REACT = "react"
    ACT = "act"
    COT = "cot"
    STANDARD = "standard"
    REACT_IM = "react-im"


class MissingIMAnnotation(KeyError):
    """No inner-monologue sidecar annotation exists for this exemplar."""


class WrongCount(ValueError):
    """permutation_prompt_sets needs exactly three exemplars."""


@dataclass(frozen=True)
class IMThought:
    """A replacement thought inserted before the ``before_action``-th action."""

    before_action: int
    text: str


@dataclass(frozen=True)
class Exemplar:
    """A human-annotated reference trajectory used as an in-context example."""

    id: str
    domain: str
    instruction: str
    steps: tuple[Step, ...]
    cot_marker: bool = False

    @property
    def final_answer(self) -> str:
        for step in reversed(self.steps):
            if step.is_finish:
                return step.args[0] if step.args else ""
        raise ValueError(f"exemplar {self.id} has no finish action")

    @property
    def thoughts(self) -> tuple[Step, ...]:
        return tuple(s for s in self.steps if s.kind is StepKind.THOUGHT)


@dataclass(frozen=True)
class ExemplarSet:
    domain: str
    header: str
    exemplars: tuple[Exemplar, ...]

    def take(self, exemplars: tuple[Exemplar, ...]) -> "ExemplarSet":
        return replace(self, exemplars=exemplars)


def _strip_thoughts(steps: tuple[Step, ...]) -> tuple[Step, ...]:
    """Drop thought steps and the echo observation a game env appends after each."""
    out: list[Step] = []
    skip_echo = False
    for step in steps:
        if step.kind is StepKind.THOUGHT:
            skip_echo = True
            continue
        if skip_echo and step.kind is StepKind.OBSERVATION and step.text == THOUGHT_ECHO:
            skip_echo = False
            continue
        skip_echo = False
        out.append(step)
    return tuple(out)


def _insert_im_thoughts(
    steps: tuple[Step, ...], annotations: tuple[IMThought, ...], echo: bool
) -> tuple[Step, ...]:
    by_action: dict[int, list[str]] = {}
    for note in annotations:
        by_action.setdefault(note.before_action, []).append(note.text)
    out: list[Step] = []
    action_no = 0
    t_index = 0
    o_index = max((s.index for s in steps if s.kind is StepKind.OBSERVATION), default=0)
    for step in steps:
        if step.kind is StepKind.ACTION:
            action_no += 1
            for text in by_action.get(action_no, ()):
                t_index += 1
                out.append(thought(t_index, text))
                if echo:
                    o_index += 1
                    out.append(observation(o_index, THOUGHT_ECHO))
        out.append(step)
    return tuple(out)


def ablate(
    exemplar: Exemplar,
    mode: AblationMode,
    im_annotations: dict[str, tuple[IMThought, ...]] | None = None,
) -> Exemplar:
    """Apply a baseline transform to a full interleaved exemplar.

    Idempotent for ``act`` (an exemplar without thoughts maps to itself).
    ``react-im`` looks the exemplar up in ``im_annotations`` by id and raises
    :class:`MissingIMAnnotation` when absent.
    """
    if mode is AblationMode.REACT:
        return exemplar
    if mode is AblationMode.ACT:
        return replace(exemplar, steps=_strip_thoughts(exemplar.steps))
    if mode is AblationMode.COT:
        joined = " ".join(s.text for s in exemplar.thoughts)
        if exemplar.cot_marker:
            joined = f"{COT_LEAD_IN} {joined}" if joined else COT_LEAD_IN
        steps = (thought(1, joined), action(1, "finish", exemplar.final_answer))
        return replace(exemplar, steps=steps)
    if mode is AblationMode.STANDARD:
        return replace(exemplar, steps=(action(1, "finish", exemplar.final_answer),))
    if mode is AblationMode.REACT_IM:
        notes = (im_annotations or {}).get(exemplar.id)
        if notes is None:
            raise MissingIMAnnotation(exemplar.id)
        stripped = _strip_thoughts(exemplar.steps)
        echo = exemplar.domain in ECHOING_DOMAINS
        return replace(exemplar, steps=_insert_im_thoughts(stripped, notes, echo))
    raise ValueError(f"unknown ablation mode {mode!r}")


def _instruction_line(domain: str, instruction: str) -> str | None:
    label = INSTRUCTION_LABELS.get(domain, "Question")
    if label is None:
        return None
    return f"{label}: {instruction}"


def render_exemplar(
    exemplar: Exemplar,
    mode: AblationMode,
    syntax: SurfaceSyntax,
    im_annotations: dict[str, tuple[IMThought, ...]] | None = None,
) -> str:
    """Render one raw exemplar to prompt text under the given ablation."""
    lines: list[str] = []
    head = _instruction_line(exemplar.domain, exemplar.instruction)
    if head is not None:
        lines.append(head)
    if mode is AblationMode.COT:
        cot = ablate(exemplar, mode)
        lines.append(f"Thought: {cot.steps[0].text}")
        lines.append(f"Answer: {cot.final_answer}")
    elif mode is AblationMode.STANDARD:
        lines.append(f"Answer: {exemplar.final_answer}")
    else:
        for step in ablate(exemplar, mode, im_annotations).steps:
            lines.append(render_step(step, syntax))
    return "\n".join(lines)


def _dense_next_kind(partial: Trajectory) -> StepKind:
    for step in reversed(partial.steps):
        if step.kind is StepKind.THOUGHT:
            return StepKind.ACTION
        if step.kind is StepKind.ACTION:
            return StepKind.THOUGHT
    return StepKind.THOUGHT


def next_cue(mode: AblationMode, syntax: SurfaceSyntax, partial: Trajectory) -> str:
    """The generation cue that follows the rendered partial trajectory."""
    if mode is AblationMode.COT:
        return "Thought:"
    if mode is AblationMode.STANDARD:
        return "Answer:"
    counters = Counters(
        thought=partial.next_index(StepKind.THOUGHT),
        action=partial.next_index(StepKind.ACTION),
        observation=partial.next_index(StepKind.OBSERVATION),
    )
    if syntax.style == LABELED:
        kind = StepKind.ACTION if mode is AblationMode.ACT else _dense_next_kind(partial)
        return syntax.cue(kind, counters)
    return syntax.cue(None, counters)


def compose_prompt(
    exemplar_set: ExemplarSet,
    mode: AblationMode,
    task: TaskSpec,
    partial: Trajectory,
    syntax: SurfaceSyntax,
    im_annotations: dict[str, tuple[IMThought, ...]] | None = None,
    cue: str | None = None,
) -> str:
    """Assemble the full prompt: header, ablated exemplars, partial, cue.

    Layout (frozen by golden tests): header and each exemplar are separated
    by one blank line; the live task block follows the last exemplar after a
    blank line; the cue is the final (unterminated) line.
    """
    if partial.task != task:
        raise ValueError("partial trajectory belongs to a different task")
    blocks: list[str] = []
    if exemplar_set.header:
        blocks.append(exemplar_set.header)
    for ex in exemplar_set.exemplars:
        blocks.append(render_exemplar(ex, mode, syntax, im_annotations))
    task_lines: list[str] = []
    head = _instruction_line(task.domain, task.instruction)
    if head is not None:
        task_lines.append(head)
    for step in partial.steps:
        task_lines.append(render_step(step, syntax))
    task_lines.append(cue if cue is not None else next_cue(mode, syntax, partial))
    blocks.append("\n".join(task_lines))
    return "\n\n".join(blocks)


def permutation_prompt_sets(exemplar_set: ExemplarSet) -> list[ExemplarSet]:
    """All 6 ordered pairs drawn from exactly 3 exemplars, lexicographic order."""
    exemplars = exemplar_set.exemplars
    if len(exemplars) != 3:
        raise WrongCount(f"need exactly 3 exemplars, got {len(exemplars)}")
    out = []
    for i in range(3):
        for j in range(3):
            if i != j:
                out.append(exemplar_set.take((exemplars[i], exemplars[j])))
    return out
