"""Bidirectional step <-> text conversion for each environment's surface syntax.

Three syntaxes cover the bundled environments:

* ``labeled`` -- "Thought 3: ...", "Action 3: Search[x]", "Observation 3: ..."
  (wiki QA and fact checking).
* ``game`` -- "> go to cabinet 1" command lines, thoughts as "> think: ...",
  observations as bare lines (household text game).
* ``shop`` -- "Action: search[query]" / "Action: click[widget]" blocks,
  thoughts as "Action: think[...]", observations as "Observation: ..." blocks.

``STOP_SEQUENCES`` publishes the stop strings a language-model backend should
receive for each syntax so a completion ends at a step boundary; the parser
additionally discards anything past the first complete step.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .trajectory import Step, StepKind, action, observation, thought

LABELED = "labeled"
GAME = "game"
SHOP = "shop"

SYNTAXES = (LABELED, GAME, SHOP)

# Stop strings to pass to the LM per syntax (step boundary markers).
STOP_SEQUENCES: dict[str, tuple[str, ...]] = {
    LABELED: ("\nObservation",),
    GAME: ("\n",),
    SHOP: ("\nObservation",),
}

THOUGHT_ECHO = "OK."


class Unparseable(ValueError):
    """The completion did not contain a recognizable step."""

    def __init__(self, text: str, reason: str = ""):
        detail = f": {reason}" if reason else ""
        super().__init__(f"unparseable completion{detail}: {text[:120]!r}")
        self.text = text


@dataclass(frozen=True)
class VerbPattern:
    """One game-style verb: a leading phrase and an optional argument separator.

    "take knife 1 from countertop 2" matches ``VerbPattern("take", "from")``
    giving args ("knife 1", "countertop 2").
    """

    verb: str
    separator: str | None = None


@dataclass(frozen=True)
class VerbRegistry:
    """Ordered verb patterns for game-style parsing (longest phrase wins)."""

    patterns: tuple[VerbPattern, ...]

    def match(self, text: str) -> Step | None:
        for pat in sorted(self.patterns, key=lambda p: -len(p.verb)):
            if text == pat.verb:
                return action(1, pat.verb)
            if text.startswith(pat.verb + " "):
                rest = text[len(pat.verb) + 1 :]
                if pat.separator is not None:
                    sep = f" {pat.separator} "
                    if sep not in rest:
                        return None
                    left, right = rest.split(sep, 1)
                    return action(1, pat.verb, left, right)
                return action(1, pat.verb, rest)
        return None


@dataclass(frozen=True)
class Counters:
    """Next per-kind indices, supplied by the caller for index-free syntaxes."""

    thought: int = 1
    action: int = 1
    observation: int = 1

    def index_for(self, kind: StepKind) -> int:
        return {
            StepKind.THOUGHT: self.thought,
            StepKind.ACTION: self.action,
            StepKind.OBSERVATION: self.observation,
        }[kind]


@dataclass(frozen=True)
class SurfaceSyntax:
    """A parse/render pair; ``verbs`` is required for the game style."""

    style: str
    verbs: VerbRegistry | None = None

    def __post_init__(self) -> None:
        if self.style not in SYNTAXES:
            raise ValueError(f"unknown syntax style {self.style!r}")
        if self.style == GAME and self.verbs is None:
            raise ValueError("game syntax requires a verb registry")

    @property
    def stop(self) -> tuple[str, ...]:
        return STOP_SEQUENCES[self.style]

    def cue(self, kind: StepKind | None, counters: Counters) -> str:
        """The generation cue appended after the rendered context.

        Dense-mode loops cue a specific kind; sparse-mode loops pass ``None``
        and let the model pick.
        """
        if self.style == LABELED:
            if kind is StepKind.THOUGHT:
                return f"Thought {counters.thought}:"
            if kind is StepKind.ACTION:
                return f"Action {counters.action}:"
            raise ValueError("labeled syntax cues thoughts or actions only")
        if self.style == GAME:
            return ">"
        return "Action:"


_LABELED_HEADER = re.compile(r"^(Thought|Action|Observation) (\d+):(.*)$")
_BRACKET = re.compile(r"^\s*([A-Za-z][A-Za-z ]*?)\[(.*)\]\s*$", re.DOTALL)


def _parse_bracket_action(text: str) -> tuple[str, str]:
    """Split "Search[Colorado orogeny]" into a lowercase verb and its argument.

    Nested brackets are rejected; the bundled prompt formats never nest.
    """
    m = _BRACKET.match(text)
    if not m:
        raise Unparseable(text, "expected verb[argument]")
    verb, arg = m.group(1).strip().lower(), m.group(2)
    if "[" in arg or "]" in arg:
        raise Unparseable(text, "nested brackets are not allowed")
    return verb, arg


def _first_labeled_step(text: str) -> Step:
    lines = text.split("\n")
    start = None
    header = None
    for i, line in enumerate(lines):
        m = _LABELED_HEADER.match(line)
        if m:
            start, header = i, m
            break
    if header is None or start is None:
        raise Unparseable(text, "no labeled step header found")
    kind_word, index, first = header.group(1), int(header.group(2)), header.group(3)
    body_lines = [first.strip()]
    for line in lines[start + 1 :]:
        if _LABELED_HEADER.match(line):
            break
        body_lines.append(line)
    while len(body_lines) > 1 and not body_lines[-1].strip():
        body_lines.pop()
    body = "\n".join(body_lines)
    if kind_word == "Thought":
        return thought(index, body)
    if kind_word == "Observation":
        return observation(index, body)
    verb, arg = _parse_bracket_action(body)
    return Step(StepKind.ACTION, index, verb=verb, args=(arg,))


def _first_game_step(text: str, syntax: SurfaceSyntax, counters: Counters) -> Step:
    assert syntax.verbs is not None
    lines = [ln for ln in text.split("\n")]
    for pos, raw in enumerate(lines):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            body = line[1:].strip()
            if body.startswith("think:"):
                return thought(counters.thought, body[len("think:") :].strip())
            step = syntax.verbs.match(body)
            if step is None:
                raise Unparseable(text, f"verb not in registry: {body!r}")
            return Step(StepKind.ACTION, counters.action, verb=step.verb, args=step.args)
        # Bare line: an observation, possibly multi-line up to the next command.
        obs_lines = [line]
        for nxt in lines[pos + 1 :]:
            if nxt.strip().startswith(">"):
                break
            obs_lines.append(nxt)
        while obs_lines and not obs_lines[-1].strip():
            obs_lines.pop()
        return observation(counters.observation, "\n".join(obs_lines))
    raise Unparseable(text, "empty completion")


def _first_shop_step(text: str, counters: Counters) -> Step:
    lines = text.split("\n")
    for pos, raw in enumerate(lines):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("Observation:"):
            rest = line[len("Observation:") :].strip()
            if rest:
                return observation(counters.observation, rest)
            block: list[str] = []
            for nxt in lines[pos + 1 :]:
                if nxt.startswith("Action:") or nxt.startswith("Observation:"):
                    break
                block.append(nxt)
            while block and not block[-1].strip():
                block.pop()
            return observation(counters.observation, "\n".join(block))
        if line.startswith("Action:"):
            line = line[len("Action:") :].strip()
        verb, arg = _parse_bracket_action(line)
        if verb == "think":
            return thought(counters.thought, arg)
        return Step(StepKind.ACTION, counters.action, verb=verb, args=(arg,))
    raise Unparseable(text, "empty completion")


def parse_completion(
    text: str,
    syntax: SurfaceSyntax,
    counters: Counters | None = None,
) -> Step:
    """Extract the first complete step from a raw completion.

    ``counters`` supplies the per-kind indices for the game and shop styles,
    which do not print them; the labeled style trusts its printed index.
    Trailing content beyond the first step is discarded. Raises
    :class:`Unparseable` when no step can be extracted.
    """
    if not text or not text.strip():
        raise Unparseable(text, "empty completion")
    counters = counters or Counters()
    if syntax.style == LABELED:
        return _first_labeled_step(text)
    if syntax.style == GAME:
        return _first_game_step(text, syntax, counters)
    return _first_shop_step(text, counters)


def render_step(step: Step, syntax: SurfaceSyntax) -> str:
    """Render a step back to its surface form; total on well-formed steps."""
    if syntax.style == LABELED:
        if step.kind is StepKind.THOUGHT:
            return f"Thought {step.index}: {step.text}"
        if step.kind is StepKind.OBSERVATION:
            return f"Observation {step.index}: {step.text}"
        arg = step.args[0] if step.args else ""
        return f"Action {step.index}: {step.verb.capitalize()}[{arg}]"
    if syntax.style == GAME:
        if step.kind is StepKind.THOUGHT:
            return f"> think: {step.text}"
        if step.kind is StepKind.OBSERVATION:
            return step.text
        if len(step.args) == 2:
            assert syntax.verbs is not None
            sep = next(
                (p.separator for p in syntax.verbs.patterns if p.verb == step.verb), None
            )
            if sep is None:
                raise ValueError(f"two-argument verb {step.verb!r} not in registry")
            return f"> {step.verb} {step.args[0]} {sep} {step.args[1]}"
        tail = f" {step.args[0]}" if step.args else ""
        return f"> {step.verb}{tail}"
    # shop
    if step.kind is StepKind.THOUGHT:
        return f"Action: think[{step.text}]"
    if step.kind is StepKind.OBSERVATION:
        if "\n" in step.text:
            return f"Observation:\n{step.text}"
        return f"Observation: {step.text}"
    arg = step.args[0] if step.args else ""
    return f"Action: {step.verb}[{arg}]"


def truncate_at_stop(text: str, stop: tuple[str, ...]) -> str:
    """Cut ``text`` at the earliest stop sequence, mirroring LM-side stops."""
    cut = len(text)
    for s in stop:
        pos = text.find(s)
        if pos != -1:
            cut = min(cut, pos)
    return text[:cut]
