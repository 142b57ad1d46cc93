"""Answer-only baselines, self-consistency voting, and the two hybrid strategies.

``cot_sc`` samples n reasoning chains at a fixed temperature and adopts the
plurality answer; answers pool under the same normalization the evaluation
uses for exact match, and ties break toward the earliest sampled answer.
The hybrids chain methods: run the acting agent and fall back to voting when
it runs out of action budget, or vote first and fall back to acting when the
plurality is weaker than half the samples (exact integer comparison).
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .backends import Backend, CompletionRequest
from .envs import Environment
from .loop import EpisodeEvents, LoopConfig, run_episode
from .prompts import AblationMode, ExemplarSet, compose_prompt
from .trajectory import (
    StatusKind,
    TaskSpec,
    Trajectory,
    action,
    append_step,
    thought,
)

_ARTICLES = re.compile(r"\b(a|an|the)\b")


def normalize_answer(text: str) -> str:
    """Lowercase, drop punctuation and articles, collapse whitespace."""
    text = text.casefold()
    text = "".join(ch for ch in text if ch not in string.punctuation)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def exact_match(pred: str, gold: str) -> int:
    return int(normalize_answer(pred) == normalize_answer(gold))


class NoAnswerExtracted(ValueError):
    """No sampled chain produced an "Answer:" line."""


_ANSWER_LINE = re.compile(r"(?:^|\n)Answer:\s*(.*)")


def extract_answer(completion: str) -> str | None:
    match = _ANSWER_LINE.search(completion)
    if match is None:
        return None
    return match.group(1).strip() or None


def plurality(answers: Sequence[str], key: Callable[[str], str] = normalize_answer) -> tuple[int, int]:
    """(index of earliest winning answer, its count) under ``key`` pooling.

    Permutation-invariant except the documented tie-break: among tied pools
    the one whose first occurrence came earliest wins.
    """
    if not answers:
        raise ValueError("no answers to vote over")
    counts: dict[str, int] = {}
    first: dict[str, int] = {}
    for i, answer in enumerate(answers):
        k = key(answer)
        counts[k] = counts.get(k, 0) + 1
        first.setdefault(k, i)
    winner = max(counts, key=lambda k: (counts[k], -first[k]))
    return first[winner], counts[winner]


@dataclass(frozen=True)
class CombinatorConfig:
    n_samples: int = 21
    temperature: float = 0.7
    max_tokens: int = 512
    # Action-round budgets for the acting stage of the hybrids.
    react_step_limits: dict[str, int] = field(
        default_factory=lambda: {"wiki-qa": 7, "wiki-fever": 5}
    )

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    def step_limit_for(self, domain: str) -> int:
        return self.react_step_limits.get(domain, 7)


@dataclass
class DirectResult:
    """One sampled reasoning-only (or answer-only) completion, as a trajectory."""

    answer: str
    trajectory: Trajectory


@dataclass
class VoteResult:
    answer: str
    count: int
    answers: list[str]
    trajectory: Trajectory

    @property
    def n(self) -> int:
        return len(self.answers)


def _direct_trajectory(task: TaskSpec, reasoning: str | None, answer: str) -> Trajectory:
    traj = Trajectory(task)
    if reasoning is not None:
        traj = append_step(traj, thought(1, reasoning))
    return append_step(traj, action(1, "finish", answer))


def run_direct(
    task: TaskSpec,
    exemplar_set: ExemplarSet,
    mode: AblationMode,
    backend: Backend,
    syntax,
    temperature: float = 0.0,
    max_tokens: int = 512,
) -> DirectResult:
    """Single-shot standard or chain-of-thought completion."""
    if mode not in (AblationMode.COT, AblationMode.STANDARD):
        raise ValueError("run_direct handles reasoning-only and answer-only modes")
    prompt = compose_prompt(exemplar_set, mode, task, Trajectory(task), syntax)
    stop = ("\nQuestion:", "\nClaim:", "\n\n")
    text = backend.complete(
        CompletionRequest(prompt=prompt, temperature=temperature, max_tokens=max_tokens, stop=stop)
    )[0]
    if mode is AblationMode.STANDARD:
        answer = text.strip().split("\n")[0].strip()
        if not answer:
            raise NoAnswerExtracted("empty answer completion")
        return DirectResult(answer, _direct_trajectory(task, None, answer))
    full = "Thought:" + text
    answer = extract_answer(full)
    if answer is None:
        raise NoAnswerExtracted(f"no Answer line in: {text[:120]!r}")
    reasoning = full[len("Thought:") : full.index("\nAnswer:")].strip()
    return DirectResult(answer, _direct_trajectory(task, reasoning, answer))


def cot_sc(
    task: TaskSpec,
    exemplar_set: ExemplarSet,
    backend: Backend,
    syntax,
    cfg: CombinatorConfig,
) -> VoteResult:
    """Sample n reasoning chains and adopt the plurality answer.

    Samples without an extractable answer are dropped from the vote;
    raises :class:`NoAnswerExtracted` when every sample drops.
    """
    prompt = compose_prompt(exemplar_set, AblationMode.COT, task, Trajectory(task), syntax)
    stop = ("\nQuestion:", "\nClaim:", "\n\n")
    texts = backend.complete(
        CompletionRequest(
            prompt=prompt,
            temperature=cfg.temperature,
            max_tokens=cfg.max_tokens,
            stop=stop,
            n=cfg.n_samples,
        )
    )
    answers: list[str] = []
    reasonings: list[str] = []
    for text in texts:
        full = "Thought:" + text
        answer = extract_answer(full)
        if answer is None:
            continue
        answers.append(answer)
        reasonings.append(full[len("Thought:") : full.index("\nAnswer:")].strip())
    if not answers:
        raise NoAnswerExtracted(f"none of {len(texts)} samples produced an Answer line")
    win_index, count = plurality(answers)
    answer = answers[win_index]
    traj = _direct_trajectory(task, reasonings[win_index], answer)
    return VoteResult(answer=answer, count=count, answers=answers, trajectory=traj)


@dataclass
class StrategyOutcome:
    """What a (possibly hybrid) strategy produced for one task."""

    trajectory: Trajectory
    answer: str | None
    provenance: str  # react | cotsc | cotsc-fallback | react-fallback | ...
    fallback: bool
    events: EpisodeEvents | None = None
    env_result: dict = field(default_factory=dict)


def run_react(
    task: TaskSpec,
    env: Environment,
    exemplar_set: ExemplarSet,
    mode: AblationMode,
    backend: Backend,
    loop_cfg: LoopConfig,
    im_annotations=None,
) -> StrategyOutcome:
    traj, events = run_episode(
        task, env, exemplar_set, mode, backend, loop_cfg, im_annotations=im_annotations
    )
    return StrategyOutcome(
        trajectory=traj,
        answer=traj.answer,
        provenance=mode.value,
        fallback=False,
        events=events,
        env_result=env.result(),
    )


def react_then_cotsc(
    task: TaskSpec,
    env: Environment,
    exemplar_set: ExemplarSet,
    backend: Backend,
    loop_cfg: LoopConfig,
    cfg: CombinatorConfig,
) -> StrategyOutcome:
    """Act first; when the action budget runs out without an answer, vote."""
    limited = TaskSpec(
        domain=task.domain,
        instruction=task.instruction,
        gold=task.gold,
        step_limit=cfg.step_limit_for(task.domain),
    )
    traj, events = run_episode(limited, env, exemplar_set, AblationMode.REACT, backend, loop_cfg)
    if traj.status.kind is not StatusKind.STEP_LIMIT:
        return StrategyOutcome(
            trajectory=traj,
            answer=traj.answer,
            provenance="react",
            fallback=False,
            events=events,
            env_result=env.result(),
        )
    vote = cot_sc(limited, exemplar_set, backend, env.syntax, cfg)
    return StrategyOutcome(
        trajectory=vote.trajectory,
        answer=vote.answer,
        provenance="cotsc-fallback",
        fallback=True,
        events=events,
    )


def cotsc_then_react(
    task: TaskSpec,
    env: Environment,
    exemplar_set: ExemplarSet,
    backend: Backend,
    loop_cfg: LoopConfig,
    cfg: CombinatorConfig,
) -> StrategyOutcome:
    """Vote first; a plurality below n/2 hands the task to the acting agent.

    The threshold compares exact integers (2 * count < n), never floats.
    """
    vote = cot_sc(task, exemplar_set, backend, env.syntax, cfg)
    if 2 * vote.count >= cfg.n_samples:
        return StrategyOutcome(
            trajectory=vote.trajectory,
            answer=vote.answer,
            provenance="cotsc",
            fallback=False,
        )
    limited = TaskSpec(
        domain=task.domain,
        instruction=task.instruction,
        gold=task.gold,
        step_limit=cfg.step_limit_for(task.domain),
    )
    traj, events = run_episode(limited, env, exemplar_set, AblationMode.REACT, backend, loop_cfg)
    return StrategyOutcome(
        trajectory=traj,
        answer=traj.answer,
        provenance="react-fallback",
        fallback=True,
        events=events,
        env_result=env.result(),
    )
