"""The policy driver: compose prompt, sample, parse, execute, repeat.

Dense mode (the QA domains) alternates thought and action strictly; sparse
mode (the game domains) lets the model decide when to think. Thoughts never
touch the environment: game-style environments acknowledge them with a
configurable echo observation ("OK."), everything else appends nothing.

Domain actions count against ``task.step_limit``; thoughts do not. A "step"
here is one thought-action-observation round, and the limit is enforced on
action rounds, so a chatty agent cannot starve itself of actions by
thinking. Appending the action that exhausts the budget ends the episode
immediately (that action is recorded but never executed).

Unparseable completions are retried ``retries`` times, then resolved by
appending a "Nothing happens." observation so batch runs never wedge.

``advance_episode`` performs exactly one model step and is the unit the
session service pauses between; ``run_episode`` drives it to a terminal
status.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from .backends import Backend, CompletionRequest
from .envs import Environment
from .parsing import LABELED, Counters, Unparseable, parse_completion
from .prompts import AblationMode, ExemplarSet, IMThought, compose_prompt, next_cue
from .trajectory import (
    Step,
    StepKind,
    TaskSpec,
    Trajectory,
    append_step,
    mark_error,
    mark_finished,
    observation,
)

DENSE = "dense"
SPARSE = "sparse"


@dataclass(frozen=True)
class LoopConfig:
    mode: str = DENSE
    thought_echo: str = "OK."
    retries: int = 1
    temperature: float = 0.0
    max_tokens: int = 512
    # Hard ceiling on appended steps so a thought-only model cannot loop
    # forever (the action budget alone does not bound thoughts in sparse mode).
    max_steps: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in (DENSE, SPARSE):
            raise ValueError(f"mode must be {DENSE!r} or {SPARSE!r}")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")

    def step_ceiling(self, task: TaskSpec) -> int:
        return self.max_steps if self.max_steps is not None else 8 * task.step_limit + 16


def decide_next(traj: Trajectory, cfg: LoopConfig, mode: AblationMode) -> StepKind | None:
    """Expected next step kind; ``None`` means the model decides (sparse)."""
    if cfg.mode == SPARSE:
        return None
    if mode is AblationMode.ACT:
        return StepKind.ACTION
    for step in reversed(traj.steps):
        if step.kind is StepKind.THOUGHT:
            return StepKind.ACTION
        if step.kind is StepKind.ACTION:
            return StepKind.THOUGHT
    return StepKind.THOUGHT


@dataclass
class EpisodeEvents:
    """Byproducts of a run: step stream order and timing."""

    steps: list[Step] = field(default_factory=list)
    backend_calls: int = 0
    wall_time: float = 0.0


StepCallback = Callable[[Step, Trajectory], None]


def start_episode(task: TaskSpec, env: Environment) -> tuple[Trajectory, list[Step]]:
    """Reset the environment and append its opening observation, if any."""
    traj = Trajectory(task)
    appended: list[Step] = []
    opening = env.reset()
    if opening:
        traj = append_step(traj, observation(1, opening))
        appended.append(traj.steps[-1])
    return traj, appended


def advance_episode(
    traj: Trajectory,
    env: Environment,
    exemplar_set: ExemplarSet,
    mode: AblationMode,
    backend: Backend,
    cfg: LoopConfig,
    im_annotations: dict[str, tuple[IMThought, ...]] | None = None,
    events: EpisodeEvents | None = None,
) -> tuple[Trajectory, list[Step]]:
    """One model step: sample, parse, execute; returns (trajectory, new steps).

    The returned trajectory may be terminal (finish action, env goal, step
    budget, error). Backend errors propagate; environment faults become an
    ``error`` status.
    """
    if traj.status.is_terminal:
        return traj, []
    if len(traj) >= cfg.step_ceiling(traj.task):
        return mark_error(traj, "step ceiling reached without a terminal status"), []

    expected = decide_next(traj, cfg, mode)
    step = _sample_step(traj, exemplar_set, mode, backend, cfg, env, expected, events, im_annotations)
    appended: list[Step] = []

    def push(t: Trajectory, s: Step) -> Trajectory:
        appended.append(s)
        return append_step(t, s)

    if step is None:
        # Unparseable (or wrong-kind) output after retries: record the no-op
        # feedback and let the model try again from the new context.
        return (
            push(traj, observation(traj.next_index(StepKind.OBSERVATION), "Nothing happens.")),
            appended,
        )

    if step.kind is StepKind.THOUGHT:
        traj = push(traj, step)
        if env.echoes_thoughts:
            traj = push(traj, observation(traj.next_index(StepKind.OBSERVATION), cfg.thought_echo))
        return traj, appended

    traj = push(traj, step)
    if not traj.status.is_running:
        return traj, appended  # finish action, or the budget-exhausting action
    try:
        obs_text = env.execute(step)
    except Exception as exc:  # env fault
        return mark_error(traj, f"environment fault: {exc}"), appended
    traj = push(traj, observation(traj.next_index(StepKind.OBSERVATION), obs_text))
    if env.is_done():
        traj = mark_finished(traj)
    return traj, appended


def run_episode(
    task: TaskSpec,
    env: Environment,
    exemplar_set: ExemplarSet,
    mode: AblationMode,
    backend: Backend,
    cfg: LoopConfig,
    im_annotations: dict[str, tuple[IMThought, ...]] | None = None,
    on_step: StepCallback | None = None,
    resume_from: Trajectory | None = None,
) -> tuple[Trajectory, EpisodeEvents]:
    """Drive one episode to a terminal status.

    ``resume_from`` continues an existing running trajectory against the
    given environment (callers replay the prefix into a fresh env first).
    """
    started = time.perf_counter()
    events = EpisodeEvents()

    def emit(steps: list[Step], t: Trajectory) -> None:
        for step in steps:
            events.steps.append(step)
            if on_step is not None:
                on_step(step, t)

    if resume_from is not None:
        traj = resume_from
    else:
        traj, appended = start_episode(task, env)
        emit(appended, traj)

    while traj.status.is_running:
        traj, appended = advance_episode(
            traj, env, exemplar_set, mode, backend, cfg, im_annotations, events
        )
        emit(appended, traj)

    events.wall_time = time.perf_counter() - started
    return traj, events


def _sample_step(
    traj: Trajectory,
    exemplar_set: ExemplarSet,
    mode: AblationMode,
    backend: Backend,
    cfg: LoopConfig,
    env: Environment,
    expected: StepKind | None,
    events: EpisodeEvents | None,
    im_annotations: dict[str, tuple[IMThought, ...]] | None,
) -> Step | None:
    syntax = env.syntax
    counters = Counters(
        thought=traj.next_index(StepKind.THOUGHT),
        action=traj.next_index(StepKind.ACTION),
        observation=traj.next_index(StepKind.OBSERVATION),
    )
    cue = (
        syntax.cue(expected, counters)
        if syntax.style == LABELED and expected is not None
        else next_cue(mode, syntax, traj)
    )
    prompt = compose_prompt(exemplar_set, mode, traj.task, traj, syntax, im_annotations, cue=cue)
    for _ in range(cfg.retries + 1):
        texts = backend.complete(
            CompletionRequest(
                prompt=prompt,
                temperature=cfg.temperature,
                max_tokens=cfg.max_tokens,
                stop=syntax.stop,
                n=1,
            )
        )
        if events is not None:
            events.backend_calls += 1
        try:
            step = parse_completion(cue + texts[0], syntax, counters)
        except Unparseable:
            continue
        if step.kind is StepKind.OBSERVATION:
            continue  # models must not speak for the environment
        if expected is not None and step.kind is not expected:
            continue  # dense alternation violated; resample
        return step
    return None
