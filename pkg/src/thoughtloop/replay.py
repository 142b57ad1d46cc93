"""Convert reference trajectories into scripted-backend tables.

Given the steps of a known-good trajectory, reconstruct the exact prompt the
loop will issue before each thought/action and register the step's rendered
text as the canned completion. Prompt construction is shared with the live
loop (``compose_prompt``/``next_cue``), so a drifting convention breaks both
sides identically and the replay test stays honest: observations are NOT
scripted -- they come from the environment at run time, and any divergence
from the reference surfaces as a scripted-table miss or a byte diff.
"""

from __future__ import annotations

from .backends import ScriptedBackend
from .loop import LoopConfig, decide_next
from .parsing import LABELED, Counters, SurfaceSyntax, render_step
from .prompts import AblationMode, ExemplarSet, IMThought, compose_prompt, next_cue
from .trajectory import Step, StepKind, TaskSpec, Trajectory, append_step


def script_entries(
    exemplar_set: ExemplarSet,
    mode: AblationMode,
    task: TaskSpec,
    steps: tuple[Step, ...] | list[Step],
    syntax: SurfaceSyntax,
    cfg: LoopConfig,
    im_annotations: dict[str, tuple[IMThought, ...]] | None = None,
) -> list[tuple[str, str]]:
    """(prompt, completion) pairs for each generated step of the reference.

    Observation steps advance the simulated context without an entry: the
    environment will produce them live (an observation-initial reference is
    simply the environment's opening message).
    """
    entries: list[tuple[str, str]] = []
    traj = Trajectory(task)
    for step in steps:
        if step.kind is StepKind.OBSERVATION:
            traj = append_step(traj, step)
            continue
        counters = Counters(
            thought=traj.next_index(StepKind.THOUGHT),
            action=traj.next_index(StepKind.ACTION),
            observation=traj.next_index(StepKind.OBSERVATION),
        )
        expected = decide_next(traj, cfg, mode)
        cue = (
            syntax.cue(expected, counters)
            if syntax.style == LABELED and expected is not None
            else next_cue(mode, syntax, traj)
        )
        prompt = compose_prompt(exemplar_set, mode, task, traj, syntax, im_annotations, cue=cue)
        rendered = render_step(step, syntax)
        if not rendered.startswith(cue):
            raise ValueError(
                f"reference step {rendered!r} does not continue cue {cue!r}; "
                "the reference order violates the loop mode"
            )
        entries.append((prompt, rendered[len(cue) :]))
        traj = append_step(traj, step)
    return entries


def load_script(
    backend: ScriptedBackend,
    exemplar_set: ExemplarSet,
    mode: AblationMode,
    task: TaskSpec,
    steps: tuple[Step, ...] | list[Step],
    syntax: SurfaceSyntax,
    cfg: LoopConfig,
    im_annotations: dict[str, tuple[IMThought, ...]] | None = None,
) -> None:
    """Register a reference trajectory's completions into a scripted backend."""
    for prompt, completion in script_entries(
        exemplar_set, mode, task, steps, syntax, cfg, im_annotations
    ):
        backend.record(prompt, [completion])
