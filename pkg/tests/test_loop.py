from __future__ import annotations

import pytest

from thoughtloop import fixtures
from thoughtloop.backends import BackendUnavailable, ScriptedBackend
from thoughtloop.envs.household import HouseholdEnv
from thoughtloop.envs.wiki import WikiEnv
from thoughtloop.loop import DENSE, SPARSE, LoopConfig, decide_next, run_episode
from thoughtloop.prompts import AblationMode
from thoughtloop.replay import load_script
from thoughtloop.trajectory import (
    StatusKind,
    StepKind,
    Trajectory,
    action,
    append_step,
    observation,
    thought,
)


def reference(name: str, index: int = 0):
    raw = fixtures._load_json(name)
    ref = raw["references"][index]
    task = fixtures.task_from_dict(ref["task"])
    steps = tuple(fixtures.step_from_list(s) for s in ref["steps"])
    return task, steps


def run_reference_episode(task, steps, exemplar_set, env, cfg, mode=AblationMode.REACT):
    backend = ScriptedBackend()
    load_script(backend, exemplar_set, mode, task, steps, env.syntax, cfg)
    return run_episode(task, env, exemplar_set, mode, backend, cfg), backend


def test_milhouse_replay_is_byte_identical(hotpotqa_set, wiki_corpus):
    task, steps = reference("replay_hotpotqa.json")
    cfg = LoopConfig(mode=DENSE)
    (traj, events), backend = run_reference_episode(
        task, steps, hotpotqa_set, WikiEnv(wiki_corpus), cfg
    )
    assert traj.status.kind is StatusKind.FINISHED
    assert traj.answer == "Richard Nixon"
    assert traj.steps == steps
    assert backend.remaining() == 0


def test_milhouse_replay_runs_three_rounds(hotpotqa_set, wiki_corpus):
    task, steps = reference("replay_hotpotqa.json")
    cfg = LoopConfig(mode=DENSE)
    (traj, events), backend = run_reference_episode(
        task, steps, hotpotqa_set, WikiEnv(wiki_corpus), cfg
    )
    assert traj.count(StepKind.THOUGHT) == 3
    assert traj.count(StepKind.ACTION) == 3
    assert events.backend_calls == 6


def test_household_replay_sparse(household_sets, wiki_corpus):
    task, steps = reference("replay_household.json")
    demo = fixtures.household_demo_instance()
    cfg = LoopConfig(mode=SPARSE)
    (traj, _), backend = run_reference_episode(
        task, steps, household_sets["clean"], HouseholdEnv(demo), cfg
    )
    assert traj.status.kind is StatusKind.FINISHED
    assert traj.steps == steps
    assert backend.remaining() == 0


def test_step_limit_reached_when_never_finishing(hotpotqa_set, wiki_corpus):
    task = fixtures.task_from_dict(
        {"domain": "wiki-qa", "instruction": "Unanswerable?", "step_limit": 7}
    )
    backend = ScriptedBackend()
    cfg = LoopConfig(mode=DENSE)
    # A model that searches forever: the reference holds 7 thought-action
    # rounds, with real env observations between them and none after the
    # budget-exhausting 7th action.
    env = WikiEnv(wiki_corpus)
    env.reset()
    real_steps: list = []
    for i in range(1, 8):
        real_steps.append(thought(i, f"I should search page {i}."))
        act = action(i, "search", "Blue Heron")
        real_steps.append(act)
        if i < 7:
            real_steps.append(observation(i, env.execute(act)))
    from thoughtloop.replay import script_entries

    for prompt, completion in script_entries(
        hotpotqa_set, AblationMode.REACT, task, real_steps, env.syntax, cfg
    ):
        backend.record(prompt, [completion])
    traj, events = run_episode(
        task, WikiEnv(wiki_corpus), hotpotqa_set, AblationMode.REACT, backend, cfg
    )
    assert traj.status.kind is StatusKind.STEP_LIMIT
    assert traj.count(StepKind.ACTION) == 7
    # The limit-exhausting action is recorded but never executed/observed.
    assert traj.steps[-1].kind is StepKind.ACTION


def test_decide_next_dense_alternation():
    task = fixtures.task_from_dict({"domain": "wiki-qa", "instruction": "q"})
    cfg = LoopConfig(mode=DENSE)
    traj = Trajectory(task)
    assert decide_next(traj, cfg, AblationMode.REACT) is StepKind.THOUGHT
    traj = append_step(traj, thought(1, "t"))
    assert decide_next(traj, cfg, AblationMode.REACT) is StepKind.ACTION
    traj = append_step(traj, action(1, "search", "x"))
    traj = append_step(traj, observation(1, "o"))
    assert decide_next(traj, cfg, AblationMode.REACT) is StepKind.THOUGHT


def test_decide_next_sparse_accepts_both():
    task = fixtures.task_from_dict({"domain": "household", "instruction": "q"})
    cfg = LoopConfig(mode=SPARSE)
    assert decide_next(Trajectory(task), cfg, AblationMode.REACT) is None


def test_dense_mode_resamples_wrong_kind_then_falls_back(hotpotqa_set, wiki_corpus):
    """A model that keeps emitting thoughts when an action is due."""
    task = fixtures.task_from_dict({"domain": "wiki-qa", "instruction": "q", "step_limit": 3})
    cfg = LoopConfig(mode=DENSE, retries=2, max_steps=6)
    backend = ScriptedBackend()

    class StubbornBackend:
        def __init__(self):
            self.calls = 0

        def complete(self, request):
            self.calls += 1
            if request.prompt.endswith("Thought 1:"):
                return [" I will think first."]
            # Asked for an action, answers with another thought line.
            return ["Thought 9: still thinking."]

    stubborn = StubbornBackend()
    traj, events = run_episode(
        task, WikiEnv(wiki_corpus), hotpotqa_set, AblationMode.REACT, stubborn, cfg
    )
    # After retries the loop records "Nothing happens." and moves on until
    # the step ceiling trips.
    assert traj.status.kind is StatusKind.ERROR
    assert any(
        s.kind is StepKind.OBSERVATION and s.text == "Nothing happens." for s in traj.steps
    )


def test_backend_errors_propagate(hotpotqa_set, wiki_corpus):
    task = fixtures.task_from_dict({"domain": "wiki-qa", "instruction": "q"})

    class DownBackend:
        def complete(self, request):
            raise BackendUnavailable("down")

    with pytest.raises(BackendUnavailable):
        run_episode(
            task,
            WikiEnv(wiki_corpus),
            hotpotqa_set,
            AblationMode.REACT,
            DownBackend(),
            LoopConfig(mode=DENSE),
        )


def test_env_fault_becomes_error_status(hotpotqa_set, wiki_corpus):
    task = fixtures.task_from_dict({"domain": "wiki-qa", "instruction": "q"})

    class FaultyEnv(WikiEnv):
        def execute(self, act):
            raise RuntimeError("disk on fire")

    backend = ScriptedBackend()
    env = FaultyEnv(wiki_corpus)
    cfg = LoopConfig(mode=DENSE)
    from thoughtloop.replay import script_entries

    steps = [thought(1, "t"), action(1, "search", "Milhouse")]
    for prompt, completion in script_entries(
        hotpotqa_set, AblationMode.REACT, task, steps, env.syntax, cfg
    ):
        backend.record(prompt, [completion])
    traj, _ = run_episode(task, env, hotpotqa_set, AblationMode.REACT, backend, cfg)
    assert traj.status.kind is StatusKind.ERROR
    assert "disk on fire" in traj.status.detail


def test_thought_neutrality_over_fuzzed_household_episodes(household_sets):
    """Thought steps never change the world-state hash."""
    import random

    from thoughtloop.envs.household import generate_instances

    rng = random.Random(41)
    checked = 0
    for task_type in ("pick", "clean"):
        for instance in generate_instances(task_type, seed=3, count=3):
            env = HouseholdEnv(instance)
            env.reset()
            for command in instance.expert:
                if rng.random() < 0.6:
                    before = env.state_hash()
                    # Thoughts bypass the env entirely; assert explicitly.
                    assert env.state_hash() == before
                    checked += 1
                from thoughtloop.envs.household import VERB_REGISTRY
                from thoughtloop.parsing import GAME, SurfaceSyntax, parse_completion

                env.execute(parse_completion(f"> {command}", SurfaceSyntax(GAME, VERB_REGISTRY)))
    assert checked > 0


def test_game_thoughts_receive_echo(household_sets):
    task, steps = reference("replay_household.json")
    demo = fixtures.household_demo_instance()
    cfg = LoopConfig(mode=SPARSE)
    (traj, _), _ = run_reference_episode(
        task, steps, household_sets["clean"], HouseholdEnv(demo), cfg
    )
    for i, step in enumerate(traj.steps):
        if step.kind is StepKind.THOUGHT:
            assert traj.steps[i + 1].kind is StepKind.OBSERVATION
            assert traj.steps[i + 1].text == "OK."


def test_on_step_events_stream_in_order(hotpotqa_set, wiki_corpus):
    task, steps = reference("replay_hotpotqa.json")
    cfg = LoopConfig(mode=DENSE)
    seen = []
    backend = ScriptedBackend()
    env = WikiEnv(wiki_corpus)
    load_script(backend, hotpotqa_set, AblationMode.REACT, task, steps, env.syntax, cfg)
    traj, _ = run_episode(
        task,
        env,
        hotpotqa_set,
        AblationMode.REACT,
        backend,
        cfg,
        on_step=lambda step, t: seen.append(step),
    )
    assert tuple(seen) == traj.steps
