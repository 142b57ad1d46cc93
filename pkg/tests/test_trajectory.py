from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thoughtloop import fixtures
from thoughtloop.trajectory import (
    AppendToTerminal,
    MalformedStep,
    ParseError,
    StatusKind,
    Step,
    StepKind,
    TaskSpec,
    Trajectory,
    action,
    append_step,
    check_observation_pairing,
    deserialize,
    mark_finished,
    observation,
    serialize,
    thought,
)

TASK = TaskSpec(domain="wiki-qa", instruction="Who founded the town?", gold="Nobody", step_limit=7)


def test_append_thought_keeps_running():
    traj = append_step(Trajectory(TASK), thought(1, "I need to search the town."))
    assert len(traj) == 1
    assert traj.status.kind is StatusKind.RUNNING


def test_finish_action_terminates_with_answer():
    traj = append_step(Trajectory(TASK), action(1, "finish", "Richard Nixon"))
    assert traj.status.kind is StatusKind.FINISHED
    assert traj.answer == "Richard Nixon"


def test_append_to_terminal_rejected():
    traj = append_step(Trajectory(TASK), action(1, "finish", "x"))
    with pytest.raises(AppendToTerminal):
        append_step(traj, thought(1, "more"))


def test_append_preserves_prior_steps():
    traj = Trajectory(TASK)
    steps = [thought(1, "a"), action(1, "search", "b"), observation(1, "c")]
    for step in steps:
        prev = traj.steps
        traj = append_step(traj, step)
        assert traj.steps[: len(prev)] == prev
    assert [s.kind for s in traj.steps] == [StepKind.THOUGHT, StepKind.ACTION, StepKind.OBSERVATION]


def test_step_limit_reached_without_finish():
    task = TaskSpec(domain="wiki-qa", instruction="q", step_limit=2)
    traj = Trajectory(task)
    traj = append_step(traj, action(1, "search", "a"))
    traj = append_step(traj, observation(1, "obs"))
    traj = append_step(traj, action(2, "search", "b"))
    assert traj.status.kind is StatusKind.STEP_LIMIT


def test_thoughts_do_not_count_against_step_limit():
    task = TaskSpec(domain="wiki-qa", instruction="q", step_limit=2)
    traj = Trajectory(task)
    for i in range(1, 6):
        traj = append_step(traj, thought(i, f"hmm {i}"))
    assert traj.status.is_running
    traj = append_step(traj, action(1, "search", "a"))
    assert traj.status.is_running


def test_per_kind_indices_must_increase():
    traj = append_step(Trajectory(TASK), thought(1, "a"))
    with pytest.raises(MalformedStep):
        append_step(traj, thought(1, "b"))
    # A different kind restarts its own counter.
    traj = append_step(traj, action(1, "search", "x"))
    assert traj.steps[-1].index == 1


def test_malformed_steps_rejected():
    with pytest.raises(MalformedStep):
        Step(StepKind.ACTION, 1, verb="")
    with pytest.raises(MalformedStep):
        Step(StepKind.THOUGHT, 0, text="x")
    with pytest.raises(MalformedStep):
        Step(StepKind.THOUGHT, 1, text="x", verb="search")


def test_mark_finished_outside_step_stream():
    traj = append_step(Trajectory(TASK), action(1, "search", "x"))
    traj = append_step(traj, observation(1, "obs"))
    done = mark_finished(traj, "")
    assert done.status.kind is StatusKind.FINISHED
    with pytest.raises(AppendToTerminal):
        mark_finished(done)


def test_observation_pairing_scan():
    traj = Trajectory(TASK)
    traj = append_step(traj, action(1, "search", "x"))
    traj = append_step(traj, observation(1, "found"))
    traj = append_step(traj, action(2, "finish", "x"))
    assert check_observation_pairing(traj) == []


def test_observation_pairing_flags_missing_observation():
    traj = Trajectory(TASK)
    traj = append_step(traj, action(1, "search", "x"))
    traj = append_step(traj, action(2, "search", "y"))
    problems = check_observation_pairing(traj)
    # Both the skipped observation and the unobserved trailing action on a
    # still-running trajectory are violations.
    assert len(problems) == 2 and all("search" in p for p in problems)


def test_serialize_round_trip_simple():
    traj = Trajectory(TASK)
    traj = append_step(traj, thought(1, "multi\nline thought"))
    traj = append_step(traj, action(1, "search", "Milhouse"))
    traj = append_step(traj, observation(1, "some text with \"quotes\" and unicode –"))
    assert deserialize(serialize(traj)) == traj


def test_serialize_round_trip_reference_trajectories():
    for name in ("replay_hotpotqa.json", "replay_fever.json", "replay_household.json"):
        raw = fixtures._load_json(name)
        for ref in raw["references"]:
            task = fixtures.task_from_dict(ref["task"])
            traj = Trajectory(task)
            for s in ref["steps"]:
                traj = append_step(traj, fixtures.step_from_list(s))
            assert deserialize(serialize(traj)) == traj


def test_truncated_record_raises_parse_error_with_offset():
    record = serialize(append_step(Trajectory(TASK), thought(1, "x")))
    with pytest.raises(ParseError) as err:
        deserialize(record[: len(record) // 2])
    assert err.value.offset > 0


def test_bad_structure_raises_parse_error():
    with pytest.raises(ParseError):
        deserialize('{"task": {"domain": "wiki-qa"}}')


@given(
    st.lists(
        st.sampled_from(["thought", "action", "observation"]),
        min_size=1,
        max_size=30,
    )
)
def test_append_only_prefix_property(kinds):
    task = TaskSpec(domain="wiki-qa", instruction="q", step_limit=1000)
    traj = Trajectory(task)
    snapshots = [traj.steps]
    counters = {"thought": 0, "action": 0, "observation": 0}
    for kind in kinds:
        counters[kind] += 1
        if kind == "thought":
            step = thought(counters[kind], "t")
        elif kind == "action":
            step = action(counters[kind], "search", "x")
        else:
            step = observation(counters[kind], "o")
        traj = append_step(traj, step)
        snapshots.append(traj.steps)
    for earlier, later in zip(snapshots, snapshots[1:]):
        assert later[: len(earlier)] == earlier
        assert len(later) == len(earlier) + 1
