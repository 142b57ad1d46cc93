"""Pausable episode sessions with human thought editing and what-if branches.

A session wraps one episode in a worker thread that advances it one model
step at a time. Between steps the worker honors pause requests (and the
``on_every_thought`` policy, which pauses before the action following each
thought). While paused, a human may rewrite or delete a thought: the current
branch is frozen as-is, a new branch continues from the edited prefix
against a replayed environment, and the fork point is recorded so both
branches stay inspectable and replayable.

Concurrency: one writer thread per session; all shared state is mutated
under the session condition variable; readers long-poll on it. Edits race
safely: the second concurrent edit sees NotPaused.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .backends import Backend
from .harness import DomainBundle
from .loop import advance_episode, start_episode
from .prompts import AblationMode
from .trajectory import (
    Status,
    Step,
    StepKind,
    TaskSpec,
    Trajectory,
    append_step,
    serialize,
    step_to_dict,
    thought,
)

RUNNING = "running"
PAUSED = "paused"
TERMINAL = "terminal"

PAUSE_POLICIES = ("manual", "on_every_thought", "never")

class SessionError(Exception):
    pass


class BadTask(SessionError):
    pass


class UnknownSession(KeyError):
    pass


class NotPaused(SessionError):
    pass


class NotAThought(SessionError):
    pass


class IndexOutOfRange(SessionError):
    pass


@dataclass
class Branch:
    number: int
    parent: int | None
    fork_step: int | None
    trajectory: Trajectory
    events: list[dict[str, Any]] = field(default_factory=list)
    frozen: bool = False

    def record(self, step: Step) -> None:
        self.events.append(
            {"branch": self.number, "index": len(self.events), "step": step_to_dict(step)}
        )


@dataclass(frozen=True)
class EditCommand:
    """Rewrite the thought at ``step_index`` (empty text deletes it)."""

    step_index: int
    text: str


class Session:
    def __init__(
        self,
        session_id: str,
        task: TaskSpec,
        bundle: DomainBundle,
        backend: Backend,
        mode: AblationMode,
        pause_policy: str,
        log_path: Path | None = None,
    ) -> None:
        if pause_policy not in PAUSE_POLICIES:
            raise BadTask(f"unknown pause policy {pause_policy!r}")
        self.id = session_id
        self.task = task
        self.bundle = bundle
        self.backend = backend
        self.mode = mode
        self.pause_policy = pause_policy
        self.log_path = log_path

        self.cond = threading.Condition()
        self.state = RUNNING
        self._pause_requested = False
        self._edit_pending = False
        self.branches: list[Branch] = []
        self.active = 0

        env = bundle.env_factory(task)
        traj, appended = start_episode(task, env)
        branch = Branch(number=0, parent=None, fork_step=None, trajectory=traj)
        for step in appended:
            branch.record(step)
        self.branches.append(branch)
        self._env = env
        self._thread = threading.Thread(target=self._work, name=f"session-{session_id}", daemon=True)
        self._thread.start()

    # ── worker ──────────────────────────────────────────────────────────────

    @property
    def _branch(self) -> Branch:
        return self.branches[self.active]

    def _work(self) -> None:
        while True:
            with self.cond:
                while self.state == PAUSED:
                    self.cond.wait()
                if self.state == TERMINAL:
                    return
                traj = self._branch.trajectory
                env = self._env
            try:
                traj, appended = advance_episode(
                    traj,
                    env,
                    self.bundle.exemplars,
                    self.mode,
                    self.backend,
                    self.bundle.loop,
                    self.bundle.im_annotations,
                )
            except Exception as exc:
                with self.cond:
                    branch = self._branch
                    branch.trajectory = Trajectory(
                        task=branch.trajectory.task,
                        steps=branch.trajectory.steps,
                        status=Status.error(f"{type(exc).__name__}: {exc}"),
                    )
                    self.state = TERMINAL
                    self._persist(branch)
                    self.cond.notify_all()
                return
            with self.cond:
                branch = self._branch
                branch.trajectory = traj
                for step in appended:
                    branch.record(step)
                if traj.status.is_terminal:
                    self.state = TERMINAL
                    self._persist(branch)
                elif self._pause_requested or (
                    self.pause_policy == "on_every_thought"
                    and any(s.kind is StepKind.THOUGHT for s in appended)
                ):
                    self._pause_requested = False
                    self.state = PAUSED
                self.cond.notify_all()
                if self.state == TERMINAL:
                    return

    def _persist(self, branch: Branch) -> None:
        if self.log_path is None:
            return
        record = {
            "session": self.id,
            "branch": branch.number,
            "parent": branch.parent,
            "fork_step": branch.fork_step,
        }
        record.update(json.loads(serialize(branch.trajectory)))
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    # ── control ─────────────────────────────────────────────────────────────

    def pause(self, timeout: float = 5.0) -> str:
        """Request a pause; blocks until the worker lands on a step boundary."""
        with self.cond:
            if self.state == TERMINAL:
                raise NotPaused("session already terminal")
            if self.state == PAUSED:
                return self.state
            self._pause_requested = True
            self.cond.wait_for(lambda: self.state in (PAUSED, TERMINAL), timeout=timeout)
            return self.state

    def resume(self) -> str:
        with self.cond:
            if self.state != PAUSED:
                raise NotPaused(f"cannot resume a {self.state} session")
            self.state = RUNNING
            self._edit_pending = False
            self.cond.notify_all()
            return self.state

    def edit(self, command: EditCommand) -> int:
        """Fork at an edited thought; returns the new branch number.

        The pre-edit branch is frozen (and persisted) exactly as it stood;
        the session stays paused so the caller can resume explicitly. One
        edit per pause: a second edit before the resume conflicts, since
        its step index refers to a branch that no longer accepts writes.
        """
        with self.cond:
            if self.state != PAUSED:
                raise NotPaused(f"edits require a paused session, not {self.state}")
            if self._edit_pending:
                raise NotPaused("an edit is already pending on this pause; resume first")
            branch = self._branch
            steps = branch.trajectory.steps
            if not 0 <= command.step_index < len(steps):
                raise IndexOutOfRange(
                    f"step_index {command.step_index} outside 0..{len(steps) - 1}"
                )
            target = steps[command.step_index]
            if target.kind is not StepKind.THOUGHT:
                raise NotAThought(f"step {command.step_index} is a {target.kind.value}")

            branch.frozen = True
            self._persist(branch)

            prefix = steps[: command.step_index]
            traj = Trajectory(task=branch.trajectory.task, steps=prefix)
            env = self.bundle.env_factory(self.task)
            env.reset()
            for step in prefix:
                if step.kind is StepKind.ACTION and not step.is_finish:
                    env.execute(step)
            new_branch = Branch(
                number=len(self.branches),
                parent=branch.number,
                fork_step=command.step_index,
                trajectory=traj,
            )
            for step in prefix:
                new_branch.record(step)
            text = command.text.strip()
            if text:
                edited = thought(traj.next_index(StepKind.THOUGHT), text)
                traj = append_step(traj, edited)
                new_branch.record(edited)
                if env.echoes_thoughts:
                    from .trajectory import observation

                    echo = observation(
                        traj.next_index(StepKind.OBSERVATION), self.bundle.loop.thought_echo
                    )
                    traj = append_step(traj, echo)
                    new_branch.record(echo)
            new_branch.trajectory = traj
            self.branches.append(new_branch)
            self.active = new_branch.number
            self._env = env
            self._edit_pending = True
            self.cond.notify_all()
            return new_branch.number

    def edit_and_resume(self, command: EditCommand) -> int:
        branch = self.edit(command)
        self.resume()
        return branch

    # ── reads ───────────────────────────────────────────────────────────────

    def snapshot(self) -> dict[str, Any]:
        with self.cond:
            return {
                "id": self.id,
                "state": self.state,
                "active_branch": self.active,
                "pause_policy": self.pause_policy,
                "task": {
                    "domain": self.task.domain,
                    "instruction": self.task.instruction,
                    "gold": self.task.gold,
                    "step_limit": self.task.step_limit,
                },
                "branches": [
                    {
                        "branch": b.number,
                        "parent": b.parent,
                        "fork_step": b.fork_step,
                        "frozen": b.frozen,
                        "steps": len(b.trajectory.steps),
                        "status": {
                            "kind": b.trajectory.status.kind.value,
                            "detail": b.trajectory.status.detail,
                        },
                    }
                    for b in self.branches
                ],
            }

    def events(self, start: int = 0, branch: int | None = None, wait: float = 0.0) -> dict[str, Any]:
        """Events ``start..`` for a branch; long-polls up to ``wait`` seconds.

        Each appended step is emitted exactly once per branch, in order, so
        any reader can resume from its last index.
        """
        deadline = wait
        with self.cond:
            number = self.active if branch is None else branch
            if not 0 <= number < len(self.branches):
                raise IndexOutOfRange(f"unknown branch {number}")
            target = self.branches[number]
            if wait > 0 and len(target.events) <= start and self.state == RUNNING:
                self.cond.wait_for(
                    lambda: len(target.events) > start or self.state != RUNNING,
                    timeout=deadline,
                )
            events = list(target.events[start:])
            return {
                "branch": number,
                "from": start,
                "next": start + len(events),
                "state": self.state,
                "events": events,
            }

    def wait_terminal(self, timeout: float = 10.0) -> str:
        with self.cond:
            self.cond.wait_for(lambda: self.state == TERMINAL, timeout=timeout)
            return self.state

    def wait_paused(self, timeout: float = 10.0) -> str:
        with self.cond:
            self.cond.wait_for(lambda: self.state in (PAUSED, TERMINAL), timeout=timeout)
            return self.state


class SessionManager:
    """Registry of live sessions over a set of domain bundles."""

    def __init__(
        self,
        bundles: dict[str, DomainBundle],
        backend: Backend,
        log_dir: str | Path | None = None,
    ) -> None:
        self.bundles = bundles
        self.backend = backend
        self.log_dir = Path(log_dir) if log_dir is not None else None
        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(
        self,
        task: TaskSpec,
        strategy: str = "react",
        pause_policy: str = "manual",
    ) -> Session:
        bundle = None
        for candidate in self.bundles.values():
            if candidate.domain == task.domain:
                bundle = candidate
                break
        if bundle is None:
            raise BadTask(f"no bundle registered for domain {task.domain!r}")
        mode = {
            "react": AblationMode.REACT,
            "act": AblationMode.ACT,
            "react-im": AblationMode.REACT_IM,
        }.get(strategy)
        if mode is None:
            raise BadTask(f"sessions support acting strategies, not {strategy!r}")
        session_id = uuid.uuid4().hex[:12]
        log_path = self.log_dir / f"{session_id}.jsonl" if self.log_dir is not None else None
        try:
            session = Session(session_id, task, bundle, self.backend, mode, pause_policy, log_path)
        except KeyError as exc:
            raise BadTask(str(exc)) from exc
        with self._lock:
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSession(session_id) from None

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._sessions)
