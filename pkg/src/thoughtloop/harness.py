"""Batch evaluation: per-domain bundles, metrics, aggregation, tagging, export.

A run produces two line-delimited files in the output directory:

* ``trajectories.jsonl`` -- pure trajectory records (task, steps[], status),
  one per episode, ordered by (trial, task index);
* ``episodes.jsonl`` -- full episode records with metrics, provenance,
  timing, and the embedded trajectory.

Every reported aggregate is recomputable from the persisted records alone;
the reducer is a deterministic fold over (trial, index), so the report is
identical no matter how many workers ran the episodes.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Sequence

from .backends import Backend
from .envs import Environment
from .envs.household import HouseholdEnv, HouseholdInstance
from .envs.shop import Catalog, ShopEnv, ShopGoal
from .envs.wiki import WikiCorpus, WikiEnv
from .loop import DENSE, SPARSE, LoopConfig
from .parsing import GAME, LABELED, SHOP, SurfaceSyntax
from .prompts import AblationMode, Exemplar, ExemplarSet, IMThought, render_exemplar
from .strategies import (
    CombinatorConfig,
    StrategyOutcome,
    cot_sc,
    cotsc_then_react,
    exact_match,
    react_then_cotsc,
    run_direct,
    run_react,
)
from .trajectory import (
    StatusKind,
    Status,
    TaskSpec,
    Trajectory,
    serialize,
    step_from_dict,
    step_to_dict,
    task_from_dict,
    task_to_dict,
)

STRATEGIES = (
    "standard",
    "cot",
    "cot-sc",
    "act",
    "react",
    "react->cot-sc",
    "cot-sc->react",
    "react-im",
)


class FailureTag(str, Enum):
    TRUE_POSITIVE = "TruePositive"
    FALSE_POSITIVE = "FalsePositive"
    REASONING_ERROR = "ReasoningError"
    SEARCH_RESULT_ERROR = "SearchResultError"
    HALLUCINATION = "Hallucination"
    LABEL_AMBIGUITY = "LabelAmbiguity"


SUCCESS_TAGS = (FailureTag.TRUE_POSITIVE, FailureTag.FALSE_POSITIVE)


class UnknownTag(ValueError):
    pass


@dataclass
class DomainBundle:
    """Everything the runner needs to evaluate one domain."""

    name: str
    domain: str
    exemplars: ExemplarSet
    syntax: SurfaceSyntax
    env_factory: Callable[[TaskSpec], Environment]
    loop: LoopConfig
    metric: str  # em | acc | success | score
    im_annotations: dict[str, tuple[IMThought, ...]] | None = None

    def with_exemplars(self, exemplar_set: ExemplarSet) -> "DomainBundle":
        return replace(self, exemplars=exemplar_set)


def bundle_hotpotqa(corpus: WikiCorpus, exemplars: ExemplarSet) -> DomainBundle:
    return DomainBundle(
        name="hotpotqa",
        domain="wiki-qa",
        exemplars=exemplars,
        syntax=SurfaceSyntax(LABELED),
        env_factory=lambda task: WikiEnv(corpus),
        loop=LoopConfig(mode=DENSE),
        metric="em",
    )


def bundle_fever(corpus: WikiCorpus, exemplars: ExemplarSet) -> DomainBundle:
    return DomainBundle(
        name="fever",
        domain="wiki-fever",
        exemplars=exemplars,
        syntax=SurfaceSyntax(LABELED),
        env_factory=lambda task: WikiEnv(corpus),
        loop=LoopConfig(mode=DENSE),
        metric="acc",
    )


def bundle_household(
    instances: dict[str, HouseholdInstance],
    exemplars: ExemplarSet,
    im_annotations: dict[str, tuple[IMThought, ...]] | None = None,
) -> DomainBundle:
    from .envs.household import VERB_REGISTRY

    def factory(task: TaskSpec) -> Environment:
        if task.gold not in instances:
            raise KeyError(f"unknown household instance {task.gold!r}")
        return HouseholdEnv(instances[task.gold])

    return DomainBundle(
        name="household",
        domain="household",
        exemplars=exemplars,
        syntax=SurfaceSyntax(GAME, VERB_REGISTRY),
        env_factory=factory,
        loop=LoopConfig(mode=SPARSE),
        metric="success",
        im_annotations=im_annotations,
    )


def bundle_shop(catalog: Catalog, goals: dict[str, ShopGoal], exemplars: ExemplarSet) -> DomainBundle:
    def factory(task: TaskSpec) -> Environment:
        if task.gold not in goals:
            raise KeyError(f"unknown shop goal {task.gold!r}")
        return ShopEnv(catalog, goals[task.gold])

    return DomainBundle(
        name="shop",
        domain="shop",
        exemplars=exemplars,
        syntax=SurfaceSyntax(SHOP),
        env_factory=factory,
        loop=LoopConfig(mode=SPARSE),
        metric="score",
    )


@dataclass
class EpisodeResult:
    trial: int
    index: int
    task: TaskSpec
    trajectory: Trajectory
    answer: str | None
    metrics: dict[str, float]
    strategy: str
    provenance: str
    fallback: bool
    wall_time: float
    env_result: dict[str, Any] = field(default_factory=dict)
    failure_tag: str | None = None
    error: str | None = None

    @property
    def errored(self) -> bool:
        return self.error is not None or self.trajectory.status.kind is StatusKind.ERROR

    def to_dict(self) -> dict[str, Any]:
        return {
            "trial": self.trial,
            "index": self.index,
            "strategy": self.strategy,
            "provenance": self.provenance,
            "fallback": self.fallback,
            "answer": self.answer,
            "metrics": self.metrics,
            "wall_time": self.wall_time,
            "env_result": self.env_result,
            "failure_tag": self.failure_tag,
            "error": self.error,
            "trajectory": {
                "task": task_to_dict(self.task),
                "steps": [step_to_dict(s) for s in self.trajectory.steps],
                "status": {
                    "kind": self.trajectory.status.kind.value,
                    "detail": self.trajectory.status.detail,
                },
            },
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EpisodeResult":
        raw = data["trajectory"]
        task = task_from_dict(raw["task"])
        trajectory = Trajectory(
            task=task,
            steps=tuple(step_from_dict(s) for s in raw["steps"]),
            status=Status(StatusKind(raw["status"]["kind"]), raw["status"].get("detail", "")),
        )
        return cls(
            trial=data["trial"],
            index=data["index"],
            task=task,
            trajectory=trajectory,
            answer=data.get("answer"),
            metrics=dict(data.get("metrics", {})),
            strategy=data["strategy"],
            provenance=data.get("provenance", data["strategy"]),
            fallback=data.get("fallback", False),
            wall_time=data.get("wall_time", 0.0),
            env_result=dict(data.get("env_result", {})),
            failure_tag=data.get("failure_tag"),
            error=data.get("error"),
        )


def score_outcome(bundle: DomainBundle, task: TaskSpec, outcome: StrategyOutcome) -> dict[str, float]:
    metrics: dict[str, float] = {}
    answer = outcome.answer
    if bundle.metric == "em":
        metrics["em"] = float(exact_match(answer or "", task.gold or ""))
    elif bundle.metric == "acc":
        pred = " ".join((answer or "").split()).casefold()
        gold = " ".join((task.gold or "").split()).casefold()
        metrics["acc"] = float(pred == gold)
    elif bundle.metric == "success":
        metrics["success"] = float(bool(outcome.env_result.get("success")))
    elif bundle.metric == "score":
        metrics["score"] = float(outcome.env_result.get("score", 0.0))
        metrics["success"] = float(bool(outcome.env_result.get("success")))
    else:
        raise ValueError(f"unknown metric {bundle.metric!r}")
    return metrics


def run_task(
    task: TaskSpec,
    strategy: str,
    bundle: DomainBundle,
    backend: Backend,
    combinator: CombinatorConfig | None = None,
) -> tuple[StrategyOutcome, dict[str, float]]:
    combinator = combinator or CombinatorConfig()
    env = bundle.env_factory(task)
    syntax = bundle.syntax
    if strategy == "react":
        outcome = run_react(task, env, bundle.exemplars, AblationMode.REACT, backend, bundle.loop)
    elif strategy == "act":
        outcome = run_react(task, env, bundle.exemplars, AblationMode.ACT, backend, bundle.loop)
    elif strategy == "react-im":
        outcome = run_react(
            task,
            env,
            bundle.exemplars,
            AblationMode.REACT_IM,
            backend,
            bundle.loop,
            im_annotations=bundle.im_annotations,
        )
    elif strategy in ("standard", "cot"):
        mode = AblationMode.STANDARD if strategy == "standard" else AblationMode.COT
        direct = run_direct(task, bundle.exemplars, mode, backend, syntax)
        outcome = StrategyOutcome(
            trajectory=direct.trajectory,
            answer=direct.answer,
            provenance=strategy,
            fallback=False,
        )
    elif strategy == "cot-sc":
        vote = cot_sc(task, bundle.exemplars, backend, syntax, combinator)
        outcome = StrategyOutcome(
            trajectory=vote.trajectory,
            answer=vote.answer,
            provenance="cotsc",
            fallback=False,
        )
    elif strategy == "react->cot-sc":
        outcome = react_then_cotsc(task, env, bundle.exemplars, backend, bundle.loop, combinator)
    elif strategy == "cot-sc->react":
        outcome = cotsc_then_react(task, env, bundle.exemplars, backend, bundle.loop, combinator)
    else:
        raise ValueError(f"unknown strategy {strategy!r} (expected one of {STRATEGIES})")
    return outcome, score_outcome(bundle, task, outcome)


def _run_one(
    trial: int,
    index: int,
    task: TaskSpec,
    strategy: str,
    bundle: DomainBundle,
    backend: Backend,
    combinator: CombinatorConfig | None,
) -> EpisodeResult:
    started = time.perf_counter()
    try:
        outcome, metrics = run_task(task, strategy, bundle, backend, combinator)
        return EpisodeResult(
            trial=trial,
            index=index,
            task=task,
            trajectory=outcome.trajectory,
            answer=outcome.answer,
            metrics=metrics,
            strategy=strategy,
            provenance=outcome.provenance,
            fallback=outcome.fallback,
            wall_time=time.perf_counter() - started,
            env_result=outcome.env_result,
        )
    except Exception as exc:  # one episode must never sink the batch
        zero = {m: 0.0 for m in _metric_names(bundle)}
        return EpisodeResult(
            trial=trial,
            index=index,
            task=task,
            trajectory=Trajectory(task, status=Status.error(str(exc))),
            answer=None,
            metrics=zero,
            strategy=strategy,
            provenance=strategy,
            fallback=False,
            wall_time=time.perf_counter() - started,
            error=f"{type(exc).__name__}: {exc}",
        )


def _metric_names(bundle: DomainBundle) -> tuple[str, ...]:
    return ("score", "success") if bundle.metric == "score" else (bundle.metric,)


def run_batch(
    tasks: Sequence[TaskSpec],
    strategy: str,
    bundle: DomainBundle,
    backend: Backend,
    trials: int | Sequence[ExemplarSet] = 1,
    parallelism: int = 1,
    out_dir: str | Path | None = None,
    combinator: CombinatorConfig | None = None,
) -> dict[str, Any]:
    """Run every (trial, task) episode and return the aggregate report.

    ``trials`` is either a count (the same exemplar set each time) or one
    exemplar set per trial (e.g. the six pairwise prompt permutations).
    Episodes run concurrently up to ``parallelism``; results are folded in
    (trial, index) order so reports and logs are order-independent.
    """
    if not tasks:
        raise ValueError("tasks must be non-empty")
    if isinstance(trials, int):
        trial_sets = [bundle.exemplars] * trials
    else:
        trial_sets = list(trials)
    if not trial_sets:
        raise ValueError("need at least one trial")

    jobs = [
        (t, i, task, bundle.with_exemplars(exemplar_set))
        for t, exemplar_set in enumerate(trial_sets)
        for i, task in enumerate(tasks)
    ]
    if parallelism <= 1:
        results = [_run_one(t, i, task, strategy, b, backend, combinator) for t, i, task, b in jobs]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(
                pool.map(
                    lambda job: _run_one(job[0], job[1], job[2], strategy, job[3], backend, combinator),
                    jobs,
                )
            )
    results.sort(key=lambda r: (r.trial, r.index))

    if out_dir is not None:
        persist_results(out_dir, results)
    return aggregate_report(results, metric=bundle.metric)


def persist_results(out_dir: str | Path, results: Sequence[EpisodeResult]) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trajectories.jsonl", "w", encoding="utf-8") as fh:
        for result in results:
            fh.write(serialize(result.trajectory) + "\n")
    with open(out / "episodes.jsonl", "w", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps(result.to_dict(), ensure_ascii=False) + "\n")


def load_results(out_dir: str | Path) -> list[EpisodeResult]:
    results = []
    with open(Path(out_dir) / "episodes.jsonl", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                results.append(EpisodeResult.from_dict(json.loads(line)))
    return results


def aggregate_report(results: Sequence[EpisodeResult], metric: str) -> dict[str, Any]:
    """Per-trial means, their average, and best-of-k; plus an error roster."""
    by_trial: dict[int, list[EpisodeResult]] = {}
    for result in sorted(results, key=lambda r: (r.trial, r.index)):
        by_trial.setdefault(result.trial, []).append(result)
    trial_means = []
    for trial in sorted(by_trial):
        values = [r.metrics.get(metric, 0.0) for r in by_trial[trial]]
        trial_means.append(sum(values) / len(values))
    errors = [
        {"trial": r.trial, "index": r.index, "error": r.error or r.trajectory.status.detail}
        for r in results
        if r.errored
    ]
    return {
        "metric": metric,
        "episodes": len(results),
        "trials": len(by_trial),
        "per_trial": trial_means,
        "avg": sum(trial_means) / len(trial_means),
        "best_of_k": max(trial_means),
        "errors": errors,
        "fallbacks": sum(1 for r in results if r.fallback),
    }


# ── failure tagging ─────────────────────────────────────────────────────────


def tag_failure(result: EpisodeResult, tag: str) -> EpisodeResult:
    """Attach a human-assigned success/failure tag to a completed episode."""
    try:
        parsed = FailureTag(tag)
    except ValueError as exc:
        raise UnknownTag(f"unknown tag {tag!r}") from exc
    if result.trajectory.status.is_running:
        raise ValueError("tags attach only to completed episodes")
    result.failure_tag = parsed.value
    return result


def tag_report(results: Sequence[EpisodeResult]) -> dict[str, dict[str, dict[str, float]]]:
    """Percentage breakdown of tags per strategy, split by success/failure."""
    table: dict[str, dict[str, dict[str, int]]] = {}
    for result in results:
        if result.failure_tag is None:
            continue
        tag = FailureTag(result.failure_tag)
        bucket = "success" if tag in SUCCESS_TAGS else "failure"
        table.setdefault(result.strategy, {}).setdefault(bucket, {})
        table[result.strategy][bucket][tag.value] = (
            table[result.strategy][bucket].get(tag.value, 0) + 1
        )
    report: dict[str, dict[str, dict[str, float]]] = {}
    for strategy, buckets in table.items():
        report[strategy] = {}
        for bucket, counts in buckets.items():
            total = sum(counts.values())
            report[strategy][bucket] = {
                tag: round(100.0 * count / total, 1) for tag, count in counts.items()
            }
    return report


# ── finetune export ─────────────────────────────────────────────────────────


def render_trajectory_text(result: EpisodeResult) -> str:
    """The full rendered trajectory, exactly as the composer would print it."""
    syntax = _syntax_for_domain(result.task.domain)
    exemplar = Exemplar(
        id=f"episode-{result.trial}-{result.index}",
        domain=result.task.domain,
        instruction=result.task.instruction,
        steps=result.trajectory.steps,
    )
    return render_exemplar(exemplar, AblationMode.REACT, syntax)


def _syntax_for_domain(domain: str) -> SurfaceSyntax:
    if domain == "household":
        from .envs.household import VERB_REGISTRY

        return SurfaceSyntax(GAME, VERB_REGISTRY)
    if domain == "shop":
        return SurfaceSyntax(SHOP)
    return SurfaceSyntax(LABELED)


def _is_correct(result: EpisodeResult) -> bool:
    metrics = result.metrics
    return metrics.get("em") == 1.0 or metrics.get("acc") == 1.0 or metrics.get("success") == 1.0


def export_finetune_set(
    results: Sequence[EpisodeResult],
    path: str | Path,
    cap: int | None = None,
) -> int:
    """Write (input, target) records for correct episodes; returns the count.

    Input is the bare question/claim/goal; target is the full rendered
    trajectory (thoughts, actions, observations), the bootstrap shape for
    training smaller models to imitate whole episodes.
    """
    written = 0
    with open(path, "w", encoding="utf-8") as fh:
        for result in sorted(results, key=lambda r: (r.trial, r.index)):
            if not _is_correct(result):
                continue
            if cap is not None and written >= cap:
                break
            record = {
                "input": result.task.instruction,
                "target": render_trajectory_text(result),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            written += 1
    return written
