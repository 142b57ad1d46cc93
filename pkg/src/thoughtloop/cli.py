"""Command-line interface: batch runs, reports with figures, exports, the service.

The ``report`` command renders both delimited output (report.csv) and
matplotlib figures (PNG) next to the episode logs, so a run directory is
self-contained: logs, aggregate JSON, spreadsheet, and charts.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import fixtures
from .backends import HttpBackend, load_fixture
from .envs.household import generate_instances
from .envs.wiki import WikiCorpus, segment_sentences
from .harness import (
    STRATEGIES,
    aggregate_report,
    bundle_fever,
    bundle_hotpotqa,
    bundle_household,
    bundle_shop,
    export_finetune_set,
    load_results,
    run_batch,
)
from .prompts import permutation_prompt_sets
from .sessions import SessionManager
from .strategies import CombinatorConfig
from .trajectory import TaskSpec, task_from_dict

DOMAIN_CHOICES = ("hotpotqa", "fever", "household", "shop")


def _backend_from_spec(spec: str):
    if spec.startswith("scripted:"):
        return load_fixture(spec[len("scripted:") :])
    if spec == "http":
        return HttpBackend()
    raise click.BadParameter(f"backend must be 'scripted:FILE' or 'http', got {spec!r}")


def _load_tasks(path: str) -> list[TaskSpec]:
    tasks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                tasks.append(task_from_dict(json.loads(line)))
    return tasks


def _build_bundle(domain: str, task_type: str, seed: int, count: int, instances_file: str | None):
    corpus = fixtures.wiki_corpus()
    if domain == "hotpotqa":
        return bundle_hotpotqa(corpus, fixtures.hotpotqa_exemplars()), fixtures.demo_tasks(
            "tasks_hotpotqa.jsonl"
        )
    if domain == "fever":
        return bundle_fever(corpus, fixtures.fever_exemplars()), fixtures.demo_tasks(
            "tasks_fever.jsonl"
        )
    if domain == "household":
        if instances_file:
            from .envs.household import read_instances

            instance_list = read_instances(instances_file)
        else:
            instance_list = generate_instances(task_type, seed=seed, count=count)
        instances = {inst.id: inst for inst in instance_list}
        exemplars = fixtures.household_exemplars()[task_type]
        bundle = bundle_household(instances, exemplars, fixtures.household_im_annotations())
        return bundle, [inst.task for inst in instance_list]
    goals = fixtures.shop_goals()
    bundle = bundle_shop(fixtures.shop_catalog(), goals, fixtures.shop_exemplars())
    tasks = [
        TaskSpec(domain="shop", instruction=goal.instruction, gold=goal_id, step_limit=20)
        for goal_id, goal in goals.items()
    ]
    return bundle, tasks


@click.group()
def main() -> None:
    """Reasoning-plus-acting agent runtime and evaluation suite."""


@main.command()
@click.option("--domain", type=click.Choice(DOMAIN_CHOICES), required=True)
@click.option("--strategy", type=click.Choice(STRATEGIES), default="react", show_default=True)
@click.option("--trials", type=int, default=1, show_default=True)
@click.option("--permutations", is_flag=True, help="Use the 6 pairwise exemplar permutations as trials (3-exemplar sets).")
@click.option("--backend", "backend_spec", default="http", show_default=True, help="'scripted:FILE' or 'http'.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--tasks", "tasks_file", type=click.Path(exists=True), default=None, help="JSONL task file; defaults to bundled demo tasks.")
@click.option("--parallel", type=int, default=1, show_default=True)
@click.option("--n-samples", type=int, default=21, show_default=True, help="Samples for self-consistency voting.")
@click.option("--temperature", type=float, default=0.7, show_default=True, help="Sampling temperature for voting.")
@click.option("--task-type", type=str, default="pick", show_default=True, help="Household goal type for generated instances.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--count", type=int, default=5, show_default=True, help="Generated household instances.")
@click.option("--instances", "instances_file", type=click.Path(exists=True), default=None, help="Household instance file instead of generation.")
@click.option("--verbose", is_flag=True)
def run(
    domain,
    strategy,
    trials,
    permutations,
    backend_spec,
    out_dir,
    tasks_file,
    parallel,
    n_samples,
    temperature,
    task_type,
    seed,
    count,
    instances_file,
    verbose,
) -> None:
    """Run a batch of episodes and persist logs plus the aggregate report."""
    bundle, default_tasks = _build_bundle(domain, task_type, seed, count, instances_file)
    tasks = _load_tasks(tasks_file) if tasks_file else default_tasks
    backend = _backend_from_spec(backend_spec)
    combinator = CombinatorConfig(n_samples=n_samples, temperature=temperature)
    trial_spec = permutation_prompt_sets(bundle.exemplars) if permutations else trials
    report = run_batch(
        tasks,
        strategy,
        bundle,
        backend,
        trials=trial_spec,
        parallelism=parallel,
        out_dir=out_dir,
        combinator=combinator,
    )
    with open(Path(out_dir) / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    click.echo(
        f"{domain}/{strategy}: {report['episodes']} episodes, "
        f"{report['metric']} avg {report['avg']:.3f}, best-of-{report['trials']} "
        f"{report['best_of_k']:.3f}, {len(report['errors'])} errored"
    )
    if verbose:
        for trial, mean in enumerate(report["per_trial"]):
            click.echo(f"  trial {trial}: {mean:.3f}")
        from .harness import load_results, render_trajectory_text

        for result in load_results(out_dir):
            click.echo(f"--- trial {result.trial} task {result.index} "
                       f"[{result.provenance}] {result.metrics}")
            click.echo(render_trajectory_text(result))
    if report["errors"]:
        for err in report["errors"]:
            click.echo(f"  error: trial {err['trial']} index {err['index']}: {err['error']}", err=True)
        sys.exit(1)


@main.command()
@click.argument("run_dir", type=click.Path(exists=True))
@click.option("--figures/--no-figures", default=True, show_default=True)
def report(run_dir, figures) -> None:
    """Recompute aggregates from persisted logs; write CSV and figures."""
    results = load_results(run_dir)
    if not results:
        raise click.ClickException("no episodes found")
    metric = _infer_metric(results)
    summary = aggregate_report(results, metric=metric)
    out = Path(run_dir)
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    with open(out / "report.csv", "w", encoding="utf-8") as fh:
        fh.write("trial,episodes,mean_" + metric + "\n")
        by_trial: dict[int, list[float]] = {}
        for result in results:
            by_trial.setdefault(result.trial, []).append(result.metrics.get(metric, 0.0))
        for trial in sorted(by_trial):
            values = by_trial[trial]
            fh.write(f"{trial},{len(values)},{sum(values) / len(values):.6f}\n")
        fh.write(f"avg,,{summary['avg']:.6f}\n")
        fh.write(f"best_of_k,,{summary['best_of_k']:.6f}\n")
    click.echo(f"{metric} avg {summary['avg']:.3f} best {summary['best_of_k']:.3f}")
    if figures:
        paths = _render_figures(out, results, summary, metric)
        for path in paths:
            click.echo(f"wrote {path}")


def _infer_metric(results) -> str:
    for name in ("em", "acc", "score", "success"):
        if name in results[0].metrics:
            return name
    return "success"


def _render_figures(out: Path, results, summary, metric: str) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    fig, ax = plt.subplots(figsize=(6, 3.5))
    trials = list(range(len(summary["per_trial"])))
    ax.bar(trials, summary["per_trial"], color="#4878a8")
    ax.axhline(summary["avg"], color="#a84848", linestyle="--", label=f"avg {summary['avg']:.3f}")
    ax.set_xlabel("trial")
    ax.set_ylabel(f"mean {metric}")
    ax.set_xticks(trials)
    ax.set_ylim(0, 1.05)
    ax.legend(loc="lower right")
    fig.tight_layout()
    path = out / "trial_means.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    values = [r.metrics.get(metric, 0.0) for r in results]
    ax.hist(values, bins=11, range=(0, 1), color="#48a878", edgecolor="black")
    ax.set_xlabel(metric)
    ax.set_ylabel("episodes")
    fig.tight_layout()
    path = out / f"{metric}_distribution.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


@main.command("export-finetune")
@click.argument("run_dir", type=click.Path(exists=True))
@click.option("--out", "out_file", type=click.Path(), default=None, help="Defaults to RUN_DIR/finetune.jsonl.")
@click.option("--cap", type=int, default=None, help="Keep at most this many records.")
def export_finetune(run_dir, out_file, cap) -> None:
    """Export correct episodes as (input, target) bootstrap records."""
    results = load_results(run_dir)
    path = Path(out_file) if out_file else Path(run_dir) / "finetune.jsonl"
    count = export_finetune_set(results, path, cap=cap)
    click.echo(f"wrote {count} records to {path}")


@main.command("ingest-wiki")
@click.argument("input_file", type=click.Path(exists=True))
@click.option("--out", "out_file", type=click.Path(), required=True)
@click.option("--pre-segmented", is_flag=True, help="Input sentences[] are already split (bit-exact).")
def ingest_wiki(input_file, out_file, pre_segmented) -> None:
    """Build a corpus file from JSONL pages ({title, text} or {title, sentences})."""
    from .envs.wiki import WikiPage

    pages = []
    with open(input_file, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if pre_segmented or "sentences" in record:
                sentences = tuple(record["sentences"])
            else:
                sentences = tuple(segment_sentences(record["text"]))
            pages.append(WikiPage(record["title"], sentences, record.get("lead")))
    corpus = WikiCorpus(pages)
    corpus.save(out_file)
    click.echo(f"ingested {len(pages)} pages into {out_file} (title index: {len(pages)} entries)")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8470, show_default=True)
@click.option("--backend", "backend_spec", default="http", show_default=True)
@click.option("--log-dir", type=click.Path(), default=None, help="Write-through session trajectory logs.")
@click.option("--ui", "ui_dir", type=click.Path(), default=None, help="Serve a built UI from /ui.")
@click.option("--task-type", default="clean", show_default=True, help="Household exemplar set for sessions.")
def serve(host, port, backend_spec, log_dir, ui_dir, task_type) -> None:
    """Start the pause/edit/resume session service."""
    import uvicorn

    from .service import create_app

    backend = _backend_from_spec(backend_spec)
    corpus = fixtures.wiki_corpus()
    demo = fixtures.household_demo_instance()
    instances = {demo.id: demo}
    for instance in generate_instances(task_type, seed=0, count=5):
        instances[instance.id] = instance
    bundles = {
        "hotpotqa": bundle_hotpotqa(corpus, fixtures.hotpotqa_exemplars()),
        "fever": bundle_fever(corpus, fixtures.fever_exemplars()),
        "household": bundle_household(
            instances,
            fixtures.household_exemplars()[task_type],
            fixtures.household_im_annotations(),
        ),
        "shop": bundle_shop(fixtures.shop_catalog(), fixtures.shop_goals(), fixtures.shop_exemplars()),
    }
    manager = SessionManager(bundles, backend, log_dir=log_dir)
    default_ui = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    app = create_app(manager, ui_dir=ui_dir or (default_ui if default_ui.is_dir() else None))
    click.echo(f"session service on http://{host}:{port} (docs at /docs)")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
