"""thoughtloop: a runtime and evaluation suite for reasoning-plus-acting language agents.

The loop interleaves free-form thought steps with domain actions against
pluggable tool environments (wiki lookup, household text game, mini web
shop), derives baseline prompts by ablating annotated exemplars, votes over
sampled reasoning chains, and exposes episodes as pausable HTTP sessions
whose thoughts a human can edit mid-run.
"""

from .backends import (
    BackendUnavailable,
    CompletionRequest,
    HttpBackend,
    RateLimited,
    ScriptedBackend,
    ScriptMiss,
    load_fixture,
)
from .loop import LoopConfig, run_episode
from .parsing import SurfaceSyntax, parse_completion, render_step
from .prompts import AblationMode, Exemplar, ExemplarSet, ablate, compose_prompt
from .trajectory import (
    Status,
    Step,
    StepKind,
    TaskSpec,
    Trajectory,
    append_step,
    deserialize,
    serialize,
)

__version__ = "0.1.0"

__all__ = [
    "AblationMode",
    "BackendUnavailable",
    "CompletionRequest",
    "Exemplar",
    "ExemplarSet",
    "HttpBackend",
    "LoopConfig",
    "RateLimited",
    "ScriptMiss",
    "ScriptedBackend",
    "Status",
    "Step",
    "StepKind",
    "SurfaceSyntax",
    "TaskSpec",
    "Trajectory",
    "ablate",
    "append_step",
    "compose_prompt",
    "deserialize",
    "load_fixture",
    "parse_completion",
    "render_step",
    "run_episode",
    "serialize",
]
