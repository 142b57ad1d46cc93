"""Pluggable tool environments: wiki lookup, household text game, mini web shop.

Every environment exposes the same small surface to the agent loop:

* ``syntax`` -- how its steps print and parse;
* ``reset()`` -- optional opening observation;
* ``execute(action)`` -- run one domain action, returning the observation text;
* ``is_done()`` / ``result()`` -- terminal goal signal and payload;
* ``state_hash()`` -- stable digest of mutable state (thought neutrality is
  checked by asserting the hash is untouched by thought steps).
"""

from __future__ import annotations

from typing import Any, Protocol, runtime_checkable

from ..parsing import SurfaceSyntax
from ..trajectory import Step


@runtime_checkable
class Environment(Protocol):
    syntax: SurfaceSyntax
    echoes_thoughts: bool

    def reset(self) -> str | None: ...

    def execute(self, act: Step) -> str: ...

    def is_done(self) -> bool: ...

    def result(self) -> dict[str, Any]: ...

    def state_hash(self) -> str: ...


from .household import HouseholdEnv, WorldState, check_goal, generate_instances  # noqa: E402,F401
from .shop import Catalog, Product, ShopEnv, ShopGoal, score_episode  # noqa: E402,F401
from .wiki import WikiCorpus, WikiEnv, WikiPage  # noqa: E402,F401

__all__ = [
    "Environment",
    "WikiCorpus",
    "WikiEnv",
    "WikiPage",
    "HouseholdEnv",
    "WorldState",
    "check_goal",
    "generate_instances",
    "Catalog",
    "Product",
    "ShopEnv",
    "ShopGoal",
    "score_episode",
]
