"""Miniature web-shop: a product catalog behind a search/click page machine.

The agent searches with free text, clicks result ids to open product pages,
clicks option values to configure, and clicks ``Buy Now`` to purchase, which
ends the episode. Search ranks the catalog by distinct-token overlap with
the query (ties broken by product id) and pages results three at a time.
Clicking anything that is not a live widget on the current page returns
"Nothing happens." and changes nothing; the informational widgets
([Description], [Features], [Reviews]) are inert decorations here.

An episode is scored against a goal's requirements: each required attribute
tag, each required option selection, and the price condition weigh equally;
the score is the covered fraction, hard-gated to 0 when the purchase busts
the price cap. Success means every requirement is covered.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable

from ..parsing import SHOP, SurfaceSyntax
from ..trajectory import Step, StepKind

NOTHING_HAPPENS = "Nothing happens."
RESULTS_PER_PAGE = 3

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> frozenset[str]:
    return frozenset(_TOKEN.findall(text.casefold()))


@dataclass(frozen=True)
class Product:
    id: str
    title: str
    price: float
    options: dict[str, tuple[str, ...]] = field(default_factory=dict)
    attributes: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.price < 0:
            raise ValueError(f"product {self.id}: price must be >= 0")

    def option_group_for(self, value: str) -> str | None:
        for name, values in self.options.items():
            if value in values:
                return name
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "title": self.title,
            "price": self.price,
            "options": {k: list(v) for k, v in self.options.items()},
            "attributes": sorted(self.attributes),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Product":
        return cls(
            id=data["id"],
            title=data["title"],
            price=float(data["price"]),
            options={k: tuple(v) for k, v in data.get("options", {}).items()},
            attributes=frozenset(data.get("attributes", ())),
        )


class Catalog:
    def __init__(self, products: Iterable[Product]) -> None:
        self._products: dict[str, Product] = {}
        for product in products:
            if product.id in self._products:
                raise ValueError(f"duplicate product id {product.id}")
            self._products[product.id] = product

    def __len__(self) -> int:
        return len(self._products)

    def __contains__(self, product_id: str) -> bool:
        return product_id in self._products

    def get(self, product_id: str) -> Product | None:
        return self._products.get(product_id)

    def search(self, query: str) -> list[str]:
        """Product ids ranked by distinct shared tokens with the query."""
        q = tokenize(query)
        scored = [
            (len(q & tokenize(p.title)), p.id) for p in self._products.values()
        ]
        ranked = sorted(scored, key=lambda pair: (-pair[0], pair[1]))
        return [pid for score, pid in ranked if score > 0]

    @classmethod
    def load(cls, path: str) -> "Catalog":
        products = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    products.append(Product.from_dict(json.loads(line)))
        return cls(products)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for product in self._products.values():
                fh.write(json.dumps(product.to_dict(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class ShopGoal:
    instruction: str
    attributes: frozenset[str]
    options: dict[str, str] = field(default_factory=dict)
    price_cap: float | None = None

    def __post_init__(self) -> None:
        if not self.attributes:
            raise ValueError("goal needs at least one required attribute")

    @property
    def requirement_count(self) -> int:
        return len(self.attributes) + len(self.options) + (1 if self.price_cap is not None else 0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "instruction": self.instruction,
            "attributes": sorted(self.attributes),
            "options": dict(self.options),
            "price_cap": self.price_cap,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ShopGoal":
        return cls(
            instruction=data["instruction"],
            attributes=frozenset(data["attributes"]),
            options=dict(data.get("options", {})),
            price_cap=data.get("price_cap"),
        )


@dataclass(frozen=True)
class Purchase:
    product_id: str
    options: dict[str, str]


class NoPurchase(Exception):
    """Raised by strict scoring when the episode never bought anything."""


def score_episode(
    goal: ShopGoal, purchase: Purchase | None, catalog: Catalog
) -> tuple[float, bool]:
    """Equal-weight requirement coverage with a hard price gate.

    Returns (score in [0, 1], success). No purchase scores 0; a purchase
    over the price cap scores 0 regardless of attribute coverage.
    """
    if purchase is None:
        return 0.0, False
    product = catalog.get(purchase.product_id)
    if product is None:
        return 0.0, False
    total = goal.requirement_count
    covered = 0
    if goal.price_cap is not None:
        if product.price > goal.price_cap:
            return 0.0, False
        covered += 1
    product_attrs = {a.casefold() for a in product.attributes}
    covered += sum(1 for a in goal.attributes if a.casefold() in product_attrs)
    for name, value in goal.options.items():
        chosen = purchase.options.get(name)
        if chosen is not None and chosen.casefold() == value.casefold():
            covered += 1
    score = covered / total
    return score, score == 1.0


# ── page machine ───────────────────────────────────────────────────────────


@dataclass
class _SearchPage:
    query: str
    ids: list[str]
    page: int = 1


@dataclass
class _ProductPage:
    product_id: str
    selected: dict[str, str]
    origin: _SearchPage | None


class ShopEnv:
    """Per-episode browsing state over a shared catalog."""

    echoes_thoughts = True

    def __init__(self, catalog: Catalog, goal: ShopGoal) -> None:
        self.catalog = catalog
        self.goal = goal
        self.syntax = SurfaceSyntax(SHOP)
        self.page: _SearchPage | _ProductPage | None = None
        self.purchase: Purchase | None = None

    def reset(self) -> str | None:
        self.page = None
        self.purchase = None
        return None

    # rendering

    def _render_results(self, page: _SearchPage) -> str:
        total = len(page.ids)
        start = (page.page - 1) * RESULTS_PER_PAGE
        shown = page.ids[start : start + RESULTS_PER_PAGE]
        lines = ["[Back to Search]", f"Page {page.page} (Total results: {total})"]
        if page.page > 1:
            lines.append("[Prev]")
        if start + RESULTS_PER_PAGE < total:
            lines.append("[Next]")
        lines.append("")
        for pid in shown:
            product = self.catalog.get(pid)
            assert product is not None
            lines.extend([f"[{pid}]", product.title, f"${product.price}"])
        return "\n".join(lines)

    def _render_product(self, page: _ProductPage) -> str:
        product = self.catalog.get(page.product_id)
        assert product is not None
        lines = ["[Back to Search]", "[Prev]"]
        for name, values in product.options.items():
            lines.append(f"{name} " + "".join(f"[{v}]" for v in values))
        lines.extend(
            [
                product.title,
                f"Price: ${product.price}",
                "Rating: N.A.",
                "[Description]",
                "[Features]",
                "[Reviews]",
                "[Buy Now]",
            ]
        )
        return "\n".join(lines)

    # actions

    def _search(self, query: str) -> str:
        self.page = _SearchPage(query=query, ids=self.catalog.search(query))
        return self._render_results(self.page)

    def _click(self, widget: str) -> str:
        page = self.page
        if widget == "Back to Search":
            self.page = None
            return "You are back at the search page. Search for a product."
        if isinstance(page, _SearchPage):
            total_pages = max(1, -(-len(page.ids) // RESULTS_PER_PAGE))
            if widget == "Next" and page.page < total_pages:
                page.page += 1
                return self._render_results(page)
            if widget == "Prev" and page.page > 1:
                page.page -= 1
                return self._render_results(page)
            start = (page.page - 1) * RESULTS_PER_PAGE
            if widget in page.ids[start : start + RESULTS_PER_PAGE]:
                self.page = _ProductPage(product_id=widget, selected={}, origin=page)
                return self._render_product(self.page)
            return NOTHING_HAPPENS
        if isinstance(page, _ProductPage):
            if widget == "Prev":
                self.page = page.origin
                if self.page is None:
                    return "You are back at the search page. Search for a product."
                return self._render_results(self.page)
            if widget == "Buy Now":
                self.purchase = Purchase(page.product_id, dict(page.selected))
                return "You have clicked buy now."
            product = self.catalog.get(page.product_id)
            assert product is not None
            group = product.option_group_for(widget)
            if group is not None:
                page.selected[group] = widget
                return f"You have clicked {widget}."
            return NOTHING_HAPPENS
        return NOTHING_HAPPENS

    def execute(self, act: Step) -> str:
        if act.kind is not StepKind.ACTION:
            raise ValueError("execute expects a domain action")
        arg = act.args[0] if act.args else ""
        if act.verb == "search":
            return self._search(arg)
        if act.verb == "click":
            return self._click(arg)
        if act.verb == "think":
            return "OK."
        return NOTHING_HAPPENS

    def is_done(self) -> bool:
        return self.purchase is not None

    def result(self) -> dict[str, Any]:
        score, success = score_episode(self.goal, self.purchase, self.catalog)
        return {
            "purchase": None
            if self.purchase is None
            else {"id": self.purchase.product_id, "options": dict(self.purchase.options)},
            "score": score,
            "success": success,
        }

    def state_hash(self) -> str:
        if isinstance(self.page, _SearchPage):
            state: tuple = ("results", self.page.query, self.page.page, tuple(self.page.ids))
        elif isinstance(self.page, _ProductPage):
            state = ("product", self.page.product_id, tuple(sorted(self.page.selected.items())))
        else:
            state = ("home",)
        state = state + (None if self.purchase is None else self.purchase.product_id,)
        return hashlib.sha256(repr(state).encode("utf-8")).hexdigest()


def load_goals(path: str) -> list[ShopGoal]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(ShopGoal.from_dict(json.loads(line)))
    return out
