"""Wikipedia-style lookup environment over an offline corpus snapshot.

Three actions: ``search[entity]`` shows a page's lead (first five sentences);
a miss suggests the five most similar titles. ``lookup[keyword]`` walks the
matching sentences of the current page one at a time, like Ctrl+F.
``finish[answer]`` ends the episode (handled by the agent loop).

A corpus file is line-delimited JSON. Page records carry ``title`` and
``sentences``; an optional ``lead`` caps how many sentences search displays
while lookup still scans the whole page. ``{"index_title": ...}`` records add
suggestion-only titles, and ``{"suggest_for": ..., "titles": [...]}`` records
pin the exact suggestion list for a query (used to replay observations that
were originally produced by a real search engine, which token similarity
cannot reconstruct).

Live mode speaks the same contract over HTTP (see :class:`LiveWikiCorpus`);
it is exercised with recorded transports only.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass
from typing import Iterable

import httpx

from ..parsing import LABELED, SurfaceSyntax
from ..trajectory import Step, StepKind

SEARCH_DISPLAY_SENTENCES = 5
SUGGESTION_COUNT = 5

ENV_WIKI_URL = "THOUGHTLOOP_WIKI_URL"
ENV_WIKI_MIN_INTERVAL = "THOUGHTLOOP_WIKI_MIN_INTERVAL"

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+(?=[A-Z\"“])")
_TOKEN = re.compile(r"[a-z0-9]+")


def normalize_title(title: str) -> str:
    return " ".join(title.split()).casefold()


def tokenize(text: str) -> frozenset[str]:
    return frozenset(_TOKEN.findall(text.casefold()))


def segment_sentences(text: str) -> list[str]:
    """Heuristic splitter for raw page text: end punctuation, space, uppercase."""
    return [s for s in _SENTENCE_BOUNDARY.split(text.strip()) if s]


@dataclass(frozen=True)
class WikiPage:
    title: str
    sentences: tuple[str, ...]
    lead: int | None = None

    def __post_init__(self) -> None:
        if not self.sentences:
            raise ValueError(f"page {self.title!r} must have at least one sentence")

    @property
    def lead_sentences(self) -> tuple[str, ...]:
        n = self.lead if self.lead is not None else len(self.sentences)
        return self.sentences[:n]


class WikiCorpus:
    """Immutable page store plus a title index for similarity suggestions."""

    def __init__(
        self,
        pages: Iterable[WikiPage] = (),
        index_titles: Iterable[str] = (),
        suggestions: dict[str, tuple[str, ...]] | None = None,
    ) -> None:
        self._pages: dict[str, WikiPage] = {}
        for page in pages:
            key = normalize_title(page.title)
            if key in self._pages:
                raise ValueError(f"duplicate page title after normalization: {page.title!r}")
            self._pages[key] = page
        self._index_titles = tuple(dict.fromkeys(index_titles))
        self._suggestions = {normalize_title(k): tuple(v) for k, v in (suggestions or {}).items()}

    def __len__(self) -> int:
        return len(self._pages)

    @property
    def titles(self) -> list[str]:
        return [p.title for p in self._pages.values()]

    def find(self, entity: str) -> WikiPage | None:
        return self._pages.get(normalize_title(entity))

    def similar(self, entity: str, k: int = SUGGESTION_COUNT) -> list[str]:
        """Top-k index titles by token Jaccard; ties break on the title text.

        A recorded suggestion list for the query takes precedence.
        """
        recorded = self._suggestions.get(normalize_title(entity))
        if recorded is not None:
            return list(recorded[:k])
        query = tokenize(entity)
        candidates = list(dict.fromkeys(self.titles + list(self._index_titles)))

        def score(title: str) -> float:
            tokens = tokenize(title)
            union = query | tokens
            return len(query & tokens) / len(union) if union else 0.0

        ranked = sorted(candidates, key=lambda t: (-score(t), t))
        return ranked[:k]

    # Corpus files: one JSON object per line, see the module docstring.

    @classmethod
    def load(cls, path: str) -> "WikiCorpus":
        pages: list[WikiPage] = []
        index_titles: list[str] = []
        suggestions: dict[str, tuple[str, ...]] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if "index_title" in record:
                    index_titles.append(record["index_title"])
                elif "suggest_for" in record:
                    suggestions[record["suggest_for"]] = tuple(record["titles"])
                else:
                    pages.append(
                        WikiPage(
                            title=record["title"],
                            sentences=tuple(record["sentences"]),
                            lead=record.get("lead"),
                        )
                    )
        return cls(pages, index_titles, suggestions)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for page in self._pages.values():
                record: dict = {"title": page.title, "sentences": list(page.sentences)}
                if page.lead is not None:
                    record["lead"] = page.lead
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            for title in self._index_titles:
                fh.write(json.dumps({"index_title": title}, ensure_ascii=False) + "\n")
            for query, titles in self._suggestions.items():
                fh.write(
                    json.dumps({"suggest_for": query, "titles": list(titles)}, ensure_ascii=False)
                    + "\n"
                )


class LiveWikiCorpus:
    """Same find/similar contract against a remote page service.

    ``GET {base}/page?title=...`` returns ``{"title":..., "sentences":[...],
    "lead":...}`` or 404; ``GET {base}/similar?q=...`` returns
    ``{"titles": [...]}``. Calls are spaced at least ``min_interval`` apart.
    """

    def __init__(
        self,
        base_url: str | None = None,
        min_interval: float | None = None,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        self.base_url = (base_url or os.environ.get(ENV_WIKI_URL, "")).rstrip("/")
        if not self.base_url:
            raise ValueError(f"no wiki endpoint (set {ENV_WIKI_URL} or pass base_url=)")
        if min_interval is None:
            min_interval = float(os.environ.get(ENV_WIKI_MIN_INTERVAL, "0"))
        self.min_interval = min_interval
        self._last_call = 0.0
        self._client = httpx.Client(transport=transport, timeout=30.0)

    def _throttle(self) -> None:
        if self.min_interval <= 0:
            return
        wait = self._last_call + self.min_interval - time.monotonic()
        if wait > 0:
            time.sleep(wait)
        self._last_call = time.monotonic()

    def find(self, entity: str) -> WikiPage | None:
        self._throttle()
        resp = self._client.get(f"{self.base_url}/page", params={"title": entity})
        if resp.status_code == 404:
            return None
        resp.raise_for_status()
        data = resp.json()
        return WikiPage(
            title=data["title"], sentences=tuple(data["sentences"]), lead=data.get("lead")
        )

    def similar(self, entity: str, k: int = SUGGESTION_COUNT) -> list[str]:
        self._throttle()
        resp = self._client.get(f"{self.base_url}/similar", params={"q": entity})
        resp.raise_for_status()
        return list(resp.json()["titles"])[:k]


class WikiEnv:
    """Per-episode cursor over a shared corpus."""

    echoes_thoughts = False

    def __init__(self, corpus: WikiCorpus | LiveWikiCorpus) -> None:
        self.corpus = corpus
        self.syntax = SurfaceSyntax(LABELED)
        self.current_page: WikiPage | None = None
        self.lookup_keyword: str | None = None
        self.lookup_position = 0

    def reset(self) -> str | None:
        self.current_page = None
        self.lookup_keyword = None
        self.lookup_position = 0
        return None

    def search(self, entity: str) -> str:
        self.lookup_keyword = None
        self.lookup_position = 0
        page = self.corpus.find(entity)
        if page is None:
            self.current_page = None
            titles = self.corpus.similar(entity, SUGGESTION_COUNT)
            return f"Could not find [{entity}]. Similar: {titles!r}."
        self.current_page = page
        return " ".join(page.lead_sentences[:SEARCH_DISPLAY_SENTENCES])

    def lookup(self, keyword: str) -> str:
        if self.current_page is None:
            return "No page loaded."
        if keyword != self.lookup_keyword:
            self.lookup_keyword = keyword
            self.lookup_position = 0
        needle = keyword.casefold()
        matches = [s for s in self.current_page.sentences if needle in s.casefold()]
        total = len(matches)
        if total == 0:
            return "(Result 0 / 0) No more results."
        if self.lookup_position >= total:
            return "No more results."
        self.lookup_position += 1
        return f"(Result {self.lookup_position} / {total}) {matches[self.lookup_position - 1]}"

    def execute(self, act: Step) -> str:
        if act.kind is not StepKind.ACTION:
            raise ValueError("execute expects a domain action")
        arg = act.args[0] if act.args else ""
        if act.verb == "search":
            return self.search(arg)
        if act.verb == "lookup":
            return self.lookup(arg)
        return "Nothing happens."

    def is_done(self) -> bool:
        return False

    def result(self) -> dict:
        return {}

    def state_hash(self) -> str:
        state = (
            self.current_page.title if self.current_page else None,
            self.lookup_keyword,
            self.lookup_position,
        )
        return hashlib.sha256(repr(state).encode("utf-8")).hexdigest()

    @property
    def verbs(self) -> tuple[str, ...]:
        return ("search", "lookup", "finish")
