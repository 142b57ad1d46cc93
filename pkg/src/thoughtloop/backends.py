"""Text-completion backends: a minimal HTTP client and a deterministic scripted one.

The remote protocol is a vendor-neutral completions contract:

    POST {THOUGHTLOOP_LM_URL}
    {"prompt": str, "temperature": float, "max_tokens": int,
     "stop": [str, ...], "n": int}
    -> 200 {"choices": [{"text": str}, ...]}

Credentials ride in ``Authorization: Bearer {THOUGHTLOOP_LM_TOKEN}`` when the
variable is set. Adapters for specific vendors can map onto this shape.

The scripted backend replays canned responses keyed by prompt, so a full
harness run over a fixture is byte-deterministic. Keys are either the SHA-256
of the whole prompt (``exact``) or of its last ``window`` characters
(``suffix-window``), the latter surviving prompt-preamble edits. Fixture
files are line-delimited JSON: a ``{"meta": ...}`` first line then
``{"key":..., "responses": [...]}`` records.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from typing import Iterable, Protocol

import httpx

DEFAULT_TIMEOUT = 60.0
DEFAULT_RETRIES = 3
DEFAULT_SUFFIX_WINDOW = 2048

ENV_URL = "THOUGHTLOOP_LM_URL"
ENV_TOKEN = "THOUGHTLOOP_LM_TOKEN"

EXACT = "exact"
SUFFIX_WINDOW = "suffix-window"


class BackendError(Exception):
    pass


class BackendUnavailable(BackendError):
    """Remote endpoint unreachable or persistently failing."""


class RateLimited(BackendError):
    def __init__(self, after: float):
        super().__init__(f"rate limited, retry after {after:.1f}s")
        self.after = after


class ScriptMiss(BackendError):
    """The scripted table has no (remaining) response for this prompt.

    Deliberately loud: a replay test must fail here rather than improvise.
    """

    def __init__(self, key: str, prompt_tail: str):
        super().__init__(
            f"no scripted response for key {key[:16]}...; prompt tail: {prompt_tail!r}"
        )
        self.key = key


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 512
    stop: tuple[str, ...] = ()
    n: int = 1

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1 or self.n < 1:
            raise ValueError("max_tokens and n must be positive")


@dataclass
class RequestRecord:
    """One logged call: enough to convert a live run into a scripted fixture."""

    prompt_sha256: str
    key: str
    temperature: float
    max_tokens: int
    stop: tuple[str, ...]
    n: int
    latency_s: float
    responses: list[str]


class RequestLog:
    """Thread-safe call log shared by backends."""

    def __init__(self) -> None:
        self._records: list[RequestRecord] = []
        self._lock = threading.Lock()

    def add(self, record: RequestRecord) -> None:
        with self._lock:
            self._records.append(record)

    @property
    def records(self) -> list[RequestRecord]:
        with self._lock:
            return list(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def to_fixture(self, path: str, key_mode: str = SUFFIX_WINDOW) -> None:
        """Persist the log as a scripted-backend fixture file."""
        merged: dict[str, list[str]] = {}
        for rec in self.records:
            merged.setdefault(rec.key, []).extend(rec.responses)
        write_fixture(path, merged, key_mode=key_mode)


class Backend(Protocol):
    def complete(self, request: CompletionRequest) -> list[str]: ...


def prompt_key(prompt: str, key_mode: str = SUFFIX_WINDOW, window: int = DEFAULT_SUFFIX_WINDOW) -> str:
    if key_mode == EXACT:
        material = prompt
    elif key_mode == SUFFIX_WINDOW:
        material = prompt[-window:]
    else:
        raise ValueError(f"unknown key mode {key_mode!r}")
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


class ScriptedBackend:
    """Deterministic backend consuming a prompt-keyed response table in order.

    ``temperature == 0`` requests consume one response and repeat it ``n``
    times (greedy decoding is sample-invariant); positive temperatures
    consume ``n`` distinct entries. Consumption per key is serialized, so
    concurrent episodes see a stable order.
    """

    def __init__(
        self,
        table: dict[str, list[str]] | None = None,
        key_mode: str = SUFFIX_WINDOW,
        window: int = DEFAULT_SUFFIX_WINDOW,
        log: RequestLog | None = None,
    ) -> None:
        self.key_mode = key_mode
        self.window = window
        self.log = log if log is not None else RequestLog()
        self._table: dict[str, list[str]] = {k: list(v) for k, v in (table or {}).items()}
        self._lock = threading.Lock()
        self.calls = 0

    def key_for(self, prompt: str) -> str:
        return prompt_key(prompt, self.key_mode, self.window)

    def record(self, prompt: str, responses: Iterable[str]) -> None:
        """Register responses for a prompt (appended after any existing ones)."""
        key = self.key_for(prompt)
        with self._lock:
            self._table.setdefault(key, []).extend(responses)

    def record_key(self, key: str, responses: Iterable[str]) -> None:
        with self._lock:
            self._table.setdefault(key, []).extend(responses)

    def remaining(self) -> int:
        with self._lock:
            return sum(len(v) for v in self._table.values())

    def complete(self, request: CompletionRequest) -> list[str]:
        key = self.key_for(request.prompt)
        started = time.perf_counter()
        with self._lock:
            self.calls += 1
            queue = self._table.get(key)
            if not queue:
                raise ScriptMiss(key, request.prompt[-160:])
            if request.temperature == 0:
                texts = [queue.pop(0)] * request.n
            else:
                if len(queue) < request.n:
                    raise ScriptMiss(key, request.prompt[-160:])
                texts = [queue.pop(0) for _ in range(request.n)]
        if request.stop:
            texts = [_truncate(t, request.stop) for t in texts]
        self.log.add(
            RequestRecord(
                prompt_sha256=hashlib.sha256(request.prompt.encode("utf-8")).hexdigest(),
                key=key,
                temperature=request.temperature,
                max_tokens=request.max_tokens,
                stop=request.stop,
                n=request.n,
                latency_s=time.perf_counter() - started,
                responses=list(texts),
            )
        )
        return texts


def _truncate(text: str, stop: tuple[str, ...]) -> str:
    cut = len(text)
    for s in stop:
        pos = text.find(s)
        if pos != -1:
            cut = min(cut, pos)
    return text[:cut]


class HttpBackend:
    """Client for the minimal completions contract described in the module docs.

    Retries rate limits with exponential backoff (3 attempts); connection
    errors and 5xx responses surface as :class:`BackendUnavailable`.
    """

    def __init__(
        self,
        url: str | None = None,
        token: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        retries: int = DEFAULT_RETRIES,
        log: RequestLog | None = None,
        transport: httpx.BaseTransport | None = None,
        key_mode: str = SUFFIX_WINDOW,
        window: int = DEFAULT_SUFFIX_WINDOW,
    ) -> None:
        self.url = url or os.environ.get(ENV_URL, "")
        if not self.url:
            raise ValueError(f"no endpoint URL (set {ENV_URL} or pass url=)")
        self.token = token if token is not None else os.environ.get(ENV_TOKEN, "")
        self.retries = retries
        self.log = log if log is not None else RequestLog()
        self.key_mode = key_mode
        self.window = window
        headers = {"Authorization": f"Bearer {self.token}"} if self.token else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)
        self.calls = 0

    def close(self) -> None:
        self._client.close()

    def complete(self, request: CompletionRequest) -> list[str]:
        payload = {
            "prompt": request.prompt,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "stop": list(request.stop),
            "n": request.n,
        }
        delay = 1.0
        last_rate: RateLimited | None = None
        for attempt in range(self.retries):
            started = time.perf_counter()
            try:
                resp = self._client.post(self.url, json=payload)
            except httpx.HTTPError as exc:
                raise BackendUnavailable(f"request failed: {exc}") from exc
            self.calls += 1
            if resp.status_code == 429:
                after = float(resp.headers.get("Retry-After", delay))
                last_rate = RateLimited(after)
                if attempt + 1 < self.retries:
                    time.sleep(after)
                    delay *= 2
                    continue
                raise last_rate
            if resp.status_code >= 500:
                raise BackendUnavailable(f"server error {resp.status_code}")
            if resp.status_code != 200:
                raise BackendError(f"unexpected status {resp.status_code}: {resp.text[:200]}")
            try:
                texts = [c["text"] for c in resp.json()["choices"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise BackendError(f"malformed response body: {exc}") from exc
            self.log.add(
                RequestRecord(
                    prompt_sha256=hashlib.sha256(request.prompt.encode("utf-8")).hexdigest(),
                    key=prompt_key(request.prompt, self.key_mode, self.window),
                    temperature=request.temperature,
                    max_tokens=request.max_tokens,
                    stop=request.stop,
                    n=request.n,
                    latency_s=time.perf_counter() - started,
                    responses=list(texts),
                )
            )
            return texts
        raise last_rate if last_rate else BackendUnavailable("retries exhausted")


class CountingBackend:
    """Wrapper that counts delegated calls; used by hybrid-strategy accounting."""

    def __init__(self, inner: Backend) -> None:
        self.inner = inner
        self.calls = 0

    def complete(self, request: CompletionRequest) -> list[str]:
        self.calls += 1
        return self.inner.complete(request)


# ── fixture files ──────────────────────────────────────────────────────────


def write_fixture(
    path: str,
    table: dict[str, list[str]],
    key_mode: str = SUFFIX_WINDOW,
    window: int = DEFAULT_SUFFIX_WINDOW,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"meta": {"key_mode": key_mode, "window": window}}) + "\n")
        for key, responses in table.items():
            fh.write(json.dumps({"key": key, "responses": responses}, ensure_ascii=False) + "\n")


def load_fixture(path: str, log: RequestLog | None = None) -> ScriptedBackend:
    key_mode, window = SUFFIX_WINDOW, DEFAULT_SUFFIX_WINDOW
    table: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "meta" in record:
                key_mode = record["meta"].get("key_mode", key_mode)
                window = record["meta"].get("window", window)
                continue
            table.setdefault(record["key"], []).extend(record["responses"])
    return ScriptedBackend(table, key_mode=key_mode, window=window, log=log)
