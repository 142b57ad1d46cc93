from __future__ import annotations

import threading

import httpx
import pytest

from thoughtloop.backends import (
    EXACT,
    BackendError,
    BackendUnavailable,
    CompletionRequest,
    HttpBackend,
    RateLimited,
    ScriptedBackend,
    ScriptMiss,
    load_fixture,
    prompt_key,
    write_fixture,
)


def test_scripted_single_lookup():
    backend = ScriptedBackend()
    backend.record("P1", ["Thought 1: consider the question."])
    assert backend.complete(CompletionRequest(prompt="P1")) == [
        "Thought 1: consider the question."
    ]


def test_scripted_consumes_in_order():
    backend = ScriptedBackend()
    backend.record("P", ["first"])
    backend.record("P", ["second"])
    req = CompletionRequest(prompt="P", temperature=0.7)
    assert backend.complete(req) == ["first"]
    assert backend.complete(req) == ["second"]


def test_scripted_sampling_returns_all_in_order():
    backend = ScriptedBackend()
    responses = [f"Answer: a{i}" for i in range(21)]
    backend.record("COT", responses)
    out = backend.complete(CompletionRequest(prompt="COT", temperature=0.7, n=21))
    assert out == responses


def test_scripted_greedy_duplicates_single_response():
    backend = ScriptedBackend()
    backend.record("P", ["only"])
    out = backend.complete(CompletionRequest(prompt="P", temperature=0.0, n=3))
    assert out == ["only", "only", "only"]
    assert backend.remaining() == 0


def test_script_miss_is_loud():
    backend = ScriptedBackend()
    with pytest.raises(ScriptMiss):
        backend.complete(CompletionRequest(prompt="unknown"))


def test_scripted_honors_stop_strings():
    backend = ScriptedBackend()
    backend.record("P", ["a thought\nObservation 1: leak"])
    out = backend.complete(CompletionRequest(prompt="P", stop=("\nObservation",)))
    assert out == ["a thought"]


def test_suffix_window_keying_survives_preamble_edits():
    backend = ScriptedBackend(window=32)
    tail = "x" * 40
    backend.record("PREAMBLE A\n" + tail, ["resp"])
    out = backend.complete(CompletionRequest(prompt="totally different preamble\n" + tail))
    assert out == ["resp"]


def test_exact_keying_distinguishes_whole_prompt():
    backend = ScriptedBackend(key_mode=EXACT)
    backend.record("A" + "x" * 3000, ["resp"])
    with pytest.raises(ScriptMiss):
        backend.complete(CompletionRequest(prompt="B" + "x" * 3000))


def test_request_log_records_calls():
    backend = ScriptedBackend()
    backend.record("P", ["r"])
    backend.complete(CompletionRequest(prompt="P", max_tokens=7))
    assert len(backend.log) == 1
    record = backend.log.records[0]
    assert record.max_tokens == 7 and record.responses == ["r"]


def test_fixture_file_round_trip(tmp_path):
    path = str(tmp_path / "table.jsonl")
    write_fixture(path, {prompt_key("P"): ["one", "two"]})
    backend = load_fixture(path)
    req = CompletionRequest(prompt="P", temperature=0.7)
    assert backend.complete(req) == ["one"]
    assert backend.complete(req) == ["two"]


def test_log_to_fixture_round_trip(tmp_path):
    backend = ScriptedBackend()
    backend.record("P", ["resp"])
    backend.complete(CompletionRequest(prompt="P"))
    path = str(tmp_path / "recorded.jsonl")
    backend.log.to_fixture(path)
    replay = load_fixture(path)
    assert replay.complete(CompletionRequest(prompt="P")) == ["resp"]


def test_scripted_concurrent_consumption_is_complete():
    backend = ScriptedBackend()
    backend.record("P", [f"r{i}" for i in range(40)])
    seen: list[str] = []
    lock = threading.Lock()

    def worker():
        for _ in range(10):
            out = backend.complete(CompletionRequest(prompt="P", temperature=0.7))
            with lock:
                seen.extend(out)

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(seen) == sorted(f"r{i}" for i in range(40))


def _http_backend(handler, retries=3):
    transport = httpx.MockTransport(handler)
    return HttpBackend(url="http://lm.test/complete", transport=transport, retries=retries)


def test_http_backend_success():
    def handler(request):
        assert request.headers.get("authorization") is None
        return httpx.Response(200, json={"choices": [{"text": "hello"}]})

    backend = _http_backend(handler)
    assert backend.complete(CompletionRequest(prompt="p")) == ["hello"]


def test_http_backend_unreachable():
    def handler(request):
        raise httpx.ConnectError("no route to host")

    backend = _http_backend(handler)
    with pytest.raises(BackendUnavailable):
        backend.complete(CompletionRequest(prompt="p"))


def test_http_backend_rate_limit_retries_then_raises():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(429, headers={"Retry-After": "0"})

    backend = _http_backend(handler)
    with pytest.raises(RateLimited):
        backend.complete(CompletionRequest(prompt="p"))
    assert len(calls) == 3


def test_http_backend_recovers_after_rate_limit():
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) == 1:
            return httpx.Response(429, headers={"Retry-After": "0"})
        return httpx.Response(200, json={"choices": [{"text": "ok"}]})

    backend = _http_backend(handler)
    assert backend.complete(CompletionRequest(prompt="p")) == ["ok"]


def test_http_backend_malformed_body():
    backend = _http_backend(lambda request: httpx.Response(200, json={"nope": 1}))
    with pytest.raises(BackendError):
        backend.complete(CompletionRequest(prompt="p"))


def test_http_backend_requires_url(monkeypatch):
    monkeypatch.delenv("THOUGHTLOOP_LM_URL", raising=False)
    with pytest.raises(ValueError):
        HttpBackend()


def test_request_validation():
    with pytest.raises(ValueError):
        CompletionRequest(prompt="p", temperature=-1)
    with pytest.raises(ValueError):
        CompletionRequest(prompt="p", n=0)
