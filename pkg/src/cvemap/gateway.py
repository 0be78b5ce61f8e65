"""Provider-agnostic chat-completion access.

One gateway fronts either a live HTTP backend or a recorded fixture store.
Responses are cached on disk keyed by a stable digest of the request, so a
directory of cached live responses doubles as a fixture store for later
deterministic replays. The gateway enforces a concurrent-request cap and an
optional requests-per-minute budget, retries transient failures with
exponential backoff, and accumulates usage for cost estimation.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .types import CvemapError

logger = logging.getLogger(__name__)

DEFAULT_MAX_RETRIES = 3
DEFAULT_BACKOFF_BASE_S = 0.5


class GatewayError(CvemapError):
    """Base class for gateway failures."""


class TransportError(GatewayError):
    """Transient failure (network, timeout, rate limit, server error)."""


class ProviderError(GatewayError):
    """Non-retryable provider rejection, with status detail."""


class FixtureMissingError(GatewayError):
    """The recorded store has no response for the request digest."""


@dataclass(frozen=True)
class ChatRequest:
    system_text: str
    user_text: str
    model_name: str
    temperature: float = 0.0
    max_output_tokens: int = 1024

    def __post_init__(self) -> None:
        if not self.user_text:
            raise ValueError("user_text must be nonempty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    input_token_count: int
    output_token_count: int
    latency_s: float
    backend_id: str
    tokens_estimated: bool = False


def request_digest(request: ChatRequest) -> str:
    """Stable cache key over the fields that determine the completion."""
    payload = json.dumps(
        {
            "model": request.model_name,
            "system": request.system_text,
            "temperature": request.temperature,
            "user": request.user_text,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def estimate_token_count(text: str) -> int:
    """Whitespace and punctuation token heuristic, used when the provider
    reports no counts. Flagged as an estimate wherever it is recorded."""
    return len(_TOKEN_RE.findall(text))


@dataclass
class UsageRecord:
    """Per-run accumulators; values only ever increase during a run."""

    request_count: int = 0
    cache_hits: int = 0
    retry_count: int = 0
    input_tokens: int = 0
    output_tokens: int = 0
    wall_time_s: float = 0.0
    has_estimated_tokens: bool = False
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record(self, response: ChatResponse, retries: int = 0, cache_hit: bool = False) -> None:
        with self._lock:
            self.request_count += 1
            self.cache_hits += 1 if cache_hit else 0
            self.retry_count += retries
            self.input_tokens += response.input_token_count
            self.output_tokens += response.output_token_count
            self.wall_time_s += response.latency_s
            self.has_estimated_tokens = self.has_estimated_tokens or response.tokens_estimated

    def combined(self, other: "UsageRecord") -> "UsageRecord":
        return UsageRecord(
            request_count=self.request_count + other.request_count,
            cache_hits=self.cache_hits + other.cache_hits,
            retry_count=self.retry_count + other.retry_count,
            input_tokens=self.input_tokens + other.input_tokens,
            output_tokens=self.output_tokens + other.output_tokens,
            wall_time_s=self.wall_time_s + other.wall_time_s,
            has_estimated_tokens=self.has_estimated_tokens or other.has_estimated_tokens,
        )

    def as_dict(self) -> dict:
        # wall_time_s deliberately excluded: run artifacts must be byte-stable.
        return {
            "request_count": self.request_count,
            "cache_hits": self.cache_hits,
            "retry_count": self.retry_count,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "tokens_estimated": self.has_estimated_tokens,
        }


def load_price_table(path) -> dict[str, dict[str, float]]:
    """Price table file: model name -> {input, output} USD per million tokens."""
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def estimate_cost(usage: UsageRecord, prices: dict[str, dict[str, float]], model_name: str) -> float:
    if model_name not in prices:
        raise GatewayError(f"price table has no entry for model {model_name!r}")
    row = prices[model_name]
    return (usage.input_tokens * row["input"] + usage.output_tokens * row["output"]) / 1_000_000


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------


def _store_paths(directory: Path, digest: str) -> tuple[Path, Path]:
    return directory / f"{digest}.txt", directory / f"{digest}.meta.json"


def read_stored_response(directory: Path, digest: str) -> ChatResponse | None:
    text_path, meta_path = _store_paths(directory, digest)
    if not text_path.exists():
        return None
    text = text_path.read_text(encoding="utf-8")
    meta = {}
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    return ChatResponse(
        text=text,
        input_token_count=int(meta.get("input_tokens", 0)),
        output_token_count=int(meta.get("output_tokens", estimate_token_count(text))),
        latency_s=float(meta.get("latency_s", 0.0)),
        backend_id=str(meta.get("backend_id", "recorded")),
        tokens_estimated=bool(meta.get("tokens_estimated", False)),
    )


def write_stored_response(directory: Path, digest: str, response: ChatResponse) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    text_path, meta_path = _store_paths(directory, digest)
    text_path.write_text(response.text, encoding="utf-8")
    meta_path.write_text(
        json.dumps(
            {
                "input_tokens": response.input_token_count,
                "output_tokens": response.output_token_count,
                "latency_s": response.latency_s,
                "backend_id": response.backend_id,
                "tokens_estimated": response.tokens_estimated,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )


class RecordedBackend:
    """Replays responses from a fixture store directory. Never touches the network."""

    def __init__(self, fixture_dir) -> None:
        self.fixture_dir = Path(fixture_dir)
        self.backend_id = f"recorded:{self.fixture_dir.name}"

    def complete(self, request: ChatRequest) -> ChatResponse:
        digest = request_digest(request)
        response = read_stored_response(self.fixture_dir, digest)
        if response is None:
            raise FixtureMissingError(
                f"fixture missing for digest {digest} (model={request.model_name})"
            )
        return response


class LiveBackend:
    """HTTP chat-completion backend (OpenAI-style wire protocol)."""

    def __init__(
        self,
        endpoint_url: str,
        credential_env: str = "OPENAI_API_KEY",
        timeout_s: float = 120.0,
    ) -> None:
        self.endpoint_url = endpoint_url
        self.credential_env = credential_env
        self.timeout_s = timeout_s
        self.backend_id = f"live:{endpoint_url}"

    def complete(self, request: ChatRequest) -> ChatResponse:
        api_key = os.environ.get(self.credential_env)
        if not api_key:
            raise ProviderError(f"credential environment variable {self.credential_env} is not set")
        messages = []
        if request.system_text:
            messages.append({"role": "system", "content": request.system_text})
        messages.append({"role": "user", "content": request.user_text})
        started = time.monotonic()
        try:
            http_response = requests.post(
                self.endpoint_url,
                headers={"Authorization": f"Bearer {api_key}"},
                json={
                    "model": request.model_name,
                    "messages": messages,
                    "temperature": request.temperature,
                    "max_tokens": request.max_output_tokens,
                },
                timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}") from exc
        latency = time.monotonic() - started
        if http_response.status_code == 429 or http_response.status_code >= 500:
            raise TransportError(
                f"status {http_response.status_code}: {http_response.text[:200]}"
            )
        if http_response.status_code >= 400:
            raise ProviderError(
                f"status {http_response.status_code}: {http_response.text[:200]}"
            )
        body = http_response.json()
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion payload: {exc}") from exc
        usage = body.get("usage") or {}
        estimated = "prompt_tokens" not in usage
        return ChatResponse(
            text=text,
            input_token_count=usage.get(
                "prompt_tokens", estimate_token_count(request.system_text + request.user_text)
            ),
            output_token_count=usage.get("completion_tokens", estimate_token_count(text)),
            latency_s=latency,
            backend_id=self.backend_id,
            tokens_estimated=estimated,
        )


# ---------------------------------------------------------------------------
# Gateway
# ---------------------------------------------------------------------------


class Gateway:
    """Retrying, rate-limited front for a backend, with a disk response cache.

    Safe for concurrent callers; at most ``max_concurrent`` requests are in
    flight and at most ``requests_per_minute`` backend calls start per minute.
    Cache writes are serialized.
    """

    def __init__(
        self,
        backend,
        cache_dir=None,
        max_retries: int = DEFAULT_MAX_RETRIES,
        backoff_base_s: float = DEFAULT_BACKOFF_BASE_S,
        max_concurrent: int = 4,
        requests_per_minute: int | None = None,
        sleep=time.sleep,
        clock=time.monotonic,
    ) -> None:
        self.backend = backend
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.max_retries = max_retries
        self.backoff_base_s = backoff_base_s
        self.requests_per_minute = requests_per_minute
        self.usage = UsageRecord()
        self._sleep = sleep
        self._clock = clock
        self._semaphore = threading.BoundedSemaphore(max_concurrent)
        self._write_lock = threading.Lock()
        self._rpm_lock = threading.Lock()
        self._recent_calls: deque[float] = deque()

    def complete(self, request: ChatRequest) -> ChatResponse:
        digest = request_digest(request)
        if self.cache_dir is not None:
            cached = read_stored_response(self.cache_dir, digest)
            if cached is not None:
                self.usage.record(cached, cache_hit=True)
                return cached

        retries = 0
        with self._semaphore:
            while True:
                self._respect_rate_budget()
                try:
                    response = self.backend.complete(request)
                    break
                except TransportError as exc:
                    if retries >= self.max_retries:
                        raise TransportError(
                            f"retries exhausted after {retries} attempts: {exc}"
                        ) from exc
                    delay = self.backoff_base_s * (2**retries)
                    logger.warning("transient failure (%s); retrying in %.1fs", exc, delay)
                    self._sleep(delay)
                    retries += 1

        if self.cache_dir is not None:
            with self._write_lock:
                write_stored_response(self.cache_dir, digest, response)
        self.usage.record(response, retries=retries)
        return response

    def _respect_rate_budget(self) -> None:
        if self.requests_per_minute is None:
            return
        with self._rpm_lock:
            now = self._clock()
            while self._recent_calls and now - self._recent_calls[0] > 60.0:
                self._recent_calls.popleft()
            if len(self._recent_calls) >= self.requests_per_minute:
                wait = 60.0 - (now - self._recent_calls[0])
                if wait > 0:
                    self._sleep(wait)
                now = self._clock()
                while self._recent_calls and now - self._recent_calls[0] > 60.0:
                    self._recent_calls.popleft()
            self._recent_calls.append(self._clock())
