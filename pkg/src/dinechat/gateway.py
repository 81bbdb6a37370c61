"""Rate-limited client for chat-completion backends.

Every request is pre-checked against the 4,096-token per-request limit
(estimated prompt plus reply budget) and debited against a sliding-window
ledger capped at 90,000 tokens per minute. Backends are pluggable: a live
OpenAI-compatible HTTP endpoint, a scripted mock keyed by prompt digest, and
the deterministic DINE oracle used for offline end-to-end runs.
"""

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field

import httpx

from . import oracle
from .config import GatewayConfig
from .errors import (BudgetError, ConfigurationError, CredentialError,
                     GatewayError, RateLimitedError)
from .tokens import (REQUEST_TOKEN_LIMIT, TOKENS_PER_MINUTE,
                     estimate_sequence_tokens, estimate_tokens)

WINDOW_SECONDS = 60.0


@dataclass(frozen=True)
class CompletionParams:
    n: int = 1
    max_token: int = 350
    temperature: float = 0.0
    top_p: float = 1.0
    model: str = "gpt-3.5-turbo"

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError("n must be at least 1")
        if self.max_token < 1:
            raise ConfigurationError("max_token must be positive")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigurationError("temperature must lie in [0, 2]")
        if not 0.0 < self.top_p <= 1.0:
            raise ConfigurationError("top_p must lie in (0, 1]")


@dataclass
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    @property
    def total(self):
        return self.prompt_tokens + self.completion_tokens


@dataclass
class GatewayResult:
    responses: list
    usage: Usage
    prompt_digest: str = ""


class SystemClock:
    def now(self):
        return time.monotonic()

    def sleep(self, seconds):
        time.sleep(seconds)


class SimulatedClock:
    """Manual clock for deterministic rate-limit tests."""

    def __init__(self, start=0.0):
        self._now = float(start)

    def now(self):
        return self._now

    def sleep(self, seconds):
        self._now += float(seconds)

    def advance(self, seconds):
        self._now += float(seconds)


class RateBudget:
    """Sliding-window token ledger.

    An entry expires once it is a full window old. A request is granted when
    the live window total plus the request fits under the cap; otherwise the
    caller gets the exact wait until enough old entries expire.
    """

    def __init__(self, tokens_per_minute=TOKENS_PER_MINUTE,
                 per_request_cap=REQUEST_TOKEN_LIMIT, clock=None):
        self.cap = int(tokens_per_minute)
        self.per_request_cap = int(per_request_cap)
        self.clock = clock or SystemClock()
        self._ledger = []          # [timestamp, tokens, entry_id], oldest first
        self._next_id = 0
        self._lock = threading.Lock()

    def _prune(self, now):
        cutoff = now - WINDOW_SECONDS
        while self._ledger and self._ledger[0][0] <= cutoff:
            self._ledger.pop(0)

    def window_total(self, now=None):
        with self._lock:
            self._prune(self.clock.now() if now is None else now)
            return sum(entry[1] for entry in self._ledger)

    def try_acquire(self, tokens):
        """Grant immediately or return the exact wait in seconds.

        Returns ``(granted, wait_seconds, entry_id)``; on a grant the ledger
        is already debited.
        """
        tokens = int(tokens)
        if tokens > self.per_request_cap:
            raise BudgetError(
                f"request of {tokens} tokens exceeds the per-request cap "
                f"of {self.per_request_cap}",
                estimated=tokens, limit=self.per_request_cap)
        with self._lock:
            now = self.clock.now()
            self._prune(now)
            total = sum(entry[1] for entry in self._ledger)
            if total + tokens <= self.cap:
                entry_id = self._next_id
                self._next_id += 1
                self._ledger.append([now, tokens, entry_id])
                return True, 0.0, entry_id
            freed = 0
            for ts, entry_tokens, _ in self._ledger:
                freed += entry_tokens
                if total - freed + tokens <= self.cap:
                    return False, (ts + WINDOW_SECONDS) - now, None
            # a single full-cap request can always run in an empty window
            return False, (self._ledger[-1][0] + WINDOW_SECONDS) - now, None

    def acquire(self, tokens, block=True):
        """Debit `tokens`, sleeping on the injected clock while blocked."""
        while True:
            granted, wait, entry = self.try_acquire(tokens)
            if granted:
                return entry
            if not block:
                raise RateLimitedError(wait)
            self.clock.sleep(wait)

    def settle(self, entry_id, actual_tokens):
        """Adjust a provisional debit to the backend-reported usage."""
        with self._lock:
            for entry in self._ledger:
                if entry[2] == entry_id:
                    entry[1] = int(actual_tokens)
                    return


def sequence_digest(sequence):
    """Stable digest over roles and texts, used to key mock scripts."""
    blob = "\x00".join(f"{m.role}\x01{m.text}" for m in sequence.messages)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class OracleBackend:
    """Answers computed directly from the DINEs in the prompt."""

    name = "oracle"

    def complete(self, sequence, params):
        answer = oracle.answer_sequence(sequence)
        responses = [answer] * params.n
        usage = Usage(
            prompt_tokens=estimate_sequence_tokens(sequence.messages),
            completion_tokens=sum(estimate_tokens(r) for r in responses),
        )
        return responses, usage


class MockBackend:
    """Scripted responses keyed by prompt digest.

    The script maps a digest to a response list; a request with n larger than
    the scripted list cycles through it. Unknown digests fall back to
    `default_response` when given, otherwise fail loudly.
    """

    name = "mock"

    def __init__(self, script=None, default_response=None):
        if isinstance(script, (str, os.PathLike)):
            with open(script) as fh:
                script = json.load(fh)
        self.script = dict(script or {})
        self.default_response = default_response

    def complete(self, sequence, params):
        digest = sequence_digest(sequence)
        scripted = self.script.get(digest)
        if scripted is None:
            if self.default_response is None:
                raise GatewayError(f"mock script has no entry for digest {digest}")
            scripted = [self.default_response]
        responses = [scripted[i % len(scripted)] for i in range(params.n)]
        usage = Usage(
            prompt_tokens=estimate_sequence_tokens(sequence.messages),
            completion_tokens=sum(estimate_tokens(r) for r in responses),
        )
        return responses, usage


class TransientBackendError(Exception):
    """Retryable failure (HTTP 429/5xx or timeouts)."""


class LiveBackend:
    """OpenAI-compatible chat-completions endpoint over HTTP."""

    name = "live"

    def __init__(self, config=None, client=None):
        self.config = config or GatewayConfig()
        self._client = client

    def _api_key(self):
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise CredentialError(
                f"no API credential: set the {self.config.api_key_env} "
                f"environment variable")
        return key

    def complete(self, sequence, params):
        body = {
            "model": params.model or self.config.model,
            "messages": sequence.to_wire(),
            "n": params.n,
            "max_tokens": params.max_token,
            "temperature": params.temperature,
        }
        # at temperature 0 generation is already deterministic; sending a
        # second sampling control would be ambiguous
        if params.temperature != 0.0:
            body["top_p"] = params.top_p
        headers = {"Authorization": f"Bearer {self._api_key()}"}
        client = self._client or httpx.Client(timeout=self.config.timeout)
        try:
            response = client.post(
                f"{self.config.base_url}/chat/completions",
                json=body, headers=headers)
        except httpx.HTTPError as exc:
            raise TransientBackendError(str(exc)) from exc
        if response.status_code in (401, 403):
            raise CredentialError(
                f"backend rejected the credential from "
                f"{self.config.api_key_env} (HTTP {response.status_code})")
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientBackendError(f"HTTP {response.status_code}")
        if response.status_code != 200:
            raise GatewayError(f"backend error: HTTP {response.status_code}")
        payload = response.json()
        responses = [c["message"]["content"] for c in payload["choices"]]
        usage = Usage(
            prompt_tokens=payload.get("usage", {}).get("prompt_tokens", 0),
            completion_tokens=payload.get("usage", {}).get("completion_tokens", 0),
        )
        return responses, usage


class ChatGateway:
    """Budget enforcement, retries, and usage accounting over a backend."""

    def __init__(self, backend, budget=None, clock=None, config=None):
        self.config = config or GatewayConfig()
        self.clock = clock or SystemClock()
        self.backend = backend
        self.budget = budget or RateBudget(
            tokens_per_minute=self.config.tokens_per_minute,
            per_request_cap=self.config.request_token_limit,
            clock=self.clock,
        )

    def estimate_prompt_tokens(self, sequence):
        return estimate_sequence_tokens(
            sequence.messages, self.config.token_safety_factor)

    def chat_complete(self, sequence, params=None, block=True):
        """Send one prompt sequence; returns exactly `params.n` responses.

        Raises BudgetError before sending when the estimated request cannot
        fit the per-request token limit, and RateLimitedError (non-blocking
        mode) when the per-minute window lacks headroom.
        """
        params = params or CompletionParams(max_token=self.config.max_token)
        prompt_estimate = self.estimate_prompt_tokens(sequence)
        total_estimate = prompt_estimate + params.max_token
        if total_estimate > self.config.request_token_limit:
            raise BudgetError(
                f"estimated prompt ({prompt_estimate}) + max_token "
                f"({params.max_token}) = {total_estimate} exceeds the "
                f"{self.config.request_token_limit}-token request limit",
                estimated=prompt_estimate, reply_budget=params.max_token,
                limit=self.config.request_token_limit)
        entry = self.budget.acquire(total_estimate, block=block)
        attempts = []
        responses = usage = None
        for attempt, backoff in enumerate((*self.config.retry_backoff, None)):
            try:
                responses, usage = self.backend.complete(sequence, params)
                break
            except TransientBackendError as exc:
                attempts.append(f"attempt {attempt + 1}: {exc}")
                if backoff is None:
                    raise GatewayError(
                        f"backend failed after {len(attempts)} attempts",
                        attempts=attempts) from exc
                self.clock.sleep(backoff)
        self.budget.settle(entry, usage.total)
        return GatewayResult(
            responses=responses, usage=usage,
            prompt_digest=sequence_digest(sequence))


def make_backend(kind, config=None, mock_script=None):
    if kind == "oracle":
        return OracleBackend()
    if kind == "mock":
        return MockBackend(script=mock_script, default_response="(a)")
    if kind == "live":
        return LiveBackend(config=config)
    raise ConfigurationError(f"unknown backend kind: {kind!r}")


def make_gateway(kind, config=None, mock_script=None, clock=None, budget=None):
    """Gateway with a clock matching the backend: real time for the live
    API, simulated time for offline backends (budget arithmetic is still
    enforced, but waits are free)."""
    backend = make_backend(kind, config=config, mock_script=mock_script)
    if clock is None:
        clock = SystemClock() if kind == "live" else SimulatedClock()
    return ChatGateway(backend, budget=budget, clock=clock, config=config)
