"""Attack explanation via an LLM provider: prompt templating + HTTP client.

Prompt text is a pure function of its four inputs so every explanation is
auditable via the prompt hash. The provider protocol is a generic JSON
chat-completion request with bearer auth; provider differences are handled
in response extraction, not code forks.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping
from urllib.parse import urlparse

from .attribution import FeatureSet
from .errors import (
    AuthError,
    ConfigError,
    MalformedResponse,
    ProviderError,
    ProviderTimeout,
    RateLimited,
)

EXPERIENCE_LEVELS = ("novice", "intermediate", "expert")
DESCRIPTIVENESS = ("concise", "detailed")

# Fixed instruction clause per (experience_level, descriptiveness). The
# expert+concise cell, together with the trailing "Keep it concise", is the
# one published pattern; the rest are versioned here so prompts are auditable.
CLAUSE_TABLE: dict[tuple[str, str], str] = {
    ("novice", "concise"): (
        "Explain in plain language for a non-expert administrator and give simple first steps to stop the attack."
    ),
    ("novice", "detailed"): (
        "Explain in plain language for a non-expert administrator what each influential feature means, "
        "why it points at this attack, and walk through a step-by-step mitigation plan."
    ),
    ("intermediate", "concise"): (
        "Explain the influential features in practical terms and give an actionable mitigation checklist."
    ),
    ("intermediate", "detailed"): (
        "Explain the influential features in practical terms, how each one relates to this attack, "
        "and provide a prioritized mitigation plan with the reasoning behind each step."
    ),
    ("expert", "concise"): "Explain the influential features and give a brief mitigation plan.",
    ("expert", "detailed"): (
        "Explain the influential features in technical depth, including the traffic patterns behind each one, "
        "and provide a comprehensive mitigation and hardening plan."
    ),
}

CONCISE_SUFFIX = "Keep it concise"


@dataclass(frozen=True)
class PromptSpec:
    influential_features: FeatureSet
    predicted_attack: str
    experience_level: str
    descriptiveness: str

    def __post_init__(self):
        if not self.influential_features.entries:
            raise ValueError("influential_features must be non-empty")
        if self.experience_level not in EXPERIENCE_LEVELS:
            raise ValueError(f"experience_level must be one of {EXPERIENCE_LEVELS}")
        if self.descriptiveness not in DESCRIPTIVENESS:
            raise ValueError(f"descriptiveness must be one of {DESCRIPTIVENESS}")


def generate_prompt(spec: PromptSpec) -> str:
    parts = [
        f"A {spec.predicted_attack} Attack is detected by our Intrusion detection system.",
        "The top influential features for detecting the attack according to SHAP and LIME are given below.",
        ", ".join(spec.influential_features.names) + ".",
        CLAUSE_TABLE[(spec.experience_level, spec.descriptiveness)],
    ]
    if spec.descriptiveness == "concise":
        parts.append(CONCISE_SUFFIX)
    return " ".join(parts)


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


_REDACTED = "***"


@dataclass(frozen=True)
class ProviderConfig:
    api_url: str = ""
    api_key: str = ""
    model_name: str = ""
    timeout_ms: int = 30000
    max_retries: int = 3
    enabled: bool = True

    def __repr__(self) -> str:  # the key never leaves the type boundary
        return (
            f"ProviderConfig(api_url={self.api_url!r}, api_key='{_REDACTED}', "
            f"model_name={self.model_name!r}, timeout_ms={self.timeout_ms}, "
            f"max_retries={self.max_retries}, enabled={self.enabled})"
        )

    @property
    def provider_label(self) -> str:
        return urlparse(self.api_url).netloc or "none"

    def redact(self, text: str) -> str:
        if self.api_key:
            return text.replace(self.api_key, _REDACTED)
        return text


DISABLED_PROVIDER = ProviderConfig(enabled=False)

PROVIDER_DISABLED_MARKER = "ProviderDisabled"


@dataclass(frozen=True)
class ExplanationResult:
    text: str
    provider: str
    model_name: str
    prompt_hash: str
    latency_ms: int
    created_at: float
    attempts: int = 1
    error: str | None = None

    def to_payload(self) -> dict:
        return {
            "text": self.text,
            "provider": self.provider,
            "model_name": self.model_name,
            "prompt_hash": self.prompt_hash,
            "latency_ms": self.latency_ms,
            "created_at": self.created_at,
            "attempts": self.attempts,
            "error": self.error,
        }


def disabled_result(prompt: str) -> ExplanationResult:
    return ExplanationResult(
        text="",
        provider="none",
        model_name="",
        prompt_hash=prompt_hash(prompt),
        latency_ms=0,
        created_at=time.time(),
        attempts=0,
        error=PROVIDER_DISABLED_MARKER,
    )


def load_provider_config(environ: Mapping[str, str] | None = None) -> ProviderConfig:
    """Build a ProviderConfig from environment variables.

    Missing URL or key disables the provider (the pipeline keeps running);
    present-but-invalid values raise ConfigError naming the variable.
    """
    env = environ if environ is not None else __import__("os").environ
    url = env.get("LLM_API_URL", "").strip()
    key = env.get("LLM_API_KEY", "").strip()

    def read_int(name: str, default: int) -> int:
        raw = env.get(name)
        if raw is None or raw.strip() == "":
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{name} must be an integer, got {raw!r}") from None

    timeout_ms = read_int("LLM_TIMEOUT_MS", 30000)
    max_retries = read_int("LLM_MAX_RETRIES", 3)
    if timeout_ms <= 0:
        raise ConfigError(f"LLM_TIMEOUT_MS must be positive, got {timeout_ms}")
    if max_retries < 0:
        raise ConfigError(f"LLM_MAX_RETRIES must be >= 0, got {max_retries}")

    if not url or not key:
        return DISABLED_PROVIDER
    if urlparse(url).scheme not in ("http", "https"):
        raise ConfigError(f"LLM_API_URL is not a valid http(s) URL: {url!r}")

    return ProviderConfig(
        api_url=url,
        api_key=key,
        model_name=env.get("LLM_MODEL", "").strip(),
        timeout_ms=timeout_ms,
        max_retries=max_retries,
        enabled=True,
    )


@dataclass
class TransportResponse:
    status_code: int
    body: Any  # parsed JSON, or raw text when not JSON


# Transport signature: (url, headers, payload, timeout_s) -> TransportResponse.
# May raise TimeoutError. Injectable for tests; default uses httpx.
Transport = Callable[[str, dict, dict, float], TransportResponse]


def _httpx_transport(url: str, headers: dict, payload: dict, timeout_s: float) -> TransportResponse:
    import httpx

    try:
        resp = httpx.post(url, headers=headers, json=payload, timeout=timeout_s)
    except httpx.TimeoutException as e:
        raise TimeoutError(str(e)) from None
    try:
        body = resp.json()
    except (json.JSONDecodeError, ValueError):
        body = resp.text
    return TransportResponse(status_code=resp.status_code, body=body)


def extract_text(body: Any) -> str:
    """First choice/candidate text from a chat-completion style reply."""
    if isinstance(body, dict):
        choices = body.get("choices")
        if isinstance(choices, list) and choices:
            msg = choices[0].get("message", {})
            content = msg.get("content")
            if isinstance(content, str):
                return content
        candidates = body.get("candidates")
        if isinstance(candidates, list) and candidates:
            parts = candidates[0].get("content", {}).get("parts", [])
            if parts and isinstance(parts[0].get("text"), str):
                return parts[0]["text"]
        if isinstance(body.get("text"), str):
            return body["text"]
    raise MalformedResponse("provider reply carries no recognizable text field")


class ProviderClient:
    """Chat-completion client with retries, backoff, and secret redaction.

    Concurrent requests are capped by a semaphore (default 4) so a burst of
    operator explanation requests cannot stampede the provider.
    """

    def __init__(
        self,
        config: ProviderConfig,
        transport: Transport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        backoff_base_s: float = 0.25,
        max_concurrency: int = 4,
        min_interval_s: float = 0.0,
    ):
        self.config = config
        self._transport = transport or _httpx_transport
        self._sleep = sleep
        self._backoff_base_s = backoff_base_s
        self._gate = threading.BoundedSemaphore(max_concurrency)
        self._min_interval_s = min_interval_s
        self._pace_lock = threading.Lock()
        self._next_slot = 0.0

    @property
    def enabled(self) -> bool:
        return self.config.enabled

    def request(self, prompt: str) -> ExplanationResult:
        if not self.config.enabled:
            return disabled_result(prompt)
        with self._gate:
            self._pace()
            return self._request_locked(prompt)

    def _pace(self) -> None:
        if self._min_interval_s <= 0:
            return
        with self._pace_lock:
            now = time.monotonic()
            wait = self._next_slot - now
            self._next_slot = max(now, self._next_slot) + self._min_interval_s
        if wait > 0:
            self._sleep(wait)

    def _request_locked(self, prompt: str) -> ExplanationResult:
        cfg = self.config
        headers = {
            "Authorization": f"Bearer {cfg.api_key}",
            "Content-Type": "application/json",
        }
        payload = {
            "model": cfg.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        timeout_s = cfg.timeout_ms / 1000.0
        started = time.monotonic()
        attempts = 0
        last_failure = ""
        while attempts <= cfg.max_retries:
            attempts += 1
            try:
                resp = self._transport(cfg.api_url, headers, payload, timeout_s)
            except TimeoutError as e:
                last_failure = f"timeout: {cfg.redact(str(e))}"
                if attempts > cfg.max_retries:
                    break
                self._sleep(self._backoff_base_s * 2 ** (attempts - 1))
                continue

            if resp.status_code in (401, 403):
                raise AuthError(
                    f"provider rejected credentials (HTTP {resp.status_code}) after {attempts} attempt(s)"
                )
            if resp.status_code == 429 or resp.status_code >= 500:
                last_failure = f"HTTP {resp.status_code}"
                if attempts > cfg.max_retries:
                    break
                self._sleep(self._backoff_base_s * 2 ** (attempts - 1))
                continue
            if resp.status_code >= 400:
                raise ProviderError(
                    f"provider returned HTTP {resp.status_code}: {cfg.redact(str(resp.body)[:200])}"
                )

            text = extract_text(resp.body)
            return ExplanationResult(
                text=text,
                provider=cfg.provider_label,
                model_name=cfg.model_name,
                prompt_hash=prompt_hash(prompt),
                latency_ms=int((time.monotonic() - started) * 1000),
                created_at=time.time(),
                attempts=attempts,
            )

        if last_failure.startswith("timeout"):
            raise ProviderTimeout(f"provider timed out after {attempts} attempt(s): {last_failure}")
        raise RateLimited(f"retry budget exhausted after {attempts} attempt(s): {last_failure}")


def request_explanation(
    prompt: str,
    config: ProviderConfig,
    transport: Transport | None = None,
    sleep: Callable[[float], None] = time.sleep,
    backoff_base_s: float = 0.25,
) -> ExplanationResult:
    """One-shot form of ProviderClient.request for direct use."""
    return ProviderClient(
        config, transport=transport, sleep=sleep, backoff_base_s=backoff_base_s
    ).request(prompt)
