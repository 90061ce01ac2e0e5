import logging

import pytest

from sentinel.errors import (
    AuthError,
    ConfigError,
    MalformedResponse,
    ProviderTimeout,
    RateLimited,
)
from sentinel.explain import (
    PROVIDER_DISABLED_MARKER,
    ProviderClient,
    ProviderConfig,
    TransportResponse,
    extract_text,
    load_provider_config,
    prompt_hash,
    request_explanation,
)

SECRET = "sk-SECRET-0xDEADBEEF"


def config(**overrides):
    base = dict(
        api_url="http://mock/v1/chat",
        api_key=SECRET,
        model_name="test-model",
        timeout_ms=1000,
        max_retries=3,
    )
    base.update(overrides)
    return ProviderConfig(**base)


class ScriptedTransport:
    """Plays back a script of responses; 'timeout' entries raise TimeoutError."""

    def __init__(self, script):
        self.script = list(script)
        self.calls = []

    def __call__(self, url, headers, payload, timeout_s):
        self.calls.append({"url": url, "headers": dict(headers), "payload": payload})
        step = self.script.pop(0)
        if step == "timeout":
            raise TimeoutError("simulated")
        return step


def ok_reply(text="MITIGATION: rate-limit SYN"):
    return TransportResponse(200, {"choices": [{"message": {"content": text}}]})


def test_echo_mock_provider():
    transport = ScriptedTransport([ok_reply()])
    result = request_explanation("prompt text", config(), transport=transport, sleep=lambda s: None)
    assert result.text == "MITIGATION: rate-limit SYN"
    assert result.provider == "mock"
    assert result.model_name == "test-model"
    assert result.prompt_hash == prompt_hash("prompt text")
    assert result.attempts == 1
    assert result.error is None
    sent = transport.calls[0]
    assert sent["payload"]["messages"] == [{"role": "user", "content": "prompt text"}]
    assert sent["headers"]["Authorization"] == f"Bearer {SECRET}"


def test_auth_error_no_retry():
    transport = ScriptedTransport([TransportResponse(401, {"error": "bad key"})] * 5)
    with pytest.raises(AuthError, match="1 attempt"):
        request_explanation("p", config(), transport=transport, sleep=lambda s: None)
    assert len(transport.calls) == 1


def test_two_503s_then_success_records_three_attempts():
    transport = ScriptedTransport(
        [TransportResponse(503, ""), TransportResponse(503, ""), ok_reply("ok")]
    )
    result = request_explanation("p", config(max_retries=3), transport=transport, sleep=lambda s: None)
    assert result.text == "ok"
    assert result.attempts == 3
    assert len(transport.calls) == 3


@pytest.mark.parametrize("max_retries", [0, 1, 3])
def test_retry_budget_is_max_retries_plus_one(max_retries):
    transport = ScriptedTransport([TransportResponse(503, "")] * 10)
    with pytest.raises(RateLimited):
        request_explanation(
            "p", config(max_retries=max_retries), transport=transport, sleep=lambda s: None
        )
    assert len(transport.calls) == max_retries + 1


def test_timeouts_then_success_and_timeout_exhaustion():
    transport = ScriptedTransport(["timeout", ok_reply("late")])
    result = request_explanation("p", config(), transport=transport, sleep=lambda s: None)
    assert result.text == "late" and result.attempts == 2

    transport = ScriptedTransport(["timeout"] * 10)
    with pytest.raises(ProviderTimeout):
        request_explanation("p", config(max_retries=2), transport=transport, sleep=lambda s: None)
    assert len(transport.calls) == 3


def test_backoff_is_exponential():
    sleeps = []
    transport = ScriptedTransport([TransportResponse(429, "")] * 4)
    with pytest.raises(RateLimited):
        request_explanation("p", config(max_retries=3), transport=transport, sleep=sleeps.append)
    assert sleeps == [0.25, 0.5, 1.0]


def test_malformed_response_raises():
    transport = ScriptedTransport([TransportResponse(200, {"unexpected": True})])
    with pytest.raises(MalformedResponse):
        request_explanation("p", config(), transport=transport, sleep=lambda s: None)


def test_gemini_style_candidates_extracted():
    body = {"candidates": [{"content": {"parts": [{"text": "hello"}]}}]}
    assert extract_text(body) == "hello"
    assert extract_text({"text": "plain"}) == "plain"


def test_secret_never_appears_in_errors_or_repr(caplog):
    fault_scripts = [
        [TransportResponse(401, {"detail": f"key {SECRET} rejected"})],
        [TransportResponse(503, f"upstream said {SECRET}")] * 4,
        ["timeout"] * 4,
        [TransportResponse(400, {"detail": f"bad request {SECRET}"})],
    ]
    with caplog.at_level(logging.DEBUG):
        for script in fault_scripts:
            transport = ScriptedTransport(list(script))
            with pytest.raises(Exception) as excinfo:
                request_explanation(
                    "p", config(max_retries=3), transport=transport, sleep=lambda s: None
                )
            assert SECRET not in str(excinfo.value)
            assert SECRET not in repr(excinfo.value)
    assert SECRET not in caplog.text
    assert SECRET not in repr(config())


def test_disabled_provider_returns_marker_result():
    client = ProviderClient(ProviderConfig(enabled=False))
    result = client.request("some prompt")
    assert result.error == PROVIDER_DISABLED_MARKER
    assert result.text == ""
    assert result.prompt_hash == prompt_hash("some prompt")


def test_rate_limiter_spaces_request_starts():
    sleeps = []
    transport = ScriptedTransport([ok_reply()] * 3)
    client = ProviderClient(
        config(), transport=transport, sleep=sleeps.append, min_interval_s=0.5
    )
    for _ in range(3):
        client.request("p")
    # first request is immediate; later ones wait for their slot (the fake
    # sleep never advances the clock, so the waits accumulate)
    assert sleeps == pytest.approx([0.5, 1.0], abs=0.05)


def test_load_provider_config_full():
    env = {
        "LLM_API_URL": "https://api.example.com/v1/chat",
        "LLM_API_KEY": "k123",
        "LLM_MODEL": "gpt-x",
        "LLM_TIMEOUT_MS": "5000",
        "LLM_MAX_RETRIES": "2",
    }
    cfg = load_provider_config(env)
    assert cfg.enabled
    assert cfg.api_url == "https://api.example.com/v1/chat"
    assert cfg.timeout_ms == 5000 and cfg.max_retries == 2


def test_load_provider_config_absent_disables():
    cfg = load_provider_config({})
    assert not cfg.enabled
    cfg = load_provider_config({"LLM_API_URL": "http://x"})  # key missing
    assert not cfg.enabled


def test_load_provider_config_defaults():
    cfg = load_provider_config({"LLM_API_URL": "http://x", "LLM_API_KEY": "k"})
    assert cfg.timeout_ms == 30000 and cfg.max_retries == 3


def test_load_provider_config_invalid_values():
    with pytest.raises(ConfigError, match="LLM_TIMEOUT_MS"):
        load_provider_config({"LLM_TIMEOUT_MS": "soon"})
    with pytest.raises(ConfigError, match="LLM_API_URL"):
        load_provider_config({"LLM_API_URL": "ftp://nope", "LLM_API_KEY": "k"})
    with pytest.raises(ConfigError, match="LLM_MAX_RETRIES"):
        load_provider_config(
            {"LLM_API_URL": "http://x", "LLM_API_KEY": "k", "LLM_MAX_RETRIES": "-1"}
        )
