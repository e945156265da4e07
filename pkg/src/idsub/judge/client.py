"""Chat-completions client for the judge/purifier endpoint."""

import hashlib
import json
import os
import threading
import time
from dataclasses import asdict, dataclass

import httpx

from ..errors import ConfigError, MalformedResponse, TransportError

DEFAULT_TOKEN_ENV = "IDSUB_JUDGE_TOKEN"


@dataclass(frozen=True)
class JudgeConfig:
    url: str = ""
    model: str = "gpt-4-1106-preview"
    temperature: float = 0.0
    top_p: float = 0.9
    max_input_tokens: int = 4096
    max_retries: int = 3
    concurrency: int = 4
    timeout_ms: int = 60000
    purify_attempts: int = 3
    token_env: str = DEFAULT_TOKEN_ENV
    backoff: float = 1.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ConfigError("top_p must be in (0, 1]")
        if self.max_input_tokens <= 0:
            raise ConfigError("max_input_tokens must be positive")

    @classmethod
    def from_dict(cls, d):
        known = cls.__dataclass_fields__
        return cls(**{k: v for k, v in d.items() if k in known})

    def to_dict(self):
        return asdict(self)


class ChatClient:
    """POSTs ``{model, messages, temperature, top_p}``; reads an OpenAI-style reply."""

    def __init__(self, config, transport=None):
        if not config.url:
            raise ConfigError("judge endpoint url is empty")
        self.config = config
        headers = {}
        token = os.environ.get(config.token_env) if config.token_env else None
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._http = httpx.Client(timeout=config.timeout_ms / 1000, headers=headers, transport=transport)
        self._slots = threading.BoundedSemaphore(max(1, config.concurrency))

    def complete(self, system, user):
        cfg = self.config
        body = {
            "model": cfg.model,
            "messages": [{"role": "system", "content": system}, {"role": "user", "content": user}],
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
        }
        last = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                time.sleep(cfg.backoff * 2 ** (attempt - 1))
            try:
                with self._slots:
                    resp = self._http.post(cfg.url, json=body)
            except httpx.HTTPError as exc:
                last = exc
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last = f"HTTP {resp.status_code}"
                continue
            if resp.status_code >= 400:
                raise MalformedResponse(f"judge returned HTTP {resp.status_code}", resp.text)
            return _content(resp.text)
        raise TransportError(f"judge endpoint failed after {cfg.max_retries + 1} attempts: {last}")

    def close(self):
        self._http.close()


def _content(body):
    try:
        data = json.loads(body)
    except ValueError:
        raise MalformedResponse("judge response is not JSON", body) from None
    try:
        if "choices" in data:
            return data["choices"][0]["message"]["content"]
        return data["content"]
    except (KeyError, IndexError, TypeError):
        raise MalformedResponse("judge response has no message content", body) from None


def prompt_hash(system, user):
    return hashlib.sha256((system + "\x00" + user).encode("utf-8")).hexdigest()[:16]


class AuditLog:
    """Append-only JSONL of judge calls; one lock so writes never interleave."""

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()

    def write(self, record_id, system, user, raw, parsed):
        line = json.dumps({
            "id": record_id,
            "prompt_hash": prompt_hash(system, user),
            "raw_response": raw,
            "parsed": parsed,
        }, ensure_ascii=False)
        with self._lock, open(self.path, "a", encoding="utf-8") as f:
            f.write(line + "\n")
