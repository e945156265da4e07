"""HTTP victim adapter.

Wire format: POST JSON ``{"code": ...}`` (or ``{"code1", "code2"}`` for pair
tasks); the endpoint answers ``{"label": int, "probs": [...]}`` or
``{"text": str}``.
"""

import json
import os
import threading
import time

import httpx

from ..errors import MalformedResponse, TransportError, VictimConfigError
from .base import GENERATION, Victim, VictimOutput, VictimTask

DEFAULT_TOKEN_ENV = "IDSUB_VICTIM_TOKEN"


class RemoteVictim(Victim):
    def __init__(self, url, task="classification", timeout_ms=30000, max_retries=3,
                 max_concurrency=4, token_env=DEFAULT_TOKEN_ENV, backoff=0.5,
                 theta_gen=0.5, transport=None):
        super().__init__()
        if not url:
            raise VictimConfigError("remote victim needs a non-empty url")
        self.url = url
        self.task = VictimTask(task, theta_gen)
        self.max_retries = int(max_retries)
        self.backoff = backoff
        self._slots = threading.BoundedSemaphore(max(1, int(max_concurrency)))
        headers = {}
        token = os.environ.get(token_env) if token_env else None
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(timeout=timeout_ms / 1000, headers=headers, transport=transport)

    @classmethod
    def from_config(cls, cfg, **kw):
        keys = ("url", "task", "timeout_ms", "max_retries", "max_concurrency", "token_env", "backoff", "theta_gen")
        return cls(**{k: cfg[k] for k in keys if k in cfg}, **kw)

    def _payload(self, sources):
        if len(sources) == 2:
            return {"code1": sources[0], "code2": sources[1]}
        return {"code": sources[0]}

    def _predict(self, sources):
        payload = self._payload(sources)
        last = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                with self._slots:
                    resp = self._client.post(self.url, json=payload)
            except httpx.HTTPError as exc:
                last = exc
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last = f"HTTP {resp.status_code}"
                continue
            if resp.status_code >= 400:
                raise MalformedResponse(f"victim returned HTTP {resp.status_code}", resp.text)
            return self._decode(resp.text)
        raise TransportError(f"victim at {self.url} failed after {self.max_retries + 1} attempts: {last}")

    def _decode(self, body):
        try:
            data = json.loads(body)
        except ValueError:
            raise MalformedResponse("victim response is not JSON", body) from None
        if not isinstance(data, dict):
            raise MalformedResponse("victim response is not an object", body)
        try:
            if self.task.kind == GENERATION:
                return VictimOutput(text=str(data["text"]))
            probs = [float(p) for p in data["probs"]]
            out = VictimOutput.from_probs(probs)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"bad victim response ({exc})", body) from None
        if "label" in data and int(data["label"]) != out.label:
            # the probabilities are authoritative; the label must agree with them
            raise MalformedResponse("label disagrees with argmax of probs", body)
        return out

    def close(self):
        self._client.close()
