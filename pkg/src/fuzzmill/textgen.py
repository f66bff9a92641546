"""Text-generation clients behind one small interface.

``generate_driver`` only ever calls ``complete(prompt, temperature)`` and
reads ``accumulated_cost``, so the same factory code runs against a live
chat-completion endpoint, a directory of canned responses, or the
simulator's synthetic client.
"""

from __future__ import annotations

import json
import os
import threading
import urllib.error
import urllib.request
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Sequence

DEFAULT_KEY_ENV = "FUZZMILL_API_KEY"
DEFAULT_COST_PER_QUERY = 0.02


class TransportError(RuntimeError):
    """The client could not reach its backend (network, HTTP, protocol)."""


class TextGenClient(ABC):
    """One completion call per query, with monotone cost accounting."""

    def __init__(self, cost_per_query: float = DEFAULT_COST_PER_QUERY) -> None:
        self._cost_per_query = cost_per_query
        self._cost = 0.0
        self._queries = 0
        self._lock = threading.Lock()

    @property
    def accumulated_cost(self) -> float:
        return self._cost

    @property
    def query_count(self) -> int:
        return self._queries

    def restore_accounting(self, cost: float, queries: int) -> None:
        """Reinstate accounting from a persisted campaign state."""
        with self._lock:
            self._cost = cost
            self._queries = queries

    def complete(self, prompt: str, temperature: float = 1.0) -> str:
        text = self._complete(prompt, temperature)
        with self._lock:
            self._cost += self._cost_per_query
            self._queries += 1
        return text

    @abstractmethod
    def _complete(self, prompt: str, temperature: float) -> str:
        raise NotImplementedError


class HttpChatClient(TextGenClient):
    """Chat-completion client for an OpenAI-style HTTP endpoint.

    The API key is read from the environment only; configuration files name
    the variable, never the secret itself.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        key_env: str = DEFAULT_KEY_ENV,
        cost_per_query: float = DEFAULT_COST_PER_QUERY,
        timeout_seconds: float = 120.0,
    ) -> None:
        super().__init__(cost_per_query)
        key = os.environ.get(key_env)
        if not key:
            raise RuntimeError(f"API key environment variable {key_env!r} is not set")
        self._endpoint = endpoint
        self._model = model
        self._key = key
        self._timeout = timeout_seconds

    def _complete(self, prompt: str, temperature: float) -> str:
        payload = json.dumps(
            {
                "model": self._model,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": temperature,
            }
        ).encode()
        request = urllib.request.Request(
            self._endpoint,
            data=payload,
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {self._key}",
            },
        )
        try:
            with urllib.request.urlopen(request, timeout=self._timeout) as response:
                body = json.load(response)
        except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
            raise TransportError(f"chat endpoint failed: {exc}") from exc
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion response: {body!r}") from exc


class ScriptedClient(TextGenClient):
    """Replays a fixed list of responses, one per query, then raises."""

    def __init__(
        self,
        responses: Sequence[str],
        cost_per_query: float = DEFAULT_COST_PER_QUERY,
    ) -> None:
        super().__init__(cost_per_query)
        self._responses = list(responses)
        self._next = 0

    @classmethod
    def from_directory(
        cls, directory: str | os.PathLike[str], cost_per_query: float = DEFAULT_COST_PER_QUERY
    ) -> "ScriptedClient":
        """Load responses from a directory, one file each, in filename order."""
        root = Path(directory)
        files = sorted(p for p in root.iterdir() if p.is_file())
        return cls([p.read_text() for p in files], cost_per_query)

    @property
    def remaining(self) -> int:
        return len(self._responses) - self._next

    def _complete(self, prompt: str, temperature: float) -> str:
        if self._next >= len(self._responses):
            raise TransportError("scripted client ran out of responses")
        text = self._responses[self._next]
        self._next += 1
        return text
