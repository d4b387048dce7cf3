"""Content-addressed request/response transcripts stored as JSON lines."""

from __future__ import annotations

import hashlib
import json
import threading
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..errors import CorruptTranscript


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _canonical_payload(payload: str) -> str:
    try:
        return canonical_json(json.loads(payload))
    except (json.JSONDecodeError, TypeError):
        return payload


def request_digest(hash_inputs: dict[str, Any]) -> str:
    body = dict(hash_inputs)
    body["user_payload"] = _canonical_payload(body.get("user_payload", ""))
    return hashlib.sha256(canonical_json(body).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TranscriptEntry:
    digest: str
    agent: str
    request: dict[str, Any]
    raw_response: str
    attempt: int
    timestamp: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "digest": self.digest,
            "agent": self.agent,
            "attempt": self.attempt,
            "timestamp": self.timestamp,
            "request": self.request,
            "raw_response": self.raw_response,
        }


class AgentTranscript:
    """Ordered entries plus a digest index for replay lookups."""

    def __init__(self, entries: list[TranscriptEntry] | None = None):
        self.entries: list[TranscriptEntry] = []
        self._index: dict[str, list[int]] = defaultdict(list)
        self._cursor: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()
        for e in entries or []:
            self.append(e)

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, entry: TranscriptEntry) -> None:
        with self._lock:
            self._index[entry.digest].append(len(self.entries))
            self.entries.append(entry)

    def lookup(self, digest: str) -> TranscriptEntry | None:
        """Entries sharing a digest are served in order; the last one repeats."""
        with self._lock:
            hits = self._index.get(digest)
            if not hits:
                return None
            i = self._cursor[digest]
            self._cursor[digest] = min(i + 1, len(hits) - 1)
            return self.entries[hits[i]]

    def rewind(self) -> None:
        with self._lock:
            self._cursor.clear()

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            lines = [canonical_json(e.to_json()) for e in self.entries]
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "AgentTranscript":
        path = Path(path)
        entries = []
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                    entry = TranscriptEntry(
                        digest=data["digest"],
                        agent=data["agent"],
                        request=data["request"],
                        raw_response=data["raw_response"],
                        attempt=int(data["attempt"]),
                        timestamp=data.get("timestamp", ""),
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise CorruptTranscript(f"{path}:{lineno}: unreadable entry ({exc})") from exc
                if request_digest(entry.request) != entry.digest:
                    raise CorruptTranscript(f"{path}:{lineno}: digest does not match request content")
                entries.append(entry)
        return cls(entries)


def load_transcript(path: str | Path) -> AgentTranscript:
    return AgentTranscript.load(path)


def record_transcript(transcript: AgentTranscript, path: str | Path) -> None:
    transcript.save(path)
