"""Provider-agnostic agent calls with schema validation, repair, record and replay."""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import re
import threading
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from ..errors import GatewayExhausted, ReplayMiss, SchemaFailure, TransportError
from .schemas import SCHEMAS, schema_errors
from .transcript import AgentTranscript, TranscriptEntry, canonical_json, request_digest
from .transport import (
    ENV_EVAL_MODEL,
    ENV_GEN_MODEL,
    NoNetworkTransport,
    OpenAIChatTransport,
    ScriptedTransport,
    Transport,
)

logger = logging.getLogger(__name__)

MAX_REPAIRS = 3


class AgentName(str, enum.Enum):
    DISCOURSE_PARSER = "DiscourseParser"
    COMMITMENT_BUILDER = "CommitmentBuilder"
    SLIDE_PLANNER = "SlidePlanner"
    NARRATIVE_CRITIC = "NarrativeCritic"
    NARRATIVE_JUDGE = "NarrativeJudge"
    REVISER = "Reviser"
    DECK_CONSTRUCTOR = "DeckConstructor"
    AESTHETICS_REFINER = "AestheticsRefiner"
    QUIZ_GENERATOR = "QuizGenerator"
    QUIZ_TAKER = "QuizTaker"
    JUDGE_SCORER = "JudgeScorer"
    PAIRWISE_JUDGE = "PairwiseJudge"


# the first entry is the agent's default; multi-task agents list one schema per task
AGENT_SCHEMAS: dict[AgentName, tuple[str, ...]] = {
    AgentName.DISCOURSE_PARSER: ("discourse_tree",),
    AgentName.COMMITMENT_BUILDER: ("commitment",),
    AgentName.SLIDE_PLANNER: ("slide_outline",),
    AgentName.NARRATIVE_CRITIC: ("critique",),
    AgentName.NARRATIVE_JUDGE: ("verdict",),
    AgentName.REVISER: ("slide_outline",),
    AgentName.DECK_CONSTRUCTOR: ("slide_text", "asset_matches"),
    AgentName.AESTHETICS_REFINER: ("content_revision", "figure_additions", "emphasis"),
    AgentName.QUIZ_GENERATOR: ("quiz",),
    AgentName.QUIZ_TAKER: ("quiz_answers",),
    AgentName.JUDGE_SCORER: ("rubric",),
    AgentName.PAIRWISE_JUDGE: ("pairwise",),
}

VISION_AGENTS = frozenset({AgentName.QUIZ_TAKER, AgentName.JUDGE_SCORER, AgentName.PAIRWISE_JUDGE})
EVAL_AGENTS = frozenset(
    {AgentName.QUIZ_GENERATOR, AgentName.QUIZ_TAKER, AgentName.JUDGE_SCORER, AgentName.PAIRWISE_JUDGE}
)
_DETERMINISTIC_AGENTS = frozenset(
    {AgentName.DISCOURSE_PARSER, AgentName.NARRATIVE_JUDGE, AgentName.QUIZ_TAKER,
     AgentName.JUDGE_SCORER, AgentName.PAIRWISE_JUDGE}
)


def load_prompt(agent: AgentName, schema_id: str) -> str:
    pkg = resources.files("discodeck") / "prompts"
    for name in (f"{agent.value}.{schema_id}.md", f"{agent.value}.md"):
        res = pkg / name
        if res.is_file():
            return res.read_text(encoding="utf-8")
    raise FileNotFoundError(f"no prompt for {agent.value}")


@dataclass(frozen=True)
class AgentRequest:
    agent: AgentName
    system_prompt: str
    user_payload: str
    schema_id: str
    images: tuple[bytes, ...] = ()
    temperature: float = 0.3
    max_output_tokens: int = 4096

    def __post_init__(self) -> None:
        if self.schema_id not in AGENT_SCHEMAS[self.agent]:
            raise ValueError(f"{self.agent.value} cannot answer schema {self.schema_id!r}")
        if self.images and self.agent not in VISION_AGENTS:
            raise ValueError(f"{self.agent.value} does not accept images")

    @classmethod
    def build(
        cls,
        agent: AgentName,
        payload: Any,
        schema_id: str | None = None,
        images: Sequence[bytes] = (),
        max_output_tokens: int = 4096,
    ) -> "AgentRequest":
        schema_id = schema_id or AGENT_SCHEMAS[agent][0]
        text = payload if isinstance(payload, str) else canonical_json(payload)
        return cls(
            agent=agent,
            system_prompt=load_prompt(agent, schema_id),
            user_payload=text,
            schema_id=schema_id,
            images=tuple(images),
            temperature=0.0 if agent in _DETERMINISTIC_AGENTS else 0.3,
            max_output_tokens=max_output_tokens,
        )

    def hash_inputs(self) -> dict[str, Any]:
        return {
            "agent": self.agent.value,
            "system_prompt": self.system_prompt,
            "user_payload": self.user_payload,
            "schema_id": self.schema_id,
            "images": [hashlib.sha256(i).hexdigest() for i in self.images],
        }

    @property
    def digest(self) -> str:
        return request_digest(self.hash_inputs())

    def payload(self) -> Any:
        return json.loads(self.user_payload)

    def with_repair(self, previous: str, errors: Sequence[str]) -> "AgentRequest":
        listed = "\n".join(f"- {e}" for e in errors[:20])
        note = (
            "\n\n### Repair\nYour previous response was rejected:\n"
            f"{listed}\nPrevious response:\n{previous[:4000]}\n"
            "Return a corrected JSON object only."
        )
        return replace(self, user_payload=self.user_payload + note)


_FENCE = re.compile(r"```(?:json)?\s*\n(.*?)\n\s*```", re.DOTALL)


def extract_json(raw: str) -> Any:
    m = _FENCE.search(raw)
    if m:
        raw = m.group(1)
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        start, end = raw.find("{"), raw.rfind("}")
        if start != -1 and end > start:
            return json.loads(raw[start : end + 1])
        raise


class GatewayMode(str, enum.Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


@dataclass
class CallLog:
    """Per-gateway counters, handy for manifests and assertions."""

    requests: int = 0
    attempts: int = 0
    schema_failures: int = 0
    warnings: list[str] = field(default_factory=list)


class Gateway:
    """Shared handle for all agent calls of a run.

    ``check`` callbacks passed to :meth:`call` add semantic validation on top
    of the JSON schema; their messages are fed back during repair.
    """

    def __init__(
        self,
        mode: GatewayMode | str = GatewayMode.REPLAY,
        transport: Transport | None = None,
        transcript: AgentTranscript | None = None,
        *,
        gen_model: str = "gpt-4o",
        eval_model: str = "gpt-4o",
        max_repairs: int = MAX_REPAIRS,
        max_in_flight: int = 4,
        transport_retries: int = 4,
        backoff_s: float = 1.0,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], str] | None = None,
    ):
        self.mode = GatewayMode(mode)
        if self.mode is not GatewayMode.REPLAY and transport is None:
            raise ValueError(f"{self.mode.value} mode needs a transport")
        self.transport = transport
        self.transcript = transcript if transcript is not None else AgentTranscript()
        self.gen_model = gen_model
        self.eval_model = eval_model
        self.max_repairs = max_repairs
        self.transport_retries = transport_retries
        self.backoff_s = backoff_s
        self._sleep = sleep
        self._clock = clock or (lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
        self._slots = threading.BoundedSemaphore(max(1, max_in_flight))
        self.log = CallLog()
        self._log_lock = threading.Lock()

    @classmethod
    def replay(cls, path: str | Path, **kw: Any) -> "Gateway":
        return cls(GatewayMode.REPLAY, transcript=AgentTranscript.load(path), **kw)

    def warn(self, message: str) -> None:
        logger.warning(message)
        with self._log_lock:
            self.log.warnings.append(message)

    def call(
        self,
        request: AgentRequest,
        check: Callable[[Any], list[str]] | None = None,
    ) -> Any:
        """Return the validated JSON value, repairing up to ``max_repairs`` times."""
        with self._log_lock:
            self.log.requests += 1
        current = request
        errors: list[str] = []
        attempts = 1 + self.max_repairs
        for attempt in range(1, attempts + 1):
            if attempt > 1:
                current = request.with_repair(raw, errors)
            raw = self._fetch(current, attempt)
            value, errors = self._validate(raw, current.schema_id, check)
            if not errors:
                return value
            logger.info("%s attempt %d rejected: %s", request.agent.value, attempt, errors[:3])
        with self._log_lock:
            self.log.schema_failures += 1
        raise SchemaFailure(request.agent.value, errors, attempts)

    def _validate(self, raw: str, schema_id: str, check: Callable[[Any], list[str]] | None):
        try:
            value = extract_json(raw)
        except (json.JSONDecodeError, TypeError) as exc:
            return None, [f"response is not valid JSON: {exc}"]
        errors = schema_errors(schema_id, value)
        if not errors and check is not None:
            try:
                errors = list(check(value))
            except (KeyError, TypeError, ValueError, AttributeError) as exc:
                errors = [f"semantic check failed: {type(exc).__name__}: {exc}"]
        return value, errors

    def _model_for(self, agent: AgentName) -> str:
        return self.eval_model if agent in EVAL_AGENTS else self.gen_model

    def _fetch(self, request: AgentRequest, attempt: int) -> str:
        with self._log_lock:
            self.log.attempts += 1
        digest = request.digest
        if self.mode is GatewayMode.REPLAY:
            entry = self.transcript.lookup(digest)
            if entry is None:
                raise ReplayMiss(digest, request.agent.value)
            return entry.raw_response

        assert self.transport is not None
        delay = self.backoff_s
        last: Exception | None = None
        with self._slots:
            for retry in range(self.transport_retries + 1):
                try:
                    raw = self.transport.complete(request, self._model_for(request.agent))
                    break
                except TransportError as exc:
                    last = exc
                    if retry == self.transport_retries:
                        raise GatewayExhausted(f"{request.agent.value}: {exc}") from exc
                    logger.warning("transport error (%s), retrying in %.1fs", exc, delay)
                    self._sleep(delay)
                    delay *= 2
            else:  # pragma: no cover
                raise GatewayExhausted(str(last))
        self.transcript.append(
            TranscriptEntry(
                digest=digest,
                agent=request.agent.value,
                request=request.hash_inputs(),
                raw_response=raw,
                attempt=attempt,
                timestamp=self._clock(),
            )
        )
        return raw

    def save_transcript(self, path: str | Path) -> None:
        self.transcript.save(path)


def gateway_from_env(mode: str, transcript_path: str | Path | None, **kw: Any) -> Gateway:
    """Build a gateway from DISCODECK_* environment variables."""
    import os

    mode = GatewayMode(mode)
    gen = os.getenv(ENV_GEN_MODEL, "").strip() or "gpt-4o"
    ev = os.getenv(ENV_EVAL_MODEL, "").strip() or gen
    if mode is GatewayMode.REPLAY:
        if transcript_path is None:
            raise ValueError("replay mode needs --transcript")
        return Gateway(mode, NoNetworkTransport(), AgentTranscript.load(transcript_path),
                       gen_model=gen, eval_model=ev, **kw)
    return Gateway(mode, OpenAIChatTransport.from_env(), gen_model=gen, eval_model=ev, **kw)


__all__ = [
    "AGENT_SCHEMAS",
    "AgentName",
    "AgentRequest",
    "AgentTranscript",
    "Gateway",
    "GatewayMode",
    "NoNetworkTransport",
    "OpenAIChatTransport",
    "SCHEMAS",
    "ScriptedTransport",
    "TranscriptEntry",
    "extract_json",
]
