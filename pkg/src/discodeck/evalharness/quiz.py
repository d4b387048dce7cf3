"""Quiz generation from the paper and quiz answering from slide evidence."""

from __future__ import annotations

import enum
import logging
import random
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from ..gateway import AgentName, AgentRequest
from ..ingest import split_back_matter
from .evidence import DeckEvidence

logger = logging.getLogger(__name__)

QUIZ_SIZE = 25
LABELS = ("A", "B", "C", "D")
OPTION_E = "E"
OPTION_E_TEXT = "not present in slides"


class QuizType(str, enum.Enum):
    STORY = "Story"
    VISUALS = "Visuals"
    HARD = "Hard"
    DEPTH = "Depth"

    @classmethod
    def parse(cls, name: str) -> "QuizType":
        for t in cls:
            if t.value.lower() == name.strip().lower():
                return t
        raise ValueError(f"unknown quiz type {name!r}")


@dataclass(frozen=True)
class QuizItem:
    quiz_type: QuizType
    question: str
    options: tuple[str, str, str, str]
    correct: str

    def __post_init__(self) -> None:
        if self.correct not in LABELS:
            raise ValueError(f"correct label must be one of A-D, got {self.correct!r}")
        if len(self.options) != 4:
            raise ValueError("a quiz item has exactly four options")

    def to_json(self) -> dict[str, Any]:
        return {
            "quiz_type": self.quiz_type.value,
            "question": self.question,
            "options": dict(zip(LABELS, self.options)),
            "correct": self.correct,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any], quiz_type: QuizType | None = None) -> "QuizItem":
        qt = quiz_type or QuizType(data["quiz_type"])
        return cls(qt, data["question"], tuple(data["options"][k] for k in LABELS), data["correct"])  # type: ignore[arg-type]


@dataclass(frozen=True)
class QuizResult:
    quiz_type: QuizType
    answers: tuple[str, ...]
    correct: int
    total: int

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct / self.total if self.total else 0.0

    def to_json(self) -> dict[str, Any]:
        return {
            "quiz_type": self.quiz_type.value,
            "answers": list(self.answers),
            "correct": self.correct,
            "total": self.total,
            "accuracy": self.accuracy,
        }


def strip_for_quiz(paper_text: str) -> str:
    """Drop references, acknowledgements and appendices so answers are not simple lookups."""
    return split_back_matter(paper_text)[0].strip()


def generate_quiz(paper_text: str, quiz_type: QuizType, gateway: Any) -> list[QuizItem]:
    payload = {"quiz_type": quiz_type.value, "paper": strip_for_quiz(paper_text)}
    out = gateway.call(AgentRequest.build(AgentName.QUIZ_GENERATOR, payload))
    return [QuizItem.from_json(it, quiz_type) for it in out["items"]]


def is_correct(item: QuizItem, answer: str) -> bool:
    """Option E ("not present in slides") never scores."""
    return answer != OPTION_E and answer == item.correct


def score_answers(items: Sequence[QuizItem], answers: Sequence[str]) -> int:
    return sum(1 for it, a in zip(items, answers) if is_correct(it, a))


def option_permutations(n_items: int, seed: int | None) -> list[tuple[int, ...]]:
    """Per-item order of the original options as presented; identity when ``seed`` is None."""
    if seed is None:
        return [tuple(range(4))] * n_items
    rng = random.Random(seed)
    perms = []
    for _ in range(n_items):
        p = list(range(4))
        rng.shuffle(p)
        perms.append(tuple(p))
    return perms


def take_quiz(
    items: Sequence[QuizItem],
    evidence: DeckEvidence,
    gateway: Any,
    seed: int | None = None,
) -> QuizResult:
    """Answer a quiz from slide evidence; shuffled options are mapped back before scoring."""
    if not items:
        raise ValueError("empty quiz")
    quiz_type = items[0].quiz_type
    if any(it.quiz_type is not quiz_type for it in items):
        raise ValueError("a quiz mixes question types")
    wants_images = quiz_type is QuizType.VISUALS
    if wants_images and not evidence.images:
        raise ValueError("Visuals questions must be answered from slide images")
    if not wants_images and not evidence.texts:
        raise ValueError(f"{quiz_type.value} questions must be answered from extracted slide text")

    perms = option_permutations(len(items), seed)
    questions = []
    for i, (it, perm) in enumerate(zip(items, perms)):
        opts = {LABELS[k]: it.options[perm[k]] for k in range(4)}
        opts[OPTION_E] = OPTION_E_TEXT
        questions.append({"index": i, "question": it.question, "options": opts})
    payload: dict[str, Any] = {"quiz_type": quiz_type.value, "questions": questions}
    if not wants_images:
        payload["slides"] = evidence.text_payload()

    def check(out: Any) -> list[str]:
        seen = {a["index"] for a in out["answers"]}
        missing = [i for i in range(len(items)) if i not in seen]
        return [f"missing answers for questions {missing}"] if missing else []

    out = gateway.call(
        AgentRequest.build(AgentName.QUIZ_TAKER, payload, images=evidence.images if wants_images else ()),
        check,
    )
    presented = {a["index"]: a["answer"] for a in out["answers"] if 0 <= a["index"] < len(items)}
    answers = []
    for i, perm in enumerate(perms):
        label = presented.get(i, OPTION_E)
        answers.append(label if label == OPTION_E else LABELS[perm[LABELS.index(label)]])
    return QuizResult(quiz_type, tuple(answers), score_answers(items, answers), len(items))
