"""Checklist rubrics and randomized-order pairwise preference."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from statistics import fmean
from typing import Any, Sequence

from ..gateway import AgentName, AgentRequest
from .evidence import DeckEvidence

DEFAULT_TRIALS = 11


class Dimension(str, enum.Enum):
    TQ = "TQ"  # text quality
    NF = "NF"  # narrative flow
    VL = "VL"  # visual layout
    VT = "VT"  # visual-text alignment


CHECKLISTS: dict[Dimension, tuple[str, ...]] = {
    Dimension.TQ: (
        "Sentences are grammatical and free of spelling errors.",
        "Terminology is used consistently across slides.",
        "Each slide states one clear main point.",
        "Text is concise, with no filler or repeated phrasing.",
        "Technical terms are introduced before they are relied on.",
        "Numbers and claims match the source paper.",
        "Bullet points are parallel in form within a slide.",
        "No slide is overloaded with text.",
        "Key terms receive visual emphasis.",
        "Citations are attributed where prior work is mentioned.",
    ),
    Dimension.NF: (
        "The opening motivates the problem before presenting the method.",
        "The central contribution is stated early.",
        "Slides follow a logical order with no jumps back and forth.",
        "Transitions between sections are signposted.",
        "The method is explained before its results.",
        "Each result is tied back to a claim made earlier.",
        "Limitations or failure cases are acknowledged.",
        "The amount of detail suits the target audience.",
        "The deck closes with clear takeaways.",
        "No section of the paper essential to the story is missing.",
    ),
    Dimension.VL: (
        "Elements are aligned to a consistent grid.",
        "Text and visuals do not overlap.",
        "Margins are consistent across slides.",
        "Figures are legible at slide size.",
        "Font sizes form a clear hierarchy.",
        "Whitespace is balanced, with no cramped or empty slides.",
        "A consistent color theme is applied.",
        "Layouts vary with content rather than repeating one template.",
        "Tables are readable and not truncated.",
        "Footnotes are unobtrusive and placed consistently.",
    ),
    Dimension.VT: (
        "Every figure relates to the text on its slide.",
        "Figures appear on the slide where they are discussed.",
        "Text refers to what the figure shows.",
        "Captions or labels identify each visual.",
        "Quantitative claims are backed by a table or chart.",
        "The method overview uses a diagram when the paper provides one.",
        "No visual is repeated without reason.",
        "Visuals are not cropped in misleading ways.",
        "Emphasized text matches the highlighted visual content.",
        "Slides without visuals are ones that do not need them.",
    ),
}


@dataclass(frozen=True)
class RubricScore:
    dimension: Dimension
    satisfied: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.satisfied) != 10:
            raise ValueError(f"a checklist has 10 entries, got {len(self.satisfied)}")

    @property
    def score(self) -> int:
        return sum(1 for s in self.satisfied if s)

    @property
    def normalized(self) -> int:
        """Score on the 0-100 scale used for comparison with published tables."""
        return self.score * 10

    def to_json(self) -> dict[str, Any]:
        return {
            "dimension": self.dimension.value,
            "satisfied": list(self.satisfied),
            "score": self.score,
            "score_x10": self.normalized,
        }


def judge_rubric(evidence: DeckEvidence, dimension: Dimension, gateway: Any) -> RubricScore:
    payload = {
        "dimension": dimension.value,
        "criteria": list(CHECKLISTS[dimension]),
        "slides": evidence.text_payload(),
    }
    out = gateway.call(AgentRequest.build(AgentName.JUDGE_SCORER, payload, images=evidence.images))
    return RubricScore(dimension, tuple(bool(x) for x in out["satisfied"]))


class Branch(str, enum.Enum):
    NARRATIVE_FLOW = "NarrativeFlow"
    OVERALL_QUALITY = "OverallQuality"


BRANCH_CRITERIA = {
    Branch.NARRATIVE_FLOW: "Which presentation tells the paper's story more coherently, from motivation to takeaways?",
    Branch.OVERALL_QUALITY: "Which presentation is better overall, considering content, clarity and design?",
}


class Vote(str, enum.Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True)
class Trial:
    order: tuple[Vote, Vote]
    vote: Vote


@dataclass(frozen=True)
class PairwiseResult:
    branch: Branch
    trials: tuple[Trial, ...]

    @property
    def trial_count(self) -> int:
        return len(self.trials)

    @property
    def votes_a(self) -> int:
        return sum(1 for t in self.trials if t.vote is Vote.A)

    @property
    def votes_b(self) -> int:
        return self.trial_count - self.votes_a

    @property
    def winner(self) -> Vote:
        return majority_vote([t.vote for t in self.trials])

    def to_json(self) -> dict[str, Any]:
        return {
            "branch": self.branch.value,
            "trial_count": self.trial_count,
            "trials": [{"order": [o.value for o in t.order], "vote": t.vote.value} for t in self.trials],
            "votes": {"A": self.votes_a, "B": self.votes_b},
            "winner": self.winner.value,
        }


def majority_vote(votes: Sequence[Vote]) -> Vote:
    if len(votes) % 2 == 0:
        raise ValueError("an odd number of votes is needed for a strict majority")
    a = sum(1 for v in votes if v is Vote.A)
    return Vote.A if 2 * a > len(votes) else Vote.B


def mean_score(values: Sequence[float]) -> float:
    """Numeric judge scores are averaged across trials; categorical votes use the majority."""
    return fmean(values)


def trial_swaps(seed: int, trials: int) -> list[bool]:
    """Whether deck B is shown first in each trial. ``~seed`` yields the complementary orders."""
    if seed < 0:
        return [not s for s in trial_swaps(~seed, trials)]
    rng = random.Random(seed)
    return [rng.random() < 0.5 for _ in range(trials)]


def mirror_seed(seed: int) -> int:
    return ~seed


def pairwise_compare(
    deck_a: DeckEvidence,
    deck_b: DeckEvidence,
    branch: Branch,
    gateway: Any,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    paper_text: str = "",
) -> PairwiseResult:
    if trials < 1 or trials % 2 == 0:
        raise ValueError(f"trials must be a positive odd number, got {trials}")
    results = []
    for t, swap in enumerate(trial_swaps(seed, trials)):
        first, second = (deck_b, deck_a) if swap else (deck_a, deck_b)
        order = (Vote.B, Vote.A) if swap else (Vote.A, Vote.B)
        payload = {
            "branch": branch.value,
            "criterion": BRANCH_CRITERIA[branch],
            "trial": t,
            "paper": paper_text,
            "presentation_1": first.text_payload(),
            "presentation_2": second.text_payload(),
        }
        out = gateway.call(AgentRequest.build(AgentName.PAIRWISE_JUDGE, payload, images=first.images + second.images))
        vote = order[0] if out["winner"] == "1" else order[1]
        results.append(Trial(order, vote))
    return PairwiseResult(branch, tuple(results))
