"""Global commitment: the five-part narrative contract conditioning every agent."""

from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import SchemaFailure
from .ingest import DocumentBundle, SectionGroup

logger = logging.getLogger(__name__)

SLIDES_PER_MINUTE = 1.0
BUDGET_WINDOW = 0.20
AUDIENCE_PRESETS = ("Research Scientists", "General Public")


class RenderTarget(str, enum.Enum):
    PPTX = "pptx"
    HTML = "html"
    BEAMER = "beamer"


@dataclass(frozen=True)
class PresentationSpec:
    audience: str = "Research Scientists"
    duration_minutes: int = 20
    theme_id: str | None = None
    render_target: RenderTarget = RenderTarget.PPTX

    def __post_init__(self) -> None:
        if not 3 <= self.duration_minutes <= 120:
            raise ValueError(f"duration must be within [3, 120] minutes, got {self.duration_minutes}")
        if not self.audience.strip():
            raise ValueError("audience must not be empty")

    @property
    def slide_budget(self) -> int:
        return slide_budget(self.duration_minutes)


def slide_budget(duration_minutes: int) -> int:
    return round(duration_minutes * SLIDES_PER_MINUTE)


def budget_window(budget: int) -> tuple[float, float]:
    return budget * (1 - BUDGET_WINDOW), budget * (1 + BUDGET_WINDOW)


@dataclass(frozen=True)
class SectionBudget:
    section_title: str
    budget_slides: int


@dataclass(frozen=True)
class GlobalCommitment:
    snapshot: str
    thesis: str
    key_takeaways: tuple[str, ...]
    prerequisites: tuple[str, ...]
    narrative_spine: tuple[str, ...]
    section_plan: tuple[SectionBudget, ...]
    slide_budget: int = 0
    fallback: bool = False

    @property
    def total_budget(self) -> int:
        return sum(s.budget_slides for s in self.section_plan)

    def budget_for(self, title: str) -> int | None:
        for s in self.section_plan:
            if s.section_title == title:
                return s.budget_slides
        return None

    def to_json(self) -> dict[str, Any]:
        return {
            "snapshot": self.snapshot,
            "core_content": {"thesis": self.thesis, "key_takeaways": list(self.key_takeaways)},
            "talk_contract": {"prerequisites": list(self.prerequisites)},
            "narrative_spine": list(self.narrative_spine),
            "section_plan": [
                {"section_title": s.section_title, "budget_slides": s.budget_slides} for s in self.section_plan
            ],
            "slide_budget": self.slide_budget,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=2)

    @classmethod
    def from_json(cls, data: Mapping[str, Any], slide_budget: int | None = None) -> "GlobalCommitment":
        return cls(
            snapshot=str(data.get("snapshot", "")).strip(),
            thesis=str(data.get("core_content", {}).get("thesis", "")).strip(),
            key_takeaways=tuple(data.get("core_content", {}).get("key_takeaways", [])),
            prerequisites=tuple(data.get("talk_contract", {}).get("prerequisites", [])),
            narrative_spine=tuple(data.get("narrative_spine", [])),
            section_plan=tuple(
                SectionBudget(str(s["section_title"]), int(s["budget_slides"]))
                for s in data.get("section_plan", [])
            ),
            slide_budget=slide_budget if slide_budget is not None else int(data.get("slide_budget", 0)),
        )

    def to_markdown(self) -> str:
        lines = ["# Global Commitment", "", "## Snapshot", self.snapshot, "", "## Core Content",
                 f"**Thesis:** {self.thesis}", "", "**Key takeaways:**"]
        lines += [f"- {t}" for t in self.key_takeaways]
        lines += ["", "## Talk Contract", "**Prerequisites:**"]
        lines += [f"- {p}" for p in self.prerequisites]
        lines += ["", "## Narrative Spine"]
        lines += [f"{i}. {b}" for i, b in enumerate(self.narrative_spine, start=1)]
        lines += ["", "## Section Plan"]
        lines += [f"- {s.section_title}: {s.budget_slides} slide(s)" for s in self.section_plan]
        return "\n".join(lines) + "\n"


def validate_commitment(c: GlobalCommitment, bundle: DocumentBundle, budget: int | None = None) -> list[str]:
    """Completeness, budget-window and title checks; returns violations."""
    errors = []
    parts = {
        "snapshot": c.snapshot,
        "core_content.thesis": c.thesis,
        "core_content.key_takeaways": c.key_takeaways,
        "talk_contract.prerequisites": c.prerequisites,
        "narrative_spine": c.narrative_spine,
        "section_plan": c.section_plan,
    }
    for name, value in parts.items():
        if not value or (isinstance(value, tuple) and not all(str(v).strip() for v in value)):
            errors.append(f"missing part: {name}")
    if c.key_takeaways and not 1 <= len(c.key_takeaways) <= 7:
        errors.append(f"key_takeaways must have 1-7 entries, got {len(c.key_takeaways)}")
    if any(s.budget_slides < 0 for s in c.section_plan):
        errors.append("negative slide budget in section_plan")
    target = budget if budget is not None else c.slide_budget
    if target and c.section_plan:
        lo, hi = budget_window(target)
        if not lo <= c.total_budget <= hi:
            errors.append(
                f"section_plan budgets sum to {c.total_budget}, outside [{lo:g}, {hi:g}] for budget {target}"
            )
    titles = {s.title for s in bundle.sections}
    unmatched = [s.section_title for s in c.section_plan if s.section_title not in titles]
    if unmatched:
        errors.append(f"unmatched section titles: {unmatched}")
    return errors


_SENTENCE_END = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9\[(])")


def sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_END.split(text.strip()) if s.strip()]


def uniform_plan(titles: list[str], budget: int) -> list[int]:
    """Spread ``budget`` slides over sections; earlier sections take the remainder."""
    n = len(titles)
    base, extra = divmod(budget, n)
    return [base + (1 if i < extra else 0) for i in range(n)]


def fallback_commitment(bundle: DocumentBundle, spec: PresentationSpec) -> GlobalCommitment:
    intro = next((s for s in bundle.sections if s.group is SectionGroup.INTRODUCTION), bundle.sections[0])
    first = sentences(intro.paragraphs[0].text)
    thesis = first[0] if first else intro.paragraphs[0].text
    snapshot = " ".join(first[:2]) if first else thesis
    snapshot = f"{snapshot} A {spec.duration_minutes}-minute talk for {spec.audience}."

    takeaways = []
    for s in bundle.sections:
        if s.group in (SectionGroup.EVALUATION, SectionGroup.CONCLUSION, SectionGroup.METHODOLOGY):
            lead = sentences(s.paragraphs[0].text)
            takeaways.append(lead[0] if lead else s.title)
    takeaways = takeaways[:7] or [thesis]

    groups = sorted({s.group.value for s in bundle.sections if s.group is not SectionGroup.OTHER})
    prerequisites = [f"Working familiarity with the field of: {bundle.title}"]
    if groups:
        prerequisites.append("Comfort following " + ", ".join(groups).lower() + " material")
    titles = [s.title for s in bundle.sections]
    budgets = uniform_plan(titles, spec.slide_budget)
    return GlobalCommitment(
        snapshot=snapshot,
        thesis=thesis,
        key_takeaways=tuple(takeaways),
        prerequisites=tuple(prerequisites),
        narrative_spine=tuple(titles),
        section_plan=tuple(SectionBudget(t, b) for t, b in zip(titles, budgets)),
        slide_budget=spec.slide_budget,
        fallback=True,
    )


def _builder_payload(bundle: DocumentBundle, spec: PresentationSpec) -> dict[str, Any]:
    return {
        "title": bundle.title,
        "audience": spec.audience,
        "duration_minutes": spec.duration_minutes,
        "slide_budget": spec.slide_budget,
        "sections": [
            {
                "index": s.index,
                "title": s.title,
                "group": s.group.value,
                "paragraph_count": len(s.paragraphs),
                "opening": s.paragraphs[0].text[:600],
            }
            for s in bundle.sections
        ],
    }


def build_commitment(bundle: DocumentBundle, spec: PresentationSpec, gateway: Any) -> GlobalCommitment:
    from .gateway import AgentName, AgentRequest

    if not bundle.sections:
        raise ValueError("bundle has no sections")
    budget = spec.slide_budget
    request = AgentRequest.build(AgentName.COMMITMENT_BUILDER, _builder_payload(bundle, spec))

    def check(out: Any) -> list[str]:
        return validate_commitment(GlobalCommitment.from_json(out, budget), bundle, budget)

    try:
        data = gateway.call(request, check=check)
    except SchemaFailure as exc:
        logger.warning("commitment builder failed (%s); using uniform fallback plan", exc)
        return fallback_commitment(bundle, spec)
    return GlobalCommitment.from_json(data, budget)
