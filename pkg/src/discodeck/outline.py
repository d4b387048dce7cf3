"""Narrative refinement loop: plan, critique, judge, revise (three cycles at most)."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

from .commitment import GlobalCommitment, budget_window
from .discourse import Arity, DiscourseTree, Leaf, Relation, iter_leaves, node_to_json, shallow_nuclei
from .errors import SchemaFailure
from .ingest import DocumentBundle, SectionGroup

logger = logging.getLogger(__name__)

MAX_CYCLES = 3
CRITERIA = ("a", "b", "c", "d", "e")
CRITERION_NAMES = {
    "a": "commitment alignment",
    "b": "global narrative flow",
    "c": "section balance",
    "d": "slide-level coherence",
    "e": "redundancy or missing content",
}


@dataclass(frozen=True)
class OutlineSlide:
    slide_number: int
    section_index: int
    section_title: str
    slide_title: str
    paragraph_ids: tuple[str, ...]
    rationale: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "slide_number": self.slide_number,
            "section_index": self.section_index,
            "section_title": self.section_title,
            "slide_title": self.slide_title,
            "paragraph_ids": list(self.paragraph_ids),
            "rationale": self.rationale,
        }


@dataclass(frozen=True)
class SlideOutline:
    slides: tuple[OutlineSlide, ...]
    revision: int = 0

    def to_json(self) -> dict[str, Any]:
        return {"revision": self.revision, "slides": [s.to_json() for s in self.slides]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "SlideOutline":
        return cls(
            tuple(
                OutlineSlide(
                    int(s["slide_number"]),
                    int(s["section_index"]),
                    s.get("section_title", ""),
                    s["slide_title"],
                    tuple(s["paragraph_ids"]),
                    s.get("rationale", ""),
                )
                for s in data["slides"]
            ),
            int(data.get("revision", 0)),
        )

    @property
    def covered(self) -> set[str]:
        return {pid for s in self.slides for pid in s.paragraph_ids}


class Severity(str, enum.Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


class Decision(str, enum.Enum):
    READY = "ready"
    REVISE = "revise"


@dataclass(frozen=True)
class Finding:
    criterion: str
    affected_slides: tuple[int, ...]
    note: str


@dataclass(frozen=True)
class CritiqueReport:
    findings: Mapping[str, tuple[Finding, ...]]

    def __post_init__(self) -> None:
        if tuple(sorted(self.findings)) != CRITERIA:
            raise ValueError(f"critique must cover exactly {CRITERIA}")

    @property
    def empty(self) -> bool:
        return not any(self.findings.values())

    def to_json(self) -> dict[str, Any]:
        return {
            "findings": {
                k: [{"affected_slides": list(f.affected_slides), "note": f.note} for f in self.findings[k]]
                for k in CRITERIA
            }
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "CritiqueReport":
        raw = data["findings"]
        return cls({
            k: tuple(Finding(k, tuple(f.get("affected_slides", [])), f["note"]) for f in raw.get(k, []))
            for k in CRITERIA
        })


@dataclass(frozen=True)
class MustFix:
    issue: str
    severity: Severity
    affected_slides: tuple[int, ...]


@dataclass(frozen=True)
class JudgeVerdict:
    decision: Decision
    rationale: str
    must_fix: tuple[MustFix, ...] = ()
    guidance: str = ""

    def __post_init__(self) -> None:
        if self.decision is Decision.REVISE and not (self.must_fix and self.guidance.strip()):
            raise ValueError("a revise verdict needs must-fix issues and guidance")

    def to_json(self) -> dict[str, Any]:
        return {
            "decision": self.decision.value,
            "rationale": self.rationale,
            "must_fix": [
                {"issue": m.issue, "severity": m.severity.value, "affected_slides": list(m.affected_slides)}
                for m in self.must_fix
            ],
            "guidance": self.guidance,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "JudgeVerdict":
        return cls(
            Decision(data["decision"]),
            data.get("rationale", ""),
            tuple(
                MustFix(m["issue"], Severity(m["severity"]), tuple(m.get("affected_slides", [])))
                for m in data.get("must_fix", [])
            ),
            data.get("guidance", ""),
        )


class TerminalReason(str, enum.Enum):
    JUDGE_READY = "JudgeReady"
    CYCLE_CAP = "CycleCapReached"


@dataclass(frozen=True)
class LoopIteration:
    outline_revision: int
    critique: CritiqueReport
    verdict: JudgeVerdict


@dataclass(frozen=True)
class LoopTrace:
    iterations: tuple[LoopIteration, ...]
    terminal_reason: TerminalReason
    final_revision: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "terminal_reason": self.terminal_reason.value,
            "final_revision": self.final_revision,
            "iterations": [
                {
                    "outline_revision": it.outline_revision,
                    "critique": it.critique.to_json(),
                    "verdict": it.verdict.to_json(),
                }
                for it in self.iterations
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "LoopTrace":
        return cls(
            tuple(
                LoopIteration(
                    it["outline_revision"],
                    CritiqueReport.from_json(it["critique"]),
                    JudgeVerdict.from_json(it["verdict"]),
                )
                for it in data.get("iterations", [])
            ),
            TerminalReason(data["terminal_reason"]),
            data.get("final_revision", 0),
        )


def required_paragraphs(trees: Sequence[DiscourseTree], bundle: DocumentBundle) -> set[str]:
    """Methodology paragraphs that are nuclei at depth <= 1 of their section tree."""
    out: set[str] = set()
    for tree in trees:
        if bundle.section(tree.section_index).group is SectionGroup.METHODOLOGY:
            out.update(shallow_nuclei(tree))
    return out


def validate_outline(
    outline: SlideOutline, bundle: DocumentBundle, trees: Sequence[DiscourseTree] | None = None
) -> list[str]:
    errors = []
    if not outline.slides:
        return ["outline has no slides"]
    numbers = [s.slide_number for s in outline.slides]
    if numbers != list(range(1, len(numbers) + 1)):
        errors.append(f"slide numbers {numbers} are not contiguous from 1")
    owner = {p.id: s.index for s in bundle.sections for p in s.paragraphs}
    seen: dict[str, int] = {}
    prev_section = 0
    for s in outline.slides:
        if not s.paragraph_ids:
            errors.append(f"slide {s.slide_number} has no paragraphs")
        if not 1 <= s.section_index <= len(bundle.sections):
            errors.append(f"slide {s.slide_number} refers to unknown section {s.section_index}")
        if s.section_index < prev_section:
            errors.append(f"slide {s.slide_number} breaks section order ({s.section_index} after {prev_section})")
        prev_section = max(prev_section, s.section_index)
        for pid in s.paragraph_ids:
            if pid not in owner:
                errors.append(f"slide {s.slide_number}: unknown paragraph id {pid}")
            elif owner[pid] != s.section_index:
                errors.append(f"slide {s.slide_number}: paragraph {pid} belongs to section {owner[pid]}")
            if pid in seen:
                errors.append(f"paragraph {pid} appears on slides {seen[pid]} and {s.slide_number}")
            seen.setdefault(pid, s.slide_number)
    if trees is not None:
        missing = sorted(required_paragraphs(trees, bundle) - set(seen))
        if missing:
            errors.append(f"methodology nucleus paragraphs not covered: {missing}")
    return errors


def outline_from_agent(data: Mapping[str, Any], bundle: DocumentBundle, revision: int) -> SlideOutline:
    """Normalise agent output: numbering by position, section titles from the bundle."""
    slides = []
    for pos, raw in enumerate(data["slides"], start=1):
        idx = int(raw["section_index"])
        title = bundle.section(idx).title if 1 <= idx <= len(bundle.sections) else raw.get("section_title", "")
        slides.append(
            OutlineSlide(pos, idx, title, str(raw["slide_title"]).strip(),
                         tuple(raw["paragraph_ids"]), str(raw.get("rationale", "")))
        )
    return SlideOutline(tuple(slides), revision)


def fallback_outline(bundle: DocumentBundle, trees: Sequence[DiscourseTree], revision: int = 0) -> SlideOutline:
    """One slide per top-level split of each section tree, nucleus side first."""
    by_section = {t.section_index: t for t in trees}
    slides: list[OutlineSlide] = []
    for section in bundle.sections:
        tree = by_section.get(section.index)
        if tree is None:
            groups = [section.paragraph_ids]
        elif isinstance(tree.root, Leaf):
            groups = [[tree.root.edu]]
        else:
            root: Relation = tree.root
            if root.arity is Arity.NS:
                parts = [root.nucleus, root.satellite]
            else:
                parts = [root.left, root.right]
            groups = [[leaf.edu for leaf, _ in iter_leaves(p)] for p in parts]
        for k, ids in enumerate(groups, start=1):
            title = section.title if len(groups) == 1 else f"{section.title} ({k}/{len(groups)})"
            slides.append(
                OutlineSlide(len(slides) + 1, section.index, section.title, title, tuple(ids),
                             "top-level discourse split")
            )
    return SlideOutline(tuple(slides), revision)


def _sections_payload(bundle: DocumentBundle) -> list[dict[str, Any]]:
    return [
        {
            "index": s.index,
            "title": s.title,
            "group": s.group.value,
            "paragraphs": [{"id": p.id, "text": p.text} for p in s.paragraphs],
        }
        for s in bundle.sections
    ]


def _trees_payload(trees: Sequence[DiscourseTree]) -> list[dict[str, Any]]:
    return [{"section": t.section_index, "tree": node_to_json(t.root)} for t in trees]


def _outline_payload(outline: SlideOutline, bundle: DocumentBundle) -> dict[str, Any]:
    texts = bundle.paragraph_index()
    data = outline.to_json()
    for s in data["slides"]:
        s["paragraphs"] = [texts[p].text for p in s["paragraph_ids"] if p in texts]
    return data


def budget_summary(outline: SlideOutline, commitment: GlobalCommitment) -> dict[str, Any]:
    target = commitment.slide_budget or commitment.total_budget
    lo, hi = budget_window(target)
    per_section: dict[str, int] = {}
    for s in outline.slides:
        per_section[s.section_title] = per_section.get(s.section_title, 0) + 1
    return {
        "target": target,
        "window": [lo, hi],
        "total": len(outline.slides),
        "within_window": lo <= len(outline.slides) <= hi,
        "per_section": [
            {"section_title": p.section_title, "planned": p.budget_slides,
             "actual": per_section.get(p.section_title, 0)}
            for p in commitment.section_plan
        ],
    }


def budget_findings(outline: SlideOutline, commitment: GlobalCommitment) -> list[Finding]:
    """Deterministic criterion (c) finding when the deck size leaves the budget window."""
    summary = budget_summary(outline, commitment)
    if summary["within_window"]:
        return []
    lo, hi = summary["window"]
    return [
        Finding(
            "c",
            tuple(s.slide_number for s in outline.slides),
            f"{summary['total']} slides is outside the budget window [{lo:g}, {hi:g}] "
            f"for a target of {summary['target']}",
        )
    ]


def plan_outline(
    bundle: DocumentBundle, trees: Sequence[DiscourseTree], commitment: GlobalCommitment, gateway: Any
) -> SlideOutline:
    from .gateway import AgentName, AgentRequest

    covered_sections = {t.section_index for t in trees}
    if covered_sections != {s.index for s in bundle.sections}:
        raise ValueError("discourse trees must cover every section")
    payload = {
        "commitment": commitment.to_markdown(),
        "slide_budget": commitment.slide_budget,
        "sections": _sections_payload(bundle),
        "trees": _trees_payload(trees),
    }
    request = AgentRequest.build(AgentName.SLIDE_PLANNER, payload)

    def check(out: Any) -> list[str]:
        return validate_outline(outline_from_agent(out, bundle, 0), bundle, trees)

    try:
        data = gateway.call(request, check=check)
    except SchemaFailure as exc:
        logger.warning("planner failed (%s); using top-level split outline", exc)
        return fallback_outline(bundle, trees, 0)
    return outline_from_agent(data, bundle, 0)


def critique(
    outline: SlideOutline, commitment: GlobalCommitment, gateway: Any, bundle: DocumentBundle
) -> CritiqueReport:
    from .gateway import AgentName, AgentRequest

    payload = {
        "commitment": commitment.to_markdown(),
        "outline": _outline_payload(outline, bundle),
        "budget": budget_summary(outline, commitment),
        "criteria": CRITERION_NAMES,
    }
    request = AgentRequest.build(AgentName.NARRATIVE_CRITIC, payload)
    n = len(outline.slides)

    def check(out: Any) -> list[str]:
        bad = [
            f"findings/{k}: slide {x} does not exist"
            for k, items in out["findings"].items()
            for f in items
            for x in f["affected_slides"]
            if not 1 <= x <= n
        ]
        return bad

    try:
        report = CritiqueReport.from_json(gateway.call(request, check=check))
    except SchemaFailure as exc:
        logger.warning("critic failed (%s); keeping only deterministic findings", exc)
        report = CritiqueReport({k: () for k in CRITERIA})
    extra = budget_findings(outline, commitment)
    if extra:
        merged = dict(report.findings)
        merged["c"] = tuple(report.findings["c"]) + tuple(extra)
        report = CritiqueReport(merged)
    return report


def judge(
    outline: SlideOutline, report: CritiqueReport, gateway: Any, commitment: GlobalCommitment,
    bundle: DocumentBundle,
) -> JudgeVerdict:
    from .gateway import AgentName, AgentRequest

    payload = {
        "commitment": commitment.to_markdown(),
        "outline": _outline_payload(outline, bundle),
        "critique": report.to_json(),
    }
    request = AgentRequest.build(AgentName.NARRATIVE_JUDGE, payload)

    def check(out: Any) -> list[str]:
        if out["decision"] == "revise":
            errs = []
            if not out["must_fix"]:
                errs.append("must_fix: a revise decision needs at least one issue")
            if not out["guidance"].strip():
                errs.append("guidance: a revise decision needs guidance")
            return errs
        return []

    try:
        return JudgeVerdict.from_json(gateway.call(request, check=check))
    except SchemaFailure as exc:
        logger.warning("judge failed (%s); accepting outline as is", exc)
        return JudgeVerdict(Decision.READY, f"judge output unusable: {exc.errors[:1]}")


def revise(
    outline: SlideOutline,
    report: CritiqueReport,
    verdict: JudgeVerdict,
    gateway: Any,
    bundle: DocumentBundle,
    trees: Sequence[DiscourseTree],
    commitment: GlobalCommitment,
) -> SlideOutline:
    from .gateway import AgentName, AgentRequest

    if verdict.decision is not Decision.REVISE:
        raise ValueError("revise called without a revise verdict")
    new_revision = outline.revision + 1
    payload = {
        "commitment": commitment.to_markdown(),
        "sections": _sections_payload(bundle),
        "trees": _trees_payload(trees),
        "outline": outline.to_json(),
        "critique": report.to_json(),
        "verdict": verdict.to_json(),
    }
    request = AgentRequest.build(AgentName.REVISER, payload)

    def check(out: Any) -> list[str]:
        return validate_outline(outline_from_agent(out, bundle, new_revision), bundle, trees)

    try:
        return outline_from_agent(gateway.call(request, check=check), bundle, new_revision)
    except SchemaFailure as exc:
        logger.warning("reviser failed (%s); carrying the outline forward unchanged", exc)
        return replace(outline, revision=new_revision)


def run_refinement_loop(
    bundle: DocumentBundle,
    trees: Sequence[DiscourseTree],
    commitment: GlobalCommitment,
    gateway: Any,
    max_cycles: int = MAX_CYCLES,
) -> tuple[SlideOutline, LoopTrace]:
    """Critique/judge/revise until the judge says ready or ``max_cycles`` cycles ran.

    Every cycle records one critique and one verdict. A revise verdict in the
    last cycle still gets applied, and that revision is the one forwarded.
    """
    outline = plan_outline(bundle, trees, commitment, gateway)
    iterations: list[LoopIteration] = []
    reason = TerminalReason.CYCLE_CAP
    for _ in range(max_cycles):
        report = critique(outline, commitment, gateway, bundle)
        verdict = judge(outline, report, gateway, commitment, bundle)
        iterations.append(LoopIteration(outline.revision, report, verdict))
        if verdict.decision is Decision.READY:
            reason = TerminalReason.JUDGE_READY
            break
        outline = revise(outline, report, verdict, gateway, bundle, trees, commitment)
    return outline, LoopTrace(tuple(iterations), reason, outline.revision)


def format_trace(trace: LoopTrace) -> str:
    if not trace.iterations:
        return "no iterations"
    rows = [("iter", "rev", "decision", "must-fix (H/M/L)", "findings a-e")]
    for i, it in enumerate(trace.iterations, start=1):
        sev = [sum(1 for m in it.verdict.must_fix if m.severity is s) for s in Severity]
        counts = "/".join(str(len(it.critique.findings[k])) for k in CRITERIA)
        rows.append((str(i), str(it.outline_revision), it.verdict.decision.value,
                     "/".join(map(str, sev)), counts))
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    lines.append(f"terminal: {trace.terminal_reason.value}, forwarded revision {trace.final_revision}")
    return "\n".join(lines)
