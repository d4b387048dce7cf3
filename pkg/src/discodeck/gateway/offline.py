"""Deterministic heuristic stand-in for every agent.

It answers each schema with plausible, valid output built from simple text
heuristics. It exists to record the bundled fixture transcripts and to run
demos without a model endpoint; it is not a substitute for a real model.
"""

from __future__ import annotations

import json
import re
from typing import Any, Callable

from ..commitment import sentences
from . import AgentName, AgentRequest
from .transport import ScriptedTransport

MAX_PARAS_PER_SLIDE = 3
_REPAIR_MARK = "\n\n### Repair"
_ACRONYM = re.compile(r"\b[A-Z][A-Z0-9]{1,}\b")
_NUMBER = re.compile(r"\b\d+(?:\.\d+)?%?")
_WORD = re.compile(r"[A-Za-z][A-Za-z-]{5,}")


def _payload(request: AgentRequest) -> Any:
    text = request.user_payload.split(_REPAIR_MARK, 1)[0]
    return json.loads(text)


# discourse ---------------------------------------------------------------

_CUES = (
    (("for example", "for instance", "e.g.", "such as"), "Elaboration"),
    (("because", "since", "this is why", "the reason"), "Explanation"),
    (("to this end", "in order to", "we aim", "our goal"), "Purpose"),
    (("results", "outperform", "accuracy", "we observe", "improves"), "Evaluation"),
    (("first", "second", "finally", "overall", "in summary"), "Organization"),
    (("prior work", "previously", "existing", "recent"), "Context"),
    (("moreover", "additionally", "in addition", "also"), "Joint"),
)
_MN = {"Joint", "SameUnit"}


def _relation_for(text: str) -> str:
    low = text.lower()[:160]
    for cues, label in _CUES:
        if any(c in low for c in cues):
            return label
    return "Elaboration"


def _node(label: str, left: dict, right: dict) -> dict:
    if label in _MN:
        return {"relation": label, "type": "MN", "left": left, "right": right}
    return {"relation": label, "type": "NS", "nucleus": left, "satellite": right}


def _balanced(paras: list[dict]) -> dict:
    if len(paras) == 1:
        return {"edu": paras[0]["id"]}
    mid = (len(paras) + 1) // 2
    return _node(_relation_for(paras[mid]["text"]), _balanced(paras[:mid]), _balanced(paras[mid:]))


def _discourse(p: dict) -> dict:
    paras = p["paragraphs"]
    rest = paras[1:]
    label = _relation_for(rest[0]["text"])
    if label in _MN:
        label = "Elaboration"  # keep the opening paragraph as the section's nucleus
    return {"tree": _node(label, {"edu": paras[0]["id"]}, _balanced(rest))}


# commitment and outline --------------------------------------------------

def allocate_budget(counts: list[int], budget: int, must: list[bool]) -> list[int]:
    """Largest-remainder split of ``budget`` proportional to paragraph counts, capped by count."""
    total = sum(counts)
    budget = min(budget, total)
    alloc = [0] * len(counts)
    for i, m in enumerate(must):
        if m and sum(alloc) < budget:
            alloc[i] = 1
    while sum(alloc) < budget:
        room = [i for i in range(len(counts)) if alloc[i] < counts[i]]
        i = max(room, key=lambda k: (counts[k] * budget / total - alloc[k], -k))
        alloc[i] += 1
    return alloc


def _first_sentence(text: str) -> str:
    s = sentences(text)
    return s[0] if s else text


def _commitment(p: dict) -> dict:
    secs = p["sections"]
    alloc = allocate_budget([s["paragraph_count"] for s in secs], p["slide_budget"],
                            [s["group"] == "Methodology" for s in secs])
    by_group = {}
    for s in secs:
        by_group.setdefault(s["group"], s)
    intro = by_group.get("Introduction", secs[0])
    takeaways = [_first_sentence(by_group[g]["opening"]) for g in ("Methodology", "Evaluation", "Conclusion")
                 if g in by_group] or [_first_sentence(intro["opening"])]
    prereq = ("Basic familiarity with the research area" if p["audience"] == "Research Scientists"
              else "No specialist background assumed; key terms are defined on first use")
    return {
        "snapshot": f"{p['title']}: a {p['duration_minutes']}-minute talk for {p['audience']}.",
        "core_content": {"thesis": _first_sentence(intro["opening"]), "key_takeaways": takeaways},
        "talk_contract": {"prerequisites": [prereq]},
        "narrative_spine": [f"{s['title']}: {_first_sentence(s['opening'])[:120]}" for s in secs],
        "section_plan": [{"section_title": s["title"], "budget_slides": b} for s, b in zip(secs, alloc)],
    }


def _depths(tree: dict, depth: int = 0, out: dict | None = None) -> dict[str, int]:
    out = {} if out is None else out
    if "edu" in tree:
        out[tree["edu"]] = depth
    else:
        for key in ("nucleus", "satellite", "left", "right"):
            if key in tree:
                _depths(tree[key], depth + 1, out)
    return out


def _salience(section: dict, trees: dict[int, dict]) -> list[str]:
    ids = [q["id"] for q in section["paragraphs"]]
    depth = _depths(trees[section["index"]]) if section["index"] in trees else {}
    return sorted(ids, key=lambda pid: (depth.get(pid, 0), ids.index(pid)))


def _title_for(section_title: str, text: str, k: int, n: int) -> str:
    if n == 1:
        return section_title
    words = [w.strip(",.;:()") for w in _first_sentence(text).split()[:6]]
    return f"{section_title}: {' '.join(w for w in words if w)}"


def _bound_pairs(tree: dict, out: set | None = None) -> set[frozenset]:
    """Leaf nucleus/satellite pairs; the planner never puts a slide break between them."""
    out = set() if out is None else out
    if "edu" in tree:
        return out
    if tree.get("type") == "NS" and "edu" in tree["nucleus"] and "edu" in tree["satellite"]:
        out.add(frozenset((tree["nucleus"]["edu"], tree["satellite"]["edu"])))
    for key in ("nucleus", "satellite", "left", "right"):
        if key in tree:
            _bound_pairs(tree[key], out)
    return out


def _group(chosen: list[str], b: int, bound: set[frozenset]) -> list[list[str]]:
    """Split ``chosen`` into at most ``b`` contiguous, roughly even groups without breaking bound pairs."""
    units: list[list[str]] = []
    for pid in chosen:
        if units and frozenset((units[-1][-1], pid)) in bound:
            units[-1].append(pid)
        else:
            units.append([pid])
    b = min(b, len(units))
    groups: list[list[str]] = []
    seen = 0
    for i, unit in enumerate(units):
        if not groups or (len(groups) < b and seen >= len(chosen) * len(groups) / b) \
                or len(units) - i <= b - len(groups):
            groups.append([])
        groups[-1].extend(unit)
        seen += len(unit)
    return groups


def _planner(p: dict) -> dict:
    secs = p["sections"]
    trees = {t["section"]: t["tree"] for t in p["trees"]}
    alloc = allocate_budget([len(s["paragraphs"]) for s in secs], p["slide_budget"],
                            [s["group"] == "Methodology" for s in secs])
    slides = []
    for s, b in zip(secs, alloc):
        if b == 0:
            continue
        ids = [q["id"] for q in s["paragraphs"]]
        keep = set(_salience(s, trees)[: (MAX_PARAS_PER_SLIDE + 1) * b])
        chosen = [pid for pid in ids if pid in keep]
        bound = _bound_pairs(trees[s["index"]]) if s["index"] in trees else set()
        groups = _group(chosen, b, bound)
        texts = {q["id"]: q["text"] for q in s["paragraphs"]}
        for k, group in enumerate(groups):
            slides.append({
                "section_index": s["index"],
                "slide_title": _title_for(s["title"], texts[group[0]], k, len(groups)),
                "paragraph_ids": group,
                "rationale": "salient paragraphs of the section in source order, nuclei kept with satellites",
            })
    return {"slides": slides}


def _critic(p: dict) -> dict:
    findings: dict[str, list] = {k: [] for k in "abcde"}
    titles: dict[str, int] = {}
    for s in p["outline"]["slides"]:
        n = len(s["paragraph_ids"])
        if n > MAX_PARAS_PER_SLIDE:
            findings["b"].append({"affected_slides": [s["slide_number"]],
                                  "note": f"packs {n} paragraphs; too dense to present in the time available"})
        if s["slide_title"] in titles:
            findings["e"].append({"affected_slides": [titles[s["slide_title"]], s["slide_number"]],
                                  "note": "two slides share a title"})
        titles.setdefault(s["slide_title"], s["slide_number"])
    return {"findings": findings}


_SEVERITY = {"a": "high", "b": "medium", "d": "medium", "e": "low"}


def _judge(p: dict) -> dict:
    must = [
        {"issue": f"({k}) {f['note']}", "severity": _SEVERITY[k], "affected_slides": f["affected_slides"]}
        for k in ("a", "b", "d", "e")
        for f in p["critique"]["findings"][k]
    ]
    if not must:
        return {"decision": "ready", "rationale": "no blocking findings", "must_fix": [], "guidance": ""}
    return {
        "decision": "revise",
        "rationale": f"{len(must)} issue(s) need attention",
        "must_fix": must,
        "guidance": f"keep at most {MAX_PARAS_PER_SLIDE} paragraphs per slide, favouring the section's nuclei",
    }


def _reviser(p: dict) -> dict:
    trees = {t["section"]: t["tree"] for t in p["trees"]}
    sections = {s["index"]: s for s in p["sections"]}
    slides = []
    for s in p["outline"]["slides"]:
        ids = list(s["paragraph_ids"])
        if len(ids) > MAX_PARAS_PER_SLIDE:
            order = _salience(sections[s["section_index"]], trees)
            keep = set(sorted(ids, key=order.index)[:MAX_PARAS_PER_SLIDE])
            ids = [pid for pid in ids if pid in keep]
        slides.append({**s, "paragraph_ids": ids})
    return {"slides": slides}


# deck ---------------------------------------------------------------------

def _slide_text(p: dict) -> dict:
    from ..deck.construct import DRAFT_TARGET_CHARS, cited_keys, draft_text
    from ..deck.layouts import default_catalog

    limit = min(DRAFT_TARGET_CHARS, default_catalog().capacity_for(len(p["visuals"])))
    lines = draft_text(p["slide"]["paragraphs"], limit) or [p["slide"]["title"]]
    text = " ".join(lines)
    return {
        "title": p["slide"]["title"],
        "blocks": [{"text": t, "level": 0} for t in lines],
        "citations": [k for k in cited_keys(text) if k in p["citation_keys"]],
    }


def _asset_matches(p: dict) -> dict:
    from ..deck.construct import DETERMINISTIC_MAX_PER_SLIDE, MATCH_THRESHOLD, natural_key, overlap_score

    scored = sorted(
        (-overlap_score(s["text"], a["caption"]), s["slide_number"], natural_key(a["id"]), a["id"])
        for s in p["slides"] for a in p["assets"]
    )
    used: set[str] = set()
    chosen: dict[int, list[str]] = {s["slide_number"]: [] for s in p["slides"]}
    for neg, n, _, aid in scored:
        if -neg < MATCH_THRESHOLD or aid in used or len(chosen[n]) >= DETERMINISTIC_MAX_PER_SLIDE:
            continue
        chosen[n].append(aid)
        used.add(aid)
    return {"matches": [{"slide_number": n, "asset_ids": ids, "reasoning": "caption terms recur on the slide"}
                        for n, ids in chosen.items() if ids]}


def _figure_additions(p: dict) -> dict:
    from ..deck.construct import MATCH_THRESHOLD, natural_key, overlap_score

    used: set[str] = set()
    adds = []
    for s in p["slides"]:
        best = None
        for a in p["assets"]:
            score = overlap_score(s["title"] + " " + s["text"], a["caption"])
            if a["id"] in used or score < MATCH_THRESHOLD:
                continue
            key = (-score, natural_key(a["id"]))
            if best is None or key < best[0]:
                best = (key, a["id"])
        if best:
            used.add(best[1])
            adds.append({"slide_number": s["slide_number"], "asset_id": best[1], "reasoning": "caption fits"})
    return {"additions": adds}


def _content_revision(p: dict) -> dict:
    limits = p["limits"]
    blocks = [b["text"] for b in p["slide"]["blocks"]]
    if p["action"] == "condense":
        out, total = [], 0
        for t in blocks:
            if total + len(t) > limits["max_chars"]:
                break
            out.append(t)
            total += len(t)
        return {"blocks": [{"text": t, "level": 0} for t in (out or [blocks[0][: limits["max_chars"]]])]}
    present = " ".join(blocks)
    total = sum(len(t) for t in blocks)
    for para in p["slide"]["source_paragraphs"]:
        for s in sentences(para):
            if len(blocks) >= 3 and total >= limits["min_chars"]:
                break
            if s not in present and total + len(s) <= limits["max_chars"]:
                blocks.append(s)
                total += len(s)
    return {"blocks": [{"text": t, "level": 0} for t in blocks]}


def _emphasis(p: dict) -> dict:
    from ..deck.markup import render_markup
    from ..deck.model import Run

    out = []
    colored = False
    for text in p["blocks"]:
        m = _ACRONYM.search(text) or _WORD.search(text)
        spans = []
        if m:
            spans.append((m.start(), m.end(), "bold"))
        if not colored:
            n = _NUMBER.search(text)
            if n and not (m and n.start() < m.end() and m.start() < n.end()):
                spans.append((n.start(), n.end(), "color"))
                colored = True
        runs, pos = [], 0
        for a, b, kind in sorted(spans):
            runs.append(Run(text[pos:a]))
            runs.append(Run(text[a:b], bold=kind == "bold", color=(0, 0, 0) if kind == "color" else None))
            pos = b
        runs.append(Run(text[pos:]))
        out.append(render_markup([r for r in runs if r.text]))
    return {"blocks": out}


# evaluation -----------------------------------------------------------------

def _quiz(p: dict) -> dict:
    sents = [s for s in sentences(p["paper"].replace("\n", " ")) if 8 <= len(s.split()) <= 40]
    vocab = sorted({w for s in sents for w in _WORD.findall(s)})
    items = []
    for i in range(25):
        s = sents[(i * 7) % len(sents)] if sents else f"Statement {i}"
        words = _WORD.findall(s) or ["statement"]
        target = words[len(words) // 2]
        blanked = s.replace(target, "____", 1)
        others = [w for w in vocab if w.lower() != target.lower()]
        distract = [others[(i * 13 + k * 31) % len(others)] if others else f"option{k}" for k in range(3)]
        slot = i % 4
        opts = distract[:slot] + [target] + distract[slot:]
        items.append({
            "question": f"[{p['quiz_type']}] Fill the blank: {blanked}",
            "options": dict(zip("ABCD", opts)),
            "correct": "ABCD"[slot],
        })
    return {"items": items}


def _quiz_answers(p: dict) -> dict:
    evidence = " ".join(s["text"] for s in p.get("slides", [])).lower()
    answers = []
    for q in p["questions"]:
        stem = q["question"].split(": ", 1)[-1]
        label = "E"
        if evidence:
            for lab in "ABCD":
                filled = stem.replace("____", q["options"][lab]).lower()
                if filled[:60] in evidence:
                    label = lab
                    break
        answers.append({"index": q["index"], "answer": label})
    return {"answers": answers}


def _rubric(p: dict) -> dict:
    texts = [s["text"] for s in p["slides"]]
    n = len(texts)
    lengths = [len(t) for t in texts] or [0]
    checks = [
        n >= 3,
        all(0 < x <= 900 for x in lengths),
        any(re.search(r"\[\d+\]", t) for t in texts),
        any(_NUMBER.search(t) for t in texts),
        len({t.split("\n", 1)[0] for t in texts}) == n,
        max(lengths) <= 3 * (sum(lengths) / max(n, 1)) + 1,
        n <= 40,
        any("conclu" in t.lower() or "summary" in t.lower() for t in texts),
        sum(lengths) >= 200,
        p["dimension"] in ("TQ", "NF"),
    ]
    return {"satisfied": checks, "notes": "heuristic offline grading"}


def _pairwise(p: dict) -> dict:
    from ..evalharness.metrics import rouge_l

    def score(pres: list) -> float:
        text = " ".join(s["text"] for s in pres)
        return rouge_l(text, p["paper"]).recall if p["paper"] else float(len(text))

    return {"winner": "1" if score(p["presentation_1"]) >= score(p["presentation_2"]) else "2",
            "rationale": "higher coverage of the source"}


_HANDLERS: dict[tuple[AgentName, str], Callable[[dict], dict]] = {
    (AgentName.DISCOURSE_PARSER, "discourse_tree"): _discourse,
    (AgentName.COMMITMENT_BUILDER, "commitment"): _commitment,
    (AgentName.SLIDE_PLANNER, "slide_outline"): _planner,
    (AgentName.NARRATIVE_CRITIC, "critique"): _critic,
    (AgentName.NARRATIVE_JUDGE, "verdict"): _judge,
    (AgentName.REVISER, "slide_outline"): _reviser,
    (AgentName.DECK_CONSTRUCTOR, "slide_text"): _slide_text,
    (AgentName.DECK_CONSTRUCTOR, "asset_matches"): _asset_matches,
    (AgentName.AESTHETICS_REFINER, "figure_additions"): _figure_additions,
    (AgentName.AESTHETICS_REFINER, "content_revision"): _content_revision,
    (AgentName.AESTHETICS_REFINER, "emphasis"): _emphasis,
    (AgentName.QUIZ_GENERATOR, "quiz"): _quiz,
    (AgentName.QUIZ_TAKER, "quiz_answers"): _quiz_answers,
    (AgentName.JUDGE_SCORER, "rubric"): _rubric,
    (AgentName.PAIRWISE_JUDGE, "pairwise"): _pairwise,
}


def offline_responder(request: AgentRequest) -> str:
    handler = _HANDLERS[(request.agent, request.schema_id)]
    return json.dumps(handler(_payload(request)), ensure_ascii=False, sort_keys=True)


def offline_transport() -> ScriptedTransport:
    return ScriptedTransport(offline_responder)
