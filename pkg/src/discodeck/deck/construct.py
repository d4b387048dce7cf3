"""Outline to draft SlidePlan: asset matching, slide text, body mode, footnotes, layout."""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from ..commitment import GlobalCommitment, RenderTarget, sentences
from ..errors import Overflow, SchemaFailure
from ..gateway import AgentName, AgentRequest
from ..ingest import Asset, AssetKind, DocumentBundle
from ..outline import OutlineSlide, SlideOutline
from .layouts import LayoutCatalog, default_catalog, select_layout
from .model import BodyMode, Slide, SlidePlan, SlideVisual, TextBlock

logger = logging.getLogger(__name__)

MATCH_THRESHOLD = 0.25
DETERMINISTIC_MAX_PER_SLIDE = 2
BULLET_MIN_UNITS = 3
BULLET_MAX_WORDS = 25
DRAFT_TARGET_CHARS = 450

_WORD_RE = re.compile(r"\w+")
_CITE_RE = re.compile(r"\[(\s*\d+\s*(?:[,;]\s*\d+\s*)*)\]")
_STOPWORDS = frozenset(
    """a an and are as at be by for from has have in into is it its of on or our over that the their
    this to under use used using via was we were which with between than these those each both per""".split()
)


def content_words(text: str) -> set[str]:
    return {w for w in _WORD_RE.findall(text.lower()) if len(w) >= 3 and w not in _STOPWORDS}


def overlap_score(slide_text: str, caption: str) -> float:
    """Share of the caption's content words that also occur in the slide text."""
    cap = content_words(caption)
    if not cap:
        return 0.0
    return len(cap & content_words(slide_text)) / len(cap)


def natural_key(asset_id: str) -> tuple[Any, ...]:
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", asset_id))


@dataclass(frozen=True)
class AssetMatch:
    asset_ids: tuple[str, ...]
    reasoning: str = ""


def slide_source_text(slide: OutlineSlide, bundle: DocumentBundle) -> str:
    texts = bundle.paragraph_index()
    return " ".join([slide.slide_title, *(texts[p].text for p in slide.paragraph_ids if p in texts)])


def _match_deterministic(outline: SlideOutline, bundle: DocumentBundle) -> dict[int, AssetMatch]:
    scored = []
    for s in outline.slides:
        text = slide_source_text(s, bundle)
        for a in bundle.assets.values():
            score = overlap_score(text, a.caption)
            if score >= MATCH_THRESHOLD:
                scored.append((-score, s.slide_number, natural_key(a.id), a.id))
    chosen: dict[int, list[tuple[str, float]]] = {s.slide_number: [] for s in outline.slides}
    used: set[str] = set()
    for neg, number, _, aid in sorted(scored):
        if aid in used or len(chosen[number]) >= DETERMINISTIC_MAX_PER_SLIDE:
            continue
        chosen[number].append((aid, -neg))
        used.add(aid)
    return {
        n: AssetMatch(tuple(a for a, _ in picks), "; ".join(f"{a} overlap {s:.2f}" for a, s in picks))
        for n, picks in chosen.items()
    }


def match_assets(
    outline: SlideOutline,
    bundle: DocumentBundle,
    gateway: Any | None = None,
    catalog: LayoutCatalog | None = None,
    commitment: GlobalCommitment | None = None,
) -> dict[int, AssetMatch]:
    """Slide number to matched asset ids; ``gateway=None`` selects the overlap rule."""
    if gateway is None or not bundle.assets:
        return _match_deterministic(outline, bundle)
    cap = (catalog or default_catalog()).max_visuals
    payload = {
        "slides": [
            {"slide_number": s.slide_number, "title": s.slide_title, "text": slide_source_text(s, bundle)}
            for s in outline.slides
        ],
        "assets": [
            {"id": a.id, "kind": a.kind.value, "caption": a.caption, "width_px": a.width_px, "height_px": a.height_px}
            for a in bundle.assets.values()
        ],
    }
    if commitment is not None:
        payload["commitment"] = commitment.to_markdown()
    try:
        out = gateway.call(AgentRequest.build(AgentName.DECK_CONSTRUCTOR, payload, "asset_matches"))
    except SchemaFailure as exc:
        gateway.warn(f"asset matching fell back to caption overlap: {exc}")
        return _match_deterministic(outline, bundle)

    result = {s.slide_number: AssetMatch(()) for s in outline.slides}
    used: set[str] = set()
    for m in out["matches"]:
        number = m["slide_number"]
        if number not in result:
            gateway.warn(f"asset match for unknown slide {number} dropped")
            continue
        ids = list(result[number].asset_ids)
        for aid in m["asset_ids"]:
            if aid not in bundle.assets:
                gateway.warn(f"unknown asset id {aid!r} proposed for slide {number} dropped")
            elif aid in used:
                gateway.warn(f"asset {aid} already placed; dropped from slide {number}")
            elif len(ids) >= cap:
                gateway.warn(f"slide {number} already holds {cap} visuals; {aid} dropped")
            else:
                ids.append(aid)
                used.add(aid)
        result[number] = AssetMatch(tuple(ids), m.get("reasoning", ""))
    return result


def body_mode_for(texts: Sequence[str]) -> tuple[BodyMode, list[str]]:
    """Density rule; returns the mode and the sentence-like units of the text."""
    units = [u for t in texts for u in sentences(t)]
    if len(units) >= BULLET_MIN_UNITS and all(len(u.split()) <= BULLET_MAX_WORDS for u in units):
        return BodyMode.BULLETS, units
    return BodyMode.PARAGRAPH, units


def cited_keys(text: str) -> list[str]:
    keys: list[str] = []
    for m in _CITE_RE.finditer(text):
        for part in re.split(r"[,;]", m.group(1)):
            key = f"[{int(part.strip())}]"
            if key not in keys:
                keys.append(key)
    return keys


def footnotes_for(text: str, listed: Sequence[str], citations: Mapping[str, Any]) -> tuple[str, ...]:
    """Keys mentioned in the text or listed by the agent, kept only if they resolve."""
    keys = cited_keys(text)
    for k in listed:
        k = k.strip()
        if k in citations and k not in keys:
            keys.append(k)
    return tuple(k for k in keys if k in citations)


def shorten(text: str, limit: int) -> str:
    """Cut at a word boundary so that the result, ellipsis included, fits ``limit``."""
    if len(text) <= limit:
        return text
    if limit <= 3:
        return text[:limit]
    cut = text[: limit - 3]
    if " " in cut:
        cut = cut[: cut.rfind(" ")]
    return cut.rstrip(" ,;:") + "..."


def condense_blocks(blocks: Sequence[TextBlock], limit: int) -> tuple[TextBlock, ...]:
    """Drop trailing blocks, then shorten the last one, until the text fits ``limit``."""
    kept: list[TextBlock] = []
    total = 0
    for b in blocks:
        n = len(b.text)
        if total + n <= limit:
            kept.append(b)
            total += n
            continue
        room = limit - total
        if room >= 40 or not kept:
            text = shorten(b.text, max(room, 1))
            if text:
                kept.append(TextBlock.plain(text, b.indent_level))
        break
    return tuple(kept)


def draft_text(paragraphs: Sequence[str], limit: int) -> list[str]:
    """Pick sentences round-robin across paragraphs (leading sentences first) up to ``limit``."""
    per_par = [sentences(p) for p in paragraphs]
    picked: set[tuple[int, int]] = set()
    total = 0
    depth = max((len(s) for s in per_par), default=0)
    for j in range(depth):
        for i, sents in enumerate(per_par):
            if j < len(sents) and total + len(sents[j]) <= limit:
                picked.add((i, j))
                total += len(sents[j])
    if not picked and per_par and per_par[0]:
        return [shorten(per_par[0][0], limit)]
    return [per_par[i][j] for i, j in sorted(picked)]


def _place_visuals(layout_id: int, assets: Sequence[Asset], catalog: LayoutCatalog) -> tuple[SlideVisual, ...]:
    """Tables prefer table zones, figures prefer figure zones; leftovers take any free zone."""
    layout = catalog[layout_id]
    n_fig = len(layout.figure_zones)
    free_fig = list(range(n_fig))
    free_tab = list(range(n_fig, n_fig + len(layout.table_zones)))
    placed: list[SlideVisual] = []
    pending: list[Asset] = []
    for a in assets:
        pool = free_tab if a.kind is AssetKind.TABLE else free_fig
        if pool:
            placed.append(SlideVisual(a.id, pool.pop(0)))
        else:
            pending.append(a)
    rest = sorted(free_fig + free_tab)
    for a in pending:
        placed.append(SlideVisual(a.id, rest.pop(0)))
    order = {a.id: i for i, a in enumerate(assets)}
    return tuple(sorted(placed, key=lambda v: order[v.asset_id]))


def fit_slide(
    slide: Slide,
    bundle: DocumentBundle,
    catalog: LayoutCatalog | None = None,
) -> Slide:
    """Choose a layout for the slide's text and visuals, condensing text on overflow."""
    catalog = catalog or default_catalog()
    assets = [bundle.assets[a] for a in slide.asset_ids]
    blocks = slide.blocks
    try:
        layout_id = select_layout(sum(len(b.text) for b in blocks), assets, catalog)
    except Overflow:
        blocks = condense_blocks(blocks, catalog.capacity_for(len(assets)))
        layout_id = select_layout(sum(len(b.text) for b in blocks), assets, catalog)
    return Slide(
        title=slide.title,
        layout_id=layout_id,
        blocks=blocks,
        visuals=_place_visuals(layout_id, assets, catalog),
        footnotes=slide.footnotes,
        body_mode=slide.body_mode,
        section_index=slide.section_index,
        paragraph_ids=slide.paragraph_ids,
    )


def _blocks_for_mode(texts: Sequence[tuple[str, int]]) -> tuple[BodyMode, list[TextBlock]]:
    mode, units = body_mode_for([t for t, _ in texts])
    if mode is BodyMode.BULLETS:
        blocks = []
        for text, level in texts:
            blocks += [TextBlock.plain(u, level) for u in sentences(text)]
        return mode, blocks
    return mode, [TextBlock.plain(t, lvl) for t, lvl in texts if t.strip()]


def _slide_payload(
    s: OutlineSlide, commitment: GlobalCommitment, bundle: DocumentBundle, assets: Sequence[Asset]
) -> dict[str, Any]:
    texts = bundle.paragraph_index()
    return {
        "commitment": commitment.to_json(),
        "slide": {
            "slide_number": s.slide_number,
            "section_title": s.section_title,
            "title": s.slide_title,
            "paragraphs": [texts[p].text for p in s.paragraph_ids if p in texts],
        },
        "visuals": [{"id": a.id, "kind": a.kind.value, "caption": a.caption} for a in assets],
        "citation_keys": sorted(bundle.citations, key=natural_key),
    }


def build_slide(
    s: OutlineSlide,
    match: AssetMatch,
    commitment: GlobalCommitment,
    bundle: DocumentBundle,
    gateway: Any | None,
    catalog: LayoutCatalog | None = None,
) -> Slide:
    catalog = catalog or default_catalog()
    assets = [bundle.assets[a] for a in match.asset_ids]
    limit = min(DRAFT_TARGET_CHARS, catalog.capacity_for(len(assets)))
    texts = bundle.paragraph_index()
    paragraphs = [texts[p].text for p in s.paragraph_ids if p in texts]
    title, pairs, listed = s.slide_title, [(t, 0) for t in draft_text(paragraphs, limit)], []

    if gateway is not None:
        def check(out: Any) -> list[str]:
            return [] if any(b["text"].strip() for b in out["blocks"]) else ["all blocks are empty"]

        try:
            out = gateway.call(
                AgentRequest.build(AgentName.DECK_CONSTRUCTOR, _slide_payload(s, commitment, bundle, assets),
                                   "slide_text"),
                check,
            )
            title = out["title"].strip()
            pairs = [(b["text"].strip(), int(b.get("level", 0))) for b in out["blocks"] if b["text"].strip()]
            listed = out.get("citations", [])
        except SchemaFailure as exc:
            gateway.warn(f"slide {s.slide_number}: text drafted from source sentences ({exc})")

    mode, blocks = _blocks_for_mode(pairs)
    body = "\n".join(b.text for b in blocks)
    draft = Slide(
        title=title,
        layout_id=1,
        blocks=tuple(blocks),
        visuals=tuple(SlideVisual(a.id, i) for i, a in enumerate(assets)),
        footnotes=footnotes_for(body, listed, bundle.citations),
        body_mode=mode,
        section_index=s.section_index,
        paragraph_ids=s.paragraph_ids,
    )
    return fit_slide(draft, bundle, catalog)


def construct_deck(
    outline: SlideOutline,
    matches: Mapping[int, AssetMatch],
    commitment: GlobalCommitment,
    bundle: DocumentBundle,
    gateway: Any | None,
    render_target: RenderTarget = RenderTarget.PPTX,
    catalog: LayoutCatalog | None = None,
    max_in_flight: int = 4,
) -> SlidePlan:
    """Draft plan with one slide per outline slide, generated concurrently."""
    empty = AssetMatch(())

    def one(s: OutlineSlide) -> Slide:
        return build_slide(s, matches.get(s.slide_number, empty), commitment, bundle, gateway, catalog)

    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        slides = list(pool.map(one, outline.slides))
    return SlidePlan(bundle.title, tuple(slides), None, render_target)
