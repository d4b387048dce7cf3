"""The four refinement passes over a draft plan, plus plan validation."""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Any, Sequence

from ..commitment import GlobalCommitment, sentences
from ..errors import Overflow, SchemaFailure
from ..gateway import AgentName, AgentRequest
from ..ingest import AssetKind, DocumentBundle
from .construct import (
    MATCH_THRESHOLD,
    body_mode_for,
    condense_blocks,
    fit_slide,
    natural_key,
    overlap_score,
)
from .layouts import LayoutCatalog, default_catalog, select_layout
from .markup import parse_markup
from .model import RGB, Run, Slide, SlidePlan, SlideVisual, TextBlock, ThemeColor, ThemeProvenance
from .theme import extract_theme_color

logger = logging.getLogger(__name__)

SPARSE_CHARS = 120
MERGE_CHARS = 150
ENRICH_MIN_BLOCKS = 3


def _warn(gateway: Any | None, message: str, sink: list[str]) -> None:
    sink.append(message)
    if gateway is not None:
        gateway.warn(message)
    else:
        logger.warning(message)


def _source_text(slide: Slide, bundle: DocumentBundle) -> str:
    texts = bundle.paragraph_index()
    return " ".join([slide.title, slide.text, *(texts[p].text for p in slide.paragraph_ids if p in texts)])


def _admits(slide: Slide, asset_id: str, bundle: DocumentBundle, catalog: LayoutCatalog) -> bool:
    assets = [bundle.assets[a] for a in slide.asset_ids] + [bundle.assets[asset_id]]
    try:
        select_layout(slide.chars, assets, catalog)
    except (Overflow, ValueError):
        return False
    return True


def _with_visual(slide: Slide, asset_id: str, bundle: DocumentBundle, catalog: LayoutCatalog) -> Slide:
    visuals = slide.visuals + (SlideVisual(asset_id, len(slide.visuals)),)
    return fit_slide(replace(slide, visuals=visuals), bundle, catalog)


def refine_figures(
    plan: SlidePlan,
    bundle: DocumentBundle,
    gateway: Any | None = None,
    catalog: LayoutCatalog | None = None,
    commitment: GlobalCommitment | None = None,
) -> SlidePlan:
    """Give visual-free slides an unused asset whose caption clearly fits, when the layout allows."""
    catalog = catalog or default_catalog()
    used = {a for s in plan.slides for a in s.asset_ids}
    unused = sorted((a for a in bundle.assets if a not in used), key=natural_key)
    bare = [i for i, s in enumerate(plan.slides) if not s.visuals]
    if not unused or not bare:
        return plan
    slides = list(plan.slides)
    warnings: list[str] = list(plan.warnings)

    if gateway is not None:
        payload = {
            "slides": [{"slide_number": i + 1, "title": slides[i].title, "text": slides[i].text} for i in bare],
            "assets": [
                {"id": a, "kind": bundle.assets[a].kind.value, "caption": bundle.assets[a].caption} for a in unused
            ],
        }
        if commitment is not None:
            payload["commitment"] = commitment.to_markdown()
        try:
            out = gateway.call(AgentRequest.build(AgentName.AESTHETICS_REFINER, payload, "figure_additions"))
        except SchemaFailure as exc:
            _warn(gateway, f"figure review fell back to caption overlap: {exc}", warnings)
        else:
            for add in out["additions"]:
                i, aid = add["slide_number"] - 1, add["asset_id"]
                if i not in bare or slides[i].visuals:
                    _warn(gateway, f"figure addition for slide {i + 1} ignored: slide not eligible", warnings)
                elif aid not in bundle.assets or aid in used:
                    _warn(gateway, f"figure addition {aid!r} ignored: unknown or already used", warnings)
                elif not _admits(slides[i], aid, bundle, catalog):
                    _warn(gateway, f"figure addition {aid} does not fit slide {i + 1}", warnings)
                else:
                    slides[i] = _with_visual(slides[i], aid, bundle, catalog)
                    used.add(aid)
            return replace(plan, slides=tuple(slides), warnings=tuple(warnings))

    for i in bare:
        text = _source_text(slides[i], bundle)
        best: tuple[float, tuple[Any, ...], str] | None = None
        for aid in bundle.assets:
            if aid in used:
                continue
            score = overlap_score(text, bundle.assets[aid].caption)
            if score < MATCH_THRESHOLD or not _admits(slides[i], aid, bundle, catalog):
                continue
            key = (-score, natural_key(aid), aid)
            if best is None or key < best:
                best = key
        if best is not None:
            slides[i] = _with_visual(slides[i], best[2], bundle, catalog)
            used.add(best[2])
    return replace(plan, slides=tuple(slides), warnings=tuple(warnings))


def _merge_pair(a: Slide, b: Slide) -> Slide:
    blocks = a.blocks + b.blocks
    mode, _ = body_mode_for([blk.text for blk in blocks])
    footnotes = a.footnotes + tuple(k for k in b.footnotes if k not in a.footnotes)
    visuals = tuple(SlideVisual(v.asset_id, i) for i, v in enumerate(a.visuals + b.visuals))
    return replace(a, blocks=blocks, visuals=visuals, footnotes=footnotes, body_mode=mode,
                   paragraph_ids=a.paragraph_ids + b.paragraph_ids)


def _can_merge(a: Slide, b: Slide, bundle: DocumentBundle, catalog: LayoutCatalog) -> bool:
    if a.section_index != b.section_index or a.chars + b.chars > MERGE_CHARS:
        return False
    assets = [bundle.assets[x] for x in a.asset_ids + b.asset_ids]
    try:
        select_layout(a.chars + b.chars, assets, catalog)
    except (Overflow, ValueError):
        return False
    return True


def merge_underfilled(slides: Sequence[Slide], bundle: DocumentBundle, catalog: LayoutCatalog) -> list[Slide]:
    """Merge adjacent same-section slides whose combined text stays within the merge threshold."""
    out = list(slides)
    changed = True
    while changed:
        changed = False
        for i in range(len(out) - 1):
            if _can_merge(out[i], out[i + 1], bundle, catalog):
                out[i : i + 2] = [_merge_pair(out[i], out[i + 1])]
                changed = True
                break
    return out


def _enrich_deterministic(slide: Slide, bundle: DocumentBundle, limit: int) -> Slide:
    texts = bundle.paragraph_index()
    present = slide.text
    blocks = list(slide.blocks)
    total = slide.chars
    for pid in slide.paragraph_ids:
        if pid not in texts:
            continue
        for sent in sentences(texts[pid].text):
            if total >= SPARSE_CHARS and len(blocks) >= ENRICH_MIN_BLOCKS:
                break
            if sent in present or total + len(sent) > limit:
                continue
            blocks.append(TextBlock.plain(sent))
            total += len(sent)
    if len(blocks) == len(slide.blocks):
        return slide
    mode, _ = body_mode_for([b.text for b in blocks])
    return replace(slide, blocks=tuple(blocks), body_mode=mode)


def _revise_blocks(
    slide: Slide, action: str, limit: int, bundle: DocumentBundle, gateway: Any,
    commitment: GlobalCommitment | None = None,
) -> tuple[TextBlock, ...] | None:
    texts = bundle.paragraph_index()
    payload = {
        "action": action,
        "limits": {"min_chars": SPARSE_CHARS if action == "enrich" else 0, "max_chars": limit},
        "slide": {
            "title": slide.title,
            "blocks": [{"text": b.text, "level": b.indent_level} for b in slide.blocks],
            "source_paragraphs": [texts[p].text for p in slide.paragraph_ids if p in texts],
        },
    }
    if commitment is not None:
        payload["commitment"] = commitment.to_markdown()

    def check(out: Any) -> list[str]:
        n = sum(len(b["text"].strip()) for b in out["blocks"])
        errors = [] if n <= limit else [f"text has {n} characters, limit is {limit}"]
        if not any(b["text"].strip() for b in out["blocks"]):
            errors.append("all blocks are empty")
        return errors

    try:
        out = gateway.call(AgentRequest.build(AgentName.AESTHETICS_REFINER, payload, "content_revision"), check)
    except SchemaFailure as exc:
        gateway.warn(f"content {action} for '{slide.title}' kept deterministic: {exc}")
        return None
    return tuple(TextBlock.plain(b["text"].strip(), int(b.get("level", 0))) for b in out["blocks"] if b["text"].strip())


def refine_content(
    plan: SlidePlan,
    bundle: DocumentBundle,
    gateway: Any | None = None,
    catalog: LayoutCatalog | None = None,
    commitment: GlobalCommitment | None = None,
) -> SlidePlan:
    """Merge underfilled neighbours, enrich sparse slides, condense heavy ones, refit layouts.

    The slide count never grows, and every returned slide fits its layout.
    """
    catalog = catalog or default_catalog()
    slides = merge_underfilled(plan.slides, bundle, catalog)
    out: list[Slide] = []
    for s in slides:
        limit = catalog.capacity_for(len(s.visuals))
        if s.chars < SPARSE_CHARS and s.paragraph_ids:
            blocks = _revise_blocks(s, "enrich", limit, bundle, gateway, commitment) if gateway is not None else None
            if blocks:
                mode, _ = body_mode_for([b.text for b in blocks])
                s = replace(s, blocks=blocks, body_mode=mode)
            else:
                s = _enrich_deterministic(s, bundle, limit)
        elif s.chars > limit:
            blocks = _revise_blocks(s, "condense", limit, bundle, gateway, commitment) if gateway is not None else None
            s = replace(s, blocks=blocks or condense_blocks(s.blocks, limit))
        out.append(fit_slide(s, bundle, catalog))
    return replace(plan, slides=tuple(out))


def figure_images(plan: SlidePlan, bundle: DocumentBundle) -> list[str]:
    """Media of the figures placed in the deck, in slide order, each once."""
    seen: list[str] = []
    for s in plan.slides:
        for aid in s.asset_ids:
            a = bundle.assets.get(aid)
            if a and a.kind is AssetKind.FIGURE and a.media_path and a.media_path not in seen:
                seen.append(a.media_path)
    return seen


def _recolor(slide: Slide, rgb: RGB) -> Slide:
    blocks = tuple(
        TextBlock(tuple(Run(r.text, r.bold, rgb if r.color is not None else None) for r in b.runs), b.indent_level)
        for b in slide.blocks
    )
    return replace(slide, blocks=blocks)


def apply_theme(plan: SlidePlan, bundle: DocumentBundle, override: RGB | None = None) -> SlidePlan:
    """Set the theme color (override, else extracted from figures) and recolor colored runs."""
    if override is not None:
        theme = ThemeColor(override, ThemeProvenance.OVERRIDE)
    else:
        theme = extract_theme_color(figure_images(plan, bundle))
    return replace(plan, theme=theme, slides=tuple(_recolor(s, theme.rgb) for s in plan.slides))


def apply_emphasis_markup(
    plan: SlidePlan, gateway: Any | None, commitment: GlobalCommitment | None = None
) -> SlidePlan:
    """Ask for bold and theme-color markup per slide; keep the original text on any mismatch."""
    if gateway is None:
        return plan
    theme = plan.theme_rgb
    slides = list(plan.slides)
    warnings = list(plan.warnings)
    for i, s in enumerate(slides):
        if not s.blocks:
            continue
        payload = {"slide_number": i + 1, "title": s.title, "blocks": [b.text for b in s.blocks]}
        if commitment is not None:
            payload["commitment"] = commitment.to_markdown()
        try:
            out = gateway.call(AgentRequest.build(AgentName.AESTHETICS_REFINER, payload, "emphasis"))
        except SchemaFailure as exc:
            _warn(gateway, f"slide {i + 1}: emphasis skipped ({exc})", warnings)
            continue
        marked = out["blocks"]
        if len(marked) != len(s.blocks):
            _warn(gateway, f"slide {i + 1}: emphasis returned {len(marked)} blocks for {len(s.blocks)}", warnings)
            continue
        blocks = []
        for b, text in zip(s.blocks, marked):
            runs, ok = parse_markup(text, theme)
            if not ok or "".join(r.text for r in runs) != b.text or not runs:
                if ok:
                    _warn(gateway, f"slide {i + 1}: emphasis altered the text; block kept plain", warnings)
                else:
                    warnings.append(f"slide {i + 1}: malformed emphasis markup; block kept plain")
                blocks.append(b)
            else:
                blocks.append(TextBlock(tuple(runs), b.indent_level))
        slides[i] = replace(s, blocks=tuple(blocks))
    return replace(plan, slides=tuple(slides), warnings=tuple(warnings))


def validate_plan(
    plan: SlidePlan,
    bundle: DocumentBundle,
    catalog: LayoutCatalog | None = None,
    require_theme: bool = True,
) -> list[str]:
    catalog = catalog or default_catalog()
    errors = []
    if require_theme and plan.theme is None:
        errors.append("plan has no theme color")
    used: set[str] = set()
    for n, s in enumerate(plan.slides, start=1):
        where = f"slide {n}"
        if s.layout_id not in catalog.layouts:
            errors.append(f"{where}: unknown layout {s.layout_id}")
            continue
        layout = catalog[s.layout_id]
        if s.chars > layout.max_chars:
            errors.append(f"{where}: {s.chars} chars exceed layout {layout.id} capacity {layout.max_chars}")
        if len(s.visuals) > layout.max_visuals:
            errors.append(f"{where}: {len(s.visuals)} visuals exceed layout {layout.id} capacity")
        zones = [v.zone_index for v in s.visuals]
        if len(set(zones)) != len(zones) or any(not 0 <= z < layout.max_visuals for z in zones):
            errors.append(f"{where}: invalid zone indices {zones} for layout {layout.id}")
        for v in s.visuals:
            if v.asset_id not in bundle.assets:
                errors.append(f"{where}: unknown asset {v.asset_id}")
            elif v.asset_id in used:
                errors.append(f"{where}: asset {v.asset_id} used twice")
            used.add(v.asset_id)
        for k in s.footnotes:
            if k not in bundle.citations:
                errors.append(f"{where}: footnote {k} not in the citation map")
    return errors
