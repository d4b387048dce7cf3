"""Serialize a SlidePlan to .pptx, standalone HTML or Beamer source."""

from __future__ import annotations

from pathlib import Path

from ..commitment import RenderTarget
from ..deck.model import SlidePlan
from ..ingest import DocumentBundle
from .beamer import beamer_text, latex_escape, render_beamer
from .common import DEFAULT_HEIGHT_EMU, DEFAULT_WIDTH_EMU, EMU_PER_INCH, RenderConfig, RenderReport
from .html import html_text, render_html
from .pptx import render_pptx

SUFFIX = {RenderTarget.PPTX: ".pptx", RenderTarget.HTML: ".html", RenderTarget.BEAMER: ".tex"}


def render(
    plan: SlidePlan,
    target: RenderTarget | str,
    out: str | Path,
    cfg: RenderConfig | None = None,
    bundle: DocumentBundle | None = None,
) -> RenderReport:
    target = RenderTarget(target)
    if target is RenderTarget.PPTX:
        return render_pptx(plan, cfg, out, bundle)
    if target is RenderTarget.HTML:
        return render_html(plan, cfg, out, bundle)
    return render_beamer(plan, cfg, out, bundle)


__all__ = [
    "DEFAULT_HEIGHT_EMU",
    "DEFAULT_WIDTH_EMU",
    "EMU_PER_INCH",
    "RenderConfig",
    "RenderReport",
    "SUFFIX",
    "beamer_text",
    "html_text",
    "latex_escape",
    "render",
    "render_beamer",
    "render_html",
    "render_pptx",
]
