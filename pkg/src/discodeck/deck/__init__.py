"""Deck construction: outline to a fully resolved, refined SlidePlan."""

from __future__ import annotations

import logging
from typing import Any

from ..commitment import GlobalCommitment, RenderTarget
from ..ingest import DocumentBundle
from ..outline import SlideOutline
from .construct import AssetMatch, body_mode_for, construct_deck, match_assets, select_layout
from .layouts import LayoutCatalog, LayoutTemplate, default_catalog, load_catalog, validate_catalog
from .markup import parse_markup, render_markup, strip_markup
from .model import (
    DEFAULT_ACCENT,
    RGB,
    BodyMode,
    Run,
    Slide,
    SlidePlan,
    SlideVisual,
    TextBlock,
    ThemeColor,
    ThemeProvenance,
    hex_to_rgb,
    rgb_to_hex,
)
from .refine import apply_emphasis_markup, apply_theme, refine_content, refine_figures, validate_plan
from .theme import extract_theme_color

logger = logging.getLogger(__name__)


def build_slide_plan(
    outline: SlideOutline,
    commitment: GlobalCommitment,
    bundle: DocumentBundle,
    gateway: Any | None,
    render_target: RenderTarget = RenderTarget.PPTX,
    theme_override: RGB | None = None,
    catalog: LayoutCatalog | None = None,
) -> SlidePlan:
    """Match assets, draft slides, then run figure, content, color and emphasis refinement."""
    catalog = catalog or default_catalog()
    matches = match_assets(outline, bundle, gateway, catalog, commitment)
    plan = construct_deck(outline, matches, commitment, bundle, gateway, render_target, catalog)
    plan = refine_figures(plan, bundle, gateway, catalog, commitment)
    plan = refine_content(plan, bundle, gateway, catalog, commitment)
    plan = apply_theme(plan, bundle, theme_override)
    plan = apply_emphasis_markup(plan, gateway, commitment)
    problems = validate_plan(plan, bundle, catalog)
    if problems:  # every pass refits layouts, so this only fires on a bug
        raise AssertionError("slide plan failed validation: " + "; ".join(problems))
    return plan


__all__ = [
    "DEFAULT_ACCENT",
    "AssetMatch",
    "BodyMode",
    "LayoutCatalog",
    "LayoutTemplate",
    "Run",
    "Slide",
    "SlidePlan",
    "SlideVisual",
    "TextBlock",
    "ThemeColor",
    "ThemeProvenance",
    "apply_emphasis_markup",
    "apply_theme",
    "body_mode_for",
    "build_slide_plan",
    "construct_deck",
    "default_catalog",
    "extract_theme_color",
    "hex_to_rgb",
    "load_catalog",
    "match_assets",
    "parse_markup",
    "refine_content",
    "refine_figures",
    "render_markup",
    "rgb_to_hex",
    "select_layout",
    "strip_markup",
    "validate_catalog",
    "validate_plan",
]
