"""Standalone HTML deck: one section per slide, inline styles, no scripts."""

from __future__ import annotations

import html
from pathlib import Path

from ..deck.layouts import LayoutCatalog, default_catalog
from ..deck.model import BodyMode, Run, Slide, SlidePlan, TextBlock, rgb_to_hex
from ..ingest import AssetKind, DocumentBundle
from .common import (
    RenderConfig,
    RenderReport,
    assets_of,
    citations_of,
    footnote_text,
    relative_media_path,
    sha256_file,
    split_blocks,
)

_PAGE_STYLE = (
    "body{margin:0;background:#d9d9d9;font-family:%s,Arial,sans-serif;}"
    "section.slide{position:relative;width:960px;height:540px;margin:24px auto;background:#fff;"
    "box-shadow:0 1px 4px rgba(0,0,0,.3);overflow:hidden;page-break-after:always;}"
    ".zone{position:absolute;box-sizing:border-box;overflow:hidden;}"
    ".zone img{width:100%%;height:100%%;object-fit:contain;}"
    "table{border-collapse:collapse;font-size:12px;}td{border:1px solid #bfbfbf;padding:2px 4px;}"
)


def _pct(rect) -> str:
    x, y, w, h = rect
    return f"left:{x * 100:.2f}%;top:{y * 100:.2f}%;width:{w * 100:.2f}%;height:{h * 100:.2f}%;"


def _run(run: Run) -> str:
    text = html.escape(run.text, quote=False)
    if run.color is not None:
        text = f'<span style="color:#{rgb_to_hex(run.color)}">{text}</span>'
    if run.bold:
        text = f"<strong>{text}</strong>"
    return text


def _blocks(blocks: list[TextBlock], mode: BodyMode) -> str:
    if mode is BodyMode.BULLETS:
        items = "".join(
            f'<li style="margin-left:{b.indent_level * 1.5}em">{"".join(_run(r) for r in b.runs)}</li>' for b in blocks
        )
        return f"<ul>{items}</ul>"
    return "".join(
        f'<p style="margin-left:{b.indent_level * 1.5}em">{"".join(_run(r) for r in b.runs)}</p>' for b in blocks
    )


def _slide(n: int, slide: Slide, plan: SlidePlan, cfg: RenderConfig, bundle, catalog, out_dir: Path,
           report: RenderReport) -> str:
    layout = catalog[slide.layout_id]
    theme = rgb_to_hex(plan.theme_rgb)
    assets, citations = assets_of(bundle), citations_of(bundle)
    parts = [
        f'<div class="zone" style="{_pct(catalog.title_zone)}display:flex;align-items:flex-end;">'
        f'<h2 style="margin:0;color:#{theme};font-size:{cfg.title_font_pt}px">{html.escape(slide.title, quote=False)}</h2></div>'
    ]
    for zone, blocks in zip(layout.text_zones, split_blocks(slide.blocks, len(layout.text_zones))):
        parts.append(
            f'<div class="zone" style="{_pct(zone)}font-size:{cfg.base_font_pt}px">{_blocks(blocks, slide.body_mode)}</div>'
        )
    zones = layout.visual_zones
    for v in slide.visuals:
        style = _pct(zones[v.zone_index])
        asset = assets.get(v.asset_id)
        if asset is not None and asset.media_path:
            src = html.escape(relative_media_path(asset.media_path, out_dir))
            parts.append(f'<figure class="zone" style="{style}margin:0"><img src="{src}" alt="{html.escape(asset.caption)}"></figure>')
            report.media_embedded += 1
        elif asset is not None and asset.kind is AssetKind.TABLE and asset.cells:
            rows = "".join(
                "<tr>" + "".join(f"<td>{html.escape(c, quote=False)}</td>" for c in row) + "</tr>" for row in asset.cells
            )
            parts.append(f'<div class="zone" style="{style}"><table>{rows}</table></div>')
        else:
            report.placeholders.append(v.asset_id)
            parts.append(f'<div class="zone" style="{style}background:#e7e6e6">[{html.escape(v.asset_id)}]</div>')
    if slide.footnotes:
        notes = "".join(f"<div>{html.escape(footnote_text(k, citations), quote=False)}</div>" for k in slide.footnotes)
        parts.append(
            f'<footer class="zone" style="{_pct(catalog.footnote_zone)}font-size:{cfg.footnote_font_pt}px;'
            f'display:flex;flex-direction:column;justify-content:flex-end">{notes}</footer>'
        )
    return f'<section class="slide" id="slide-{n}" data-layout="{slide.layout_id}">{"".join(parts)}</section>\n'


def html_text(
    plan: SlidePlan,
    cfg: RenderConfig | None = None,
    bundle: DocumentBundle | None = None,
    out_dir: Path = Path("."),
    catalog: LayoutCatalog | None = None,
    report: RenderReport | None = None,
) -> str:
    cfg = cfg or RenderConfig()
    catalog = catalog or default_catalog()
    report = report or RenderReport("html", "", len(plan.slides))
    body = "".join(_slide(i, s, plan, cfg, bundle, catalog, out_dir, report) for i, s in enumerate(plan.slides, 1))
    title = html.escape(plan.deck_title, quote=False)
    return (
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
        f"<title>{title}</title>\n<style>{_PAGE_STYLE % cfg.font_family}</style>\n</head>\n"
        f'<body style="--theme:#{rgb_to_hex(plan.theme_rgb)}">\n{body}</body>\n</html>\n'
    )


def render_html(
    plan: SlidePlan,
    cfg: RenderConfig | None,
    out: str | Path,
    bundle: DocumentBundle | None = None,
    catalog: LayoutCatalog | None = None,
) -> RenderReport:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    report = RenderReport("html", str(out), len(plan.slides))
    out.write_bytes(html_text(plan, cfg, bundle, out.parent, catalog, report).encode("utf-8"))
    report.sha256 = sha256_file(out)
    return report
