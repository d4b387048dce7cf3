"""LaTeX Beamer source, one frame per slide."""

from __future__ import annotations

from pathlib import Path

from ..deck.model import BodyMode, Run, Slide, SlidePlan, TextBlock, rgb_to_hex
from ..ingest import AssetKind, DocumentBundle
from .common import RenderConfig, RenderReport, assets_of, citations_of, footnote_text, relative_media_path, sha256_file

_LATEX_SPECIAL = {
    "\\": r"\textbackslash{}",
    "&": r"\&",
    "%": r"\%",
    "$": r"\$",
    "#": r"\#",
    "_": r"\_",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
}


def latex_escape(text: str) -> str:
    return "".join(_LATEX_SPECIAL.get(c, c) for c in text)


def _run(run: Run) -> str:
    body = latex_escape(run.text)
    if run.color is not None:
        body = f"\\textcolor{{theme}}{{{body}}}"
    if run.bold:
        body = f"\\textbf{{{body}}}"
    return body


def _line(block: TextBlock) -> str:
    return "".join(_run(r) for r in block.runs)


def _bullets(blocks: tuple[TextBlock, ...]) -> list[str]:
    lines: list[str] = []
    depth = 0
    for b in blocks:
        target = b.indent_level + 1
        while depth < target:
            lines.append("  " * depth + "\\begin{itemize}")
            depth += 1
        while depth > target:
            depth -= 1
            lines.append("  " * depth + "\\end{itemize}")
        lines.append("  " * depth + f"\\item {_line(b)}")
    while depth:
        depth -= 1
        lines.append("  " * depth + "\\end{itemize}")
    return lines


def _frame(slide: Slide, bundle: DocumentBundle | None, out_dir: Path, report: RenderReport) -> list[str]:
    assets, citations = assets_of(bundle), citations_of(bundle)
    lines = [f"\\begin{{frame}}{{{latex_escape(slide.title)}}}"]
    text: list[str] = []
    if slide.body_mode is BodyMode.BULLETS and slide.blocks:
        text = _bullets(slide.blocks)
    else:
        for b in slide.blocks:
            text += [_line(b), ""]
    visuals: list[str] = []
    n = max(1, len(slide.visuals))
    for v in slide.visuals:
        asset = assets.get(v.asset_id)
        if asset is not None and asset.media_path:
            path = relative_media_path(asset.media_path, out_dir)
            visuals.append(
                f"\\includegraphics[width={0.95 / n:.2f}\\linewidth,height=0.45\\textheight,keepaspectratio]"
                f"{{{path}}}"
            )
            report.media_embedded += 1
        elif asset is not None and asset.kind is AssetKind.TABLE and asset.cells:
            cols = max(len(r) for r in asset.cells)
            rows = [" & ".join(latex_escape(c) for c in r) + " \\\\" for r in asset.cells]
            visuals.append("{\\tiny\\begin{tabular}{" + "l" * cols + "}\n" + "\n".join(rows) + "\n\\end{tabular}}")
        else:
            report.placeholders.append(v.asset_id)
            visuals.append(f"\\fbox{{{latex_escape(v.asset_id)}}}")
    if text and visuals:
        lines += ["\\begin{columns}[T]", "\\begin{column}{0.55\\textwidth}", *text, "\\end{column}",
                  "\\begin{column}{0.42\\textwidth}", "\\centering", *visuals, "\\end{column}", "\\end{columns}"]
    else:
        lines += text
        if visuals:
            lines += ["\\begin{center}", *visuals, "\\end{center}"]
    if slide.footnotes:
        lines += ["\\vfill", "{\\tiny"]
        lines += [latex_escape(footnote_text(k, citations)) + "\\par" for k in slide.footnotes]
        lines += ["}"]
    lines.append("\\end{frame}")
    return lines


def beamer_text(
    plan: SlidePlan,
    cfg: RenderConfig | None = None,
    bundle: DocumentBundle | None = None,
    out_dir: Path = Path("."),
    report: RenderReport | None = None,
) -> str:
    cfg = cfg or RenderConfig()
    report = report or RenderReport("beamer", "", len(plan.slides))
    lines = [
        "\\documentclass[aspectratio=169]{beamer}",
        "\\usepackage[utf8]{inputenc}",
        "\\usepackage[T1]{fontenc}",
        "\\usepackage{graphicx}",
        "\\usepackage{xcolor}",
        f"\\definecolor{{theme}}{{HTML}}{{{rgb_to_hex(plan.theme_rgb)}}}",
        "\\setbeamercolor{frametitle}{fg=theme}",
        "\\setbeamertemplate{navigation symbols}{}",
        f"\\title{{{latex_escape(plan.deck_title)}}}",
        "\\date{}",
        "\\begin{document}",
    ]
    for s in plan.slides:
        lines += _frame(s, bundle, out_dir, report)
        lines.append("")
    lines.append("\\end{document}")
    return "\n".join(lines) + "\n"


def render_beamer(
    plan: SlidePlan,
    cfg: RenderConfig | None,
    out: str | Path,
    bundle: DocumentBundle | None = None,
) -> RenderReport:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    report = RenderReport("beamer", str(out), len(plan.slides))
    out.write_bytes(beamer_text(plan, cfg, bundle, out.parent, report).encode("utf-8"))
    report.sha256 = sha256_file(out)
    return report
