from __future__ import annotations

import re
import zipfile
from collections import Counter
from fractions import Fraction
from pathlib import Path
from xml.etree import ElementTree as ET

import pptx
import pytest

from conftest import FIXTURES
from discodeck.commitment import RenderTarget
from discodeck.deck import BodyMode, Run, Slide, SlidePlan, SlideVisual, TextBlock, ThemeColor, ThemeProvenance
from discodeck.ingest import Asset, AssetKind, CitationEntry, DocumentBundle
from discodeck.render import RenderConfig, beamer_text, html_text, latex_escape, render
from discodeck.render.pptx import pptx_bytes_parts

NS = {"a": "http://schemas.openxmlformats.org/drawingml/2006/main",
      "p": "http://schemas.openxmlformats.org/presentationml/2006/main"}
GOLDEN = FIXTURES / "golden"
THEME = ThemeColor((24, 88, 152), ThemeProvenance.FROM_FIGURES)


def title_only_plan() -> SlidePlan:
    return SlidePlan("Deck", (Slide("Deck", 2),), THEME)


def read_zip(path: Path) -> dict[str, bytes]:
    with zipfile.ZipFile(path) as zf:
        assert zf.testzip() is None
        return {n: zf.read(n) for n in zf.namelist()}


def check_package(path: Path, slides: int) -> dict[str, bytes]:
    parts = read_zip(path)
    for name in ("[Content_Types].xml", "_rels/.rels", "ppt/presentation.xml"):
        assert name in parts
    for name, data in parts.items():
        if name.endswith((".xml", ".rels")):
            ET.fromstring(data)  # well-formed
    assert sorted(n for n in parts if re.fullmatch(r"ppt/slides/slide\d+\.xml", n)) == sorted(
        f"ppt/slides/slide{i}.xml" for i in range(1, slides + 1))
    return parts


def test_slide_size_in_emu():
    # 13.333... in x 914,400 EMU/in, exactly
    assert Fraction(40, 3) * 914_400 == RenderConfig().slide_width_emu == 12_192_000
    assert RenderConfig().slide_height_emu == 6_857_250


@pytest.mark.parametrize("w,h", [(12_192_000, 9_144_000), (100, 100)])
def test_non_widescreen_config_rejected(w, h):
    with pytest.raises(ValueError):
        RenderConfig(slide_width_emu=w, slide_height_emu=h)


def test_title_only_plan(tmp_path):
    out = tmp_path / "t.pptx"
    report = render(title_only_plan(), RenderTarget.PPTX, out)
    parts = check_package(out, 1)
    sz = ET.fromstring(parts["ppt/presentation.xml"]).find("p:sldSz", NS)
    assert (sz.get("cx"), sz.get("cy")) == ("12192000", "6857250")
    prs = pptx.Presentation(str(out))
    assert (prs.slide_width, prs.slide_height) == (12_192_000, 6_857_250)
    assert len(prs.slides) == 1 and report.slide_count == 1


def test_zero_slide_plan_still_opens(tmp_path):
    out = tmp_path / "e.pptx"
    render(SlidePlan("Empty", ()), "pptx", out)
    check_package(out, 0)
    assert len(pptx.Presentation(str(out)).slides) == 0


def test_bold_flag_on_exactly_the_bold_run(tmp_path):
    block = TextBlock((Run("uses "), Run("RST", bold=True), Run(" trees")))
    plan = SlidePlan("d", (Slide("T", 1, (block,)),), THEME)
    render(plan, "pptx", tmp_path / "b.pptx")
    prs = pptx.Presentation(str(tmp_path / "b.pptx"))
    body = [sh for sh in prs.slides[0].shapes if sh.name.startswith("Body")][0]
    runs = [(r.text, r.font.bold) for p in body.text_frame.paragraphs for r in p.runs]
    assert runs == [("uses ", None), ("RST", True), (" trees", None)]


def test_colored_run_uses_theme_hex(tmp_path):
    block = TextBlock((Run("a"), Run("b", color=THEME.rgb)))
    plan = SlidePlan("d", (Slide("T", 1, (block,)),), THEME)
    render(plan, "pptx", tmp_path / "c.pptx")
    body = [sh for sh in pptx.Presentation(str(tmp_path / "c.pptx")).slides[0].shapes if sh.name.startswith("Body")]
    colored = [r for p in body[0].text_frame.paragraphs for r in p.runs if r.text == "b"][0]
    assert str(colored.font.color.rgb) == "185898"


def test_footnote_frame_carries_full_reference(tmp_path):
    full = "A. Author. Prefetch rings for tiled maps. Graphics Journal, 2018."
    cites = {"[3]": CitationEntry("[3]", full, "[3] A. Author...")}
    bundle = DocumentBundle("d", (), {}, cites)
    plan = SlidePlan("d", (Slide("T", 1, (TextBlock.plain("rings [3]"),), footnotes=("[3]",)),), THEME)
    cfg = RenderConfig()
    render(plan, "pptx", tmp_path / "f.pptx", cfg, bundle)
    shapes = pptx.Presentation(str(tmp_path / "f.pptx")).slides[0].shapes
    notes = [sh for sh in shapes if full in sh.text_frame.text]
    assert len(notes) == 1 and notes[0].text_frame.text.startswith("[3]")
    assert notes[0].top > 0.85 * cfg.slide_height_emu


def test_missing_media_becomes_placeholder(tmp_path):
    asset = Asset("Figure 9", AssetKind.FIGURE, "gone", 100, 100, str(tmp_path / "nope.png"))
    bundle = DocumentBundle("d", (), {"Figure 9": asset}, {})
    plan = SlidePlan("d", (Slide("T", 4, (TextBlock.plain("x"),), (SlideVisual("Figure 9", 0),)),), THEME)
    report = render(plan, "pptx", tmp_path / "m.pptx", None, bundle)
    assert report.placeholders == ["Figure 9"] and report.media_embedded == 0
    check_package(tmp_path / "m.pptx", 1)


def test_fixture_deck_package(replay_runs, tmp_path):
    run = replay_runs[20]
    out = tmp_path / "deck.pptx"
    report = render(run.plan, "pptx", out, None, run.bundle)
    parts = check_package(out, len(run.plan.slides))
    assert report.media_embedded > 0 and any(n.startswith("ppt/media/") for n in parts)
    prs = pptx.Presentation(str(out))
    assert len(prs.slides) == len(run.plan.slides)
    # every plan run reappears as a run in the rendered slide
    for slide, rendered in zip(run.plan.slides, prs.slides):
        got = Counter(r.text for sh in rendered.shapes if sh.has_text_frame
                      for p in sh.text_frame.paragraphs for r in p.runs)
        want = Counter(r.text for b in slide.blocks for r in b.runs)
        assert not want - got


def test_pptx_bytes_deterministic(replay_runs, tmp_path):
    run = replay_runs[20]
    a = render(run.plan, "pptx", tmp_path / "a.pptx", None, run.bundle)
    b = render(run.plan, "pptx", tmp_path / "b.pptx", None, run.bundle)
    assert (tmp_path / "a.pptx").read_bytes() == (tmp_path / "b.pptx").read_bytes()
    assert a.sha256 == b.sha256
    with zipfile.ZipFile(tmp_path / "a.pptx") as zf:
        assert {i.date_time for i in zf.infolist()} == {(1980, 1, 1, 0, 0, 0)}


def test_table_cells_render_as_native_table(replay_runs):
    bundle = replay_runs[20].bundle
    plan = SlidePlan("d", (Slide("T", 12, (TextBlock.plain("x"),), (SlideVisual("Table 1", 0),)),), THEME)
    parts, _ = pptx_bytes_parts(plan, None, bundle)
    xml = dict(parts)["ppt/slides/slide1.xml"].decode()
    assert "<a:tbl>" in xml and "ATC" in xml


# HTML

def three_slide_plan() -> SlidePlan:
    slides = tuple(Slide(f"S{i}", 1, (TextBlock((Run("x "), Run("y", bold=True), Run("z", color=(1, 2, 3)))),))
                   for i in range(3))
    return SlidePlan("d", slides, ThemeColor((1, 2, 3), ThemeProvenance.OVERRIDE))


def test_html_sections_and_theme():
    text = html_text(three_slide_plan())
    assert text.count("<section") == 3
    assert "#010203" in text
    assert "<script" not in text
    assert "<strong>y</strong>" in text


def test_html_escapes_text():
    plan = SlidePlan("<d>", (Slide("a<b", 1, (TextBlock.plain("1 < 2 & 3"),)),), THEME)
    text = html_text(plan)
    assert "a&lt;b" in text and "1 &lt; 2 &amp; 3" in text


def test_html_golden(replay_runs):
    run = replay_runs[20]
    assert html_text(run.plan, bundle=run.bundle, out_dir=GOLDEN) == (GOLDEN / "talk-20min.html").read_text("utf-8")


def test_html_figures_are_relative(replay_runs, tmp_path):
    run = replay_runs[20]
    out = tmp_path / "deck.html"
    render(run.plan, "html", out, None, run.bundle)
    srcs = re.findall(r'src="([^"]+)"', out.read_text("utf-8"))
    assert srcs and all(not Path(s).is_absolute() for s in srcs)
    assert all((tmp_path / s).resolve().is_file() for s in srcs)


# Beamer

def test_beamer_escapes_title():
    plan = SlidePlan("d", (Slide("A&B", 1, (TextBlock.plain("50% of $x"),)),), THEME)
    text = beamer_text(plan)
    assert "A\\&B" in text and "50\\% of \\$x" in text


@pytest.mark.parametrize("raw,escaped", [("#", "\\#"), ("_", "\\_"), ("{}", "\\{\\}"), ("~", "\\textasciitilde{}")])
def test_latex_escape(raw, escaped):
    assert latex_escape(raw) == escaped


def test_beamer_empty_plan_is_preamble_only():
    text = beamer_text(SlidePlan("d", ()))
    assert "\\begin{frame}" not in text
    assert text.rstrip().endswith("\\begin{document}\n\\end{document}")


def test_beamer_emphasis():
    text = beamer_text(three_slide_plan())
    assert text.count("\\begin{frame}") == 3
    assert "\\textbf{y}" in text and "\\textcolor{theme}{z}" in text


def test_beamer_golden(replay_runs):
    run = replay_runs[20]
    assert beamer_text(run.plan, bundle=run.bundle, out_dir=GOLDEN) == (GOLDEN / "talk-20min.tex").read_text("utf-8")


def test_render_suffix_and_report(replay_runs, tmp_path):
    run = replay_runs[5]
    for target, suffix in (("html", ".html"), ("beamer", ".tex")):
        report = render(run.plan, target, tmp_path / f"deck{suffix}", None, run.bundle)
        assert report.slide_count == len(run.plan.slides) and len(report.sha256) == 64
