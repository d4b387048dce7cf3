"""OOXML presentation writer built directly on zipfile.

Member order is fixed and every timestamp is 1980-01-01, so the same plan
always yields the same bytes. Members are stored uncompressed so the output
does not depend on the local zlib build.
"""

from __future__ import annotations

import logging
import re
import zipfile
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

from ..deck.layouts import LayoutCatalog, LayoutTemplate, default_catalog
from ..deck.model import BodyMode, Run, Slide, SlidePlan, TextBlock, rgb_to_hex
from ..errors import MediaEmbedError
from ..ingest import Asset, AssetKind, DocumentBundle
from .common import (
    Media,
    RenderConfig,
    RenderReport,
    assets_of,
    citations_of,
    fit_rect,
    footnote_text,
    load_media,
    sha256_file,
    split_blocks,
)

logger = logging.getLogger(__name__)

NS_P = "http://schemas.openxmlformats.org/presentationml/2006/main"
NS_A = "http://schemas.openxmlformats.org/drawingml/2006/main"
NS_R = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
NS_PKG_REL = "http://schemas.openxmlformats.org/package/2006/relationships"
REL = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
CT_BASE = "application/vnd.openxmlformats-officedocument.presentationml"
XML_DECL = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
ROOT_NS = f'xmlns:a="{NS_A}" xmlns:r="{NS_R}" xmlns:p="{NS_P}"'

_INVALID_XML = re.compile("[^\t\n\r\x20-\ud7ff\ue000-\ufffd\U00010000-\U0010ffff]")


def xml_text(text: str) -> str:
    return escape(_INVALID_XML.sub("", text))


def _attr(text: str) -> str:
    return quoteattr(_INVALID_XML.sub("", text))


_EMPTY_PARA = '<a:p><a:endParaRPr lang="en-US" dirty="0"/></a:p>'


class _Ids:
    def __init__(self) -> None:
        self.n = 1

    def next(self) -> int:
        self.n += 1
        return self.n


def _xfrm(rect: tuple[int, int, int, int]) -> str:
    x, y, w, h = rect
    return f'<a:xfrm><a:off x="{x}" y="{y}"/><a:ext cx="{w}" cy="{h}"/></a:xfrm>'


def _run(run: Run, size_pt: int, font: str) -> str:
    attrs = f' lang="en-US" sz="{size_pt * 100}"'
    if run.bold:
        attrs += ' b="1"'
    fill = f'<a:solidFill><a:srgbClr val="{rgb_to_hex(run.color)}"/></a:solidFill>' if run.color else ""
    return (
        f'<a:r><a:rPr{attrs} dirty="0">{fill}<a:latin typeface={_attr(font)}/></a:rPr>'
        f"<a:t>{xml_text(run.text)}</a:t></a:r>"
    )


def _paragraph(block: TextBlock, mode: BodyMode, size_pt: int, font: str) -> str:
    lvl = block.indent_level
    if mode is BodyMode.BULLETS:
        mar = 342900 + lvl * 342900
        ppr = f'<a:pPr marL="{mar}" lvl="{lvl}" indent="-285750"><a:buFont typeface="Arial"/><a:buChar char="&#8226;"/></a:pPr>'
    else:
        ppr = f'<a:pPr marL="{lvl * 342900}" lvl="{lvl}" indent="0"><a:buNone/></a:pPr>'
    runs = "".join(_run(r, size_pt, font) for r in block.runs)
    return f"<a:p>{ppr}{runs}<a:endParaRPr lang=\"en-US\" sz=\"{size_pt * 100}\" dirty=\"0\"/></a:p>"


def _text_shape(ids: _Ids, name: str, rect, paragraphs: str, anchor: str = "t") -> str:
    sid = ids.next()
    return (
        f'<p:sp><p:nvSpPr><p:cNvPr id="{sid}" name={_attr(f"{name} {sid}")}/><p:cNvSpPr txBox="1"/><p:nvPr/></p:nvSpPr>'
        f'<p:spPr>{_xfrm(rect)}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom><a:noFill/></p:spPr>'
        f'<p:txBody><a:bodyPr wrap="square" lIns="91440" tIns="45720" rIns="91440" bIns="45720" anchor="{anchor}">'
        f"<a:normAutofit/></a:bodyPr><a:lstStyle/>{paragraphs or _EMPTY_PARA}"
        "</p:txBody></p:sp>"
    )


def _placeholder_shape(ids: _Ids, rect, label: str, cfg: RenderConfig) -> str:
    sid = ids.next()
    para = _paragraph(TextBlock((Run(label),)), BodyMode.PARAGRAPH, max(10, cfg.footnote_font_pt + 2), cfg.font_family)
    return (
        f'<p:sp><p:nvSpPr><p:cNvPr id="{sid}" name="Placeholder {sid}"/><p:cNvSpPr/><p:nvPr/></p:nvSpPr>'
        f'<p:spPr>{_xfrm(rect)}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom>'
        '<a:solidFill><a:srgbClr val="E7E6E6"/></a:solidFill><a:ln w="9525"><a:solidFill><a:srgbClr val="A6A6A6"/></a:solidFill></a:ln></p:spPr>'
        '<p:txBody><a:bodyPr wrap="square" anchor="ctr"><a:normAutofit/></a:bodyPr><a:lstStyle/>'
        f"{para}</p:txBody></p:sp>"
    )


def _picture_shape(ids: _Ids, rect, rid: str, asset: Asset) -> str:
    sid = ids.next()
    return (
        f'<p:pic><p:nvPicPr><p:cNvPr id="{sid}" name={_attr(f"Picture {sid}")} descr={_attr(asset.caption)}/>'
        '<p:cNvPicPr><a:picLocks noChangeAspect="1"/></p:cNvPicPr><p:nvPr/></p:nvPicPr>'
        f'<p:blipFill><a:blip r:embed="{rid}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill>'
        f'<p:spPr>{_xfrm(rect)}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr></p:pic>'
    )


def _table_shape(ids: _Ids, rect, cells: tuple[tuple[str, ...], ...], cfg: RenderConfig) -> str:
    sid = ids.next()
    x, y, w, h = rect
    n_cols = max(len(r) for r in cells)
    col_w = w // n_cols
    row_h = h // len(cells)
    size = 12
    grid = "".join(f'<a:gridCol w="{col_w}"/>' for _ in range(n_cols))
    rows = []
    for i, row in enumerate(cells):
        tcs = []
        for j in range(n_cols):
            text = row[j] if j < len(row) else ""
            run = _run(Run(text, bold=i == 0), size, cfg.font_family) if text else ""
            tcs.append(
                f'<a:tc><a:txBody><a:bodyPr/><a:lstStyle/><a:p>{run}<a:endParaRPr lang="en-US" sz="{size * 100}" dirty="0"/></a:p>'
                "</a:txBody><a:tcPr/></a:tc>"
            )
        rows.append(f'<a:tr h="{row_h}">{"".join(tcs)}</a:tr>')
    return (
        f'<p:graphicFrame><p:nvGraphicFramePr><p:cNvPr id="{sid}" name="Table {sid}"/>'
        '<p:cNvGraphicFramePr><a:graphicFrameLocks noGrp="1"/></p:cNvGraphicFramePr><p:nvPr/></p:nvGraphicFramePr>'
        f'<p:xfrm><a:off x="{x}" y="{y}"/><a:ext cx="{col_w * n_cols}" cy="{row_h * len(cells)}"/></p:xfrm>'
        '<a:graphic><a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/table">'
        f'<a:tbl><a:tblPr firstRow="1" bandRow="1"/><a:tblGrid>{grid}</a:tblGrid>{"".join(rows)}</a:tbl>'
        "</a:graphicData></a:graphic></p:graphicFrame>"
    )


class _MediaStore:
    """Deduplicated ppt/media parts, named in first-use order."""

    def __init__(self) -> None:
        self.parts: dict[str, tuple[str, Media]] = {}

    def add(self, media: Media) -> str:
        if media.digest not in self.parts:
            name = f"image{len(self.parts) + 1}.{media.ext}"
            self.parts[media.digest] = (name, media)
        return self.parts[media.digest][0]


class _PptxBuilder:
    def __init__(self, plan: SlidePlan, cfg: RenderConfig, bundle: DocumentBundle | None, catalog: LayoutCatalog):
        self.plan, self.cfg, self.catalog = plan, cfg, catalog
        self.assets = assets_of(bundle)
        self.citations = citations_of(bundle)
        self.media = _MediaStore()
        self.report = RenderReport("pptx", "", len(plan.slides))
        self._cache: dict[str, Media | MediaEmbedError] = {}

    def emu(self, rect) -> tuple[int, int, int, int]:
        W, H = self.cfg.slide_width_emu, self.cfg.slide_height_emu
        x, y, w, h = rect
        return (int(round(x * W)), int(round(y * H)), int(round(w * W)), int(round(h * H)))

    def _media_for(self, asset: Asset) -> Media:
        if asset.id not in self._cache:
            try:
                self._cache[asset.id] = load_media(asset)
            except MediaEmbedError as exc:
                self._cache[asset.id] = exc
        got = self._cache[asset.id]
        if isinstance(got, MediaEmbedError):
            raise got
        return got

    def slide_xml(self, n: int, slide: Slide) -> tuple[str, list[tuple[str, str]]]:
        cfg = self.cfg
        layout: LayoutTemplate = self.catalog[slide.layout_id]
        ids = _Ids()
        rels: list[tuple[str, str]] = []
        shapes: list[str] = []
        theme = self.plan.theme_rgb

        title_run = Run(slide.title, bold=True, color=None)
        title_para = (
            f'<a:p><a:pPr><a:buNone/></a:pPr>'
            f'<a:r><a:rPr lang="en-US" sz="{cfg.title_font_pt * 100}" b="1" dirty="0">'
            f'<a:solidFill><a:srgbClr val="{rgb_to_hex(theme)}"/></a:solidFill>'
            f'<a:latin typeface={_attr(cfg.font_family)}/></a:rPr><a:t>{xml_text(title_run.text)}</a:t></a:r></a:p>'
        )
        shapes.append(_text_shape(ids, "Title", self.emu(self.catalog.title_zone), title_para, anchor="b"))

        size = cfg.base_font_pt if slide.chars <= 0.6 * layout.max_chars else max(12, cfg.base_font_pt - 4)
        for zone, blocks in zip(layout.text_zones, split_blocks(slide.blocks, len(layout.text_zones))):
            paras = "".join(_paragraph(b, slide.body_mode, size, cfg.font_family) for b in blocks)
            shapes.append(_text_shape(ids, "Body", self.emu(zone), paras))

        zones = layout.visual_zones
        for v in slide.visuals:
            rect = self.emu(zones[v.zone_index])
            asset = self.assets.get(v.asset_id)
            if asset is None:
                self.report.placeholders.append(v.asset_id)
                shapes.append(_placeholder_shape(ids, rect, f"[missing asset {v.asset_id}]", cfg))
                continue
            if asset.kind is AssetKind.TABLE and asset.media_path is None and asset.cells:
                shapes.append(_table_shape(ids, rect, asset.cells, cfg))
                continue
            try:
                media = self._media_for(asset)
            except MediaEmbedError as exc:
                logger.warning("%s", exc)
                self.report.placeholders.append(asset.id)
                self.report.warnings.append(str(exc))
                shapes.append(_placeholder_shape(ids, rect, f"[{asset.id}] {asset.caption}", cfg))
                continue
            name = self.media.add(media)
            rid = f"rId{len(rels) + 2}"
            rels.append((rid, f"../media/{name}"))
            self.report.media_embedded += 1
            shapes.append(_picture_shape(ids, fit_rect(rect, media.width_px / media.height_px), rid, asset))

        if slide.footnotes:
            notes = "".join(
                _paragraph(TextBlock.plain(footnote_text(k, self.citations)), BodyMode.PARAGRAPH,
                           cfg.footnote_font_pt, cfg.font_family)
                for k in slide.footnotes
            )
            shapes.append(_text_shape(ids, "Footnotes", self.emu(self.catalog.footnote_zone), notes, anchor="b"))

        xml = (
            f"{XML_DECL}<p:sld {ROOT_NS}><p:cSld><p:spTree>"
            '<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
            '<p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/><a:chOff x="0" y="0"/><a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>'
            f'{"".join(shapes)}</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>'
        )
        return xml, rels

    def parts(self) -> list[tuple[str, bytes]]:
        cfg, plan = self.cfg, self.plan
        n = len(plan.slides)
        slide_parts = []
        for i, s in enumerate(plan.slides, start=1):
            xml, rels = self.slide_xml(i, s)
            rel_xml = _rels([("rId1", f"{REL}/slideLayout", "../slideLayouts/slideLayout1.xml")]
                            + [(rid, f"{REL}/image", target) for rid, target in rels])
            slide_parts.append((f"ppt/slides/slide{i}.xml", xml))
            slide_parts.append((f"ppt/slides/_rels/slide{i}.xml.rels", rel_xml))

        exts = sorted({m.ext for _, m in self.media.parts.values()})
        defaults = [("rels", "application/vnd.openxmlformats-package.relationships+xml"), ("xml", "application/xml")]
        defaults += [(e, f"image/{e}") for e in exts]
        overrides = [
            ("/ppt/presentation.xml", f"{CT_BASE}.presentation.main+xml"),
            ("/ppt/slideMasters/slideMaster1.xml", f"{CT_BASE}.slideMaster+xml"),
            ("/ppt/slideLayouts/slideLayout1.xml", f"{CT_BASE}.slideLayout+xml"),
            ("/ppt/theme/theme1.xml", "application/vnd.openxmlformats-officedocument.theme+xml"),
            ("/ppt/presProps.xml", f"{CT_BASE}.presProps+xml"),
            ("/ppt/viewProps.xml", f"{CT_BASE}.viewProps+xml"),
            ("/ppt/tableStyles.xml", f"{CT_BASE}.tableStyles+xml"),
            ("/docProps/core.xml", "application/vnd.openxmlformats-package.core-properties+xml"),
            ("/docProps/app.xml", "application/vnd.openxmlformats-officedocument.extended-properties+xml"),
        ]
        overrides += [(f"/ppt/slides/slide{i}.xml", f"{CT_BASE}.slide+xml") for i in range(1, n + 1)]
        content_types = (
            f'{XML_DECL}<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
            + "".join(f'<Default Extension="{e}" ContentType="{c}"/>' for e, c in defaults)
            + "".join(f'<Override PartName="{p}" ContentType="{c}"/>' for p, c in overrides)
            + "</Types>"
        )
        root_rels = _rels([
            ("rId1", f"{REL}/officeDocument", "ppt/presentation.xml"),
            ("rId2", "http://schemas.openxmlformats.org/package/2006/relationships/metadata/core-properties",
             "docProps/core.xml"),
            ("rId3", f"{REL}/extended-properties", "docProps/app.xml"),
        ])
        pres_rels = [("rId1", f"{REL}/slideMaster", "slideMasters/slideMaster1.xml")]
        pres_rels += [(f"rId{i + 1}", f"{REL}/slide", f"slides/slide{i}.xml") for i in range(1, n + 1)]
        pres_rels += [
            (f"rId{n + 2}", f"{REL}/presProps", "presProps.xml"),
            (f"rId{n + 3}", f"{REL}/viewProps", "viewProps.xml"),
            (f"rId{n + 4}", f"{REL}/theme", "theme/theme1.xml"),
            (f"rId{n + 5}", f"{REL}/tableStyles", "tableStyles.xml"),
        ]
        sld_ids = "".join(f'<p:sldId id="{256 + i}" r:id="rId{i + 2}"/>' for i in range(n))
        presentation = (
            f"{XML_DECL}<p:presentation {ROOT_NS} saveSubsetFonts=\"1\">"
            '<p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="rId1"/></p:sldMasterIdLst>'
            + (f"<p:sldIdLst>{sld_ids}</p:sldIdLst>" if n else "")
            + f'<p:sldSz cx="{cfg.slide_width_emu}" cy="{cfg.slide_height_emu}"/>'
            '<p:notesSz cx="6858000" cy="9144000"/></p:presentation>'
        )
        parts: list[tuple[str, str | bytes]] = [
            ("[Content_Types].xml", content_types),
            ("_rels/.rels", root_rels),
            ("docProps/core.xml", _core_xml(plan.deck_title)),
            ("docProps/app.xml", _app_xml(n)),
            ("ppt/presentation.xml", presentation),
            ("ppt/_rels/presentation.xml.rels", _rels(pres_rels)),
            ("ppt/presProps.xml", f"{XML_DECL}<p:presentationPr {ROOT_NS}/>"),
            ("ppt/viewProps.xml", f"{XML_DECL}<p:viewPr {ROOT_NS}/>"),
            ("ppt/tableStyles.xml",
             f'{XML_DECL}<a:tblStyleLst xmlns:a="{NS_A}" def="{{5C22544A-7EE6-4342-B048-85BDC9FD1C3A}}"/>'),
            ("ppt/theme/theme1.xml", _theme_xml(rgb_to_hex(plan.theme_rgb), cfg.font_family)),
            ("ppt/slideMasters/slideMaster1.xml", _master_xml()),
            ("ppt/slideMasters/_rels/slideMaster1.xml.rels", _rels([
                ("rId1", f"{REL}/slideLayout", "../slideLayouts/slideLayout1.xml"),
                ("rId2", f"{REL}/theme", "../theme/theme1.xml"),
            ])),
            ("ppt/slideLayouts/slideLayout1.xml", _layout_xml()),
            ("ppt/slideLayouts/_rels/slideLayout1.xml.rels", _rels([
                ("rId1", f"{REL}/slideMaster", "../slideMasters/slideMaster1.xml"),
            ])),
            *slide_parts,
        ]
        parts += [(f"ppt/media/{name}", m.data) for name, m in self.media.parts.values()]
        return [(p, d.encode("utf-8") if isinstance(d, str) else d) for p, d in parts]


def _rels(items: list[tuple[str, str, str]]) -> str:
    body = "".join(f'<Relationship Id="{i}" Type="{t}" Target="{g}"/>' for i, t, g in items)
    return f'{XML_DECL}<Relationships xmlns="{NS_PKG_REL}">{body}</Relationships>'


def _core_xml(title: str) -> str:
    return (
        f"{XML_DECL}<cp:coreProperties xmlns:cp=\"http://schemas.openxmlformats.org/package/2006/metadata/core-properties\" "
        'xmlns:dc="http://purl.org/dc/elements/1.1/" xmlns:dcterms="http://purl.org/dc/terms/" '
        'xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance">'
        f"<dc:title>{xml_text(title)}</dc:title><dc:creator>discodeck</dc:creator>"
        '<dcterms:created xsi:type="dcterms:W3CDTF">1980-01-01T00:00:00Z</dcterms:created>'
        '<dcterms:modified xsi:type="dcterms:W3CDTF">1980-01-01T00:00:00Z</dcterms:modified>'
        "</cp:coreProperties>"
    )


def _app_xml(n: int) -> str:
    return (
        f'{XML_DECL}<Properties xmlns="http://schemas.openxmlformats.org/officeDocument/2006/extended-properties">'
        f"<Application>discodeck</Application><PresentationFormat>Widescreen</PresentationFormat>"
        f"<Slides>{n}</Slides></Properties>"
    )


_EMPTY_TREE = (
    '<p:spTree><p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
    '<p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/><a:chOff x="0" y="0"/><a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>'
    "</p:spTree>"
)


def _master_xml() -> str:
    return (
        f"{XML_DECL}<p:sldMaster {ROOT_NS}><p:cSld><p:bg><p:bgRef idx=\"1001\"><a:schemeClr val=\"bg1\"/></p:bgRef></p:bg>"
        f"{_EMPTY_TREE}</p:cSld>"
        '<p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" accent3="accent3" '
        'accent4="accent4" accent5="accent5" accent6="accent6" hlink="hlink" folHlink="folHlink"/>'
        '<p:sldLayoutIdLst><p:sldLayoutId id="2147483649" r:id="rId1"/></p:sldLayoutIdLst>'
        "<p:txStyles><p:titleStyle/><p:bodyStyle/><p:otherStyle/></p:txStyles></p:sldMaster>"
    )


def _layout_xml() -> str:
    return (
        f'{XML_DECL}<p:sldLayout {ROOT_NS} type="blank" preserve="1"><p:cSld name="Blank">{_EMPTY_TREE}</p:cSld>'
        "<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>"
    )


def _theme_xml(accent: str, font: str) -> str:
    colors = [("dk1", '<a:sysClr val="windowText" lastClr="000000"/>'),
              ("lt1", '<a:sysClr val="window" lastClr="FFFFFF"/>'),
              ("dk2", '<a:srgbClr val="44546A"/>'), ("lt2", '<a:srgbClr val="E7E6E6"/>'),
              ("accent1", f'<a:srgbClr val="{accent}"/>'), ("accent2", '<a:srgbClr val="ED7D31"/>'),
              ("accent3", '<a:srgbClr val="A5A5A5"/>'), ("accent4", '<a:srgbClr val="FFC000"/>'),
              ("accent5", '<a:srgbClr val="5B9BD5"/>'), ("accent6", '<a:srgbClr val="70AD47"/>'),
              ("hlink", '<a:srgbClr val="0563C1"/>'), ("folHlink", '<a:srgbClr val="954F72"/>')]
    scheme = "".join(f"<a:{k}>{v}</a:{k}>" for k, v in colors)
    fill = '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    line = '<a:ln w="9525"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>'
    fonts = f'<a:latin typeface={_attr(font)}/><a:ea typeface=""/><a:cs typeface=""/>'
    return (
        f'{XML_DECL}<a:theme xmlns:a="{NS_A}" name="discodeck"><a:themeElements>'
        f'<a:clrScheme name="discodeck">{scheme}</a:clrScheme>'
        f'<a:fontScheme name="discodeck"><a:majorFont>{fonts}</a:majorFont><a:minorFont>{fonts}</a:minorFont></a:fontScheme>'
        '<a:fmtScheme name="discodeck">'
        f"<a:fillStyleLst>{fill * 3}</a:fillStyleLst>"
        f"<a:lnStyleLst>{line * 3}</a:lnStyleLst>"
        f"<a:effectStyleLst>{'<a:effectStyle><a:effectLst/></a:effectStyle>' * 3}</a:effectStyleLst>"
        f"<a:bgFillStyleLst>{fill * 3}</a:bgFillStyleLst>"
        "</a:fmtScheme></a:themeElements><a:objectDefaults/><a:extraClrSchemeLst/></a:theme>"
    )


def pptx_bytes_parts(
    plan: SlidePlan,
    cfg: RenderConfig | None = None,
    bundle: DocumentBundle | None = None,
    catalog: LayoutCatalog | None = None,
) -> tuple[list[tuple[str, bytes]], RenderReport]:
    builder = _PptxBuilder(plan, cfg or RenderConfig(), bundle, catalog or default_catalog())
    return builder.parts(), builder.report


def render_pptx(
    plan: SlidePlan,
    cfg: RenderConfig | None,
    out: str | Path,
    bundle: DocumentBundle | None = None,
    catalog: LayoutCatalog | None = None,
) -> RenderReport:
    """Write ``plan`` as a .pptx archive; unreadable media become labelled placeholders."""
    out = Path(out)
    parts, report = pptx_bytes_parts(plan, cfg, bundle, catalog)
    out.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(out, "w", zipfile.ZIP_STORED) as zf:
        for name, data in parts:
            info = zipfile.ZipInfo(name, date_time=ZIP_EPOCH)
            info.compress_type = zipfile.ZIP_STORED
            info.external_attr = 0o644 << 16
            info.create_system = 0
            zf.writestr(info, data)
    report.path = str(out)
    report.sha256 = sha256_file(out)
    return report
