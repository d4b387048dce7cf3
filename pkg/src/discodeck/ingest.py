"""Turn converter-produced Markdown plus an asset manifest into a DocumentBundle.

Sections come from level-1/2 ATX headings, paragraphs from blank-line
delimited blocks. Everything from the first bibliography / appendix style
heading onwards is discarded.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import EmptyDocument, MalformedHeading, ManifestSchemaError, MissingMedia

logger = logging.getLogger(__name__)

MIN_PARAGRAPH_CHARS = 20
UNRESOLVED = "(unresolved)"

_HEADING_RE = re.compile(r"^(#{1,6})(?:[ \t]+(.*?))?[ \t]*#*[ \t]*$")
_FENCE_RE = re.compile(r"^\s*(```|~~~)")
_IMAGE_ONLY_RE = re.compile(r"^(?:!\[[^\]]*\]\([^)]*\)\s*)+$")
_CITATION_RE = re.compile(r"\[(\s*\d+\s*(?:[,;]\s*\d+\s*)*)\]")
_BACK_MATTER = ("reference", "bibliograph", "appendi", "acknowledg", "supplementary")


class SectionGroup(str, enum.Enum):
    INTRODUCTION = "Introduction"
    RELATED_WORK = "RelatedWork"
    METHODOLOGY = "Methodology"
    EVALUATION = "Evaluation"
    CONCLUSION = "Conclusion"
    OTHER = "Other"


# first hit wins, so "Results and Discussion" lands in Evaluation
_GROUP_KEYWORDS: tuple[tuple[SectionGroup, tuple[str, ...]], ...] = (
    (SectionGroup.INTRODUCTION, ("introduction",)),
    (SectionGroup.RELATED_WORK, ("related", "background")),
    (SectionGroup.METHODOLOGY, ("method", "approach", "model")),
    (SectionGroup.EVALUATION, ("experiment", "evaluation", "result", "ablation")),
    (SectionGroup.CONCLUSION, ("conclusion", "discussion", "limitation")),
)


class AssetKind(str, enum.Enum):
    FIGURE = "figure"
    TABLE = "table"


@dataclass(frozen=True)
class Paragraph:
    id: str
    text: str

    @property
    def char_count(self) -> int:
        return len(self.text)

    @property
    def section_index(self) -> int:
        return int(self.id.split(".")[0][1:])


@dataclass(frozen=True)
class Section:
    index: int
    title: str
    group: SectionGroup
    paragraphs: tuple[Paragraph, ...]

    @property
    def paragraph_ids(self) -> list[str]:
        return [p.id for p in self.paragraphs]


@dataclass(frozen=True)
class Asset:
    id: str
    kind: AssetKind
    caption: str
    width_px: int
    height_px: int
    media_path: str | None = None
    cells: tuple[tuple[str, ...], ...] | None = None

    @property
    def aspect(self) -> float:
        if self.width_px > 0 and self.height_px > 0:
            return self.width_px / self.height_px
        return 1.0

    @property
    def caption_missing(self) -> bool:
        return not self.caption.strip()


@dataclass(frozen=True)
class CitationEntry:
    short_form: str
    full_reference: str
    footnote_label: str
    resolved: bool = True


@dataclass(frozen=True)
class DocumentBundle:
    title: str
    sections: tuple[Section, ...]
    assets: Mapping[str, Asset] = field(default_factory=dict)
    citations: Mapping[str, CitationEntry] = field(default_factory=dict)
    source_hash: str = ""

    def paragraph(self, pid: str) -> Paragraph:
        return self.paragraph_index()[pid]

    def paragraph_index(self) -> dict[str, Paragraph]:
        return {p.id: p for s in self.sections for p in s.paragraphs}

    def section(self, index: int) -> Section:
        return self.sections[index - 1]

    def to_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "source_hash": self.source_hash,
            "sections": [
                {
                    "index": s.index,
                    "title": s.title,
                    "group": s.group.value,
                    "paragraphs": [{"id": p.id, "text": p.text} for p in s.paragraphs],
                }
                for s in self.sections
            ],
            "assets": {k: _asset_to_dict(a) for k, a in sorted(self.assets.items())},
            "citations": {
                k: {
                    "short_form": c.short_form,
                    "full_reference": c.full_reference,
                    "footnote_label": c.footnote_label,
                    "resolved": c.resolved,
                }
                for k, c in sorted(self.citations.items(), key=lambda kv: _citation_sort_key(kv[0]))
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DocumentBundle":
        sections = tuple(
            Section(
                index=s["index"],
                title=s["title"],
                group=SectionGroup(s["group"]),
                paragraphs=tuple(Paragraph(p["id"], p["text"]) for p in s["paragraphs"]),
            )
            for s in data["sections"]
        )
        assets = {k: _asset_from_dict(a) for k, a in data.get("assets", {}).items()}
        citations = {k: CitationEntry(**c) for k, c in data.get("citations", {}).items()}
        return cls(data["title"], sections, assets, citations, data.get("source_hash", ""))


def _asset_to_dict(a: Asset) -> dict[str, Any]:
    d: dict[str, Any] = {
        "id": a.id,
        "kind": a.kind.value,
        "caption": a.caption,
        "width_px": a.width_px,
        "height_px": a.height_px,
    }
    if a.media_path is not None:
        d["media_path"] = a.media_path
    if a.cells is not None:
        d["cells"] = [list(r) for r in a.cells]
    return d


def _asset_from_dict(d: Mapping[str, Any]) -> Asset:
    cells = d.get("cells")
    return Asset(
        id=d["id"],
        kind=AssetKind(d["kind"]),
        caption=d.get("caption", ""),
        width_px=int(d.get("width_px", 0)),
        height_px=int(d.get("height_px", 0)),
        media_path=d.get("media_path"),
        cells=tuple(tuple(str(c) for c in row) for row in cells) if cells is not None else None,
    )


def _citation_sort_key(key: str) -> tuple[int, str]:
    m = re.fullmatch(r"\[(\d+)\]", key)
    return (int(m.group(1)), key) if m else (10**9, key)


def classify_section(title: str) -> SectionGroup:
    lowered = title.lower()
    for group, keywords in _GROUP_KEYWORDS:
        if any(k in lowered for k in keywords):
            return group
    return SectionGroup.OTHER


def is_back_matter(title: str) -> bool:
    lowered = title.lower()
    return any(k in lowered for k in _BACK_MATTER)


def normalize_whitespace(text: str) -> str:
    return " ".join(text.split())


@dataclass
class _RawSection:
    title: str
    level: int
    blocks: list[str] = field(default_factory=list)


def _scan(source: str) -> tuple[str | None, list[_RawSection]]:
    """Split source into raw sections. Returns (first level-1 heading, sections)."""
    doc_title: str | None = None
    sections: list[_RawSection] = [_RawSection("Body", 0)]
    block: list[str] = []
    lead_in = ""
    in_fence = False

    def flush() -> None:
        if block:
            sections[-1].blocks.append("\n".join(block))
            block.clear()

    for lineno, line in enumerate(source.splitlines(), start=1):
        if _FENCE_RE.match(line):
            in_fence = not in_fence
            block.append(line)
            continue
        if in_fence:
            block.append(line)
            continue
        m = _HEADING_RE.match(line)
        if m:
            level = len(m.group(1))
            text = normalize_whitespace(m.group(2) or "")
            flush()
            lead_in = ""
            if level <= 2:
                if not text:
                    raise MalformedHeading(f"line {lineno}: empty level-{level} heading")
                if level == 1 and doc_title is None:
                    doc_title = text
                sections.append(_RawSection(text, level))
            elif text:
                # subheadings stay inside the enclosing section as a lead-in
                lead_in = text + "."
            continue
        if not line.strip():
            flush()
        else:
            if lead_in and not block:
                block.append(lead_in)
            lead_in = ""
            block.append(line)
    flush()
    return doc_title, sections


def _paragraph_texts(blocks: Iterable[str]) -> list[str]:
    texts: list[str] = []
    pending = ""
    for raw in blocks:
        text = normalize_whitespace(raw)
        if not text or _IMAGE_ONLY_RE.match(text) or _is_table_block(raw):
            continue
        if pending:
            text = pending + " " + text
            pending = ""
        if len(text) < MIN_PARAGRAPH_CHARS:
            if texts:
                texts[-1] = texts[-1] + " " + text
            else:
                pending = text
            continue
        texts.append(text)
    if pending:
        texts.append(pending)
    return texts


def _is_table_block(raw: str) -> bool:
    lines = [l.strip() for l in raw.splitlines() if l.strip()]
    return bool(lines) and all(l.startswith("|") for l in lines)


def split_back_matter(source: str) -> tuple[str, str]:
    """Split source at the first bibliography/appendix heading (body, back matter)."""
    offset = 0
    in_fence = False
    for line in source.splitlines(keepends=True):
        if _FENCE_RE.match(line):
            in_fence = not in_fence
        elif not in_fence:
            m = _HEADING_RE.match(line.rstrip("\r\n"))
            if m and len(m.group(1)) <= 2 and is_back_matter(m.group(2) or ""):
                return source[:offset], source[offset:]
        offset += len(line)
    return source, ""


def parse_markdown(source: str) -> DocumentBundle:
    """Parse Markdown into a bundle with sections and paragraphs only."""
    body, _ = split_back_matter(source)
    doc_title, raw_sections = _scan(body)
    sections: list[Section] = []
    for raw in raw_sections:
        texts = _paragraph_texts(raw.blocks)
        if not texts:
            continue
        index = len(sections) + 1
        paragraphs = tuple(Paragraph(f"s{index}.p{i}", t) for i, t in enumerate(texts, start=1))
        sections.append(Section(index, raw.title, classify_section(raw.title), paragraphs))
    if not sections:
        raise EmptyDocument("no section with at least one paragraph")
    return DocumentBundle(
        title=doc_title or "Untitled",
        sections=tuple(sections),
        source_hash=hashlib.sha256(source.encode("utf-8")).hexdigest(),
    )


def to_markdown(bundle: DocumentBundle) -> str:
    """Plain-text re-serialization; parse_markdown(to_markdown(b)) reproduces b's sections."""
    out = []
    if bundle.title != "Untitled":
        out.append(f"# {bundle.title}")
    for s in bundle.sections:
        out.append(f"## {s.title}")
        out.extend(p.text for p in s.paragraphs)
    return "\n\n".join(out) + "\n"


def parse_references(back_matter: str) -> list[str]:
    """Pull numbered entries out of a references section.

    Accepts "[n] text", "n. text" and "- text" list styles; entries are
    returned in their listed order.
    """
    entries: list[str] = []
    current: list[str] = []
    started = False
    for line in back_matter.splitlines():
        m = _HEADING_RE.match(line)
        if m:
            title = (m.group(2) or "").lower()
            is_refs = "reference" in title or "bibliograph" in title
            if started and not is_refs:
                break
            started = started or is_refs
            continue
        if not started:
            continue
        stripped = line.strip()
        item = re.match(r"^(?:\[\d+\]|\d+\.|[-*])\s+(.*)$", stripped)
        if item:
            if current:
                entries.append(normalize_whitespace(" ".join(current)))
            current = [item.group(1)]
        elif stripped and current:
            current.append(stripped)
        elif not stripped and current:
            entries.append(normalize_whitespace(" ".join(current)))
            current = []
    if current:
        entries.append(normalize_whitespace(" ".join(current)))
    return entries


def extract_citations(source: str, references: list[str]) -> dict[str, CitationEntry]:
    """Map every bracketed numeric citation in the body to its reference entry."""
    body, _ = split_back_matter(source)
    numbers: list[int] = []
    for m in _CITATION_RE.finditer(body):
        for part in re.split(r"[,;]", m.group(1)):
            n = int(part.strip())
            if n not in numbers:
                numbers.append(n)
    result: dict[str, CitationEntry] = {}
    for n in sorted(numbers):
        key = f"[{n}]"
        if 1 <= n <= len(references) and references[n - 1].strip():
            full = references[n - 1].strip()
            result[key] = CitationEntry(key, full, _footnote_label(key, full), True)
        else:
            logger.warning("citation %s has no matching reference", key)
            result[key] = CitationEntry(key, UNRESOLVED, f"{key} {UNRESOLVED}", False)
    return result


def _footnote_label(key: str, full: str, limit: int = 90) -> str:
    text = full if len(full) <= limit else full[: limit - 3].rstrip() + "..."
    return f"{key} {text}"


def _manifest_error(path: str, msg: str) -> ManifestSchemaError:
    return ManifestSchemaError(path, msg)


def _require_int(entry: Mapping[str, Any], key: str, path: str, positive: bool) -> int:
    value = entry.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise _manifest_error(f"{path}.{key}", "expected an integer")
    if positive and value <= 0:
        raise _manifest_error(f"{path}.{key}", f"must be positive, got {value}")
    return value


def parse_manifest(data: Any, base_dir: Path | None = None) -> tuple[dict[str, Asset], list[str]]:
    """Validate an already-decoded manifest; returns (assets, references)."""
    if not isinstance(data, dict):
        raise _manifest_error("$", "manifest must be a JSON object")
    raw_assets = data.get("assets", [])
    refs = data.get("references", [])
    if not isinstance(raw_assets, list):
        raise _manifest_error("assets", "expected a list")
    if not isinstance(refs, list) or not all(isinstance(r, str) for r in refs):
        raise _manifest_error("references", "expected a list of strings")

    assets: dict[str, Asset] = {}
    missing: list[str] = []
    for k, entry in enumerate(raw_assets):
        path = f"assets[{k}]"
        if not isinstance(entry, dict):
            raise _manifest_error(path, "expected an object")
        asset_id = entry.get("id")
        if not isinstance(asset_id, str) or not asset_id:
            raise _manifest_error(f"{path}.id", "expected a non-empty string")
        if asset_id in assets:
            raise _manifest_error(f"{path}.id", f"duplicate id {asset_id!r}")
        kind_raw = entry.get("kind")
        if kind_raw not in ("figure", "table"):
            raise _manifest_error(f"{path}.kind", "expected 'figure' or 'table'")
        kind = AssetKind(kind_raw)
        caption = entry.get("caption", "")
        if not isinstance(caption, str):
            raise _manifest_error(f"{path}.caption", "expected a string")
        if not caption.strip():
            logger.warning("asset %s has an empty caption", asset_id)

        media = entry.get("media_path")
        cells = entry.get("cells")
        if media is not None and not isinstance(media, str):
            raise _manifest_error(f"{path}.media_path", "expected a string")
        if cells is not None:
            if not (isinstance(cells, list) and cells and all(isinstance(r, list) for r in cells)):
                raise _manifest_error(f"{path}.cells", "expected a non-empty list of rows")
        if kind is AssetKind.FIGURE and media is None:
            raise _manifest_error(f"{path}.media_path", "figures need a media_path")
        if kind is AssetKind.TABLE and media is None and cells is None:
            raise _manifest_error(path, "tables need media_path or cells")

        if kind is AssetKind.FIGURE or "width_px" in entry or "height_px" in entry:
            width = _require_int(entry, "width_px", path, positive=True)
            height = _require_int(entry, "height_px", path, positive=True)
        else:
            rows = len(cells or [])
            cols = max((len(r) for r in cells or []), default=1)
            width, height = 120 * cols, 40 * rows

        if media is not None:
            resolved = Path(media) if base_dir is None else base_dir / media
            if not resolved.is_file():
                missing.append(media)
            media = str(resolved) if base_dir is not None else media

        assets[asset_id] = Asset(
            id=asset_id,
            kind=kind,
            caption=normalize_whitespace(caption),
            width_px=width,
            height_px=height,
            media_path=media,
            cells=tuple(tuple(str(c) for c in row) for row in cells) if cells is not None else None,
        )
    if missing:
        raise MissingMedia(missing)
    return assets, list(refs)


def load_manifest(path: str | Path) -> tuple[dict[str, Asset], list[str]]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestSchemaError("$", f"invalid JSON: {exc}") from exc
    return parse_manifest(data, base_dir=path.parent)


def load_asset_manifest(path: str | Path) -> dict[str, Asset]:
    return load_manifest(path)[0]


def build_bundle(source: str, manifest_path: str | Path | None = None) -> DocumentBundle:
    """Full ingestion: sections, assets and citation map."""
    bundle = parse_markdown(source)
    assets: dict[str, Asset] = {}
    references: list[str] = []
    if manifest_path is not None:
        assets, references = load_manifest(manifest_path)
    if not references:
        references = parse_references(split_back_matter(source)[1])
    citations = extract_citations(source, references)
    return DocumentBundle(bundle.title, bundle.sections, assets, citations, bundle.source_hash)
