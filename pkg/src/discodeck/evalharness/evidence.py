"""Slide text extraction and the evidence bundles handed to evaluation agents."""

from __future__ import annotations

import re
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.etree import ElementTree as ET

from ..deck.model import SlidePlan

_NS = {
    "a": "http://schemas.openxmlformats.org/drawingml/2006/main",
    "p": "http://schemas.openxmlformats.org/presentationml/2006/main",
}
_SLIDE_PART = re.compile(r"ppt/slides/slide(\d+)\.xml$")


@dataclass(frozen=True)
class DeckEvidence:
    """What an evaluator sees of one deck: per-slide text and/or rendered slide images."""

    texts: tuple[str, ...] = ()
    images: tuple[bytes, ...] = ()

    def text_payload(self) -> list[dict[str, object]]:
        return [{"slide": i, "text": t} for i, t in enumerate(self.texts, start=1)]


def _plan_texts(plan: SlidePlan) -> list[str]:
    return ["\n".join([s.title, *(b.text for b in s.blocks)]) for s in plan.slides]


def _pptx_texts(path: Path) -> list[str]:
    out: list[tuple[int, str]] = []
    with zipfile.ZipFile(path) as zf:
        for name in zf.namelist():
            m = _SLIDE_PART.fullmatch(name)
            if not m:
                continue
            root = ET.fromstring(zf.read(name))
            lines: list[str] = []
            for shape in root.iter(f"{{{_NS['p']}}}sp"):
                c_nv = shape.find("p:nvSpPr/p:cNvPr", _NS)
                if c_nv is not None and c_nv.get("name", "").startswith("Footnotes"):
                    continue
                for para in shape.iter(f"{{{_NS['a']}}}p"):
                    text = "".join(t.text or "" for t in para.iter(f"{{{_NS['a']}}}t"))
                    if text:
                        lines.append(text)
            out.append((int(m.group(1)), "\n".join(lines)))
    return [t for _, t in sorted(out)]


def extract_slide_text(deck: SlidePlan | str | Path) -> list[str]:
    """Title plus body text per slide, in order. Accepts a plan, a plan JSON file or a .pptx."""
    if isinstance(deck, SlidePlan):
        return _plan_texts(deck)
    path = Path(deck)
    if path.suffix.lower() == ".pptx":
        return _pptx_texts(path)
    import json

    return _plan_texts(SlidePlan.from_json(json.loads(path.read_text(encoding="utf-8"))))


def load_images(paths: Sequence[str | Path]) -> tuple[bytes, ...]:
    return tuple(Path(p).read_bytes() for p in paths)


def image_dir(path: str | Path) -> tuple[bytes, ...]:
    """All PNG/JPEG files of a directory in natural file-name order (slide order)."""
    files = [p for p in Path(path).iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")]
    key = lambda p: tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", p.name))  # noqa: E731
    return load_images(sorted(files, key=key))
