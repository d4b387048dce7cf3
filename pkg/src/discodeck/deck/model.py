"""Slide plan value types and their JSON form."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

from ..commitment import RenderTarget

RGB = tuple[int, int, int]
DEFAULT_ACCENT: RGB = (47, 85, 151)


def rgb_to_hex(rgb: RGB) -> str:
    return "{:02X}{:02X}{:02X}".format(*rgb)


def hex_to_rgb(text: str) -> RGB:
    text = text.strip().lstrip("#")
    if len(text) != 6:
        raise ValueError(f"expected RRGGBB, got {text!r}")
    value = int(text, 16)
    return ((value >> 16) & 0xFF, (value >> 8) & 0xFF, value & 0xFF)


def _check_rgb(rgb: Sequence[int]) -> RGB:
    if len(rgb) != 3 or not all(isinstance(c, int) and 0 <= c <= 255 for c in rgb):
        raise ValueError(f"invalid sRGB triple {rgb!r}")
    return (rgb[0], rgb[1], rgb[2])


class BodyMode(str, enum.Enum):
    BULLETS = "Bullets"
    PARAGRAPH = "Paragraph"


class ThemeProvenance(str, enum.Enum):
    FROM_FIGURES = "FromFigures"
    DEFAULT_ACCENT = "DefaultAccent"
    OVERRIDE = "Override"


@dataclass(frozen=True)
class ThemeColor:
    rgb: RGB
    provenance: ThemeProvenance

    def __post_init__(self) -> None:
        _check_rgb(self.rgb)

    @property
    def hex(self) -> str:
        return rgb_to_hex(self.rgb)


@dataclass(frozen=True)
class Run:
    text: str
    bold: bool = False
    color: RGB | None = None

    def __post_init__(self) -> None:
        if self.color is not None:
            _check_rgb(self.color)


@dataclass(frozen=True)
class TextBlock:
    runs: tuple[Run, ...]
    indent_level: int = 0

    def __post_init__(self) -> None:
        if not self.runs:
            raise ValueError("a text block needs at least one run")
        if not 0 <= self.indent_level <= 3:
            raise ValueError(f"indent level must be 0-3, got {self.indent_level}")

    @property
    def text(self) -> str:
        return "".join(r.text for r in self.runs)

    @classmethod
    def plain(cls, text: str, level: int = 0) -> "TextBlock":
        return cls((Run(text),), level)


@dataclass(frozen=True)
class SlideVisual:
    asset_id: str
    zone_index: int


@dataclass(frozen=True)
class Slide:
    title: str
    layout_id: int
    blocks: tuple[TextBlock, ...] = ()
    visuals: tuple[SlideVisual, ...] = ()
    footnotes: tuple[str, ...] = ()
    body_mode: BodyMode = BodyMode.BULLETS
    section_index: int = 0
    paragraph_ids: tuple[str, ...] = ()

    @property
    def chars(self) -> int:
        return sum(len(r.text) for b in self.blocks for r in b.runs)

    @property
    def text(self) -> str:
        return "\n".join(b.text for b in self.blocks)

    @property
    def asset_ids(self) -> list[str]:
        return [v.asset_id for v in self.visuals]


@dataclass(frozen=True)
class SlidePlan:
    deck_title: str
    slides: tuple[Slide, ...]
    theme: ThemeColor | None = None
    render_target: RenderTarget = RenderTarget.PPTX
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def theme_rgb(self) -> RGB:
        return self.theme.rgb if self.theme else DEFAULT_ACCENT

    def with_slides(self, slides: Sequence[Slide]) -> "SlidePlan":
        return replace(self, slides=tuple(slides))

    def to_json(self) -> dict[str, Any]:
        return {
            "meta": {
                "deck_title": self.deck_title,
                "theme_color": self.theme.hex if self.theme else None,
                "theme_provenance": self.theme.provenance.value if self.theme else None,
                "render_target": self.render_target.value,
            },
            "slides": [slide_to_json(s) for s in self.slides],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=2)

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "SlidePlan":
        meta = data["meta"]
        theme = None
        if meta.get("theme_color"):
            theme = ThemeColor(hex_to_rgb(meta["theme_color"]), ThemeProvenance(meta["theme_provenance"]))
        return cls(
            deck_title=meta["deck_title"],
            slides=tuple(slide_from_json(s) for s in data["slides"]),
            theme=theme,
            render_target=RenderTarget(meta.get("render_target", "pptx")),
        )


def slide_to_json(s: Slide) -> dict[str, Any]:
    return {
        "title": s.title,
        "layout_id": s.layout_id,
        "body_mode": s.body_mode.value,
        "section_index": s.section_index,
        "paragraph_ids": list(s.paragraph_ids),
        "blocks": [
            {
                "indent_level": b.indent_level,
                "runs": [
                    {"text": r.text, "bold": r.bold, "color": rgb_to_hex(r.color) if r.color else None}
                    for r in b.runs
                ],
            }
            for b in s.blocks
        ],
        "visuals": [{"asset_id": v.asset_id, "zone_index": v.zone_index} for v in s.visuals],
        "footnotes": list(s.footnotes),
    }


def slide_from_json(d: Mapping[str, Any]) -> Slide:
    return Slide(
        title=d["title"],
        layout_id=int(d["layout_id"]),
        blocks=tuple(
            TextBlock(
                tuple(
                    Run(r["text"], bool(r.get("bold")), hex_to_rgb(r["color"]) if r.get("color") else None)
                    for r in b["runs"]
                ),
                int(b.get("indent_level", 0)),
            )
            for b in d.get("blocks", [])
        ),
        visuals=tuple(SlideVisual(v["asset_id"], int(v["zone_index"])) for v in d.get("visuals", [])),
        footnotes=tuple(d.get("footnotes", [])),
        body_mode=BodyMode(d.get("body_mode", "Bullets")),
        section_index=int(d.get("section_index", 0)),
        paragraph_ids=tuple(d.get("paragraph_ids", [])),
    )
