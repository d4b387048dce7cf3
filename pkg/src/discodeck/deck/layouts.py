"""The 14-template layout catalog and the deterministic layout rule table."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from ..errors import Overflow
from ..ingest import Asset, AssetKind

Rect = tuple[float, float, float, float]


@dataclass(frozen=True)
class FigureZone:
    rect: Rect
    preferred_aspect: float


@dataclass(frozen=True)
class LayoutTemplate:
    id: int
    name: str
    text_zones: tuple[Rect, ...]
    figure_zones: tuple[FigureZone, ...]
    table_zones: tuple[Rect, ...]
    max_chars: int
    special: bool = False

    @property
    def max_visuals(self) -> int:
        return len(self.figure_zones) + len(self.table_zones)

    @property
    def visual_zones(self) -> list[Rect]:
        """Figure zones then table zones; a visual's ``zone_index`` indexes this list."""
        return [z.rect for z in self.figure_zones] + list(self.table_zones)

    def admits(self, chars: int, visuals: int) -> bool:
        return chars <= self.max_chars and visuals <= self.max_visuals


@dataclass(frozen=True)
class LayoutCatalog:
    version: int
    title_zone: Rect
    footnote_zone: Rect
    max_visuals: int
    layouts: dict[int, LayoutTemplate]
    rules: dict[str, Any]

    def __getitem__(self, layout_id: int) -> LayoutTemplate:
        return self.layouts[layout_id]

    def volume(self, chars: int) -> str:
        tv = self.rules["text_volume"]
        if chars < tv["short_below"]:
            return "short"
        if chars > tv["long_above"]:
            return "long"
        return "medium"

    def shape(self, asset: Asset) -> str:
        if asset.kind is AssetKind.TABLE:
            return "table"
        a = self.rules["aspect"]
        if asset.aspect >= a["wide_at_least"]:
            return "wide"
        if asset.aspect <= a["tall_at_most"]:
            return "tall"
        return "square"

    def capacity_for(self, visuals: int) -> int:
        """Largest text capacity among layouts able to hold ``visuals`` visuals."""
        caps = [l.max_chars for l in self.layouts.values() if not l.special and l.max_visuals >= visuals]
        return max(caps, default=0)


def _rect(values: Sequence[float]) -> Rect:
    x, y, w, h = (float(v) for v in values)
    return (x, y, w, h)


def parse_catalog(data: dict[str, Any]) -> LayoutCatalog:
    layouts = {}
    for raw in data["layouts"]:
        lid = int(raw["id"])
        if lid in layouts:
            raise ValueError(f"layout {lid} defined twice")
        layouts[lid] = LayoutTemplate(
            id=lid,
            name=raw["name"],
            text_zones=tuple(_rect(r) for r in raw["text_zones"]),
            figure_zones=tuple(FigureZone(_rect(z["rect"]), float(z["preferred_aspect"])) for z in raw["figure_zones"]),
            table_zones=tuple(_rect(r) for r in raw["table_zones"]),
            max_chars=int(raw["max_chars"]),
            special=bool(raw.get("special", False)),
        )
    return LayoutCatalog(
        version=int(data["version"]),
        title_zone=_rect(data["title_zone"]),
        footnote_zone=_rect(data["footnote_zone"]),
        max_visuals=int(data["max_visuals"]),
        layouts=layouts,
        rules=data["rules"],
    )


@lru_cache(maxsize=None)
def default_catalog() -> LayoutCatalog:
    text = (resources.files("discodeck.deck") / "layouts.json").read_text(encoding="utf-8")
    return parse_catalog(json.loads(text))


def load_catalog(path: str | Path) -> LayoutCatalog:
    return parse_catalog(json.loads(Path(path).read_text(encoding="utf-8")))


def _overlap(a: Rect, b: Rect) -> bool:
    return a[0] < b[0] + b[2] and b[0] < a[0] + a[2] and a[1] < b[1] + b[3] and b[1] < a[1] + a[3]


def validate_catalog(catalog: LayoutCatalog) -> list[str]:
    errors = []
    if sorted(catalog.layouts) != list(range(1, 15)):
        errors.append(f"catalog ids must be exactly 1..14, got {sorted(catalog.layouts)}")
    eps = 1e-9
    for layout in catalog.layouts.values():
        zones = [catalog.title_zone, catalog.footnote_zone, *layout.text_zones, *layout.visual_zones]
        for z in zones:
            x, y, w, h = z
            if w <= 0 or h <= 0 or x < -eps or y < -eps or x + w > 1 + eps or y + h > 1 + eps:
                errors.append(f"layout {layout.id}: zone {z} outside the unit slide")
        for i in range(len(zones)):
            for j in range(i + 1, len(zones)):
                if _overlap(zones[i], zones[j]):
                    errors.append(f"layout {layout.id}: zones {zones[i]} and {zones[j]} overlap")
        if layout.max_visuals > catalog.max_visuals:
            errors.append(f"layout {layout.id}: more than {catalog.max_visuals} visual zones")
    return errors


def select_layout(chars: int, visuals: Sequence[Asset], catalog: LayoutCatalog | None = None) -> int:
    """Rule-table layout choice; falls back to the tightest layout that still fits.

    Raises ``Overflow`` when no regular layout can hold this much text next to
    this many visuals, and ``ValueError`` for more visuals than any slide holds.
    """
    catalog = catalog or default_catalog()
    n = len(visuals)
    if n > catalog.max_visuals:
        raise ValueError(f"at most {catalog.max_visuals} visuals per slide, got {n}")
    if chars < 0:
        raise ValueError("chars must be non-negative")
    volume = catalog.volume(chars)
    cell = catalog.rules["cells"][str(n)]
    if n == 1:
        cell = cell[catalog.shape(visuals[0])]
    preferred = catalog[int(cell[volume])]
    if preferred.admits(chars, n):
        return preferred.id
    candidates = [
        l for l in catalog.layouts.values() if not l.special and l.admits(chars, n)
    ]
    if not candidates:
        raise Overflow(
            f"{chars} characters do not fit any layout with room for {n} visual(s) "
            f"(max {catalog.capacity_for(n)})"
        )
    best = min(candidates, key=lambda l: (l.max_visuals - n, l.max_chars, l.id))
    return best.id
