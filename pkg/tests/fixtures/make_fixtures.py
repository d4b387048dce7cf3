"""Regenerate the fixture media, asset manifest and recorded transcripts.

Run from the repository root:  python3 tests/fixtures/make_fixtures.py
The transcripts are recorded against the offline heuristic responder, so
regeneration needs no model endpoint.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from PIL import Image, ImageDraw

from discodeck.commitment import PresentationSpec
from discodeck.gateway import Gateway, GatewayMode
from discodeck.gateway.offline import offline_transport
from discodeck.gateway.transcript import AgentTranscript
from discodeck.pipeline import generate
from discodeck.render import beamer_text, html_text

HERE = Path(__file__).resolve().parent
MEDIA = HERE / "media"
FIXED_CLOCK = "2025-01-01T00:00:00+00:00"
DURATIONS = (20, 5)


def _canvas(w: int, h: int) -> tuple[Image.Image, ImageDraw.ImageDraw]:
    img = Image.new("RGB", (w, h), (255, 255, 255))
    return img, ImageDraw.Draw(img)


def make_media() -> None:
    MEDIA.mkdir(exist_ok=True)
    # pipeline diagram: predictor box feeding an eviction box
    img, d = _canvas(640, 360)
    d.rectangle((40, 110, 270, 250), fill=(31, 92, 153))
    d.rectangle((370, 110, 600, 250), fill=(31, 92, 153))
    d.polygon([(280, 165), (350, 165), (350, 150), (365, 180), (350, 210), (350, 195), (280, 195)], fill=(200, 90, 30))
    img.save(MEDIA / "fig1_overview.png")
    # stall count against pan speed: two bar series
    img, d = _canvas(600, 400)
    for k in range(6):
        x = 60 + k * 85
        d.rectangle((x, 360 - 40 * (k + 1), x + 30, 360), fill=(120, 120, 120))
        d.rectangle((x + 32, 360 - 22 * (k + 1), x + 62, 360), fill=(31, 92, 153))
    d.line((40, 360, 580, 360), fill=(0, 0, 0), width=3)
    img.save(MEDIA / "fig2_stalls_vs_speed.png")
    # benefit kept under memory pressure: line chart
    img, d = _canvas(600, 400)
    pts = [(60 + k * 100, 300 - v) for k, v in enumerate((150, 190, 220, 235, 240, 242))]
    d.line(pts, fill=(31, 92, 153), width=8)
    pts = [(60 + k * 100, 300 - v) for k, v in enumerate((20, 60, 120, 170, 200, 210))]
    d.line(pts, fill=(120, 120, 120), width=8)
    img.save(MEDIA / "fig3_memory.png")
    # bandwidth table as an image
    img, d = _canvas(480, 200)
    for r in range(4):
        d.line((20, 30 + 45 * r, 460, 30 + 45 * r), fill=(60, 60, 60), width=2)
    d.rectangle((20, 30, 460, 75), fill=(31, 92, 153))
    img.save(MEDIA / "tab2_bandwidth.png")


MANIFEST = {
    "assets": [
        {"id": "Figure 1", "kind": "figure", "media_path": "media/fig1_overview.png", "width_px": 640,
         "height_px": 360, "caption": "Overview of ATC: the gesture predictor estimates the next viewport and the "
                                       "eviction rule ranks cached tiles against it."},
        {"id": "Figure 2", "kind": "figure", "media_path": "media/fig2_stalls_vs_speed.png", "width_px": 600,
         "height_px": 400, "caption": "Visible stalls against pan speed for LRU and ATC during fast flicks."},
        {"id": "Figure 3", "kind": "figure", "media_path": "media/fig3_memory.png", "width_px": 600,
         "height_px": 400, "caption": "Share of the stall reduction kept as cache memory shrinks from 64 MB to 32 MB."},
        {"id": "Table 1", "kind": "table", "caption": "Visible stalls per session by device for LRU, the prefetch "
                                                      "ring and ATC at a 64 MB cache.",
         "cells": [["Device", "LRU", "Ring", "ATC"], ["Phone A", "31", "24", "18"], ["Phone B", "27", "22", "16"],
                   ["Phone C", "35", "28", "21"]]},
        {"id": "Table 2", "kind": "table", "media_path": "media/tab2_bandwidth.png", "width_px": 480,
         "height_px": 200, "caption": "Bandwidth downloaded per session: ATC prefetches fewer bytes than the ring."},
        {"id": "Table 3", "kind": "table", "caption": "Ablation of the decode cost term in the eviction rule on "
                                                      "satellite and vector layers.",
         "cells": [["Variant", "Satellite", "Vector"], ["ATC", "16", "12"], ["ATC without cost", "19", "12"]]},
    ],
}


def record(duration: int) -> None:
    gw = Gateway(GatewayMode.RECORD, offline_transport(), clock=lambda: FIXED_CLOCK, max_in_flight=1)
    with tempfile.TemporaryDirectory() as tmp:
        res = generate(HERE / "paper.md", HERE / "manifest.json", PresentationSpec(duration_minutes=duration), gw,
                       Path(tmp) / "deck.pptx")
    if not res.manifest.ok:
        raise SystemExit(res.manifest.fatal)
    path = HERE / "transcripts" / f"talk-{duration}min.jsonl"
    path.parent.mkdir(exist_ok=True)
    # concurrent stages append in completion order; a stable sort by digest
    # keeps regenerated files byte-identical while preserving repair order
    AgentTranscript(sorted(gw.transcript.entries, key=lambda e: e.digest)).save(path)
    print(f"{path.name}: {len(gw.transcript)} entries, {len(res.plan.slides)} slides")
    if duration == 20:
        # golden renders, with media paths relative to the golden directory
        golden = HERE / "golden"
        golden.mkdir(exist_ok=True)
        (golden / "talk-20min.html").write_text(html_text(res.plan, bundle=res.bundle, out_dir=golden),
                                                encoding="utf-8")
        (golden / "talk-20min.tex").write_text(beamer_text(res.plan, bundle=res.bundle, out_dir=golden),
                                               encoding="utf-8")


def main() -> None:
    make_media()
    (HERE / "manifest.json").write_text(json.dumps(MANIFEST, indent=2) + "\n", encoding="utf-8")
    for d in DURATIONS:
        record(d)


if __name__ == "__main__":
    main()
