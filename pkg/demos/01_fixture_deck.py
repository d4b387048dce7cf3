# Walk the bundled fixture paper through every stage under transcript replay.
# No model endpoint is needed: each agent answer comes from the committed
# transcript, so the printed numbers are the same on every run.
#
#   python3 demos/01_fixture_deck.py [out_dir]

# %%
import sys
from pathlib import Path

from discodeck.gateway import Gateway
from discodeck.outline import format_trace
from discodeck.pipeline import generate, spec_from

ROOT = Path(__file__).resolve().parents[1]
FIX = ROOT / "tests" / "fixtures"
out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out")

# %% The 20-minute talk first. generate() never raises; failures land on the manifest.
res = generate(FIX / "paper.md", FIX / "manifest.json", spec_from("Research Scientists", 20, "pptx"),
               Gateway.replay(FIX / "transcripts" / "talk-20min.jsonl"), out_dir / "talk20.pptx")
print("ok:", res.manifest.ok, "| deck:", res.manifest.outputs.get("deck"))
print("sections:", [s.title for s in res.bundle.sections])

# %% The commitment fixes the slide budget and the storyline before any slide exists.
c = res.commitment
print("slide budget", c.slide_budget, "| per section:", [(b.section_title, b.budget_slides) for b in c.section_plan])
print(c.to_markdown()[:600])

# %% Refinement loop: each row is one Critic/Judge pass over the outline.
print(format_trace(res.trace))

# %% The resolved slide plan: layout, text volume and assets per slide.
for k, s in enumerate(res.plan.slides, 1):
    print(f"{k:>2}  layout {s.layout_id:>2}  {s.chars:>4} chars  {', '.join(s.asset_ids) or '-':<18} {s.title}")
print("theme", res.plan.theme)

# %% Same paper, 5 minutes: fewer slides, less text.
short = generate(FIX / "paper.md", FIX / "manifest.json", spec_from("Research Scientists", 5, "pptx"),
                 Gateway.replay(FIX / "transcripts" / "talk-5min.jsonl"), out_dir / "talk5.pptx")
for label, r in (("20 min", res), ("5 min", short)):
    print(label, len(r.plan.slides), "slides,", sum(s.chars for s in r.plan.slides), "characters")

# %% The other render targets replay the same transcript.
for target in ("html", "beamer"):
    r = generate(FIX / "paper.md", FIX / "manifest.json", spec_from("Research Scientists", 20, target),
                 Gateway.replay(FIX / "transcripts" / "talk-20min.jsonl"), out_dir / "talk20")
    print(target, "->", r.manifest.outputs["deck"])
