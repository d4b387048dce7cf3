# The evaluation protocol on the fixture decks, answered by the built-in
# offline responder instead of a judge model. The numbers show the mechanics
# (scoring, shuffling, majority voting); they say nothing about deck quality.
#
#   python3 demos/03_evaluation_protocol.py

# %%
import tempfile
from pathlib import Path

from discodeck.evalharness import (
    Branch,
    CurationRecord,
    DeckEvidence,
    Dimension,
    PresentationType,
    QuizType,
    curate,
    extract_slide_text,
    generate_quiz,
    judge_rubric,
    pairwise_compare,
    rouge_l,
    strip_for_quiz,
    take_quiz,
)
from discodeck.gateway import Gateway, GatewayMode
from discodeck.gateway.offline import offline_transport
from discodeck.pipeline import generate, spec_from

FIX = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
paper = (FIX / "paper.md").read_text(encoding="utf-8")
tmp = Path(tempfile.mkdtemp())
decks = {}
for minutes in (20, 5):
    res = generate(FIX / "paper.md", FIX / "manifest.json", spec_from("Research Scientists", minutes, "pptx"),
                   Gateway.replay(FIX / "transcripts" / f"talk-{minutes}min.jsonl"), tmp / f"d{minutes}.pptx")
    decks[minutes] = DeckEvidence(tuple(extract_slide_text(res.manifest.outputs["deck"])))

# %% ROUGE-L of slide text against the paper body (references stripped).
body = strip_for_quiz(paper)
for m, ev in decks.items():
    r = rouge_l("\n".join(ev.texts), body)
    print(f"{m:>2} min  P {r.precision:.3f}  R {r.recall:.3f}  F {r.f_measure:.3f}  (x1000: {r.scaled:.1f})")

# %% Quiz: 25 questions from the paper, answered from slide text only.
# The offline taker takes the first option whose filled-in sentence prefix
# appears on a slide, so it has a position bias and shuffling moves its score.
gw = Gateway(GatewayMode.RECORD, offline_transport())
items = generate_quiz(paper, QuizType.STORY, gw)
for m, ev in decks.items():
    plain = take_quiz(items, ev, gw)
    shuffled = take_quiz(items, ev, gw, seed=7)
    print(f"{m:>2} min  accuracy {plain.accuracy:.0f}  (shuffled options: {shuffled.accuracy:.0f})")

# %% Checklist rubrics, raw and on the 0-100 scale.
for dim in (Dimension.TQ, Dimension.NF):
    s = judge_rubric(decks[20], dim, gw)
    print(dim.value, s.score, "/ 10 ->", s.normalized)

# %% Pairwise preference, 11 trials with counterbalanced order.
res = pairwise_compare(decks[20], decks[5], Branch.OVERALL_QUALITY, gw, paper_text=body)
print("votes A/B:", res.votes_a, res.votes_b, "winner:", res.winner.value)

# %% Benchmark curation: oral talks with at least three figures and three tables.
records = [CurationRecord(PresentationType.ORAL, 3, 3, "boundary"),
           CurationRecord(PresentationType.ORAL, 2, 8, "few figures"),
           CurationRecord(PresentationType.POSTER, 9, 9, "poster")]
print("kept:", [r.paper_id for r in curate(records)])
