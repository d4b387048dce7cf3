"""Acceptance suite: one PASS/FAIL line per criterion, each under its runtime limit.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the terminal summary. Each criterion times only its own work, so session
fixtures are not used where their setup would hide cost.
"""

from __future__ import annotations

import itertools
import json
import random
import time
import zipfile
from contextlib import contextmanager
from pathlib import Path
from xml.dom import minidom

import pytest
from PIL import Image

from conftest import ACCEPTANCE_LINES, FIXTURES, MANIFEST, PAPER, transcript
from discodeck.deck import (
    DEFAULT_ACCENT,
    BodyMode,
    Slide,
    SlidePlan,
    SlideVisual,
    TextBlock,
    ThemeProvenance,
    default_catalog,
    extract_theme_color,
    parse_markup,
    refine_content,
    render_markup,
    select_layout,
)
from discodeck.discourse import DiscourseTree, compute_stats, node_from_json, pearson, validate_tree
from discodeck.errors import Overflow
from discodeck.evalharness import (
    OPTION_E,
    Branch,
    CurationRecord,
    DeckEvidence,
    Dimension,
    QuizItem,
    QuizType,
    ReferenceSet,
    RubricScore,
    Vote,
    curate,
    extract_slide_text,
    is_correct,
    lcs_length,
    majority_vote,
    pairwise_compare,
    rouge_l_tokens,
    score_answers,
    take_quiz,
)
from discodeck.gateway import Gateway, GatewayMode
from discodeck.gateway.offline import offline_responder
from discodeck.gateway.transport import ScriptedTransport
from discodeck.ingest import Paragraph, Section, SectionGroup, build_bundle
from discodeck.outline import run_refinement_loop, validate_outline
from discodeck.pipeline import generate, spec_from
from oracles import (
    BruteForceLCSTable,
    all_sequences,
    brute_force_lcs,
    count_wire_nodes,
    histogram_theme,
    markup_visible_text,
    pearson_fraction,
    random_balanced_markup,
    random_tree_json,
    rouge_from_lcs,
)

THEME = (24, 88, 152)
SLIDE_CX, SLIDE_CY = 12_192_000, 6_857_250


@contextmanager
def criterion(number: int, title: str, limit_s: float):
    """Time the block, print one PASS/FAIL line and fail on an assertion or an overrun."""
    t0 = time.perf_counter()
    error: BaseException | None = None
    try:
        yield
    except BaseException as exc:  # noqa: BLE001 - reported, then re-raised
        error = exc
    elapsed = time.perf_counter() - t0
    ok = error is None and elapsed < limit_s
    why = "" if ok else (f": {type(error).__name__}: {str(error).splitlines()[0] if str(error) else ''}"
                         if error else f": over the {limit_s:g} s limit")
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}  {title}  [{elapsed:.2f} s / {limit_s:g} s]{why}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    if error is not None:
        raise error
    assert elapsed < limit_s, line


# 1 ---------------------------------------------------------------------------

def test_criterion_01_discourse_structural_law():
    with criterion(1, "1000 random trees: relations = leaves - 1, Pearson r = 1", 5.0):
        rng = random.Random(20240601)
        leaves, relations = [], []
        for _ in range(1000):
            n = rng.randint(2, 40)
            ids = [f"s1.p{i}" for i in range(1, n + 1)]
            obj = random_tree_json(ids, rng)
            section = Section(1, "Method", SectionGroup.METHODOLOGY,
                              tuple(Paragraph(pid, f"text {pid}") for pid in ids))
            tree = DiscourseTree(1, node_from_json(obj))
            assert validate_tree(tree, section) == []
            assert validate_tree({"section": 1, "tree": obj}, section) == []
            stats = compute_stats(tree)
            wire_leaves, wire_rels = count_wire_nodes(obj)
            assert stats.leaf_count == wire_leaves == n
            assert stats.relation_count == wire_rels == n - 1
            leaves.append(stats.leaf_count)
            relations.append(stats.relation_count)
        assert pearson(leaves, relations) == 1.0
        assert pearson_fraction(leaves, relations) == 1


# 2 ---------------------------------------------------------------------------

BAD_OUTLINE = {"slides": [{"section_index": 1, "slide_title": "x", "paragraph_ids": ["nope"]}]}
READY = {"decision": "ready", "rationale": "fine", "must_fix": [], "guidance": ""}
REVISE = {"decision": "revise", "rationale": "not yet", "guidance": "split slide 1",
          "must_fix": [{"issue": "slide 1 is overloaded", "severity": "high", "affected_slides": [1]}]}
ADVERSARIAL = {
    "SlidePlanner": ["garbage", BAD_OUTLINE, {"slides": []}, "```json\n{\"slides\": 3}\n```", None],
    "NarrativeCritic": ["{", {"findings": {}}, {"findings": {k: [] for k in "abcde"}}, "null", None],
    "NarrativeJudge": [REVISE, READY, {**REVISE, "must_fix": []}, "[]", {"decision": "maybe"}, None],
    "Reviser": [BAD_OUTLINE, "garbage", {"slides": []}, None],
}


def _adversarial_gateway(rng: random.Random) -> Gateway:
    def respond(req):
        options = ADVERSARIAL.get(req.agent.value)
        choice = rng.choice(options) if options else None
        if choice is None:
            return offline_responder(req)
        return choice if isinstance(choice, str) else json.dumps(choice)

    return Gateway(GatewayMode.RECORD, ScriptedTransport(respond))


def test_criterion_02_loop_bound(tmp_path):
    bundle = build_bundle(PAPER.read_text(encoding="utf-8"), MANIFEST)
    base = Gateway.replay(transcript(20))
    from discodeck.commitment import build_commitment
    from discodeck.discourse import parse_document

    trees = parse_document(bundle, base)
    commitment = build_commitment(bundle, spec_from("Research Scientists", 20, "pptx"), base)
    with criterion(2, "200 adversarial replay transcripts: <= 3 iterations, valid outline", 30.0):
        for seed in range(200):
            recorder = _adversarial_gateway(random.Random(seed))
            recorded, _ = run_refinement_loop(bundle, trees, commitment, recorder)
            path = tmp_path / f"adv-{seed}.jsonl"
            recorder.save_transcript(path)
            outline, trace = run_refinement_loop(bundle, trees, commitment, Gateway.replay(path))
            assert 1 <= len(trace.iterations) <= 3, seed
            assert validate_outline(outline, bundle, trees) == [], seed
            assert outline == recorded, seed


# 3 ---------------------------------------------------------------------------

def test_criterion_03_rouge_oracle_equivalence():
    with criterion(3, "ROUGE-L: every pair of length <= 8 over 3 symbols equals brute-force LCS", 60.0):
        seqs = all_sequences("abc", 8)
        table = BruteForceLCSTable(seqs)
        refs = ReferenceSet(seqs)
        lengths = [len(s) for s in seqs]
        # the oracle itself agrees with plain enumeration on a sample
        rng = random.Random(3)
        for _ in range(300):
            a, b = rng.choice(seqs), rng.choice(seqs)
            assert table.row(a)[table.index[b]] == brute_force_lcs(a, b)
        for a in seqs:
            expected = table.row(a)
            got = refs.lcs(a)
            assert (got == expected).all(), a
        # scalar path, every pair up to length 6, with precision/recall/F
        small = [s for s in seqs if len(s) <= 6]
        for a in small:
            expected = table.row(a)
            for b in small:
                k = int(expected[table.index[b]])
                r = rouge_l_tokens(a, b)
                assert lcs_length(a, b) == r.lcs == k, (a, b)
                assert (r.precision, r.recall, r.f_measure) == rouge_from_lcs(k, len(a), len(b)), (a, b)
        assert len(seqs) == 9841 and sum(lengths) > 0


# 4 ---------------------------------------------------------------------------

def _histogram_image(rng: random.Random) -> tuple[Image.Image, list[tuple[int, int, int]]]:
    """Image whose pixel multiset is chosen up front, in shuffled order."""
    w, h = rng.randint(4, 64), rng.randint(4, 64)
    palette = [tuple(rng.randrange(256) for _ in range(3)) for _ in range(rng.randint(1, 6))]
    counts = [rng.randint(1, 50) for _ in palette]
    pixels: list[tuple[int, int, int]] = []
    for color, c in zip(palette, counts):
        pixels += [color] * c
    pixels = (pixels * (w * h // len(pixels) + 1))[: w * h]
    rng.shuffle(pixels)
    img = Image.new("RGB", (w, h))
    img.putdata(pixels)
    return img, pixels


def test_criterion_04_theme_color_determinism():
    with criterion(4, "50 synthetic images match the histogram oracle; all white gives DefaultAccent", 10.0):
        rng = random.Random(44)
        images, pixel_lists = [], []
        for _ in range(50):
            img, px = _histogram_image(rng)
            images.append(img)
            pixel_lists.append(px)
            single = histogram_theme([px])
            theme = extract_theme_color([img])
            if single is None:
                assert theme.provenance is ThemeProvenance.DEFAULT_ACCENT
            else:
                assert theme.rgb == single and theme.provenance is ThemeProvenance.FROM_FIGURES
        assert extract_theme_color(images).rgb == (histogram_theme(pixel_lists) or DEFAULT_ACCENT)
        white = extract_theme_color([Image.new("RGB", (40, 30), (255, 255, 255))])
        assert white.rgb == DEFAULT_ACCENT and white.provenance is ThemeProvenance.DEFAULT_ACCENT


# 5 ---------------------------------------------------------------------------

def _check_ooxml(path: Path) -> None:
    with zipfile.ZipFile(path) as zf:
        assert zf.testzip() is None
        names = set(zf.namelist())
        xml_parts = {n: zf.read(n) for n in names if n.endswith((".xml", ".rels"))}
        docs = {n: minidom.parseString(data) for n, data in xml_parts.items()}
    ct = docs["[Content_Types].xml"]
    overrides = {e.getAttribute("PartName").lstrip("/") for e in ct.getElementsByTagName("Override")}
    defaults = {e.getAttribute("Extension").lower() for e in ct.getElementsByTagName("Default")}
    for n in names:
        assert n in overrides or n.rsplit(".", 1)[-1].lower() in defaults, f"no content type for {n}"
    for n, doc in docs.items():
        if not n.endswith(".rels"):
            continue
        base = n.replace("_rels/", "").removesuffix(".rels")
        folder = base.rsplit("/", 1)[0] if "/" in base else ""
        for rel in doc.getElementsByTagName("Relationship"):
            if rel.getAttribute("TargetMode") == "External":
                continue
            target = rel.getAttribute("Target")
            parts = (target.lstrip("/") if target.startswith("/") else f"{folder}/{target}").split("/")
            resolved: list[str] = []
            for p in parts:
                if p == "..":
                    resolved.pop()
                elif p and p != ".":
                    resolved.append(p)
            assert "/".join(resolved) in names, f"{n} points at missing {target}"
    size = docs["ppt/presentation.xml"].getElementsByTagName("p:sldSz")[0]
    assert (int(size.getAttribute("cx")), int(size.getAttribute("cy"))) == (SLIDE_CX, SLIDE_CY)


def test_criterion_05_ooxml_validity(tmp_path):
    with criterion(5, "fixture decks: ZIP integrity, well-formed XML, 12192000 x 6857250 EMU", 10.0):
        for minutes in (20, 5):
            res = generate(PAPER, MANIFEST, spec_from("Research Scientists", minutes, "pptx"),
                           Gateway.replay(transcript(minutes)), tmp_path / f"deck{minutes}.pptx")
            assert res.manifest.ok, res.manifest.fatal
            _check_ooxml(Path(res.manifest.outputs["deck"]))


# 6 ---------------------------------------------------------------------------

def test_criterion_06_replay_determinism(tmp_path):
    with criterion(6, "replay twice: byte-identical .pptx, .html and .tex", 30.0):
        for target in ("pptx", "html", "beamer"):
            outputs = []
            for run in ("a", "b"):
                res = generate(PAPER, MANIFEST, spec_from("Research Scientists", 20, target),
                               Gateway.replay(transcript(20)), tmp_path / run / "deck")
                assert res.manifest.ok, res.manifest.fatal
                outputs.append(Path(res.manifest.outputs["deck"]).read_bytes())
            assert outputs[0] == outputs[1], target
            assert outputs[0]


# 7 ---------------------------------------------------------------------------

def _corrupt(text: str, rng: random.Random) -> str:
    """Break the balance of a markup string: drop a closing brace, add an opener or a stray brace."""
    closers = [i for i, c in enumerate(text) if c == "}" and (i == 0 or text[i - 1] != "\\" or
                                                            (i >= 2 and text[i - 2] == "\\"))]
    roll = rng.random()
    if closers and roll < 0.4:
        i = rng.choice(closers)
        return text[:i] + text[i + 1:]
    if roll < 0.7:
        return text + "\\textbf{" + "tail"
    return "}" + text


def test_criterion_07_markup_round_trip():
    with criterion(7, "500 balanced strings round-trip; malformed strings keep their text", 5.0):
        rng = random.Random(77)
        malformed = 0
        for _ in range(500):
            text = random_balanced_markup(rng)
            runs, ok = parse_markup(text, THEME)
            assert ok, text
            assert "".join(r.text for r in runs) == markup_visible_text(text)
            again, ok2 = parse_markup(render_markup(runs), THEME)
            assert ok2 and again == runs
            broken = _corrupt(text, rng)
            runs_b, ok_b = parse_markup(broken, THEME)
            if not ok_b:
                malformed += 1
                assert all(not r.bold and r.color is None for r in runs_b)
                assert "".join(r.text for r in runs_b) == markup_visible_text(broken)
        assert malformed >= 400


# 8 ---------------------------------------------------------------------------

def test_criterion_08_evaluation_mechanics():
    with criterion(8, "11-trial majority never ties; E scores 0; rubric popcount; curation fixture", 10.0):
        for bits in itertools.product((Vote.A, Vote.B), repeat=11):
            a = bits.count(Vote.A)
            assert a != 11 - a
            assert majority_vote(bits) is (Vote.A if a >= 6 else Vote.B)

        rng = random.Random(8)
        deck_a, deck_b = DeckEvidence(texts=("a",)), DeckEvidence(texts=("b",))
        for seed in range(20):
            judge = Gateway(GatewayMode.RECORD, ScriptedTransport(
                lambda req, r=random.Random(seed): json.dumps({"winner": r.choice("12")})))
            res = pairwise_compare(deck_a, deck_b, rng.choice(list(Branch)), judge, seed=seed)
            assert res.trial_count == 11 and res.votes_a != res.votes_b
            assert res.winner is (Vote.A if res.votes_a > res.votes_b else Vote.B)

        for qt in QuizType:
            items = [QuizItem(qt, f"q{i}", ("w", "x", "y", "z"), "ABCD"[i % 4]) for i in range(25)]
            assert not any(is_correct(it, OPTION_E) for it in items)
            answers = [rng.choice("ABCDE") for _ in items]
            expected = sum(1 for it, a in zip(items, answers) if a != "E" and a == it.correct)
            assert score_answers(items, answers) == expected
            evidence = DeckEvidence(texts=("slide",), images=(b"img",))
            taker = Gateway(GatewayMode.RECORD, ScriptedTransport(lambda req: json.dumps(
                {"answers": [{"index": i, "answer": "E"} for i in range(25)]})))
            assert take_quiz(items, evidence, taker, seed=rng.randrange(1000)).accuracy == 0.0

        for dim in Dimension:
            for flags in itertools.product((False, True), repeat=10):
                s = RubricScore(dim, flags)
                assert s.score == sum(flags) and s.normalized == 10 * sum(flags)

        rows = json.loads((FIXTURES / "curation.json").read_text(encoding="utf-8"))
        assert len(rows) == 20
        assert any((r["presentation_type"], r["figure_count"], r["table_count"]) == ("Oral", 3, 3) for r in rows)
        records = [CurationRecord.from_json(r) for r in rows]
        assert [r.passes for r in records] == [r["expected_pass"] for r in rows]
        assert [r.paper_id for r in curate(records)] == [r["paper_id"] for r in rows if r["expected_pass"]]


# 9 ---------------------------------------------------------------------------

def test_criterion_09_duration_conditioning(tmp_path):
    with criterion(9, "5-minute deck has fewer slides and characters than the 20-minute deck", 30.0):
        decks = {}
        for minutes in (5, 20):
            res = generate(PAPER, MANIFEST, spec_from("Research Scientists", minutes, "pptx"),
                           Gateway.replay(transcript(minutes)), tmp_path / f"deck{minutes}.pptx")
            assert res.manifest.ok, res.manifest.fatal
            texts = extract_slide_text(res.manifest.outputs["deck"])
            decks[minutes] = (len(res.plan.slides), sum(s.chars for s in res.plan.slides),
                              len(texts), sum(len(t) for t in texts))
        short, long_ = decks[5], decks[20]
        assert short[0] < long_[0] and short[2] < long_[2]
        assert short[1] < long_[1] and short[3] < long_[3]


# 10 --------------------------------------------------------------------------

def _random_plan(rng: random.Random, bundle, asset_ids: list[str]) -> SlidePlan:
    n = rng.randint(1, 8)
    sections = sorted(rng.randint(1, len(bundle.sections)) for _ in range(n))
    pool = list(asset_ids)
    rng.shuffle(pool)
    slides = []
    for sec in sections:
        k = rng.randint(0, min(4, len(pool)))
        visuals = tuple(SlideVisual(pool.pop(), i) for i in range(k))
        blocks = tuple(TextBlock.plain("".join(rng.choice("abc de.") for _ in range(rng.randint(1, 400))))
                       for _ in range(rng.randint(1, 5)))
        ids = bundle.section(sec).paragraph_ids
        pids = tuple(rng.sample(ids, min(len(ids), rng.randint(0, 2))))
        slides.append(Slide("T", rng.randint(1, 14), blocks, visuals, (), BodyMode.BULLETS, sec, pids))
    return SlidePlan("d", tuple(slides))


def test_criterion_10_capacity_safety():
    bundle = build_bundle(PAPER.read_text(encoding="utf-8"), MANIFEST)
    with criterion(10, "1000 random plans: capacity respected, slide count never grows", 15.0):
        catalog = default_catalog()
        rng = random.Random(10)
        asset_ids = sorted(bundle.assets)
        for _ in range(1000):
            plan = _random_plan(rng, bundle, asset_ids)
            out = refine_content(plan, bundle, catalog=catalog)
            assert len(out.slides) <= len(plan.slides)
            for s in out.slides:
                assert catalog[s.layout_id].admits(s.chars, len(s.visuals))
                chosen = select_layout(s.chars, [bundle.assets[v.asset_id] for v in s.visuals], catalog)
                assert catalog[chosen].admits(s.chars, len(s.visuals))
            # select_layout on the raw drafts: an admitting layout or an honest Overflow
            for s in plan.slides:
                visuals = [bundle.assets[v.asset_id] for v in s.visuals]
                try:
                    chosen = select_layout(s.chars, visuals, catalog)
                except Overflow:
                    assert not any(not l.special and l.admits(s.chars, len(visuals))
                                   for l in catalog.layouts.values())
                else:
                    assert catalog[chosen].admits(s.chars, len(visuals))


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
