from __future__ import annotations

import json
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from conftest import transcript
from discodeck.commitment import (
    GlobalCommitment,
    PresentationSpec,
    SectionBudget,
    budget_window,
    build_commitment,
    fallback_commitment,
    slide_budget,
    uniform_plan,
    validate_commitment,
)
from discodeck.gateway import Gateway, GatewayMode
from discodeck.gateway.transcript import AgentTranscript
from discodeck.gateway.transport import ScriptedTransport


def _complete(bundle) -> GlobalCommitment:
    titles = [s.title for s in bundle.sections]
    return GlobalCommitment(
        snapshot="A talk about caching map tiles.",
        thesis="Predictive caching reduces stalls.",
        key_takeaways=("fewer stalls", "bounded memory"),
        prerequisites=("basic web mapping",),
        narrative_spine=("problem", "method", "results"),
        section_plan=tuple(SectionBudget(t, b) for t, b in zip(titles, uniform_plan(titles, 20))),
        slide_budget=20,
    )


@pytest.mark.parametrize("minutes,expected", [(3, 3), (5, 5), (20, 20), (45, 45), (120, 120)])
def test_slide_budget_is_one_per_minute(minutes, expected):
    assert slide_budget(minutes) == expected
    assert PresentationSpec(duration_minutes=minutes).slide_budget == expected


def test_budget_window_is_twenty_percent():
    assert budget_window(20) == pytest.approx((16.0, 24.0))
    assert budget_window(5) == pytest.approx((4.0, 6.0))


@pytest.mark.parametrize("minutes", [0, 2, 121])
def test_duration_outside_range_rejected(minutes):
    with pytest.raises(ValueError):
        PresentationSpec(duration_minutes=minutes)


def test_blank_audience_rejected():
    with pytest.raises(ValueError):
        PresentationSpec(audience="  ")


def test_complete_commitment_validates(fixture_bundle):
    assert validate_commitment(_complete(fixture_bundle), fixture_bundle) == []


def test_missing_narrative_spine_is_named(fixture_bundle):
    c = replace(_complete(fixture_bundle), narrative_spine=())
    report = validate_commitment(c, fixture_bundle)
    assert any("narrative_spine" in e for e in report)


def test_unmatched_section_title(fixture_bundle):
    c = _complete(fixture_bundle)
    plan = c.section_plan[:-1] + (SectionBudget("Appendix Z", c.section_plan[-1].budget_slides),)
    report = validate_commitment(replace(c, section_plan=plan), fixture_bundle)
    expected = {"Appendix Z"} - {s.title for s in fixture_bundle.sections}
    assert expected == {"Appendix Z"}
    assert any("unmatched" in e and "Appendix Z" in e for e in report)


def test_budget_sum_outside_window(fixture_bundle):
    c = _complete(fixture_bundle)
    plan = tuple(SectionBudget(s.section_title, 5) for s in c.section_plan)  # 35 > 24
    assert any("outside" in e for e in validate_commitment(replace(c, section_plan=plan), fixture_bundle))


def test_too_many_takeaways(fixture_bundle):
    c = replace(_complete(fixture_bundle), key_takeaways=tuple(f"t{i}" for i in range(8)))
    assert any("1-7" in e for e in validate_commitment(c, fixture_bundle))


def test_json_round_trip(fixture_bundle):
    c = _complete(fixture_bundle)
    again = GlobalCommitment.from_json(json.loads(c.dumps()))
    assert again == c


def test_markdown_has_all_five_parts(fixture_bundle):
    md = _complete(fixture_bundle).to_markdown()
    for heading in ("## Snapshot", "## Core Content", "## Talk Contract", "## Narrative Spine", "## Section Plan"):
        assert heading in md


def test_replay_budgets_follow_duration(replay_runs):
    c20, c5 = replay_runs[20].commitment, replay_runs[5].commitment
    lo, hi = budget_window(20)
    assert lo <= c20.total_budget <= hi
    assert c5.total_budget < c20.total_budget
    assert not c20.fallback and not c5.fallback


def test_replay_commitment_is_bit_deterministic(fixture_bundle):
    spec = PresentationSpec(duration_minutes=20)
    a = build_commitment(fixture_bundle, spec, Gateway.replay(transcript(20)))
    b = build_commitment(fixture_bundle, spec, Gateway.replay(transcript(20)))
    assert a.dumps() == b.dumps()


def test_garbage_output_falls_back_to_uniform_plan(fixture_bundle):
    spec = PresentationSpec(duration_minutes=14)
    gw = Gateway(GatewayMode.RECORD, ScriptedTransport(lambda req: "no json here"))
    c = build_commitment(fixture_bundle, spec, gw)
    assert c.fallback
    assert len(gw.transcript) == 1 + gw.max_repairs
    assert validate_commitment(c, fixture_bundle, spec.slide_budget) == []
    assert [s.budget_slides for s in c.section_plan] == [2] * 7
    intro = fixture_bundle.sections[0].paragraphs[0].text
    assert intro.startswith(c.thesis)
    # the fallback is a pure function of its inputs
    assert build_commitment(fixture_bundle, spec, gw).dumps() == c.dumps()


def test_fallback_is_deterministic_when_replayed(fixture_bundle, tmp_path):
    spec = PresentationSpec(duration_minutes=9)
    gw = Gateway(GatewayMode.RECORD, ScriptedTransport(lambda req: "{}"))
    first = build_commitment(fixture_bundle, spec, gw)
    gw.save_transcript(tmp_path / "t.jsonl")
    again = build_commitment(fixture_bundle, spec, Gateway.replay(tmp_path / "t.jsonl"))
    assert first.dumps() == again.dumps()


@given(st.integers(3, 120), st.integers(3, 120))
def test_budget_monotone_in_duration(fixture_bundle, d1, d2):
    d1, d2 = min(d1, d2), max(d1, d2)
    c1 = fallback_commitment(fixture_bundle, PresentationSpec(duration_minutes=d1))
    c2 = fallback_commitment(fixture_bundle, PresentationSpec(duration_minutes=d2))
    assert c1.total_budget <= c2.total_budget
    assert validate_commitment(c1, fixture_bundle) == []


@given(st.lists(st.text(min_size=1, max_size=5), min_size=1, max_size=12), st.integers(0, 200))
def test_uniform_plan_sums_to_budget(titles, budget):
    plan = uniform_plan(titles, budget)
    assert sum(plan) == budget
    assert max(plan) - min(plan) <= 1
    assert plan == sorted(plan, reverse=True)


@pytest.mark.parametrize("minutes", [20, 5])
def test_downstream_requests_embed_commitment(replay_runs, minutes):
    md = replay_runs[minutes].commitment.to_markdown()
    js = json.dumps(replay_runs[minutes].commitment.to_json(), sort_keys=True)
    entries = AgentTranscript.load(transcript(minutes)).entries
    downstream = [e for e in entries if e.agent not in ("DiscourseParser", "CommitmentBuilder")]
    assert downstream
    for e in downstream:
        payload = json.loads(e.request["user_payload"].split("\n\n### Repair")[0])
        embedded = payload["commitment"]
        assert embedded == md or json.dumps(embedded, sort_keys=True) == js, e.agent
