from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from discodeck.deck import Run, parse_markup, render_markup, strip_markup
from discodeck.deck.markup import MarkupError, parse_markup_strict
from oracles import markup_visible_text, random_balanced_markup

THEME = (24, 88, 152)


def test_bold_span_gives_three_runs():
    runs, ok = parse_markup("uses \\textbf{RST} trees", THEME)
    assert ok
    assert runs == [Run("uses "), Run("RST", bold=True), Run(" trees")]


def test_no_markup_single_plain_run():
    runs, ok = parse_markup("plain text only", THEME)
    assert ok and runs == [Run("plain text only")]


def test_unbalanced_markup_kept_as_plain_text(caplog):
    runs, ok = parse_markup("\\textbf{broken", THEME)
    assert not ok
    assert runs == [Run("broken")]
    assert "malformed" in caplog.text


def test_any_color_name_becomes_theme():
    runs, ok = parse_markup("a \\textcolor{red}{b} \\textcolor{#00FF00}{c}", THEME)
    assert ok and [r.color for r in runs if r.text.strip() in "bc" and r.text.strip()] == [THEME, THEME]


def test_nested_bold_and_color():
    runs, _ = parse_markup("\\textbf{x \\textcolor{theme}{y}}", THEME)
    assert runs == [Run("x ", bold=True), Run("y", bold=True, color=THEME)]


def test_escapes_are_literal():
    runs, ok = parse_markup("set \\{a\\} and \\\\n", THEME)
    assert ok and runs == [Run("set {a} and \\n")]


@pytest.mark.parametrize("bad", ["}", "a { b", "\\textbf{a}}", "\\textcolor{theme}{x"])
def test_strict_parser_rejects(bad):
    with pytest.raises(MarkupError):
        parse_markup_strict(bad, THEME)


runs_strategy = st.lists(
    st.builds(Run, st.text(min_size=1, max_size=8), st.booleans(), st.sampled_from([None, THEME])),
    max_size=6,
)


@given(runs_strategy)
def test_render_then_parse_is_identity(runs):
    from discodeck.deck.markup import _merge

    parsed, ok = parse_markup(render_markup(runs), THEME)
    assert ok and parsed == _merge(list(runs))


@given(st.integers(0, 2**32 - 1))
def test_balanced_round_trip_against_scanner(seed):
    text = random_balanced_markup(random.Random(seed))
    runs, ok = parse_markup(text, THEME)
    assert ok
    assert "".join(r.text for r in runs) == markup_visible_text(text)
    again, ok2 = parse_markup(render_markup(runs), THEME)
    assert ok2 and again == runs


@given(st.text(alphabet="ab{}\\xtbfcolr", max_size=30))
def test_malformed_input_keeps_its_text(text):
    runs, ok = parse_markup(text, THEME)
    if not ok:
        assert "".join(r.text for r in runs) == strip_markup(text)
