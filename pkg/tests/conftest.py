from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

FIXTURES = HERE / "fixtures"
PAPER = FIXTURES / "paper.md"
MANIFEST = FIXTURES / "manifest.json"
TRANSCRIPTS = FIXTURES / "transcripts"

settings.register_profile("repo", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def fixture_bundle():
    from discodeck.ingest import build_bundle

    return build_bundle(PAPER.read_text(encoding="utf-8"), MANIFEST)


def transcript(minutes: int) -> Path:
    return TRANSCRIPTS / f"talk-{minutes}min.jsonl"


@pytest.fixture(scope="session")
def replay_runs(tmp_path_factory):
    """The fixture paper generated under replay for the 20- and 5-minute transcripts."""
    from discodeck.gateway import Gateway
    from discodeck.pipeline import generate, spec_from

    runs = {}
    for minutes in (20, 5):
        out = tmp_path_factory.mktemp(f"replay{minutes}") / "deck.pptx"
        gw = Gateway.replay(transcript(minutes))
        runs[minutes] = generate(PAPER, MANIFEST, spec_from("Research Scientists", minutes, "pptx"), gw, out)
        assert runs[minutes].manifest.ok, runs[minutes].manifest.fatal
    return runs


# filled by the acceptance suite, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
