"""End-to-end generation: ingest, discourse, commitment, outline loop, deck, render."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from .commitment import GlobalCommitment, PresentationSpec, RenderTarget, build_commitment
from .deck import RGB, SlidePlan, build_slide_plan
from .discourse import DiscourseTree, parse_document
from .errors import DiscodeckError
from .ingest import DocumentBundle, build_bundle
from .outline import LoopTrace, SlideOutline, run_refinement_loop
from .render import SUFFIX, RenderConfig, RenderReport, render

logger = logging.getLogger(__name__)

STAGES = ("ingest", "discourse", "commitment", "loop", "deck", "render")


class StageError(DiscodeckError):
    """The first fatal error of a run, tagged with the stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class RunManifest:
    inputs: dict[str, str]
    spec: dict[str, Any]
    mode: str
    transcript: str | None
    timings: dict[str, float] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    fatal: str | None = None
    started: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    @property
    def ok(self) -> bool:
        return self.fatal is None

    def to_json(self) -> dict[str, Any]:
        return asdict(self)

    def append_to(self, path: str | Path) -> None:
        """Manifests are append-only: one JSON line per run."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


@dataclass
class RunResult:
    manifest: RunManifest
    bundle: DocumentBundle | None = None
    trees: list[DiscourseTree] | None = None
    commitment: GlobalCommitment | None = None
    outline: SlideOutline | None = None
    trace: LoopTrace | None = None
    plan: SlidePlan | None = None
    report: RenderReport | None = None


def _dump(dir_: Path, stage: str, value: Any) -> Path:
    text = json.dumps(value, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    path = dir_ / f"{stage}-{sha256_bytes(text.encode('utf-8'))[:12]}.json"
    path.write_text(text, encoding="utf-8")
    return path


def generate(
    paper_path: str | Path,
    manifest_path: str | Path | None,
    spec: PresentationSpec,
    gateway: Any,
    out: str | Path,
    *,
    keep_intermediates: bool = False,
    theme_override: RGB | None = None,
    render_config: RenderConfig | None = None,
    transcript_path: str | Path | None = None,
    manifest_log: str | Path | None = None,
) -> RunResult:
    """Run every stage in order. Errors are recorded on the manifest, never raised.

    ``out`` is the deck path; its suffix is replaced by the one matching the
    render target. The run manifest is appended to ``manifest_log``
    (default: ``<deck dir>/runs.jsonl``).
    """
    paper_path = Path(paper_path)
    out = Path(out).with_suffix(SUFFIX[spec.render_target])
    inputs = {}
    for name, p in (("paper", paper_path), ("manifest", manifest_path)):
        if p is not None and Path(p).is_file():
            inputs[name] = sha256_bytes(Path(p).read_bytes())
    manifest = RunManifest(
        inputs=inputs,
        spec={
            "audience": spec.audience,
            "duration_minutes": spec.duration_minutes,
            "slide_budget": spec.slide_budget,
            "render_target": spec.render_target.value,
            "theme_override": "#%02X%02X%02X" % theme_override if theme_override else None,
        },
        mode=getattr(getattr(gateway, "mode", None), "value", "offline"),
        transcript=str(transcript_path) if transcript_path else None,
    )
    result = RunResult(manifest)
    inter = out.parent / f"{out.stem}.intermediates"
    if keep_intermediates:
        inter.mkdir(parents=True, exist_ok=True)

    def stage(name: str, fn: Callable[[], Any], dump: Callable[[Any], Any] | None = None) -> Any:
        t0 = time.perf_counter()
        try:
            value = fn()
        except Exception as exc:  # the first failure ends the run and is reported with its stage
            raise StageError(name, exc) from exc
        finally:
            manifest.timings[name] = round(time.perf_counter() - t0, 4)
        if keep_intermediates and dump is not None:
            manifest.outputs[f"intermediate:{name}"] = str(_dump(inter, name, dump(value)))
        return value

    try:
        if not paper_path.is_file():
            raise StageError("ingest", FileNotFoundError(f"paper not found: {paper_path}"))
        if manifest_path is not None and not Path(manifest_path).is_file():
            raise StageError("ingest", FileNotFoundError(f"asset manifest not found: {manifest_path}"))
        source = paper_path.read_text(encoding="utf-8")
        bundle = result.bundle = stage("ingest", lambda: build_bundle(source, manifest_path), lambda b: b.to_dict())
        trees = result.trees = stage(
            "discourse", lambda: parse_document(bundle, gateway),
            lambda ts: {"trees": [t.to_json() for t in ts]},
        )
        commitment = result.commitment = stage(
            "commitment", lambda: build_commitment(bundle, spec, gateway), lambda c: c.to_json()
        )
        outline, trace = stage(
            "loop", lambda: run_refinement_loop(bundle, trees, commitment, gateway),
            lambda v: {"outline": v[0].to_json(), "trace": v[1].to_json()},
        )
        result.outline, result.trace = outline, trace
        plan = result.plan = stage(
            "deck",
            lambda: build_slide_plan(outline, commitment, bundle, gateway, spec.render_target, theme_override),
            lambda p: p.to_json(),
        )
        report = result.report = stage(
            "render", lambda: render(plan, spec.render_target, out, render_config, bundle), lambda r: r.to_json()
        )
        manifest.outputs["deck"] = str(report.path)
        manifest.warnings += list(report.warnings)
    except StageError as exc:
        logger.error("generation failed at %s", exc)
        manifest.fatal = str(exc)
    finally:
        manifest.warnings += list(getattr(getattr(gateway, "log", None), "warnings", []))
        manifest.append_to(manifest_log or out.parent / "runs.jsonl")
    return result


def spec_from(audience: str, duration: int, target: str | RenderTarget) -> PresentationSpec:
    return PresentationSpec(audience=audience, duration_minutes=duration, render_target=RenderTarget(target))
