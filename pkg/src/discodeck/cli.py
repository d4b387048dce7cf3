"""Command line entry point: generate, inspect, evaluate, curate.

Settings resolve as command-line flags, then ``DISCODECK_*`` environment
variables, then the JSON file given by ``--config``, then built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from .commitment import AUDIENCE_PRESETS, GlobalCommitment, PresentationSpec, RenderTarget
from .deck import SlidePlan, hex_to_rgb
from .discourse import DiscourseTree, compute_stats, format_tree
from .errors import DiscodeckError, UnknownKind
from .gateway import Gateway, GatewayMode, gateway_from_env
from .ingest import DocumentBundle
from .outline import LoopTrace, format_trace

logger = logging.getLogger("discodeck")

DEFAULTS: dict[str, Any] = {
    "mode": "replay",
    "transcript": None,
    "audience": AUDIENCE_PRESETS[0],
    "duration_min": 20,
    "render": "pptx",
    "theme_color": None,
    "out": "deck.pptx",
    "keep_intermediates": False,
    "seed": 0,
    "offline": False,
}
ENV_PREFIX = "DISCODECK_"
INSPECT_KINDS = ("bundle", "tree", "commitment", "loop", "plan")


def _env_value(key: str, default: Any) -> Any:
    raw = os.environ.get(ENV_PREFIX + key.upper())
    if raw is None:
        return None
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    return raw


def resolve_settings(args: argparse.Namespace) -> dict[str, Any]:
    """Flags > environment > config file > defaults, per key."""
    config: dict[str, Any] = {}
    if getattr(args, "config", None):
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        config = {k.replace("-", "_"): v for k, v in config.items()}
    out = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        env = _env_value(key, default)
        if flag is not None:
            out[key] = flag
        elif env is not None:
            out[key] = env
        else:
            out[key] = config.get(key, default)
    return out


def make_gateway(settings: dict[str, Any]) -> Gateway:
    mode = GatewayMode(settings["mode"])
    if settings["offline"] and mode is not GatewayMode.REPLAY:
        from .gateway.offline import offline_transport

        return Gateway(mode, offline_transport())
    return gateway_from_env(mode.value, settings["transcript"])


def _global_flags(p: argparse.ArgumentParser) -> None:
    # defaults are None so that unset flags fall through to env and config
    p.add_argument("--mode", choices=[m.value for m in GatewayMode], default=None)
    p.add_argument("--transcript", default=None, help="JSONL transcript (read in replay, written in record)")
    p.add_argument("--audience", default=None, help=f"presets: {', '.join(AUDIENCE_PRESETS)}; free text allowed")
    p.add_argument("--duration-min", dest="duration_min", type=int, default=None)
    p.add_argument("--render", choices=[t.value for t in RenderTarget], default=None)
    p.add_argument("--theme-color", "--theme", dest="theme_color", default=None,
                   help="theme color override as RRGGBB; skips extraction from figures")
    p.add_argument("--out", default=None)
    p.add_argument("--keep-intermediates", dest="keep_intermediates", action="store_true", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--offline", action="store_true", default=None,
                   help="answer agent calls with the built-in heuristic responder (live/record modes)")
    p.add_argument("--config", default=None, help="JSON file with default settings")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discodeck", description="Narrative slide decks from parsed papers.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="paper.md + manifest.json -> deck")
    g.add_argument("paper")
    g.add_argument("manifest", nargs="?", default=None)
    g.add_argument("--run-log", default=None, help="append the run manifest here (default: <out dir>/runs.jsonl)")
    _global_flags(g)

    i = sub.add_parser("inspect", help="pretty-print an intermediate artifact")
    i.add_argument("kind", help="|".join(INSPECT_KINDS))
    i.add_argument("path")
    i.add_argument("--bundle", default=None, help="bundle JSON, used to show paragraph text in tree dumps")
    i.add_argument("--section", type=int, default=None, help="tree dumps: only this section")

    e = sub.add_parser("evaluate", help="quiz, rubric, pairwise and ROUGE-L evaluation")
    e.add_argument("metric", choices=("quiz", "judge", "pairwise", "rouge"))
    e.add_argument("--deck", required=True, help="deck (.pptx or plan JSON); for pairwise use A,B")
    e.add_argument("--paper", default=None)
    e.add_argument("--report", default=None, help="write the JSON report here")
    e.add_argument("--csv", default=None, help="also write a flat CSV table")
    e.add_argument("--trials", type=int, default=11)
    e.add_argument("--type", dest="quiz_type", default="story", help="story|visuals|hard|depth")
    e.add_argument("--dimension", default="all", help="TQ|NF|VL|VT|all")
    e.add_argument("--branch", default="both", help="NarrativeFlow|OverallQuality|both")
    e.add_argument("--images", default=None, help="directory of rendered slide images, in slide order")
    _global_flags(e)

    c = sub.add_parser("curate", help="filter benchmark records (oral, >=3 figures, >=3 tables)")
    c.add_argument("records", help="JSON list or JSON-lines file of records")
    c.add_argument("--report", default=None)
    return parser


def _read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def inspect_artifact(
    kind: str, path: str | Path, bundle_path: str | Path | None = None, section: int | None = None
) -> str:
    if kind not in INSPECT_KINDS:
        raise UnknownKind(f"unknown kind {kind!r}; expected one of {', '.join(INSPECT_KINDS)}")
    data = _read_json(path)
    if kind == "bundle":
        b = DocumentBundle.from_dict(data)
        lines = [f"title: {b.title}", f"sections: {len(b.sections)}"]
        for s in b.sections:
            lines.append(f"  {s.index}. {s.title} [{s.group.value}] {len(s.paragraphs)} paragraph(s)")
        lines.append(f"assets: {', '.join(b.assets) or 'none'}")
        lines.append(f"citations: {len(b.citations)}")
        return "\n".join(lines)
    if kind == "tree":
        bundle = DocumentBundle.from_dict(_read_json(bundle_path)) if bundle_path else None
        trees = [DiscourseTree.from_json(t) for t in data.get("trees", [data] if "tree" in data else [])]
        if section is not None:
            trees = [t for t in trees if t.section_index == section]
        parts = []
        for t in trees:
            st = compute_stats(t)
            hist = ", ".join(f"{k.value}={v}" for k, v in st.relation_histogram.items()) or "none"
            parts.append(f"section {t.section_index}\n{format_tree(t, bundle)}\n"
                         f"height {st.height}, avg leaf depth {float(st.avg_leaf_depth):.2f}, "
                         f"{st.relation_count} relations ({hist})")
        return "\n\n".join(parts) or "no trees"
    if kind == "commitment":
        c = GlobalCommitment.from_json(data)
        return c.to_markdown() + "\n" + json.dumps(c.to_json(), indent=2, ensure_ascii=False)
    if kind == "loop":
        trace = LoopTrace.from_json(data.get("trace", data))
        return format_trace(trace)
    plan = SlidePlan.from_json(data)
    theme = f"#{plan.theme.hex} ({plan.theme.provenance.value})" if plan.theme else "unset"
    lines = [f"deck: {plan.deck_title}", f"theme: {theme}", f"slides: {len(plan.slides)}"]
    for k, s in enumerate(plan.slides, start=1):
        assets = ", ".join(s.asset_ids) or "-"
        lines.append(f"  {k:>2}. layout {s.layout_id:>2}  {s.chars:>4} chars  [{assets}]  {s.title}")
    return "\n".join(lines)


def _cmd_generate(args: argparse.Namespace, settings: dict[str, Any]) -> int:
    from .pipeline import generate

    spec = PresentationSpec(
        audience=settings["audience"],
        duration_minutes=int(settings["duration_min"]),
        render_target=RenderTarget(settings["render"]),
    )
    gateway = make_gateway(settings)
    theme = hex_to_rgb(settings["theme_color"]) if settings["theme_color"] else None
    result = generate(
        args.paper, args.manifest, spec, gateway, settings["out"],
        keep_intermediates=bool(settings["keep_intermediates"]), theme_override=theme,
        transcript_path=settings["transcript"], manifest_log=args.run_log,
    )
    if gateway.mode is GatewayMode.RECORD and settings["transcript"]:
        gateway.save_transcript(settings["transcript"])
    m = result.manifest
    if not m.ok:
        print(f"error: {m.fatal}", file=sys.stderr)
        return 1
    print(m.outputs["deck"])
    for w in m.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def _evidence(path: str, images: str | None):
    from .evalharness import DeckEvidence, extract_slide_text, image_dir

    return DeckEvidence(tuple(extract_slide_text(path)), image_dir(images) if images else ())


def _cmd_evaluate(args: argparse.Namespace, settings: dict[str, Any]) -> int:
    from . import evalharness as ev

    report: dict[str, Any] = {"metric": args.metric, "deck": args.deck, "seed": settings["seed"],
                              "transcript": settings["transcript"], "mode": settings["mode"]}
    rows: list[dict[str, Any]] = []
    paper = Path(args.paper).read_text(encoding="utf-8") if args.paper else ""

    if args.metric == "rouge":
        if not args.paper:
            raise SystemExit("evaluate rouge needs --paper")
        deck_path = Path(args.deck)
        if deck_path.suffix in (".pptx", ".json"):
            candidate = "\n".join(ev.extract_slide_text(deck_path))
        else:
            candidate = deck_path.read_text(encoding="utf-8")
        score = ev.rouge_l(candidate, ev.strip_for_quiz(paper))
        report["rouge_l"] = score.to_json()
        rows.append({"deck": args.deck, **score.to_json()})
    else:
        gateway = make_gateway(settings)
        if args.metric == "quiz":
            if not args.paper:
                raise SystemExit("evaluate quiz needs --paper")
            qtype = ev.QuizType.parse(args.quiz_type)
            evidence = _evidence(args.deck, args.images)
            if qtype is ev.QuizType.VISUALS and not evidence.images:
                raise SystemExit("visuals questions are answered from slide images; pass --images DIR")
            items = ev.generate_quiz(paper, qtype, gateway)
            result = ev.take_quiz(items, evidence, gateway, seed=settings["seed"])
            report["quiz"] = {**result.to_json(), "items": [it.to_json() for it in items]}
            rows.append({"deck": args.deck, "quiz_type": qtype.value, "accuracy": result.accuracy})
        elif args.metric == "judge":
            evidence = _evidence(args.deck, args.images)
            dims = list(ev.Dimension) if args.dimension == "all" else [ev.Dimension(args.dimension.upper())]
            scores = [ev.judge_rubric(evidence, d, gateway) for d in dims]
            report["rubrics"] = [s.to_json() for s in scores]
            rows += [{"deck": args.deck, "dimension": s.dimension.value, "score": s.score,
                      "score_x10": s.normalized} for s in scores]
        else:
            decks = args.deck.split(",")
            if len(decks) != 2:
                raise SystemExit("evaluate pairwise needs --deck A,B")
            a, b = (_evidence(p, None) for p in decks)
            branches = list(ev.Branch) if args.branch == "both" else [ev.Branch(args.branch)]
            results = [ev.pairwise_compare(a, b, br, gateway, args.trials, settings["seed"], paper) for br in branches]
            report["pairwise"] = [r.to_json() for r in results]
            rows += [{"deck_a": decks[0], "deck_b": decks[1], "branch": r.branch.value, "votes_a": r.votes_a,
                      "votes_b": r.votes_b, "winner": r.winner.value} for r in results]
        if gateway.mode is GatewayMode.RECORD and settings["transcript"]:
            gateway.save_transcript(settings["transcript"])
        report["warnings"] = list(gateway.log.warnings)

    if args.report:
        ev.write_report(report, args.report)
    if args.csv:
        ev.write_csv(rows, args.csv)
    print(json.dumps(report if not args.report else rows, indent=2, ensure_ascii=False, sort_keys=True))
    return 0


def _load_records(path: str) -> list[dict[str, Any]]:
    text = Path(path).read_text(encoding="utf-8").strip()
    if text.startswith("["):
        return json.loads(text)
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def _cmd_curate(args: argparse.Namespace) -> int:
    from .evalharness import CurationRecord, write_report

    records = [CurationRecord.from_json(r) for r in _load_records(args.records)]
    report = {"total": len(records), "passing": [r.to_json() for r in records if r.passes]}
    report["passing_count"] = len(report["passing"])
    if args.report:
        write_report(report, args.report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "inspect":
            print(inspect_artifact(args.kind, args.path, args.bundle, args.section))
            return 0
        if args.command == "curate":
            return _cmd_curate(args)
        settings = resolve_settings(args)
        if args.command == "generate":
            return _cmd_generate(args, settings)
        return _cmd_evaluate(args, settings)
    except (DiscodeckError, OSError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
