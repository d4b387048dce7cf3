"""RST-style discourse trees over paragraph EDUs, one tree per section."""

from __future__ import annotations

import enum
import json
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence, Union

from .errors import DegenerateSample, SchemaFailure
from .ingest import DocumentBundle, Section, SectionGroup

logger = logging.getLogger(__name__)


class Arity(str, enum.Enum):
    NS = "NS"
    MN = "MN"


class RelationLabel(str, enum.Enum):
    ELABORATION = "Elaboration"
    EXPLANATION = "Explanation"
    CONTEXT = "Context"
    PURPOSE = "Purpose"
    EVALUATION = "Evaluation"
    ORGANIZATION = "Organization"
    JOINT = "Joint"
    SAME_UNIT = "SameUnit"

    @property
    def arity(self) -> Arity:
        return Arity.MN if self in (RelationLabel.JOINT, RelationLabel.SAME_UNIT) else Arity.NS

    @classmethod
    def parse(cls, name: str) -> "RelationLabel":
        key = name.replace("-", "").replace("_", "").replace(" ", "").lower()
        for label in cls:
            if label.value.lower() == key:
                return label
        raise ValueError(f"unknown relation {name!r}")


@dataclass(frozen=True)
class Leaf:
    edu: str


@dataclass(frozen=True)
class Relation:
    """Binary relation node; ``left``/``right`` are in text order.

    For NS relations ``nucleus_left`` says which side is the nucleus.
    """

    label: RelationLabel
    left: "Node"
    right: "Node"
    nucleus_left: bool = True

    @property
    def arity(self) -> Arity:
        return self.label.arity

    @property
    def nucleus(self) -> "Node":
        return self.left if self.nucleus_left else self.right

    @property
    def satellite(self) -> "Node":
        return self.right if self.nucleus_left else self.left


Node = Union[Leaf, Relation]


@dataclass(frozen=True)
class DiscourseTree:
    section_index: int
    root: Node
    fallback: bool = False

    @property
    def leaf_order(self) -> list[str]:
        return [leaf.edu for leaf, _ in iter_leaves(self.root)]

    def to_json(self) -> dict[str, Any]:
        return {"section": self.section_index, "tree": node_to_json(self.root)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "DiscourseTree":
        return cls(int(data["section"]), node_from_json(data["tree"]))


@dataclass(frozen=True)
class TreeStats:
    leaf_count: int
    height: int
    avg_leaf_depth: Fraction
    relation_count: int
    relation_histogram: Mapping[RelationLabel, int]


def iter_leaves(node: Node, depth: int = 0) -> Iterable[tuple[Leaf, int]]:
    if isinstance(node, Leaf):
        yield node, depth
    else:
        yield from iter_leaves(node.left, depth + 1)
        yield from iter_leaves(node.right, depth + 1)


def iter_relations(node: Node) -> Iterable[Relation]:
    if isinstance(node, Relation):
        yield node
        yield from iter_relations(node.left)
        yield from iter_relations(node.right)


def node_to_json(node: Node) -> dict[str, Any]:
    # key order: relation, type, nucleus/left, satellite/right
    if isinstance(node, Leaf):
        return {"edu": node.edu}
    out: dict[str, Any] = {"relation": node.label.value, "type": node.arity.value}
    if node.arity is Arity.NS:
        out["nucleus"] = node_to_json(node.nucleus)
        out["satellite"] = node_to_json(node.satellite)
        if not node.nucleus_left:
            out["satellite_first"] = True
    else:
        out["left"] = node_to_json(node.left)
        out["right"] = node_to_json(node.right)
    return out


def node_from_json(obj: Mapping[str, Any]) -> Node:
    """Build a node from JSON that has already passed ``validate_tree_json``."""
    if "edu" in obj:
        return Leaf(str(obj["edu"]))
    label = RelationLabel.parse(obj["relation"])
    if label.arity is Arity.NS:
        nucleus = node_from_json(obj["nucleus"])
        satellite = node_from_json(obj["satellite"])
        if obj.get("satellite_first"):
            return Relation(label, satellite, nucleus, nucleus_left=False)
        return Relation(label, nucleus, satellite)
    return Relation(label, node_from_json(obj["left"]), node_from_json(obj["right"]))


def _check_node(obj: Any, path: str, leaves: list[str], errors: list[str]) -> None:
    if not isinstance(obj, Mapping):
        errors.append(f"node at {path} is not an object")
        return
    if "edu" in obj:
        extra = set(obj) - {"edu"}
        if extra:
            errors.append(f"leaf at {path} has extra keys {sorted(extra)}")
        if not isinstance(obj["edu"], str):
            errors.append(f"leaf at {path} has non-string edu")
            return
        leaves.append(obj["edu"])
        return
    if "children" in obj:
        kids = obj["children"]
        n = len(kids) if isinstance(kids, list) else "?"
        errors.append(f"non-binary node at {path} ({n} children; use nucleus/satellite or left/right)")
        if isinstance(kids, list):
            for i, kid in enumerate(kids):
                _check_node(kid, f"{path}.children[{i}]", leaves, errors)
        return
    name = obj.get("relation")
    try:
        label = RelationLabel.parse(name) if isinstance(name, str) else None
    except ValueError:
        label = None
    if label is None:
        errors.append(f"unknown relation {name!r} at {path}")
    declared = obj.get("type")
    if declared not in ("NS", "MN"):
        errors.append(f"missing or invalid type {declared!r} at {path}")
    elif label is not None and declared != label.arity.value:
        errors.append(f"relation {label.value} at {path} must be {label.arity.value}, got {declared}")
    arity = declared if declared in ("NS", "MN") else (label.arity.value if label else None)
    slots = ("nucleus", "satellite") if arity == "NS" else ("left", "right")
    wrong = ("left", "right") if arity == "NS" else ("nucleus", "satellite")
    if any(k in obj for k in wrong):
        errors.append(f"{arity} node at {path} uses {'/'.join(wrong)} roles")
    present = [k for k in slots if k in obj]
    if len(present) != 2:
        errors.append(f"non-binary node at {path} (expected {slots[0]} and {slots[1]})")
    order = list(slots)
    if arity == "NS" and obj.get("satellite_first"):
        order.reverse()
    for key in order:
        if key in obj:
            _check_node(obj[key], f"{path}.{key}", leaves, errors)


def validate_tree_json(obj: Any, section: Section | None = None) -> list[str]:
    """Structural check of raw tree JSON; returns human-readable violations."""
    errors: list[str] = []
    leaves: list[str] = []
    _check_node(obj, "root", leaves, errors)
    if section is not None:
        expected = section.paragraph_ids
        dupes = sorted(k for k, c in Counter(leaves).items() if c > 1)
        if dupes:
            errors.append(f"duplicate leaves {dupes}")
        missing = [p for p in expected if p not in leaves]
        if missing:
            errors.append(f"missing leaves {missing}")
        unknown = [p for p in leaves if p not in expected]
        if unknown:
            errors.append(f"leaves not in section {section.index}: {unknown}")
        if not dupes and not missing and not unknown and leaves != expected:
            errors.append(f"leaf order {leaves} does not follow document order {expected}")
    return errors


def validate_tree(tree: DiscourseTree | Mapping[str, Any], section: Section | None = None) -> list[str]:
    if isinstance(tree, DiscourseTree):
        obj: Any = node_to_json(tree.root)
    else:
        obj = tree.get("tree", tree) if "section" in tree else tree
    return validate_tree_json(obj, section)


def compute_stats(tree: DiscourseTree | Node) -> TreeStats:
    root = tree.root if isinstance(tree, DiscourseTree) else tree
    depths = [d for _, d in iter_leaves(root)]
    hist = Counter(r.label for r in iter_relations(root))
    return TreeStats(
        leaf_count=len(depths),
        height=max(depths),
        avg_leaf_depth=Fraction(sum(depths), len(depths)),
        relation_count=sum(hist.values()),
        relation_histogram=dict(hist),
    )


def fallback_tree(section: Section) -> DiscourseTree:
    """Right-leaning Elaboration chain with the first paragraph as ultimate nucleus."""
    ids = section.paragraph_ids
    node: Node = Leaf(ids[-1])
    for pid in reversed(ids[:-1]):
        node = Relation(RelationLabel.ELABORATION, Leaf(pid), node)
    return DiscourseTree(section.index, node, fallback=True)


def relation_distribution(
    trees: Sequence[DiscourseTree], bundle: DocumentBundle
) -> dict[SectionGroup, dict[RelationLabel, float]]:
    counts: dict[SectionGroup, Counter] = {}
    for tree in trees:
        group = bundle.section(tree.section_index).group
        counts.setdefault(group, Counter()).update(r.label for r in iter_relations(tree.root))
    out: dict[SectionGroup, dict[RelationLabel, float]] = {}
    for group, c in counts.items():
        total = sum(c.values())
        if total:
            out[group] = {label: n / total for label, n in sorted(c.items(), key=lambda kv: kv[0].value)}
    return out


def pearson(xs: Sequence[int | Fraction], ys: Sequence[int | Fraction]) -> float:
    """Pearson r computed in exact rational arithmetic up to the final square root."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise DegenerateSample("need at least two paired observations")
    n = len(xs)
    fx = [Fraction(x) for x in xs]
    fy = [Fraction(y) for y in ys]
    mx, my = sum(fx) / n, sum(fy) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(fx, fy))
    sxx = sum((x - mx) ** 2 for x in fx)
    syy = sum((y - my) ** 2 for y in fy)
    if sxx == 0 or syy == 0:
        raise DegenerateSample("zero variance in sample")
    r2 = sxy * sxy / (sxx * syy)
    if r2 == 1:
        return 1.0 if sxy > 0 else -1.0
    return math.copysign(math.sqrt(float(r2)), float(sxy))


def correlation_report(trees: Sequence[DiscourseTree]) -> dict[str, float]:
    stats = [compute_stats(t) for t in trees]
    leaves = [s.leaf_count for s in stats]
    if len(set(leaves)) < 2:
        raise DegenerateSample("trees need at least two distinct leaf counts")
    return {
        "leaves_vs_relations": pearson(leaves, [s.relation_count for s in stats]),
        "leaves_vs_height": pearson(leaves, [s.height for s in stats]),
        "leaves_vs_avg_leaf_depth": pearson(leaves, [s.avg_leaf_depth for s in stats]),
    }


def _parser_payload(section: Section) -> dict[str, Any]:
    return {
        "section_index": section.index,
        "section_title": section.title,
        "paragraphs": [{"id": p.id, "text": p.text} for p in section.paragraphs],
        "relations": {label.value: label.arity.value for label in RelationLabel},
    }


def parse_section_discourse(section: Section, gateway: Any) -> DiscourseTree:
    """Ask the parser agent for a tree; never returns an invalid tree."""
    from .gateway import AgentName, AgentRequest

    if not section.paragraphs:
        raise ValueError(f"section {section.index} has no paragraphs")
    if len(section.paragraphs) == 1:
        return DiscourseTree(section.index, Leaf(section.paragraphs[0].id))

    request = AgentRequest.build(AgentName.DISCOURSE_PARSER, _parser_payload(section))
    try:
        result = gateway.call(request, check=lambda out: validate_tree_json(out.get("tree"), section))
    except SchemaFailure as exc:
        logger.warning("section %d: parser output unusable (%s); using fallback chain", section.index, exc)
        return fallback_tree(section)
    return DiscourseTree(section.index, node_from_json(result["tree"]))


def parse_document(bundle: DocumentBundle, gateway: Any, max_in_flight: int = 4) -> list[DiscourseTree]:
    """Parse every section; sections are independent and run concurrently."""
    if max_in_flight <= 1:
        return [parse_section_discourse(s, gateway) for s in bundle.sections]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(lambda s: parse_section_discourse(s, gateway), bundle.sections))


def central_edu(node: Node) -> str:
    """Follow nuclei (left side for multinuclear) down to a leaf."""
    while isinstance(node, Relation):
        node = node.nucleus if node.arity is Arity.NS else node.left
    return node.edu


def shallow_nuclei(tree: DiscourseTree) -> list[str]:
    """Leaves at depth <= 1 that act as a nucleus (both sides of MN count)."""
    root = tree.root
    if isinstance(root, Leaf):
        return [root.edu]
    out = []
    for child, is_nucleus in (
        (root.left, root.arity is Arity.MN or root.nucleus_left),
        (root.right, root.arity is Arity.MN or not root.nucleus_left),
    ):
        if isinstance(child, Leaf) and is_nucleus:
            out.append(child.edu)
    return out


def format_tree(tree: DiscourseTree, bundle: DocumentBundle | None = None, width: int = 60) -> str:
    """Indented text rendering for terminal inspection."""
    texts = bundle.paragraph_index() if bundle else {}
    lines: list[str] = []

    def walk(node: Node, indent: str, role: str) -> None:
        prefix = f"{indent}{role + ': ' if role else ''}"
        if isinstance(node, Leaf):
            snippet = texts[node.edu].text[:width] if node.edu in texts else ""
            lines.append(f"{prefix}[{node.edu}] {snippet}".rstrip())
            return
        lines.append(f"{prefix}{node.label.value} ({node.arity.value})")
        if node.arity is Arity.NS:
            for child in (node.left, node.right):
                walk(child, indent + "  ", "N" if child is node.nucleus else "S")
        else:
            walk(node.left, indent + "  ", "L")
            walk(node.right, indent + "  ", "R")

    walk(tree.root, "", "")
    return "\n".join(lines)
