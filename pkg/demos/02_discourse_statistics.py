# Discourse trees of the fixture paper: one binary tree per section, with
# paragraphs as leaves. Relation mix differs by section role, and tree size
# is tied to paragraph count by construction.
#
#   python3 demos/02_discourse_statistics.py

# %%
import random
from pathlib import Path

import numpy as np

from discodeck.discourse import (
    DiscourseTree,
    compute_stats,
    correlation_report,
    format_tree,
    node_from_json,
    parse_document,
    relation_distribution,
    shallow_nuclei,
)
from discodeck.gateway import Gateway
from discodeck.ingest import build_bundle

FIX = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
bundle = build_bundle((FIX / "paper.md").read_text(encoding="utf-8"), FIX / "manifest.json")
trees = parse_document(bundle, Gateway.replay(FIX / "transcripts" / "talk-20min.jsonl"))

# %% The Method section, drawn as an indented tree with paragraph excerpts.
method = next(t for t in trees if bundle.section(t.section_index).title == "Method")
print(format_tree(method, bundle))
print("shallow nuclei:", shallow_nuclei(method))

# %% Per-section shape.
for t in trees:
    st = compute_stats(t)
    print(f"{bundle.section(t.section_index).title:<15} leaves {st.leaf_count:>2}  height {st.height}  "
          f"avg depth {float(st.avg_leaf_depth):.2f}")

# %% Relation shares per section group.
for group, shares in relation_distribution(trees, bundle).items():
    print(group.value, {k.value: round(v, 2) for k, v in shares.items()})

# %% Size against structure on the paper plus random trees of 2-40 leaves.
rng = random.Random(0)


def random_tree(ids):
    if len(ids) == 1:
        return {"edu": ids[0]}
    k = rng.randint(1, len(ids) - 1)
    return {"relation": "Elaboration", "type": "NS",
            "nucleus": random_tree(ids[:k]), "satellite": random_tree(ids[k:])}


sample = trees + [DiscourseTree(1, node_from_json(random_tree([f"s1.p{i}" for i in range(n)])))
                  for n in rng.choices(range(2, 41), k=300)]
print(correlation_report(sample))
leaves = np.array([compute_stats(t).leaf_count for t in sample])
heights = np.array([compute_stats(t).height for t in sample])
print("height / log2(leaves), median:", float(np.median(heights[leaves > 1] / np.log2(leaves[leaves > 1]))))
