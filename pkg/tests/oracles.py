"""Independent reference implementations used only by the tests.

Each oracle is written the slow, obvious way and shares no code with the
package, so agreement between the two is meaningful evidence.
"""

from __future__ import annotations

import colorsys
import itertools
import random
from fractions import Fraction


def brute_force_lcs(a: tuple, b: tuple) -> int:
    """Longest sequence that is a subsequence of both, by enumerating every subsequence of ``a``."""
    def is_subseq(sub: tuple, seq: tuple) -> bool:
        it = iter(seq)
        return all(any(x == y for y in it) for x in sub)

    for k in range(len(a), 0, -1):
        for idx in itertools.combinations(range(len(a)), k):
            if is_subseq(tuple(a[i] for i in idx), b):
                return k
    return 0


def dp_lcs(a, b) -> int:
    """Textbook quadratic table."""
    t = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            t[i][j] = t[i - 1][j - 1] + 1 if a[i - 1] == b[j - 1] else max(t[i - 1][j], t[i][j - 1])
    return t[-1][-1]


def rouge_from_lcs(lcs: int, n_cand: int, n_ref: int) -> tuple[float, float, float]:
    p = lcs / n_cand if n_cand else 0.0
    r = lcs / n_ref if n_ref else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def histogram_theme(pixel_lists: list[list[tuple[int, int, int]]]):
    """Modal 16-level bin over all pixels, skipping near-white, near-black and grey bins.

    Returns the bin center or None when nothing survives. Uses colorsys for
    saturation and explicit loops for counting.
    """
    counts: dict[tuple[int, int, int], int] = {}
    for pixels in pixel_lists:
        for r, g, b in pixels:
            key = (r // 16, g // 16, b // 16)
            counts[key] = counts.get(key, 0) + 1
    best = None
    for key in sorted(counts):  # ascending bin order, so the first maximum wins ties
        center = tuple(q * 16 + 8 for q in key)
        rf, gf, bf = (c / 255 for c in center)
        luma = 0.2126 * rf + 0.7152 * gf + 0.0722 * bf
        _, s, _ = colorsys.rgb_to_hsv(rf, gf, bf)
        if luma > 0.92 or luma < 0.08 or s < 0.15:
            continue
        if best is None or counts[key] > counts[best]:
            best = key
    return None if best is None else tuple(q * 16 + 8 for q in best)


def count_sections_and_blocks(markdown: str) -> list[int]:
    """Per level-1/2 heading, the number of blank-line-separated text blocks under it."""
    out: list[int] = []
    in_block = False
    for line in markdown.splitlines():
        if line.startswith("# ") or line.startswith("## "):
            out.append(0)
            in_block = False
        elif not line.strip():
            in_block = False
        elif out:
            if not in_block:
                out[-1] += 1
            in_block = True
    return out


def pearson_fraction(xs, ys) -> Fraction:
    """Squared Pearson r in exact arithmetic with the sign folded in."""
    n = len(xs)
    mx, my = Fraction(sum(xs), n), Fraction(sum(ys), n)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    r2 = sxy * sxy / (sxx * syy)
    return r2 if sxy >= 0 else -r2


# random discourse trees in the wire format ----------------------------------

NS_LABELS = ("Elaboration", "Explanation", "Context", "Purpose", "Evaluation", "Organization")
MN_LABELS = ("Joint", "SameUnit")


def random_tree_json(ids: list[str], rng: random.Random) -> dict:
    """Uniformly random split points and labels over the given leaves."""
    if len(ids) == 1:
        return {"edu": ids[0]}
    k = rng.randint(1, len(ids) - 1)
    left, right = random_tree_json(ids[:k], rng), random_tree_json(ids[k:], rng)
    if rng.random() < 0.25:
        return {"relation": rng.choice(MN_LABELS), "type": "MN", "left": left, "right": right}
    node = {"relation": rng.choice(NS_LABELS), "type": "NS", "nucleus": left, "satellite": right}
    if rng.random() < 0.3:
        node = {"relation": node["relation"], "type": "NS", "nucleus": right, "satellite": left,
                "satellite_first": True}
    return node


def count_wire_nodes(node: dict) -> tuple[int, int]:
    """(leaves, relations) by walking the JSON directly."""
    if "edu" in node:
        return 1, 0
    kids = [node[k] for k in ("nucleus", "satellite", "left", "right") if k in node]
    sub = [count_wire_nodes(c) for c in kids]
    return sum(s[0] for s in sub), 1 + sum(s[1] for s in sub)


# markup ------------------------------------------------------------------

def random_balanced_markup(rng: random.Random, depth: int = 0) -> str:
    """Random text with nested bold and theme-color spans and escaped braces."""
    parts = []
    for _ in range(rng.randint(1, 4)):
        roll = rng.random()
        if roll < 0.2 and depth < 3:
            parts.append("\\textbf{" + random_balanced_markup(rng, depth + 1) + "}")
        elif roll < 0.35 and depth < 3:
            parts.append("\\textcolor{theme}{" + random_balanced_markup(rng, depth + 1) + "}")
        else:
            alphabet = "abc XYZ 0.5%-é" + "{}\\"
            chars = []
            for _ in range(rng.randint(1, 8)):
                c = rng.choice(alphabet)
                chars.append("\\" + c if c in "{}\\" else c)
            parts.append("".join(chars))
    return "".join(parts)


def markup_visible_text(text: str) -> str:
    """Hand-written scanner: drop the two command heads and unescaped braces, unescape the rest."""
    out = []
    i = 0
    heads = ("\\textbf{", "\\textcolor{theme}{")
    while i < len(text):
        head = next((h for h in heads if text.startswith(h, i)), None)
        if head:
            i += len(head)
        elif text[i] == "\\" and i + 1 < len(text) and text[i + 1] in "{}\\":
            out.append(text[i + 1])
            i += 2
        elif text[i] in "{}":
            i += 1
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


# exhaustive LCS ------------------------------------------------------------

def all_sequences(alphabet: str, max_len: int) -> list[tuple]:
    """Every sequence over ``alphabet`` of length 0..max_len, shortest first."""
    return [s for n in range(max_len + 1) for s in itertools.product(alphabet, repeat=n)]


def _subsequences(seq: tuple) -> set[tuple]:
    return {tuple(seq[i] for i in idx) for k in range(len(seq) + 1) for idx in itertools.combinations(range(len(seq)), k)}


class BruteForceLCSTable:
    """LCS of one sequence against a whole closed family, by subsequence enumeration.

    ``seqs`` must contain every subsequence of its members (``all_sequences``
    does). Row ``s`` of the packed matrix marks the members having ``s`` as a
    subsequence; LCS(a, b) is then the longest subsequence of ``a`` marked for
    ``b``. No dynamic programming is involved.
    """

    def __init__(self, seqs: list[tuple]) -> None:
        import numpy as np

        self.np = np
        self.seqs = seqs
        self.index = {s: i for i, s in enumerate(seqs)}
        contains = np.zeros((len(seqs), len(seqs)), dtype=bool)
        for j, b in enumerate(seqs):
            contains[[self.index[s] for s in _subsequences(b)], j] = True
        self.packed = np.packbits(contains, axis=1)

    def row(self, a: tuple):
        np = self.np
        out = np.zeros(len(self.seqs), dtype=np.int64)
        by_len: dict[int, list[int]] = {}
        for s in _subsequences(a):
            by_len.setdefault(len(s), []).append(self.index[s])
        for k in sorted(by_len):  # longer lengths overwrite shorter ones
            hit = np.unpackbits(np.bitwise_or.reduce(self.packed[by_len[k]], axis=0))[: len(self.seqs)]
            out[hit.astype(bool)] = k
        return out
