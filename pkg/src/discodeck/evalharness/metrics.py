"""Pure metrics: ROUGE-L, benchmark curation and the external perplexity hook."""

from __future__ import annotations

import enum
import re
import shlex
import subprocess
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

_TOKEN_RE = re.compile(r"\w+")
ROUGE_SCALE = 1000
MIN_FIGURES = 3
MIN_TABLES = 3


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace and punctuation."""
    return _TOKEN_RE.findall(text.lower())


def lcs_length(a: Sequence[Any], b: Sequence[Any]) -> int:
    """Longest common subsequence length, bit-parallel over ``a``.

    Each bit of ``v`` tracks one position of ``a``; a zero bit marks a
    position where the LCS grew. Python integers make the row update a
    handful of big-int operations per element of ``b``.
    """
    if not a or not b:
        return 0
    masks: dict[Any, int] = {}
    for i, x in enumerate(a):
        masks[x] = masks.get(x, 0) | (1 << i)
    full = (1 << len(a)) - 1
    v = full
    for y in b:
        m = masks.get(y)
        if m is None:
            continue
        u = v & m
        v = ((v + u) | (v - u)) & full
    return len(a) - bin(v).count("1")


class ReferenceSet:
    """Many reference sequences encoded once, for scoring candidates against all of them.

    Runs the same bit-parallel recurrence as :func:`lcs_length`, vectorized
    over references with numpy. Bits index candidate positions, so a
    candidate may hold at most 64 tokens; longer ones use the scalar path.
    """

    MAX_CANDIDATE = 64

    def __init__(self, references: Sequence[Sequence[Any]]) -> None:
        self.references = [list(r) for r in references]
        self._vocab: dict[Any, int] = {}
        width = max((len(r) for r in self.references), default=0)
        # symbol 0 is padding and never matches
        self._codes = np.zeros((len(self.references), width), dtype=np.int64)
        for i, ref in enumerate(self.references):
            for j, tok in enumerate(ref):
                self._codes[i, j] = self._vocab.setdefault(tok, len(self._vocab) + 1)
        self.lengths = np.array([len(r) for r in self.references], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.references)

    def lcs(self, candidate: Sequence[Any]) -> np.ndarray:
        """LCS length of ``candidate`` against every reference."""
        n = len(candidate)
        if n > self.MAX_CANDIDATE:
            return np.array([lcs_length(candidate, r) for r in self.references], dtype=np.int64)
        if n == 0 or self._codes.size == 0:
            return np.zeros(len(self.references), dtype=np.int64)
        table = np.zeros(len(self._vocab) + 1, dtype=np.uint64)
        for i, tok in enumerate(candidate):
            code = self._vocab.get(tok)
            if code is not None:
                table[code] |= np.uint64(1 << i)
        full = np.uint64((1 << n) - 1)
        v = np.full(len(self.references), full, dtype=np.uint64)
        with np.errstate(over="ignore"):  # the row update relies on wraparound
            for j in range(self._codes.shape[1]):
                u = v & table[self._codes[:, j]]
                v = ((v + u) | (v - u)) & full
        ones = np.unpackbits(v.view(np.uint8).reshape(-1, 8), axis=1).sum(axis=1)
        return n - ones.astype(np.int64)

    def rouge_l(self, candidate: Sequence[Any]) -> list["RougeL"]:
        lcs = self.lcs(candidate)
        return [_rouge_from(int(k), len(candidate), int(m)) for k, m in zip(lcs, self.lengths)]


@dataclass(frozen=True)
class RougeL:
    precision: float
    recall: float
    f_measure: float
    lcs: int

    @property
    def scaled(self) -> float:
        return self.f_measure * ROUGE_SCALE

    def to_json(self) -> dict[str, float]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "f_measure_x1000": self.scaled,
            "lcs": self.lcs,
        }


def _rouge_from(lcs: int, n_candidate: int, n_reference: int) -> RougeL:
    p = lcs / n_candidate if n_candidate else 0.0
    r = lcs / n_reference if n_reference else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return RougeL(p, r, f, lcs)


def rouge_l_tokens(candidate: Sequence[Any], reference: Sequence[Any]) -> RougeL:
    return _rouge_from(lcs_length(candidate, reference), len(candidate), len(reference))


def rouge_l(candidate: str, reference: str) -> RougeL:
    return rouge_l_tokens(tokenize(candidate), tokenize(reference))


class PresentationType(str, enum.Enum):
    ORAL = "Oral"
    POSTER = "Poster"


@dataclass(frozen=True)
class CurationRecord:
    presentation_type: PresentationType
    figure_count: int
    table_count: int
    paper_id: str = ""

    @property
    def passes(self) -> bool:
        return (
            self.presentation_type is PresentationType.ORAL
            and self.figure_count >= MIN_FIGURES
            and self.table_count >= MIN_TABLES
        )

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "CurationRecord":
        return cls(PresentationType(d["presentation_type"]), int(d["figure_count"]), int(d["table_count"]),
                   str(d.get("paper_id", "")))

    def to_json(self) -> dict[str, Any]:
        return {
            "paper_id": self.paper_id,
            "presentation_type": self.presentation_type.value,
            "figure_count": self.figure_count,
            "table_count": self.table_count,
            "passes": self.passes,
        }


def curate(records: Iterable[CurationRecord]) -> list[CurationRecord]:
    return [r for r in records if r.passes]


def external_perplexity(command: str, text: str, timeout_s: float = 600.0) -> float:
    """Run a user-supplied scorer that reads text on stdin and prints one number."""
    proc = subprocess.run(shlex.split(command), input=text, capture_output=True, text=True,
                          timeout=timeout_s, check=True)
    return float(proc.stdout.strip().split()[-1])
