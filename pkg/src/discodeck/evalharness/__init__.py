"""Evaluation protocol: quizzes, checklist rubrics, pairwise preference, ROUGE-L, curation."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Mapping, Sequence

from .evidence import DeckEvidence, extract_slide_text, image_dir, load_images
from .judge import (
    BRANCH_CRITERIA,
    CHECKLISTS,
    DEFAULT_TRIALS,
    Branch,
    Dimension,
    PairwiseResult,
    RubricScore,
    Trial,
    Vote,
    judge_rubric,
    majority_vote,
    mean_score,
    mirror_seed,
    pairwise_compare,
    trial_swaps,
)
from .metrics import (
    CurationRecord,
    PresentationType,
    ReferenceSet,
    RougeL,
    curate,
    external_perplexity,
    lcs_length,
    rouge_l,
    rouge_l_tokens,
    tokenize,
)
from .quiz import (
    OPTION_E,
    OPTION_E_TEXT,
    QUIZ_SIZE,
    QuizItem,
    QuizResult,
    QuizType,
    generate_quiz,
    is_correct,
    score_answers,
    strip_for_quiz,
    take_quiz,
)


def write_report(report: Mapping[str, Any], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8")


def write_csv(rows: Sequence[Mapping[str, Any]], path: str | Path) -> None:
    """Flat table export; the header is the union of keys in first-seen order."""
    header: list[str] = []
    for r in rows:
        header += [k for k in r if k not in header]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=header)
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in header})


__all__ = [
    "BRANCH_CRITERIA",
    "CHECKLISTS",
    "DEFAULT_TRIALS",
    "OPTION_E",
    "OPTION_E_TEXT",
    "QUIZ_SIZE",
    "Branch",
    "CurationRecord",
    "DeckEvidence",
    "Dimension",
    "PairwiseResult",
    "PresentationType",
    "QuizItem",
    "QuizResult",
    "QuizType",
    "ReferenceSet",
    "RougeL",
    "RubricScore",
    "Trial",
    "Vote",
    "curate",
    "external_perplexity",
    "extract_slide_text",
    "generate_quiz",
    "image_dir",
    "is_correct",
    "judge_rubric",
    "lcs_length",
    "load_images",
    "majority_vote",
    "mean_score",
    "mirror_seed",
    "pairwise_compare",
    "rouge_l",
    "rouge_l_tokens",
    "score_answers",
    "strip_for_quiz",
    "take_quiz",
    "tokenize",
    "trial_swaps",
    "write_csv",
    "write_report",
]
