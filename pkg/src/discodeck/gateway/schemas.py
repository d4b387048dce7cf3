"""JSON schemas for every agent response, keyed by schema id."""

from __future__ import annotations

from typing import Any

from jsonschema import Draft202012Validator

_STR = {"type": "string"}
_NONEMPTY = {"type": "string", "minLength": 1}
_STR_LIST = {"type": "array", "items": _STR}
_SLIDE_REFS = {"type": "array", "items": {"type": "integer", "minimum": 1}}
_BLOCK = {
    "type": "object",
    "required": ["text"],
    "properties": {"text": _STR, "level": {"type": "integer", "minimum": 0, "maximum": 3}},
}
_FINDING = {
    "type": "object",
    "required": ["affected_slides", "note"],
    "properties": {"affected_slides": _SLIDE_REFS, "note": _NONEMPTY},
}

SCHEMAS: dict[str, dict[str, Any]] = {
    "discourse_tree": {
        "type": "object",
        "required": ["tree"],
        "properties": {"tree": {"type": "object"}},
    },
    "commitment": {
        "type": "object",
        "required": ["snapshot", "core_content", "talk_contract", "narrative_spine", "section_plan"],
        "properties": {
            "snapshot": _NONEMPTY,
            "core_content": {
                "type": "object",
                "required": ["thesis", "key_takeaways"],
                "properties": {
                    "thesis": _NONEMPTY,
                    "key_takeaways": {"type": "array", "items": _NONEMPTY, "minItems": 1, "maxItems": 7},
                },
            },
            "talk_contract": {
                "type": "object",
                "required": ["prerequisites"],
                "properties": {"prerequisites": {"type": "array", "items": _NONEMPTY, "minItems": 1}},
            },
            "narrative_spine": {"type": "array", "items": _NONEMPTY, "minItems": 1},
            "section_plan": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["section_title", "budget_slides"],
                    "properties": {
                        "section_title": _NONEMPTY,
                        "budget_slides": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
    },
    "slide_outline": {
        "type": "object",
        "required": ["slides"],
        "properties": {
            "slides": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["section_index", "slide_title", "paragraph_ids"],
                    "properties": {
                        "slide_number": {"type": "integer"},
                        "section_index": {"type": "integer", "minimum": 1},
                        "section_title": _STR,
                        "slide_title": _NONEMPTY,
                        "paragraph_ids": {"type": "array", "items": _STR, "minItems": 1},
                        "rationale": _STR,
                    },
                },
            }
        },
    },
    "critique": {
        "type": "object",
        "required": ["findings"],
        "properties": {
            "findings": {
                "type": "object",
                "required": ["a", "b", "c", "d", "e"],
                "additionalProperties": False,
                "properties": {k: {"type": "array", "items": _FINDING} for k in "abcde"},
            }
        },
    },
    "verdict": {
        "type": "object",
        "required": ["decision", "rationale", "must_fix", "guidance"],
        "properties": {
            "decision": {"enum": ["ready", "revise"]},
            "rationale": _STR,
            "must_fix": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["issue", "severity", "affected_slides"],
                    "properties": {
                        "issue": _NONEMPTY,
                        "severity": {"enum": ["high", "medium", "low"]},
                        "affected_slides": _SLIDE_REFS,
                    },
                },
            },
            "guidance": _STR,
        },
    },
    "asset_matches": {
        "type": "object",
        "required": ["matches"],
        "properties": {
            "matches": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["slide_number", "asset_ids"],
                    "properties": {
                        "slide_number": {"type": "integer", "minimum": 1},
                        "asset_ids": _STR_LIST,
                        "reasoning": _STR,
                    },
                },
            }
        },
    },
    "slide_text": {
        "type": "object",
        "required": ["title", "blocks"],
        "properties": {
            "title": _NONEMPTY,
            "blocks": {"type": "array", "items": _BLOCK, "minItems": 1},
            "citations": _STR_LIST,
        },
    },
    "figure_additions": {
        "type": "object",
        "required": ["additions"],
        "properties": {
            "additions": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["slide_number", "asset_id"],
                    "properties": {
                        "slide_number": {"type": "integer", "minimum": 1},
                        "asset_id": _NONEMPTY,
                        "reasoning": _STR,
                    },
                },
            }
        },
    },
    "content_revision": {
        "type": "object",
        "required": ["blocks"],
        "properties": {"blocks": {"type": "array", "items": _BLOCK, "minItems": 1}},
    },
    "emphasis": {
        "type": "object",
        "required": ["blocks"],
        "properties": {"blocks": {"type": "array", "items": _STR}},
    },
    "quiz": {
        "type": "object",
        "required": ["items"],
        "properties": {
            "items": {
                "type": "array",
                "minItems": 25,
                "maxItems": 25,
                "items": {
                    "type": "object",
                    "required": ["question", "options", "correct"],
                    "properties": {
                        "question": _NONEMPTY,
                        "options": {
                            "type": "object",
                            "required": ["A", "B", "C", "D"],
                            "additionalProperties": False,
                            "properties": {k: _NONEMPTY for k in "ABCD"},
                        },
                        "correct": {"enum": ["A", "B", "C", "D"]},
                    },
                },
            }
        },
    },
    "quiz_answers": {
        "type": "object",
        "required": ["answers"],
        "properties": {
            "answers": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["index", "answer"],
                    "properties": {
                        "index": {"type": "integer", "minimum": 0},
                        "answer": {"enum": ["A", "B", "C", "D", "E"]},
                    },
                },
            }
        },
    },
    "rubric": {
        "type": "object",
        "required": ["satisfied"],
        "properties": {
            "satisfied": {"type": "array", "items": {"type": "boolean"}, "minItems": 10, "maxItems": 10},
            "notes": _STR,
        },
    },
    "pairwise": {
        "type": "object",
        "required": ["winner"],
        "properties": {"winner": {"enum": ["1", "2"]}, "rationale": _STR},
    },
}

_VALIDATORS = {k: Draft202012Validator(v) for k, v in SCHEMAS.items()}


def schema_errors(schema_id: str, value: Any) -> list[str]:
    validator = _VALIDATORS[schema_id]
    out = []
    for err in sorted(validator.iter_errors(value), key=lambda e: list(map(str, e.absolute_path))):
        where = "/".join(str(p) for p in err.absolute_path) or "$"
        out.append(f"{where}: {err.message}")
    return out
