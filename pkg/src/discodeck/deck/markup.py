"""Parse ``\\textbf{..}`` / ``\\textcolor{..}{..}`` emphasis markup into styled runs.

Supported syntax: the two commands (nestable) and the escapes ``\\{``,
``\\}`` and ``\\\\``. Any other backslash is literal text. Every color name
is coerced to the deck's theme color.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .model import RGB, Run

logger = logging.getLogger(__name__)

_BOLD = "\\textbf{"
_COLOR_RE = re.compile(r"\\textcolor\{([^{}]*)\}\{")
_ESCAPES = {"\\{": "{", "\\}": "}", "\\\\": "\\"}


class MarkupError(ValueError):
    pass


@dataclass(frozen=True)
class _Token:
    kind: str  # "text" | "open_bold" | "open_color" | "close"
    value: str = ""


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    buf: list[str] = []
    i = 0

    def flush() -> None:
        if buf:
            tokens.append(_Token("text", "".join(buf)))
            buf.clear()

    while i < len(text):
        two = text[i : i + 2]
        if two in _ESCAPES:
            buf.append(_ESCAPES[two])
            i += 2
        elif text.startswith(_BOLD, i):
            flush()
            tokens.append(_Token("open_bold"))
            i += len(_BOLD)
        elif (m := _COLOR_RE.match(text, i)) is not None:
            flush()
            tokens.append(_Token("open_color", m.group(1)))
            i = m.end()
        elif text[i] == "}":
            flush()
            tokens.append(_Token("close"))
            i += 1
        elif text[i] == "{":
            flush()
            tokens.append(_Token("stray_open"))
            i += 1
        else:
            buf.append(text[i])
            i += 1
    flush()
    return tokens


def _merge(runs: list[Run]) -> list[Run]:
    out: list[Run] = []
    for r in runs:
        if not r.text:
            continue
        if out and out[-1].bold == r.bold and out[-1].color == r.color:
            out[-1] = Run(out[-1].text + r.text, r.bold, r.color)
        else:
            out.append(r)
    return out


def parse_markup_strict(text: str, theme: RGB) -> list[Run]:
    """Parse balanced markup; raises ``MarkupError`` on anything unbalanced."""
    stack: list[str] = []
    runs: list[Run] = []
    for tok in _tokenize(text):
        if tok.kind == "text":
            runs.append(Run(tok.value, "bold" in stack, theme if "color" in stack else None))
        elif tok.kind == "open_bold":
            stack.append("bold")
        elif tok.kind == "open_color":
            stack.append("color")
        elif tok.kind == "close":
            if not stack:
                raise MarkupError("closing brace without an open command")
            stack.pop()
        else:
            raise MarkupError("bare '{' outside a command")
    if stack:
        raise MarkupError(f"{len(stack)} unclosed command(s)")
    return _merge(runs)


def strip_markup(text: str) -> str:
    """Drop every command token and unescaped brace, keep all other characters."""
    return "".join(t.value for t in _tokenize(text) if t.kind == "text")


def parse_markup(text: str, theme: RGB) -> tuple[list[Run], bool]:
    """Return (runs, ok). Malformed input degrades to one plain run, ok=False."""
    try:
        runs = parse_markup_strict(text, theme)
    except MarkupError as exc:
        logger.warning("malformed emphasis markup (%s); keeping plain text", exc)
        plain = strip_markup(text)
        return ([Run(plain)] if plain else []), False
    return runs, True


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("{", "\\{").replace("}", "\\}")


def render_markup(runs: list[Run]) -> str:
    """Inverse of :func:`parse_markup` for any list of runs."""
    out = []
    for r in runs:
        body = _escape(r.text)
        if r.color is not None:
            body = "\\textcolor{theme}{" + body + "}"
        if r.bold:
            body = "\\textbf{" + body + "}"
        out.append(body)
    return "".join(out)
