"""Discourse-structured slide decks from parsed papers."""

from __future__ import annotations

__version__ = "0.1.0"
