"""Theme color from the most frequent quantized color across the deck's figures."""

from __future__ import annotations

import io
import logging
from pathlib import Path
from typing import Iterable, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from .model import DEFAULT_ACCENT, ThemeColor, ThemeProvenance

logger = logging.getLogger(__name__)

MAX_SIDE = 256
BITS = 4
LUMA_MAX = 0.92
LUMA_MIN = 0.08
SATURATION_MIN = 0.15
N_BINS = 1 << (3 * BITS)

ImageSource = Union[str, Path, bytes, Image.Image]


def bin_index(r: int, g: int, b: int) -> int:
    shift = 8 - BITS
    return ((r >> shift) << (2 * BITS)) | ((g >> shift) << BITS) | (b >> shift)


def bin_center(index: int) -> tuple[int, int, int]:
    mask = (1 << BITS) - 1
    step = 1 << (8 - BITS)
    q = ((index >> (2 * BITS)) & mask, (index >> BITS) & mask, index & mask)
    return tuple(v * step + step // 2 for v in q)  # type: ignore[return-value]


def _excluded(rgb: tuple[int, int, int]) -> bool:
    r, g, b = (c / 255 for c in rgb)
    luma = 0.2126 * r + 0.7152 * g + 0.0722 * b
    hi, lo = max(r, g, b), min(r, g, b)
    saturation = 0.0 if hi == 0 else (hi - lo) / hi
    return luma > LUMA_MAX or luma < LUMA_MIN or saturation < SATURATION_MIN


# exclusion depends only on the bin, so precompute it once
_EXCLUDED = np.array([_excluded(bin_center(i)) for i in range(N_BINS)])


def _open(src: ImageSource) -> Image.Image:
    if isinstance(src, Image.Image):
        return src
    if isinstance(src, (bytes, bytearray)):
        img = Image.open(io.BytesIO(src))
    else:
        img = Image.open(src)
    img.load()
    return img


def _pixels(img: Image.Image) -> np.ndarray:
    if max(img.size) > MAX_SIDE:
        img = img.copy()
        img.thumbnail((MAX_SIDE, MAX_SIDE), Image.Resampling.NEAREST)
    rgba = np.asarray(img.convert("RGBA"), dtype=np.uint8).reshape(-1, 4)
    return rgba[rgba[:, 3] > 0, :3]


def color_histogram(images: Iterable[ImageSource]) -> np.ndarray:
    """Pixel counts per 4-bit-per-channel bin, summed over all decodable images."""
    counts = np.zeros(N_BINS, dtype=np.int64)
    for src in images:
        try:
            px = _pixels(_open(src))
        except (OSError, UnidentifiedImageError, ValueError) as exc:
            logger.warning("skipping undecodable image %s: %s", src if isinstance(src, (str, Path)) else "<bytes>", exc)
            continue
        shift = 8 - BITS
        q = px.astype(np.int64) >> shift
        idx = (q[:, 0] << (2 * BITS)) | (q[:, 1] << BITS) | q[:, 2]
        counts += np.bincount(idx, minlength=N_BINS)
    return counts


def extract_theme_color(images: Iterable[ImageSource]) -> ThemeColor:
    counts = color_histogram(images)
    counts[_EXCLUDED] = 0
    if counts.max(initial=0) == 0:
        return ThemeColor(DEFAULT_ACCENT, ThemeProvenance.DEFAULT_ACCENT)
    modal = int(np.argmax(counts))  # argmax returns the lowest index among ties
    return ThemeColor(bin_center(modal), ThemeProvenance.FROM_FIGURES)
