"""Input validation helpers used at module boundaries.

Every helper either returns the (possibly coerced) value or raises
ValidationError with a message naming what was wrong.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError

CHANNELS = ("L", "a", "b")
POLARITIES = ("below", "above")


def require_rgb8(arr: np.ndarray) -> np.ndarray:
    if not isinstance(arr, np.ndarray):
        raise ValidationError(f"expected a numpy array, got {type(arr).__name__}")
    if arr.dtype != np.uint8:
        raise ValidationError(f"expected uint8 pixels, got dtype {arr.dtype}")
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValidationError(f"expected an (h, w, 3) array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"image dimensions must be at least 1x1, got {arr.shape[1]}x{arr.shape[0]}")
    return arr


def require_lab(arr: np.ndarray) -> np.ndarray:
    if not isinstance(arr, np.ndarray) or arr.dtype != np.float64:
        raise ValidationError("expected a float64 array of Lab triples")
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValidationError(f"expected an (h, w, 3) array, got shape {arr.shape}")
    return arr


def require_gray8(arr: np.ndarray) -> np.ndarray:
    if not isinstance(arr, np.ndarray) or arr.dtype != np.uint8:
        raise ValidationError("expected a uint8 array of gray intensities")
    if arr.ndim != 2:
        raise ValidationError(f"expected an (h, w) array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError("gray image must be at least 1x1")
    return arr


def require_mask(arr: np.ndarray) -> np.ndarray:
    if not isinstance(arr, np.ndarray) or arr.dtype != np.bool_:
        raise ValidationError("expected a bool array mask")
    if arr.ndim != 2:
        raise ValidationError(f"expected an (h, w) mask, got shape {arr.shape}")
    return arr


def require_channel(channel: str) -> str:
    if channel not in CHANNELS:
        raise ValidationError(f"unknown channel {channel!r}, expected one of {CHANNELS}")
    return channel


def require_polarity(polarity: str) -> str:
    if polarity not in POLARITIES:
        raise ValidationError(f"unknown polarity {polarity!r}, expected one of {POLARITIES}")
    return polarity


def require_threshold(value) -> int:
    # Candidate cuts live in [1, 255]: class 0 is [0, T-1], class 1 is [T, 255].
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ValidationError(f"threshold must be an integer, got {value!r}")
    t = int(value)
    if not 1 <= t <= 255:
        raise ValidationError(f"threshold {t} out of range [1, 255]")
    return t


def require_positive_finite(value, name: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(x) or x <= 0.0:
        raise ValidationError(f"{name} must be positive and finite, got {x!r}")
    return x


def require_point(p) -> tuple[float, float]:
    """Coerce a 2-sequence to a finite (x, y) float pair."""
    try:
        x, y = float(p[0]), float(p[1])
    except (TypeError, ValueError, IndexError):
        raise ValidationError(f"expected an (x, y) pair, got {p!r}") from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"point coordinates must be finite, got ({x}, {y})")
    return x, y


def require_unit_interval(t, name: str = "t") -> float:
    try:
        v = float(t)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {t!r}") from None
    if not 0.0 <= v <= 1.0:
        raise ValidationError(f"{name} out of range [0, 1]: {v!r}")
    return v


def require_pixel_coords(arr, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Check an (n, 2) integer coordinate array with columns (x, y)."""
    coords = np.asarray(arr)
    if coords.size == 0:
        return coords.reshape(0, 2).astype(np.int32)
    if coords.ndim != 2 or coords.shape[1] != 2 or not np.issubdtype(coords.dtype, np.integer):
        raise ValidationError("expected an (n, 2) integer coordinate array")
    if shape is not None:
        h, w = shape
        xs, ys = coords[:, 0], coords[:, 1]
        if xs.min() < 0 or ys.min() < 0 or xs.max() >= w or ys.max() >= h:
            raise ValidationError(f"coordinates fall outside the {w}x{h} image")
    return coords
