"""Connected-component labeling, noise removal, and hole detection.

Foreground analysis uses 8-connectivity as stated for the pipeline;
background (hole) analysis uses 4-connectivity so a one-pixel diagonal
gap cannot simultaneously connect the foreground and leak the hole.
Labels are dense, 1..n, assigned in raster order of each component's
first pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import BinaryMask
from .validation import ValidationError

_STRUCT8 = np.ones((3, 3), dtype=bool)
_STRUCT4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

# Default noise floor: 0.1% of the image pixels.
DEFAULT_MIN_SIZE_FRACTION = 0.001


def default_min_size(width: int, height: int) -> int:
    return max(1, int(width * height * DEFAULT_MIN_SIZE_FRACTION))


@dataclass(frozen=True)
class ComponentStats:
    label: int
    size: int
    bbox: tuple[int, int, int, int]  # (min_x, min_y, max_x, max_y), inclusive
    touches_border: bool


@dataclass(frozen=True, eq=False)
class Region:
    """A component's stats plus its pixel set, (n, 2) int32 (x, y) rows."""

    stats: ComponentStats
    pixels: np.ndarray

    @property
    def size(self) -> int:
        return self.stats.size


def _relabel_raster_order(raw: np.ndarray, n: int) -> np.ndarray:
    """Remap scipy's labels so ids follow raster order of first pixels."""
    if n == 0:
        return raw.astype(np.int32)
    flat = raw.ravel()
    nz = np.flatnonzero(flat)
    first = np.full(n + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat[nz], nz)
    order = np.argsort(first[1:], kind="stable")
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, n + 1, dtype=np.int32)
    return remap[raw]


def _border_labels(labels: np.ndarray) -> np.ndarray:
    edges = np.concatenate([labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]])
    return np.unique(edges[edges > 0])


def label_components(
    mask: BinaryMask, which: str = "foreground", connectivity: int = 8
) -> tuple[np.ndarray, list[ComponentStats]]:
    """Label components of the chosen pixel class.

    Returns the (h, w) int32 label map (0 = not in the class) and per
    component stats ordered by label.
    """
    if which == "foreground":
        cls = mask.pixels
    elif which == "background":
        cls = ~mask.pixels
    else:
        raise ValidationError(f"unknown class {which!r}, expected 'foreground' or 'background'")
    if connectivity == 8:
        struct = _STRUCT8
    elif connectivity == 4:
        struct = _STRUCT4
    else:
        raise ValidationError(f"connectivity must be 4 or 8, got {connectivity}")

    raw, n = ndimage.label(cls, structure=struct)
    labels = _relabel_raster_order(raw, n)
    if n == 0:
        return labels, []

    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    boxes = ndimage.find_objects(labels)
    on_border = set(_border_labels(labels).tolist())
    stats = []
    for lbl in range(1, n + 1):
        ys, xs = boxes[lbl - 1]
        stats.append(
            ComponentStats(
                label=lbl,
                size=int(sizes[lbl]),
                bbox=(int(xs.start), int(ys.start), int(xs.stop - 1), int(ys.stop - 1)),
                touches_border=lbl in on_border,
            )
        )
    return labels, stats


def remove_small_components(mask: BinaryMask, min_size: int) -> BinaryMask:
    """Drop foreground components below min_size pixels.

    The largest component always survives, even below min_size: the
    noise floor must never delete the leaf itself.  Ties go to the
    earlier label.
    """
    if min_size < 0:
        raise ValidationError(f"min_size must be >= 0, got {min_size}")
    labels, stats = label_components(mask, "foreground", connectivity=8)
    if not stats or min_size == 0:
        return BinaryMask(mask.pixels.copy())
    largest = max(stats, key=lambda s: s.size).label  # max() keeps the first on ties
    keep = np.zeros(len(stats) + 1, dtype=bool)
    for s in stats:
        keep[s.label] = s.size >= min_size or s.label == largest
    return BinaryMask(keep[labels])


def _regions_from_labels(labels: np.ndarray, member: np.ndarray, wanted: np.ndarray) -> list[Region]:
    """Build Regions for the label ids in ``wanted`` (sorted ascending)."""
    ys, xs = np.nonzero(member)
    if len(ys) == 0:
        return []
    lbls = labels[ys, xs]
    order = np.argsort(lbls, kind="stable")  # stable keeps raster order per label
    ys, xs, lbls = ys[order], xs[order], lbls[order]
    bounds = np.searchsorted(lbls, np.concatenate([wanted, [wanted[-1] + 1]]))
    regions = []
    for i, lbl in enumerate(wanted):
        lo, hi = bounds[i], bounds[i + 1]
        coords = np.column_stack([xs[lo:hi], ys[lo:hi]]).astype(np.int32)
        stats = ComponentStats(
            label=i + 1,
            size=hi - lo,
            bbox=(
                int(coords[:, 0].min()),
                int(coords[:, 1].min()),
                int(coords[:, 0].max()),
                int(coords[:, 1].max()),
            ),
            touches_border=False,
        )
        regions.append(Region(stats=stats, pixels=coords))
    return regions


def find_holes(mask: BinaryMask) -> list[Region]:
    """Enclosed background regions: internal damage candidates.

    A hole is a 4-connected background component that does not touch the
    image border; border-touching background is the scene, not damage.
    Regions come back in raster order of their first pixel.
    """
    inv = ~mask.pixels
    raw, n = ndimage.label(inv, structure=_STRUCT4)
    if n == 0:
        return []
    labels = _relabel_raster_order(raw, n)
    border = _border_labels(labels)
    is_hole = np.ones(n + 1, dtype=bool)
    is_hole[0] = False
    is_hole[border] = False
    wanted = np.flatnonzero(is_hole)
    if len(wanted) == 0:
        return []
    member = is_hole[labels]
    return _regions_from_labels(labels, member, wanted)


def hole_mask(mask: BinaryMask) -> np.ndarray:
    """Boolean map of all hole pixels (same rule as find_holes)."""
    inv = ~mask.pixels
    raw, n = ndimage.label(inv, structure=_STRUCT4)
    if n == 0:
        return np.zeros_like(inv)
    border = _border_labels(raw)
    is_hole = np.ones(n + 1, dtype=bool)
    is_hole[0] = False
    is_hole[border] = False
    return is_hole[raw]


def fill_small_holes(mask: BinaryMask, min_hole_size: int) -> BinaryMask:
    """Turn holes smaller than min_hole_size into foreground.

    min_hole_size = 0 disables filling (every enclosed pixel counts as
    damage, matching the default accounting).
    """
    if min_hole_size < 0:
        raise ValidationError(f"min_hole_size must be >= 0, got {min_hole_size}")
    if min_hole_size == 0:
        return mask
    out = mask.pixels.copy()
    for region in find_holes(mask):
        if region.size < min_hole_size:
            out[region.pixels[:, 1], region.pixels[:, 0]] = True
    return BinaryMask(out)
