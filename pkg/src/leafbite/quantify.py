"""Damage accounting: pixel counts, damage ratio, calibrated areas.

The denominator is the reconstructed pre-herbivory leaf: surviving
foreground plus internal plus border damage.  The ratio keeps full
float precision here; documents round to 4 decimals at the edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import BinaryMask, ScaleCalibration
from .validation import ValidationError, require_pixel_coords


@dataclass(frozen=True)
class DamageReport:
    leaf_foreground_px: int
    internal_damage_px: int
    border_damage_px: int
    total_leaf_px: int
    damage_ratio: float
    total_cm2: float | None = None
    damage_cm2: float | None = None


def quantify(
    mask: BinaryMask,
    holes=(),
    border_regions=(),
    calibration: ScaleCalibration | None = None,
) -> DamageReport:
    """Count damage against the reconstructed leaf.

    holes and border_regions are iterables of (n, 2) coordinate arrays.
    They must be background in the mask and mutually disjoint; overlap
    means an upstream pipeline bug and raises.
    """
    fg = mask.pixels
    h, w = fg.shape
    hole_list = [require_pixel_coords(c, (h, w)) for c in holes]
    border_list = [require_pixel_coords(c, (h, w)) for c in border_regions]

    internal_px = sum(len(c) for c in hole_list)
    border_px = sum(len(c) for c in border_list)
    all_sets = hole_list + border_list
    if all_sets:
        coords = np.concatenate([c for c in all_sets if len(c)]) if (internal_px + border_px) else None
        if coords is not None and len(coords):
            if fg[coords[:, 1], coords[:, 0]].any():
                raise ValidationError("damage pixel sets overlap the mask foreground")
            flat = coords[:, 1].astype(np.int64) * w + coords[:, 0]
            if len(np.unique(flat)) != len(flat):
                raise ValidationError("damage pixel sets overlap each other")

    leaf_px = int(np.count_nonzero(fg))
    total = leaf_px + internal_px + border_px
    ratio = (internal_px + border_px) / total if total > 0 else 0.0

    total_cm2 = None
    damage_cm2 = None
    if calibration is not None:
        total_cm2 = calibration.area_cm2(total)
        damage_cm2 = calibration.area_cm2(internal_px + border_px)

    return DamageReport(
        leaf_foreground_px=leaf_px,
        internal_damage_px=int(internal_px),
        border_damage_px=int(border_px),
        total_leaf_px=total,
        damage_ratio=ratio,
        total_cm2=total_cm2,
        damage_cm2=damage_cm2,
    )
