"""Synthetic leaf generator with exact pixel-level ground truth.

Rendering is hard-edged: a pixel belongs to the leaf iff its center
satisfies the shape inequality and no hole or bite disk contains it.
Ground-truth counts come from the same membership tests and never touch
the analysis pipeline, so accuracy tests compare two independent
computations of the same quantity.

The leaf is a superellipse |dx/a|**e + |dy/b|**e <= 1 (e = 2 gives an
ellipse; larger exponents flatten the sides, which keeps the pre-damage
boundary nearly straight across a bite mouth).  Holes are disks strictly
inside the leaf; bites are disks clipped to the leaf that open onto the
boundary; speckles are small foreground-colored disks in the background
that noise removal should delete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from . import components
from .errors import ValidationError
from .geometry import Point2, QuadraticBezier
from .imaging import BinaryMask, RasterImage, rgb_to_lab

# Leaf and background must sit at least this far apart on the a* axis so
# the default channel separates them cleanly.
A_STAR_SEPARATION_MIN = 20.0

DEFAULT_LEAF_COLOR = (34, 139, 34)
DEFAULT_BACKGROUND_COLOR = (244, 243, 238)

_STRUCT8 = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.cx) and math.isfinite(self.cy) and math.isfinite(self.r)):
            raise ValidationError("disk parameters must be finite")
        if self.r <= 0:
            raise ValidationError(f"disk radius must be positive, got {self.r}")


@dataclass(frozen=True)
class SyntheticLeafSpec:
    width: int
    height: int
    center: tuple[float, float]
    semi_axes: tuple[float, float]
    exponent: float = 2.0
    leaf_color: tuple[int, int, int] = DEFAULT_LEAF_COLOR
    background_color: tuple[int, int, int] = DEFAULT_BACKGROUND_COLOR
    holes: tuple[Disk, ...] = ()
    bites: tuple[Disk, ...] = ()
    speckles: tuple[Disk, ...] = ()
    seed: int = 0


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Exact counts for one generated leaf.

    leaf_px_total is the pre-damage leaf (every pixel inside the shape);
    damage_ratio = (internal + border) / leaf_px_total.  hole_regions
    and bite_regions are (n, 2) int32 (x, y) arrays in raster order,
    matching the order of the disks in the spec.
    """

    leaf_px_total: int
    internal_damage_px: int
    border_damage_px: int
    damage_ratio: float
    hole_regions: tuple[np.ndarray, ...]
    bite_regions: tuple[np.ndarray, ...]

    @property
    def leaf_foreground_px(self) -> int:
        return self.leaf_px_total - self.internal_damage_px - self.border_damage_px


def _shape_value(spec: SyntheticLeafSpec, x, y):
    (cx, cy), (a, b), e = spec.center, spec.semi_axes, spec.exponent
    return (np.abs(x - cx) / a) ** e + (np.abs(y - cy) / b) ** e


def _disk_mask(disk: Disk, xs, ys) -> np.ndarray:
    return (xs - disk.cx) ** 2 + (ys - disk.cy) ** 2 <= disk.r**2


def _coords(mask: np.ndarray) -> np.ndarray:
    ys, xs = np.nonzero(mask)
    return np.column_stack([xs, ys]).astype(np.int32)


def _a_star(color) -> float:
    px = np.array([[color]], dtype=np.uint8)
    return float(rgb_to_lab(RasterImage(px)).values[0, 0, 1])


def _validate_spec(spec: SyntheticLeafSpec) -> None:
    if spec.width < 8 or spec.height < 8:
        raise ValidationError(f"canvas too small: {spec.width}x{spec.height}")
    a, b = spec.semi_axes
    if a <= 0 or b <= 0:
        raise ValidationError(f"semi-axes must be positive, got {spec.semi_axes}")
    if spec.exponent <= 0 or not math.isfinite(spec.exponent):
        raise ValidationError(f"exponent must be positive, got {spec.exponent}")
    sep = abs(_a_star(spec.leaf_color) - _a_star(spec.background_color))
    if sep < A_STAR_SEPARATION_MIN:
        raise ValidationError(
            f"leaf and background colors separate by only {sep:.1f} on a*, need {A_STAR_SEPARATION_MIN:g}"
        )


def generate_leaf(spec: SyntheticLeafSpec) -> tuple[RasterImage, GroundTruth]:
    """Render the spec and count its ground truth, both by membership."""
    _validate_spec(spec)
    w, h = spec.width, spec.height
    xs = np.arange(w, dtype=np.float64)[None, :]
    ys = np.arange(h, dtype=np.float64)[:, None]

    shape = _shape_value(spec, xs, ys) <= 1.0
    if not shape.any():
        raise ValidationError("leaf shape contains no pixels")
    if shape[0, :].any() or shape[-1, :].any() or shape[:, 0].any() or shape[:, -1].any():
        raise ValidationError("leaf shape touches the image border")

    hole_masks = [_disk_mask(d, xs, ys) for d in spec.holes]
    bite_masks = [_disk_mask(d, xs, ys) & shape for d in spec.bites]
    speckle_masks = [_disk_mask(d, xs, ys) for d in spec.speckles]
    hole_union = np.logical_or.reduce(hole_masks) if hole_masks else np.zeros_like(shape)
    bite_union = np.logical_or.reduce(bite_masks) if bite_masks else np.zeros_like(shape)

    for i, hole in enumerate(hole_masks):
        if not hole.any():
            raise ValidationError(f"hole {i} contains no pixels")
        ring = ndimage.binary_dilation(hole, structure=_STRUCT8)
        if not (ring <= shape).all():
            raise ValidationError(f"hole {i} is not strictly inside the leaf")
        if (ring & bite_union).any():
            raise ValidationError(f"hole {i} touches a bite")
        for j, other in enumerate(hole_masks):
            if j != i and (ring & other).any():
                raise ValidationError(f"holes {i} and {j} touch")

    full_circle = [_disk_mask(d, xs, ys) for d in spec.bites]
    for j, removed in enumerate(bite_masks):
        if not removed.any():
            raise ValidationError(f"bite {j} removes no leaf pixels")
        if not (full_circle[j] & ~shape).any():
            raise ValidationError(f"bite {j} does not reach the leaf boundary")
        for k in range(j):
            if (removed & bite_masks[k]).any():
                raise ValidationError(f"bites {k} and {j} overlap")

    leaf = shape & ~hole_union & ~bite_union

    for s, speck in enumerate(speckle_masks):
        if not speck.any():
            raise ValidationError(f"speckle {s} lies outside the canvas")
        ring = ndimage.binary_dilation(speck, structure=_STRUCT8)
        if (ring & (shape | bite_union)).any():
            raise ValidationError(f"speckle {s} touches the leaf")

    # Structural sanity: one leaf piece, and enclosed background exactly
    # equals the punched holes (no bite seals itself shut).
    _, n_pieces = ndimage.label(leaf, structure=_STRUCT8)
    if n_pieces != 1:
        raise ValidationError(f"damage splits the leaf into {n_pieces} pieces")
    enclosed = components.hole_mask(BinaryMask(leaf))
    if not np.array_equal(enclosed, hole_union):
        raise ValidationError("a bite encloses background instead of opening to the boundary")

    pixels = np.empty((h, w, 3), dtype=np.uint8)
    pixels[:] = spec.background_color
    foreground = leaf.copy()
    for speck in speckle_masks:
        foreground |= speck
    pixels[foreground] = spec.leaf_color

    internal = int(np.count_nonzero(hole_union))
    border = int(np.count_nonzero(bite_union))
    total = int(np.count_nonzero(shape))
    truth = GroundTruth(
        leaf_px_total=total,
        internal_damage_px=internal,
        border_damage_px=border,
        damage_ratio=(internal + border) / total,
        hole_regions=tuple(_coords(m) for m in hole_masks),
        bite_regions=tuple(_coords(m) for m in bite_masks),
    )
    return RasterImage(pixels), truth


def _boundary_point(spec: SyntheticLeafSpec, phi: float) -> Point2:
    (cx, cy), (a, b), e = spec.center, spec.semi_axes, spec.exponent
    c, s = math.cos(phi), math.sin(phi)
    x = cx + a * math.copysign(abs(c) ** (2.0 / e), c)
    y = cy + b * math.copysign(abs(s) ** (2.0 / e), s)
    return Point2(x, y)


def _boundary_phi(spec: SyntheticLeafSpec, p: Point2) -> float:
    (cx, cy), (a, b), e = spec.center, spec.semi_axes, spec.exponent
    dx = (p.x - cx) / a
    dy = (p.y - cy) / b
    return math.atan2(
        math.copysign(abs(dy) ** (e / 2.0), dy),
        math.copysign(abs(dx) ** (e / 2.0), dx),
    )


def _circle_boundary_crossings(spec: SyntheticLeafSpec, disk: Disk, samples: int = 4096) -> list[Point2]:
    """Points where the disk's circle crosses the leaf boundary."""

    def g(theta: float) -> float:
        x = disk.cx + disk.r * math.cos(theta)
        y = disk.cy + disk.r * math.sin(theta)
        return float(_shape_value(spec, np.float64(x), np.float64(y))) - 1.0

    thetas = [2.0 * math.pi * i / samples for i in range(samples + 1)]
    values = [g(t) for t in thetas]
    roots = []
    for i in range(samples):
        v0, v1 = values[i], values[i + 1]
        if v0 == 0.0:
            roots.append(thetas[i])
            continue
        if v0 * v1 < 0.0:
            lo, hi = thetas[i], thetas[i + 1]
            flo = v0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = g(mid)
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    return [
        Point2(disk.cx + disk.r * math.cos(t), disk.cy + disk.r * math.sin(t))
        for t in roots
    ]


def bite_control_points(spec: SyntheticLeafSpec, bite_index: int) -> QuadraticBezier:
    """Control points on the true pre-damage boundary for one bite.

    Endpoints sit where the bite circle crosses the leaf boundary (the
    bite mouth); B1 sits at the apex of the pre-damage boundary arc that
    the bite removed (the arc point farthest from the mouth chord), so
    the quadratic approximates the original margin.
    """
    if not 0 <= bite_index < len(spec.bites):
        raise ValidationError(f"bite index {bite_index} out of range")
    disk = spec.bites[bite_index]
    mouth = _circle_boundary_crossings(spec, disk)
    if len(mouth) != 2:
        raise ValidationError(
            f"bite {bite_index} crosses the leaf boundary {len(mouth)} times, expected 2"
        )
    p1, p2 = mouth
    phi1 = _boundary_phi(spec, p1)
    phi2 = _boundary_phi(spec, p2)

    # Two boundary arcs join the mouth points; the removed one runs
    # through the bite disk.  Walk the shorter-through-disk arc.
    lo, hi = sorted((phi1, phi2))
    candidates = [(lo, hi), (hi, lo + 2.0 * math.pi)]
    arc = None
    for start, stop in candidates:
        mid = _boundary_point(spec, 0.5 * (start + stop))
        if (mid.x - disk.cx) ** 2 + (mid.y - disk.cy) ** 2 <= disk.r**2:
            arc = (start, stop)
            break
    if arc is None:
        raise ValidationError(f"bite {bite_index}: cannot identify the removed boundary arc")

    start, stop = arc
    chord = np.array([p2.x - p1.x, p2.y - p1.y])
    norm = math.hypot(*chord)
    best = None
    best_d = -1.0
    for i in range(1, 1024):
        q = _boundary_point(spec, start + (stop - start) * i / 1024.0)
        if norm > 0.0:
            d = abs(chord[0] * (q.y - p1.y) - chord[1] * (q.x - p1.x)) / norm
        else:
            d = 0.0
        if d > best_d:
            best_d, best = d, q
    return QuadraticBezier(p1, best, p2)


def random_leaf_spec(
    seed: int,
    width: int = 512,
    height: int = 512,
    max_holes: int = 4,
    bites: int = 0,
    max_speckles: int = 3,
) -> SyntheticLeafSpec:
    """Draw a well-formed random spec, deterministic per seed.

    Candidate draws that fail generate_leaf's validation are redrawn, so
    the returned spec always generates.
    """
    rng = np.random.default_rng(seed)
    last_error = None
    for _ in range(60):
        try:
            spec = _draw_spec(rng, width, height, max_holes, bites, max_speckles, seed)
            generate_leaf(spec)
            return spec
        except ValidationError as exc:
            last_error = exc
    raise RuntimeError(f"could not draw a valid leaf spec for seed {seed}: {last_error}")


def _draw_spec(rng, width, height, max_holes, bites, max_speckles, seed) -> SyntheticLeafSpec:
    if bites > 0:
        exponent = float(rng.uniform(3.5, 6.0))  # flat sides under the bite mouth
    else:
        exponent = float(rng.uniform(2.0, 4.0))
    a = float(rng.uniform(0.30, 0.38)) * width
    b = float(rng.uniform(0.26, 0.36)) * height
    cx = width / 2.0 + float(rng.uniform(-0.03, 0.03)) * width
    cy = height / 2.0 + float(rng.uniform(-0.03, 0.03)) * height

    leaf_color = (
        int(rng.integers(20, 90)),
        int(rng.integers(120, 200)),
        int(rng.integers(20, 90)),
    )
    background_color = (
        int(rng.integers(228, 255)),
        int(rng.integers(228, 255)),
        int(rng.integers(228, 255)),
    )

    holes = []
    n_holes = int(rng.integers(1, max_holes + 1)) if max_holes > 0 else 0
    for _ in range(n_holes):
        for _attempt in range(100):
            r = float(rng.uniform(6.0, 18.0))
            hx = cx + float(rng.uniform(-0.55, 0.55)) * a
            hy = cy + float(rng.uniform(-0.55, 0.55)) * b
            margin = (abs(hx - cx) / a) ** exponent + (abs(hy - cy) / b) ** exponent
            if margin > 0.35:
                continue
            if all(math.hypot(hx - d.cx, hy - d.cy) >= r + d.r + 6.0 for d in holes):
                holes.append(Disk(hx, hy, r))
                break

    bite_disks = []
    if bites > 0:
        sides = [0.0, math.pi / 2.0, math.pi, 3.0 * math.pi / 2.0]
        rng.shuffle(sides)
        base = SyntheticLeafSpec(width, height, (cx, cy), (a, b), exponent)
        for phi in sides[:bites]:
            r = float(rng.uniform(0.09, 0.13)) * min(width, height)
            depth = float(rng.uniform(0.25, 0.55)) * r
            p = _boundary_point(base, phi + float(rng.uniform(-0.12, 0.12)))
            to_center = np.array([cx - p.x, cy - p.y])
            to_center /= math.hypot(*to_center)
            bite_disks.append(Disk(p.x + depth * to_center[0], p.y + depth * to_center[1], r))

    speckles = []
    n_speckles = int(rng.integers(0, max_speckles + 1)) if max_speckles > 0 else 0
    for _ in range(n_speckles):
        for _attempt in range(100):
            r = float(rng.uniform(1.0, 3.0))
            sx = float(rng.uniform(r + 2.0, width - r - 3.0))
            sy = float(rng.uniform(r + 2.0, height - r - 3.0))
            if abs(sx - cx) > a + r + 8.0 or abs(sy - cy) > b + r + 8.0:
                speckles.append(Disk(sx, sy, r))
                break

    return SyntheticLeafSpec(
        width=width,
        height=height,
        center=(cx, cy),
        semi_axes=(a, b),
        exponent=exponent,
        leaf_color=leaf_color,
        background_color=background_color,
        holes=tuple(holes),
        bites=tuple(bite_disks),
        speckles=tuple(speckles),
        seed=seed,
    )


def with_seed(spec: SyntheticLeafSpec, seed: int) -> SyntheticLeafSpec:
    return replace(spec, seed=seed)
