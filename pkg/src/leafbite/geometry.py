"""Bezier curve evaluation, exact rasterization, and border closure.

Curves are evaluated in pixel coordinates (origin top-left, y down).
Rasterization emits, in traversal order, every pixel p for which some
t in [0, 1] satisfies round(B(t)) == p with half-up rounding per axis.
The parameter interval is cut at every t where x(t) or y(t) crosses a
half-integer level; between consecutive cuts the rounded point is
constant, so evaluating each piece's midpoint enumerates the chain
without gaps.  Adaptive subdivision plus line segments was considered
and dropped: a 0.25 px flatness tolerance admits sampled polylines that
miss pixels the true curve rounds into, which breaks the coverage
contract the damage accounting relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .components import hole_mask
from .imaging import BinaryMask
from .validation import ValidationError, require_point, require_unit_interval

SNAP_RADIUS = 3.0

ACCEPTED = "accepted"
NOOP = "noop"
REJECTED = "rejected"


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class BezierCurve:
    """Bezier curve of arbitrary degree >= 1."""

    control_points: tuple[Point2, ...]

    def __post_init__(self):
        pts = tuple(Point2(*require_point(p)) for p in self.control_points)
        if len(pts) < 2:
            raise ValidationError("a Bezier curve needs at least two control points")
        object.__setattr__(self, "control_points", pts)

    @property
    def degree(self) -> int:
        return len(self.control_points) - 1


@dataclass(frozen=True)
class QuadraticBezier:
    """Three-control-point curve; B0 and B2 are the endpoints."""

    b0: Point2
    b1: Point2
    b2: Point2

    def __post_init__(self):
        object.__setattr__(self, "b0", Point2(*require_point(self.b0)))
        object.__setattr__(self, "b1", Point2(*require_point(self.b1)))
        object.__setattr__(self, "b2", Point2(*require_point(self.b2)))

    @property
    def control_points(self) -> tuple[Point2, Point2, Point2]:
        return (self.b0, self.b1, self.b2)

    def reversed(self) -> "QuadraticBezier":
        return QuadraticBezier(self.b2, self.b1, self.b0)


def bezier_point(curve: BezierCurve | Sequence, t: float) -> Point2:
    """General Bernstein-basis evaluation, any degree."""
    t = require_unit_interval(t)
    pts = curve.control_points if isinstance(curve, BezierCurve) else [require_point(p) for p in curve]
    n = len(pts) - 1
    if n < 1:
        raise ValidationError("a Bezier curve needs at least two control points")
    x = 0.0
    y = 0.0
    for i, (px, py) in enumerate(pts):
        w = math.comb(n, i) * (1.0 - t) ** (n - i) * t**i
        x += w * px
        y += w * py
    return Point2(x, y)


def quadratic_point(qb: QuadraticBezier, t: float) -> Point2:
    """Direct quadratic form: (1-t)^2 B0 + 2t(1-t) B1 + t^2 B2."""
    t = require_unit_interval(t)
    u = 1.0 - t
    w0 = u * u
    w1 = 2.0 * t * u
    w2 = t * t
    return Point2(
        w0 * qb.b0.x + w1 * qb.b1.x + w2 * qb.b2.x,
        w0 * qb.b0.y + w1 * qb.b1.y + w2 * qb.b2.y,
    )


def _axis_coeffs(p0: float, p1: float, p2: float) -> tuple[float, float, float]:
    # B(t) = a t^2 + b t + c on one axis
    return p0 - 2.0 * p1 + p2, 2.0 * (p1 - p0), p0


def _axis_range(a: float, b: float, c: float) -> tuple[float, float]:
    lo = hi = c
    end = a + b + c
    lo, hi = min(lo, end), max(lo, end)
    if abs(a) > 0.0:
        tv = -b / (2.0 * a)
        if 0.0 < tv < 1.0:
            v = (a * tv + b) * tv + c
            lo, hi = min(lo, v), max(hi, v)
    return lo, hi


def _crossings(a: float, b: float, c: float) -> np.ndarray:
    """All t in (0, 1) where a t^2 + b t + c equals any half-integer."""
    lo, hi = _axis_range(a, b, c)
    first = math.floor(lo - 0.5)
    last = math.ceil(hi + 0.5)
    levels = np.arange(first, last + 1, dtype=np.float64) + 0.5
    levels = levels[(levels >= lo) & (levels <= hi)]
    if len(levels) == 0:
        return np.empty(0)
    if abs(a) < 1e-12:
        if abs(b) < 1e-12:
            return np.empty(0)
        ts = (levels - c) / b
    else:
        disc = b * b - 4.0 * a * (c - levels)
        ok = disc >= 0.0
        sq = np.sqrt(disc[ok])
        if b >= 0.0:
            q = -0.5 * (b + sq)
        else:
            q = -0.5 * (b - sq)
        t1 = q / a
        with np.errstate(divide="ignore", invalid="ignore"):
            t2 = (c - levels[ok]) / q
        ts = np.concatenate([t1, t2[np.isfinite(t2)]])
    return ts[(ts > 0.0) & (ts < 1.0)]


def _round_half_up(v: np.ndarray) -> np.ndarray:
    return np.floor(v + 0.5).astype(np.int64)


def rasterize_curve(qb: QuadraticBezier, width: int, height: int) -> np.ndarray:
    """Emit the 8-connected pixel chain of the curve, (n, 2) int32.

    The chain runs from round(B0) to round(B2); consecutive pixels
    differ by at most one per axis.  Pixels outside the width x height
    raster are clipped from the result.
    """
    if width < 1 or height < 1:
        raise ValidationError(f"raster dimensions must be positive, got {width}x{height}")
    ax, bx, cx = _axis_coeffs(qb.b0.x, qb.b1.x, qb.b2.x)
    ay, by, cy = _axis_coeffs(qb.b0.y, qb.b1.y, qb.b2.y)
    ts = np.concatenate([_crossings(ax, bx, cx), _crossings(ay, by, cy)])
    ts = np.sort(ts)
    if len(ts) > 1:
        ts = ts[np.concatenate([[True], np.diff(ts) > 1e-12])]
    cuts = np.concatenate([[0.0], ts, [1.0]])
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    # Endpoint pixels are pinned exactly; midpoints cover the open pieces.
    sample = np.concatenate([[0.0], mids, [1.0]])
    px = _round_half_up((ax * sample + bx) * sample + cx)
    py = _round_half_up((ay * sample + by) * sample + cy)
    pts = np.column_stack([px, py])
    keep = np.concatenate([[True], np.any(pts[1:] != pts[:-1], axis=1)])
    pts = pts[keep]
    inside = (pts[:, 0] >= 0) & (pts[:, 0] < width) & (pts[:, 1] >= 0) & (pts[:, 1] < height)
    pts = pts[inside]
    if len(pts) > 1:
        keep = np.concatenate([[True], np.any(pts[1:] != pts[:-1], axis=1)])
        pts = pts[keep]
    return pts.astype(np.int32)


@dataclass(frozen=True, eq=False)
class CurveOutcome:
    """Per-curve result of close_border.

    status is "accepted" (new border damage attributed), "noop" (curve
    stamped but enclosed nothing), or "rejected" (curve not applied).
    pixels holds the attributed border-damage coordinates, empty unless
    accepted.  curve is the curve actually stamped, with endpoints
    snapped; None when rejected.
    """

    status: str
    reason: str | None
    curve: QuadraticBezier | None
    pixels: np.ndarray


@dataclass(frozen=True, eq=False)
class BorderClosure:
    """Reconstructed mask (foreground + curves + border damage filled)
    plus per-curve outcomes in submission order."""

    mask: BinaryMask
    outcomes: tuple[CurveOutcome, ...]

    @property
    def border_damage(self) -> tuple[np.ndarray, ...]:
        return tuple(o.pixels for o in self.outcomes if o.status == ACCEPTED)


_EMPTY_COORDS = np.empty((0, 2), dtype=np.int32)


def _snap_endpoint(point: Point2, fg: np.ndarray, radius: float) -> Point2 | None:
    """Nearest foreground pixel center within ``radius``, or None."""
    h, w = fg.shape
    reach = int(math.ceil(radius)) + 1
    x_lo = max(0, int(math.floor(point.x)) - reach)
    x_hi = min(w - 1, int(math.ceil(point.x)) + reach)
    y_lo = max(0, int(math.floor(point.y)) - reach)
    y_hi = min(h - 1, int(math.ceil(point.y)) + reach)
    if x_lo > x_hi or y_lo > y_hi:
        return None
    window = fg[y_lo : y_hi + 1, x_lo : x_hi + 1]
    ys, xs = np.nonzero(window)
    if len(ys) == 0:
        return None
    xs = xs + x_lo
    ys = ys + y_lo
    d2 = (xs - point.x) ** 2 + (ys - point.y) ** 2
    i = int(np.argmin(d2))  # argmin takes the first minimum: raster-order tie-break
    if d2[i] > radius * radius:
        return None
    return Point2(float(xs[i]), float(ys[i]))


def close_border(
    mask: BinaryMask, curves: Sequence[QuadraticBezier], snap_radius: float = SNAP_RADIUS
) -> BorderClosure:
    """Stamp curves into the mask and collect newly enclosed regions.

    Per curve, in list order: both endpoints are snapped to the nearest
    foreground pixel within snap_radius (a curve whose endpoint has no
    foreground that close is rejected and not stamped); the snapped
    curve's pixel chain is stamped as foreground; background that is
    enclosed now but was not enclosed before the stamp is attributed to
    this curve as border damage.  A later curve can stamp over pixels an
    earlier one enclosed, so attributions are settled against the final
    hole map: each curve keeps the still-enclosed pixels it enclosed
    first.  The reconstructed mask is the stamped foreground with all
    border damage filled in; internal holes stay open.
    """
    work = mask.pixels.copy()
    h, w = work.shape
    holes_before = hole_mask(BinaryMask(work))
    initial_holes = holes_before
    stamped_curves: list[QuadraticBezier | None] = []
    reasons: list[str | None] = []
    new_per_curve: list[np.ndarray] = []  # bool maps, settled after the loop

    for idx, curve in enumerate(curves):
        snapped = []
        reason = None
        for name, endpoint in (("B0", curve.b0), ("B2", curve.b2)):
            hit = _snap_endpoint(endpoint, work, snap_radius)
            if hit is None:
                reason = f"curve {idx}: endpoint {name} is farther than {snap_radius:g} px from the leaf"
                break
            snapped.append(hit)
        if reason is not None:
            stamped_curves.append(None)
            reasons.append(reason)
            new_per_curve.append(np.zeros_like(work))
            continue

        stamped = QuadraticBezier(snapped[0], curve.b1, snapped[1])
        chain = rasterize_curve(stamped, w, h)
        work[chain[:, 1], chain[:, 0]] = True
        holes_now = hole_mask(BinaryMask(work))
        new_per_curve.append(holes_now & ~holes_before)
        holes_before = holes_now
        stamped_curves.append(stamped)
        reasons.append(None)

    final_holes = holes_before
    outcomes = []
    for idx in range(len(curves)):
        if stamped_curves[idx] is None:
            outcomes.append(CurveOutcome(REJECTED, reasons[idx], None, _EMPTY_COORDS))
            continue
        settled = new_per_curve[idx] & final_holes
        ys, xs = np.nonzero(settled)
        if len(ys) == 0:
            outcomes.append(
                CurveOutcome(NOOP, f"curve {idx}: no new enclosed region", stamped_curves[idx], _EMPTY_COORDS)
            )
        else:
            coords = np.column_stack([xs, ys]).astype(np.int32)
            outcomes.append(CurveOutcome(ACCEPTED, None, stamped_curves[idx], coords))

    border_union = final_holes & ~initial_holes
    reconstructed = BinaryMask(work | border_union)
    return BorderClosure(mask=reconstructed, outcomes=tuple(outcomes))
