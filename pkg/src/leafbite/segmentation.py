"""Histogram construction and global threshold selection.

The threshold search scans every candidate cut k in [1, 255], where
class 0 is the intensity range [0, k-1] and class 1 is [k, 255], and
keeps the k maximizing the between-class variance

    sigma2(k) = w0 * (mu0 - muT)**2 + w1 * (mu1 - muT)**2.

Candidates leaving either class empty are skipped (the class means
divide by the class weight).  Ties break toward the smallest k.

The argmax itself is decided in exact integer arithmetic: with
N = total pixels, S = sum(i * n_i), and prefix sums W0 = sum(n_i, i<k),
S0 = sum(i * n_i, i<k), the objective is proportional to
D**2 / (W0 * W1) with D = N*S0 - W0*S, so candidates compare exactly by
cross-multiplying integers.  The reported variance curve is float64
computed from the same integer sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UniformChannelError
from .imaging import BinaryMask, GrayImage, LabImage, extract_channel
from .validation import require_polarity, require_threshold

FOREGROUND_BELOW = "below"
FOREGROUND_ABOVE = "above"

# Leaves are darker than the background on L and a but brighter on b
# (green tissue sits at negative a*, positive b*).
DEFAULT_POLARITY = {"L": FOREGROUND_BELOW, "a": FOREGROUND_BELOW, "b": FOREGROUND_ABOVE}


@dataclass(frozen=True, eq=False)
class Histogram:
    """256-bin intensity histogram."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (256,) or not np.issubdtype(c.dtype, np.integer):
            raise ValueError(f"expected 256 integer bins, got shape {c.shape} dtype {c.dtype}")
        if c.min() < 0:
            raise ValueError("negative bin count")
        object.__setattr__(self, "counts", c.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def densities(self) -> np.ndarray:
        return self.counts / self.total


@dataclass(frozen=True, eq=False)
class OtsuDiagnostics:
    """Threshold choice plus the evidence behind it.

    variance_curve has one entry per candidate cut k = 1..255 (index
    k-1), NaN where a class is empty.  Class statistics are evaluated at
    the effective threshold; they are NaN when that cut leaves a class
    empty (possible only under a manual override).  auto_threshold is
    None when no automatic choice exists (uniform histogram).
    """

    threshold: int
    auto_threshold: int | None
    overridden: bool
    variance_curve: np.ndarray
    omega0: float
    omega1: float
    mu0: float
    mu1: float
    global_mean: float


def build_histogram(gray: GrayImage) -> Histogram:
    counts = np.bincount(gray.pixels.ravel(), minlength=256)
    return Histogram(counts)


def _scan(counts: list[int]):
    """Exact scan over all cuts: returns (best_k or None, variance curve)."""
    n_total = sum(counts)
    s_total = sum(i * c for i, c in enumerate(counts))
    curve = np.full(255, np.nan)
    best_k = None
    best_num = best_den = 0  # objective is best_num / best_den, both ints
    w0 = s0 = 0
    nn = n_total * n_total
    for k in range(1, 256):
        w0 += counts[k - 1]
        s0 += (k - 1) * counts[k - 1]
        w1 = n_total - w0
        if w0 == 0 or w1 == 0:
            continue
        d = n_total * s0 - w0 * s_total
        num = d * d
        den = w0 * w1
        curve[k - 1] = float(num) / float(nn * den)
        # Strict > keeps the smallest k on exact ties.
        if best_k is None or num * best_den > best_num * den:
            best_k, best_num, best_den = k, num, den
    return best_k, curve


def _stats_at(counts: list[int], threshold: int):
    n_total = sum(counts)
    s_total = sum(i * c for i, c in enumerate(counts))
    w0 = sum(counts[:threshold])
    s0 = sum(i * c for i, c in enumerate(counts[:threshold]))
    w1 = n_total - w0
    mu_t = s_total / n_total
    omega0 = w0 / n_total
    omega1 = w1 / n_total
    mu0 = s0 / w0 if w0 > 0 else float("nan")
    mu1 = (s_total - s0) / w1 if w1 > 0 else float("nan")
    return omega0, omega1, mu0, mu1, mu_t


def otsu_threshold(hist: Histogram) -> OtsuDiagnostics:
    """Select the automatic threshold; raises on a single-bin histogram."""
    counts = hist.counts.tolist()
    if hist.total == 0:
        raise UniformChannelError("empty histogram, no threshold exists")
    best_k, curve = _scan(counts)
    if best_k is None:
        raise UniformChannelError("uniform image, no threshold exists")
    omega0, omega1, mu0, mu1, mu_t = _stats_at(counts, best_k)
    return OtsuDiagnostics(
        threshold=best_k,
        auto_threshold=best_k,
        overridden=False,
        variance_curve=curve,
        omega0=omega0,
        omega1=omega1,
        mu0=mu0,
        mu1=mu1,
        global_mean=mu_t,
    )


def manual_diagnostics(hist: Histogram, threshold: int) -> OtsuDiagnostics:
    """Diagnostics for a user-chosen threshold.

    The automatic threshold is still reported alongside when one exists
    so callers can show how far the override strays from it.
    """
    threshold = require_threshold(threshold)
    counts = hist.counts.tolist()
    if hist.total == 0:
        raise UniformChannelError("empty histogram")
    best_k, curve = _scan(counts)
    omega0, omega1, mu0, mu1, mu_t = _stats_at(counts, threshold)
    return OtsuDiagnostics(
        threshold=threshold,
        auto_threshold=best_k,
        overridden=True,
        variance_curve=curve,
        omega0=omega0,
        omega1=omega1,
        mu0=mu0,
        mu1=mu1,
        global_mean=mu_t,
    )


def apply_threshold(gray: GrayImage, threshold: int, polarity: str = FOREGROUND_BELOW) -> BinaryMask:
    """Binarize: polarity "below" marks intensity < T as foreground,
    "above" marks intensity >= T."""
    threshold = require_threshold(threshold)
    require_polarity(polarity)
    if polarity == FOREGROUND_BELOW:
        return BinaryMask(gray.pixels < threshold)
    return BinaryMask(gray.pixels >= threshold)


def segment_leaf(
    lab: LabImage,
    channel: str = "a",
    polarity: str | None = None,
    threshold: int | None = None,
) -> tuple[BinaryMask, OtsuDiagnostics]:
    """Channel extraction, histogram, threshold choice, binarization.

    A manual threshold overrides the automatic one; diagnostics then
    carry both.  Without a manual value, a uniform channel raises
    UniformChannelError.
    """
    gray = extract_channel(lab, channel)
    if polarity is None:
        polarity = DEFAULT_POLARITY[channel]
    hist = build_histogram(gray)
    if threshold is None:
        diag = otsu_threshold(hist)
    else:
        diag = manual_diagnostics(hist, threshold)
    return apply_threshold(gray, diag.threshold, polarity), diag
