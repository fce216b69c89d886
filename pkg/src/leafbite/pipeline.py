"""End-to-end analysis: image -> Lab -> threshold -> components ->
border closure -> damage report.  One pipeline serves both the CLI and
the HTTP service so their numbers are identical by construction."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .components import default_min_size, fill_small_holes, find_holes, remove_small_components
from .errors import UniformChannelError
from .geometry import ACCEPTED, CurveOutcome, QuadraticBezier, close_border, rasterize_curve
from .imaging import BinaryMask, RasterImage, ScaleCalibration, load_image, render_annotated, rgb_to_lab
from .quantify import DamageReport, quantify
from .segmentation import OtsuDiagnostics, segment_leaf
from .validation import (
    require_channel,
    require_polarity,
    require_positive_finite,
    require_threshold,
)


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs of one analysis run.

    polarity None derives from the channel; min_size None means 0.1% of
    the image pixels; threshold None means automatic (Otsu).
    """

    channel: str = "a"
    polarity: str | None = None
    threshold: int | None = None
    min_size: int | None = None
    min_hole_size: int = 0
    pixels_per_cm: float | None = None

    def __post_init__(self):
        require_channel(self.channel)
        if self.polarity is not None:
            require_polarity(self.polarity)
        if self.threshold is not None:
            require_threshold(self.threshold)
        if self.min_size is not None and self.min_size < 0:
            raise ValueError(f"min_size must be >= 0, got {self.min_size}")
        if self.min_hole_size < 0:
            raise ValueError(f"min_hole_size must be >= 0, got {self.min_hole_size}")
        if self.pixels_per_cm is not None:
            require_positive_finite(self.pixels_per_cm, "pixels_per_cm")

    def merged(self, **changes) -> "AnalysisConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    """Everything one analysis produced.

    When needs_threshold is True the channel was uniform and no manual
    threshold was given: mask, report, and diagnostics are None and the
    caller must supply a threshold.
    """

    config: AnalysisConfig
    needs_threshold: bool
    mask: BinaryMask | None
    diagnostics: OtsuDiagnostics | None
    report: DamageReport | None
    internal_regions: tuple = ()
    curve_outcomes: tuple[CurveOutcome, ...] = ()

    @property
    def border_regions(self) -> tuple[np.ndarray, ...]:
        return tuple(o.pixels for o in self.curve_outcomes if o.status == ACCEPTED)


def analyze_image(
    image: RasterImage,
    config: AnalysisConfig = AnalysisConfig(),
    curves: tuple[QuadraticBezier, ...] = (),
) -> AnalysisResult:
    lab = rgb_to_lab(image)
    try:
        mask, diagnostics = segment_leaf(
            lab, channel=config.channel, polarity=config.polarity, threshold=config.threshold
        )
    except UniformChannelError:
        return AnalysisResult(
            config=config, needs_threshold=True, mask=None, diagnostics=None, report=None
        )

    min_size = config.min_size
    if min_size is None:
        min_size = default_min_size(image.width, image.height)
    mask = remove_small_components(mask, min_size)
    if config.min_hole_size > 0:
        mask = fill_small_holes(mask, config.min_hole_size)

    outcomes: tuple[CurveOutcome, ...] = ()
    if curves:
        closure = close_border(mask, curves)
        outcomes = closure.outcomes
        # The closure mask has border damage filled, so its holes are
        # exactly the internal ones.  Strip the fill again afterwards:
        # under the leaf mask, border damage is background like any
        # other damage, only the curve pixels count as leaf.
        internal = tuple(find_holes(closure.mask))
        stripped = closure.mask.pixels.copy()
        for coords in closure.border_damage:
            stripped[coords[:, 1], coords[:, 0]] = False
        mask = BinaryMask(stripped)
    else:
        internal = tuple(find_holes(mask))

    calibration = None
    if config.pixels_per_cm is not None:
        calibration = ScaleCalibration(config.pixels_per_cm)
    report = quantify(
        mask,
        holes=[r.pixels for r in internal],
        border_regions=[o.pixels for o in outcomes if o.status == ACCEPTED],
        calibration=calibration,
    )
    return AnalysisResult(
        config=config,
        needs_threshold=False,
        mask=mask,
        diagnostics=diagnostics,
        report=report,
        internal_regions=internal,
        curve_outcomes=outcomes,
    )


def analyze_file(path, config: AnalysisConfig = AnalysisConfig(), curves=()) -> AnalysisResult:
    return analyze_image(load_image(path), config, tuple(curves))


def render_result(image: RasterImage, result: AnalysisResult) -> RasterImage:
    """Annotated overlay for a finished analysis."""
    chains = []
    for outcome in result.curve_outcomes:
        if outcome.curve is not None:
            chains.append(rasterize_curve(outcome.curve, image.width, image.height))
    return render_annotated(
        image,
        mask=result.mask,
        holes=[r.pixels for r in result.internal_regions],
        border_regions=list(result.border_regions),
        curve_chains=chains,
    )
