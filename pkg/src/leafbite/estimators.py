"""Scikit-learn style estimators wrapping the thresholding step and the
full damage pipeline, for use inside sklearn tooling (grid search over
channels, pipelines over image batches).  The functional API in the
other modules is the primary surface; these wrappers add get_params /
set_params / clone compatibility on top of it."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import UniformChannelError, ValidationError
from .imaging import GrayImage, RasterImage, extract_channel, rgb_to_lab
from .pipeline import AnalysisConfig, analyze_image
from .segmentation import (
    DEFAULT_POLARITY,
    apply_threshold,
    build_histogram,
    manual_diagnostics,
    otsu_threshold,
)


def _as_raster(X) -> RasterImage:
    if isinstance(X, RasterImage):
        return X
    arr = np.asarray(X)
    if arr.ndim == 3 and arr.shape[2] == 3 and arr.dtype == np.uint8:
        return RasterImage(arr)
    raise ValidationError(f"expected a RasterImage or (h, w, 3) uint8 array, got shape {getattr(arr, 'shape', None)}")


def _as_gray(X, channel: str) -> GrayImage:
    if isinstance(X, GrayImage):
        return X
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.dtype == np.uint8:
        return GrayImage(arr)
    return extract_channel(rgb_to_lab(_as_raster(X)), channel)


class OtsuThresholder(BaseEstimator, TransformerMixin):
    """Learn a global threshold on one image, apply it to others.

    fit(X) accepts a GrayImage, an (h, w) uint8 array, or an RGB image
    (converted through the configured Lab channel).  transform returns
    the boolean foreground mask.
    """

    def __init__(self, channel: str = "a", polarity: str | None = None, threshold: int | None = None):
        self.channel = channel
        self.polarity = polarity
        self.threshold = threshold

    def fit(self, X, y=None):
        gray = _as_gray(X, self.channel)
        hist = build_histogram(gray)
        if self.threshold is None:
            diag = otsu_threshold(hist)
        else:
            diag = manual_diagnostics(hist, self.threshold)
        self.threshold_ = diag.threshold
        self.diagnostics_ = diag
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "threshold_"):
            raise ValidationError("OtsuThresholder is not fitted yet, call fit first")
        gray = _as_gray(X, self.channel)
        polarity = self.polarity or DEFAULT_POLARITY[self.channel]
        return apply_threshold(gray, self.threshold_, polarity).pixels


class LeafDamageAnalyzer(BaseEstimator):
    """Full pipeline as an estimator: fit runs one analysis and exposes
    mask_/report_/diagnostics_; predict maps images to damage ratios."""

    def __init__(
        self,
        channel: str = "a",
        polarity: str | None = None,
        threshold: int | None = None,
        min_size: int | None = None,
        min_hole_size: int = 0,
        pixels_per_cm: float | None = None,
    ):
        self.channel = channel
        self.polarity = polarity
        self.threshold = threshold
        self.min_size = min_size
        self.min_hole_size = min_hole_size
        self.pixels_per_cm = pixels_per_cm

    def _config(self) -> AnalysisConfig:
        return AnalysisConfig(
            channel=self.channel,
            polarity=self.polarity,
            threshold=self.threshold,
            min_size=self.min_size,
            min_hole_size=self.min_hole_size,
            pixels_per_cm=self.pixels_per_cm,
        )

    def fit(self, X, y=None):
        result = analyze_image(_as_raster(X), self._config())
        if result.needs_threshold:
            raise UniformChannelError("channel is uniform, set an explicit threshold")
        self.result_ = result
        self.mask_ = result.mask
        self.report_ = result.report
        self.diagnostics_ = result.diagnostics
        return self

    def predict(self, X) -> np.ndarray:
        """Damage ratio per image; X is a single image or a sequence."""
        items = X if isinstance(X, (list, tuple)) else [X]
        config = self._config()
        ratios = []
        for item in items:
            result = analyze_image(_as_raster(item), config)
            if result.needs_threshold:
                raise UniformChannelError("channel is uniform, set an explicit threshold")
            ratios.append(result.report.damage_ratio)
        return np.asarray(ratios)
