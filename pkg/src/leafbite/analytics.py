"""Agreement statistics between manual and automatic measurements:
Pearson correlation, least-squares fit, two-sided p-value from the t
distribution, standard deviation of differences, and Lin's concordance
coefficient as a labeled secondary statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class MeasurementSeries:
    """Paired manual/automatic values, same units, n >= 2."""

    manual: np.ndarray
    automatic: np.ndarray
    label: str = "series"

    def __post_init__(self):
        m = np.asarray(self.manual, dtype=np.float64)
        a = np.asarray(self.automatic, dtype=np.float64)
        if m.ndim != 1 or a.ndim != 1 or len(m) != len(a):
            raise ValidationError("manual and automatic must be equal-length 1-D sequences")
        if len(m) < 2:
            raise ValidationError("need at least 2 pairs")
        if not (np.isfinite(m).all() and np.isfinite(a).all()):
            raise ValidationError("measurements must be finite")
        object.__setattr__(self, "manual", m)
        object.__setattr__(self, "automatic", a)

    @property
    def n(self) -> int:
        return len(self.manual)


@dataclass(frozen=True)
class CorrelationResult:
    """r is stored as a fraction in [-1, 1]; documents display it as a
    percentage.  ccc is Lin's concordance coefficient, reported as a
    secondary statistic next to Pearson r."""

    label: str
    n: int
    r: float
    p_value: float
    slope: float
    intercept: float
    sd_diff: float
    ccc: float


def _centered(series: MeasurementSeries):
    x = series.manual
    y = series.automatic
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    sxy = float(dx @ dy)
    return sxx, syy, sxy


def pearson_r(series: MeasurementSeries) -> float:
    sxx, syy, sxy = _centered(series)
    if sxx == 0.0 or syy == 0.0:
        raise ValidationError(f"{series.label}: correlation undefined for a constant variable")
    r = sxy / math.sqrt(sxx * syy)
    # rounding can push |r| a hair over 1
    return max(-1.0, min(1.0, r))


def p_value_two_sided(r: float, n: int) -> float:
    """Significance of r under t with n-2 degrees of freedom.

    With t^2 = r^2 (n-2) / (1-r^2) the two-sided tail is the regularized
    incomplete beta I_x((n-2)/2, 1/2) at x = 1 - r^2, so the tail is
    computed directly from r without forming t.
    """
    if n < 3:
        raise ValidationError("p-value needs at least 3 pairs (n - 2 degrees of freedom)")
    if not -1.0 <= r <= 1.0:
        raise ValidationError(f"r out of range [-1, 1]: {r!r}")
    x = (1.0 - r) * (1.0 + r)  # 1 - r^2 without cancellation at |r| near 1
    if x <= 0.0:
        return 0.0
    return float(special.betainc((n - 2) / 2.0, 0.5, x))


P_VALUE_FLOOR = 1e-12


def format_p_value(p: float) -> str:
    """Human-facing p: values below the floor are reported as a bound,
    not a number whose trailing digits carry no meaning."""
    if math.isnan(p):
        return "n/a"
    if p < P_VALUE_FLOOR:
        return "< 1e-12"
    return f"{p:.3g}"


def linear_fit(series: MeasurementSeries) -> tuple[float, float]:
    """Ordinary least squares: automatic ~ slope * manual + intercept."""
    sxx, _, sxy = _centered(series)
    if sxx == 0.0:
        raise ValidationError(f"{series.label}: least squares undefined for a constant predictor")
    slope = sxy / sxx
    intercept = float(series.automatic.mean() - slope * series.manual.mean())
    return slope, intercept


def sd_of_differences(series: MeasurementSeries) -> float:
    """Sample standard deviation (ddof=1) of automatic - manual."""
    d = series.automatic - series.manual
    return float(np.std(d, ddof=1))


def concordance_ccc(series: MeasurementSeries) -> float:
    """Lin's concordance correlation coefficient (population moments)."""
    x = series.manual
    y = series.automatic
    n = series.n
    sxx, syy, sxy = _centered(series)
    vx = sxx / n
    vy = syy / n
    cxy = sxy / n
    denom = vx + vy + (x.mean() - y.mean()) ** 2
    if denom == 0.0:
        raise ValidationError(f"{series.label}: concordance undefined for identical constant series")
    return float(2.0 * cxy / denom)


def correlate(series: MeasurementSeries) -> CorrelationResult:
    r = pearson_r(series)
    slope, intercept = linear_fit(series)
    return CorrelationResult(
        label=series.label,
        n=series.n,
        r=r,
        p_value=p_value_two_sided(r, series.n) if series.n >= 3 else float("nan"),
        slope=slope,
        intercept=intercept,
        sd_diff=sd_of_differences(series),
        ccc=concordance_ccc(series),
    )


def correlation_report(series_list) -> tuple[list[CorrelationResult], list[tuple[str, str]]]:
    """Correlate every series; a failing series becomes an error entry
    (label, reason) without aborting the others."""
    results = []
    errors = []
    for series in series_list:
        try:
            results.append(correlate(series))
        except ValidationError as exc:
            errors.append((series.label, str(exc)))
    return results, errors
