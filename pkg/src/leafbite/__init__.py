"""Leaf herbivory quantification from color photographs.

Pipeline: sRGB image -> CIE La*b* channel -> global threshold ->
connected-component noise removal -> hole accounting, with optional
quadratic Bezier border reconstruction for bitten-away margins, damage
ratios and calibrated areas, agreement statistics, and a synthetic
ground-truth generator for validation.
"""

from .analytics import (
    CorrelationResult,
    MeasurementSeries,
    concordance_ccc,
    correlate,
    correlation_report,
    linear_fit,
    p_value_two_sided,
    pearson_r,
    sd_of_differences,
)
from .components import (
    ComponentStats,
    Region,
    default_min_size,
    fill_small_holes,
    find_holes,
    label_components,
    remove_small_components,
)
from .errors import (
    DocumentError,
    ImageLoadError,
    LeafbiteError,
    SessionNotFoundError,
    UniformChannelError,
    ValidationError,
)
from .estimators import LeafDamageAnalyzer, OtsuThresholder
from .geometry import (
    BezierCurve,
    BorderClosure,
    CurveOutcome,
    Point2,
    QuadraticBezier,
    bezier_point,
    close_border,
    quadratic_point,
    rasterize_curve,
)
from .imaging import (
    BinaryMask,
    GrayImage,
    LabImage,
    RasterImage,
    ScaleCalibration,
    encode_png,
    extract_channel,
    load_image,
    load_image_bytes,
    render_annotated,
    rgb_to_lab,
    save_png,
)
from .pipeline import AnalysisConfig, AnalysisResult, analyze_file, analyze_image, render_result
from .service import Session, SessionStore, create_app
from .quantify import DamageReport, quantify
from .segmentation import (
    Histogram,
    OtsuDiagnostics,
    apply_threshold,
    build_histogram,
    manual_diagnostics,
    otsu_threshold,
    segment_leaf,
)
from .synth import (
    Disk,
    GroundTruth,
    SyntheticLeafSpec,
    bite_control_points,
    generate_leaf,
    random_leaf_spec,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
