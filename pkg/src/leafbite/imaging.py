"""Image types, file decoding/encoding, CIE La*b* conversion, channel
extraction, and annotated-output rendering.

Raster data lives in numpy arrays: 8-bit RGB images as (h, w, 3) uint8,
Lab images as (h, w, 3) float64, single channels as (h, w) uint8, and
binary masks as (h, w) bool with True marking leaf foreground.  Pixel
coordinates are (x, y) with the origin at the top-left corner and y
growing downward; a pixel's center is at its integer coordinates.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import ImageLoadError
from .fsio import atomic_write_bytes
from .validation import (
    ValidationError,
    require_channel,
    require_gray8,
    require_lab,
    require_mask,
    require_positive_finite,
    require_rgb8,
)

# sRGB -> XYZ for the D65 illuminant.  The reference white is taken as the
# exact row sums of this matrix (the image of RGB = (1, 1, 1)) rather than
# the usual 5-digit white point, so neutral grays normalize to identical
# f() arguments on all three axes and come out with a* = b* = 0 to within
# float rounding.  With the textbook white the residual is about 1e-5,
# which is visible next to the 1e-6 neutrality contract.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE = _SRGB_TO_XYZ.sum(axis=1)

# f(t) switches from the cube root to a linear segment at (6/29)^3.
_F_CUT = (6.0 / 29.0) ** 3
_F_SLOPE = 1.0 / (3.0 * (6.0 / 29.0) ** 2)
_F_OFFSET = 4.0 / 29.0


def _srgb_linear_lut() -> np.ndarray:
    c = np.arange(256, dtype=np.float64) / 255.0
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


_LINEAR = _srgb_linear_lut()

# Overlay colors for render_annotated.
INTERNAL_DAMAGE_COLOR = (220, 20, 60)
BORDER_DAMAGE_COLOR = (255, 140, 0)
CURVE_COLOR = (30, 105, 220)
OUTLINE_COLOR = (50, 205, 50)


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit sRGB image."""

    pixels: np.ndarray

    def __post_init__(self):
        require_rgb8(self.pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_array(cls, arr) -> "RasterImage":
        return cls(np.ascontiguousarray(arr, dtype=np.uint8))


@dataclass(frozen=True, eq=False)
class LabImage:
    """CIE La*b* image, float64 triples."""

    values: np.ndarray

    def __post_init__(self):
        require_lab(self.values)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Single 8-bit channel."""

    pixels: np.ndarray

    def __post_init__(self):
        require_gray8(self.pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean mask, True = leaf foreground."""

    pixels: np.ndarray

    def __post_init__(self):
        require_mask(self.pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def foreground_count(self) -> int:
        return int(np.count_nonzero(self.pixels))


@dataclass(frozen=True)
class ScaleCalibration:
    """Pixel-to-area scale: area_cm2 = pixels / pixels_per_cm**2."""

    pixels_per_cm: float

    def __post_init__(self):
        object.__setattr__(self, "pixels_per_cm", require_positive_finite(self.pixels_per_cm, "pixels_per_cm"))

    def area_cm2(self, pixel_count: int) -> float:
        return pixel_count / (self.pixels_per_cm**2)


# TIFF support is limited to uncompressed and deflate encodings; anything
# else (LZW, JPEG-in-TIFF, packbits, ...) is an explicit unsupported error.
_TIFF_COMPRESSIONS = ("raw", "tiff_deflate", "tiff_adobe_deflate")


def _decode(im: Image.Image, source: str) -> RasterImage:
    fmt = im.format
    if fmt not in ("PNG", "TIFF"):
        raise ImageLoadError(f"{source}: unsupported format {fmt!r}, expected PNG or TIFF")
    if fmt == "TIFF":
        compression = im.info.get("compression", "raw")
        if compression not in _TIFF_COMPRESSIONS:
            raise ImageLoadError(
                f"{source}: unsupported TIFF compression {compression!r}, expected uncompressed or deflate"
            )
    if im.mode not in ("RGB", "RGBA"):
        raise ImageLoadError(f"{source}: unsupported mode {im.mode!r}, expected 8-bit RGB or RGBA")
    try:
        arr = np.asarray(im)
    except OSError as exc:
        raise ImageLoadError(f"{source}: failed to decode pixel data ({exc})") from exc
    if arr.ndim != 3 or arr.dtype != np.uint8:
        raise ImageLoadError(f"{source}: expected 8-bit samples, got dtype {arr.dtype}")
    if arr.shape[2] == 4:
        arr = arr[:, :, :3]  # alpha is discarded, not premultiplied
    return RasterImage(np.ascontiguousarray(arr))


def load_image(path) -> RasterImage:
    """Decode a PNG or TIFF file into an 8-bit RGB image."""
    path = Path(path)
    try:
        im = Image.open(path)
    except FileNotFoundError:
        raise ImageLoadError(f"{path}: no such file") from None
    except UnidentifiedImageError:
        raise ImageLoadError(f"{path}: not a recognizable PNG or TIFF file") from None
    except OSError as exc:
        raise ImageLoadError(f"{path}: {exc}") from exc
    with im:
        return _decode(im, str(path))


def load_image_bytes(data: bytes, source: str = "<bytes>") -> RasterImage:
    """Decode an in-memory PNG or TIFF byte string."""
    try:
        im = Image.open(io.BytesIO(data))
    except UnidentifiedImageError:
        raise ImageLoadError(f"{source}: not a recognizable PNG or TIFF file") from None
    except OSError as exc:
        raise ImageLoadError(f"{source}: {exc}") from exc
    with im:
        return _decode(im, source)


def encode_png(image) -> bytes:
    """Encode a RasterImage, GrayImage, or BinaryMask as PNG bytes."""
    if isinstance(image, RasterImage):
        pil = Image.fromarray(image.pixels, mode="RGB")
    elif isinstance(image, GrayImage):
        pil = Image.fromarray(image.pixels, mode="L")
    elif isinstance(image, BinaryMask):
        pil = Image.fromarray(np.where(image.pixels, np.uint8(255), np.uint8(0)), mode="L")
    else:
        raise ValidationError(f"cannot encode {type(image).__name__} as PNG")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def save_png(image, path) -> None:
    atomic_write_bytes(path, encode_png(image))


def rgb_to_lab(image: RasterImage) -> LabImage:
    """Convert sRGB (D65, standard transfer function) to CIE La*b*."""
    lin = _LINEAR[image.pixels]
    xyz = lin @ _SRGB_TO_XYZ.T
    ratio = xyz / _WHITE
    f = np.where(ratio > _F_CUT, np.cbrt(ratio), ratio * _F_SLOPE + _F_OFFSET)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return LabImage(lab)


_CHANNEL_INDEX = {"L": 0, "a": 1, "b": 2}


def extract_channel(lab: LabImage, channel: str) -> GrayImage:
    """Rescale one Lab channel to 8 bits over its fixed nominal range.

    L uses [0, 100] and a/b use [-128, 127], so the mapping is the same
    affine function for every image and thresholds stay comparable
    across images.  Values are rounded half-up and clipped.
    """
    require_channel(channel)
    v = lab.values[..., _CHANNEL_INDEX[channel]]
    if channel == "L":
        # multiply before dividing: 50 -> 127.5 exactly, not 127.4999...
        g = v * 255.0 / 100.0
    else:
        g = v + 128.0
    g = np.floor(g + 0.5)
    np.clip(g, 0.0, 255.0, out=g)
    return GrayImage(g.astype(np.uint8))


def _paint(buffer: np.ndarray, coords: np.ndarray, color) -> None:
    if len(coords) == 0:
        return
    coords = np.asarray(coords)
    buffer[coords[:, 1], coords[:, 0]] = color


def render_annotated(
    image: RasterImage,
    mask: BinaryMask | None = None,
    holes=(),
    border_regions=(),
    curve_chains=(),
) -> RasterImage:
    """Overlay damage, curve, and outline markers on a copy of the image.

    holes / border_regions / curve_chains are iterables of (n, 2) pixel
    coordinate arrays.  Pixels outside the overlay sets and the leaf
    outline are left untouched.
    """
    out = image.pixels.copy()
    shape = out.shape[:2]
    for coords in holes:
        _check_region(coords, shape)
        _paint(out, coords, INTERNAL_DAMAGE_COLOR)
    for coords in border_regions:
        _check_region(coords, shape)
        _paint(out, coords, BORDER_DAMAGE_COLOR)
    if mask is not None:
        if mask.pixels.shape != shape:
            raise ValidationError("mask dimensions do not match the image")
        interior = ndimage.binary_erosion(mask.pixels, structure=np.ones((3, 3), bool), border_value=0)
        outline = mask.pixels & ~interior
        out[outline] = OUTLINE_COLOR
    for coords in curve_chains:
        _check_region(coords, shape)
        _paint(out, coords, CURVE_COLOR)
    return RasterImage(out)


def _check_region(coords, shape) -> None:
    coords = np.asarray(coords)
    if coords.size == 0:
        return
    h, w = shape
    xs, ys = coords[:, 0], coords[:, 1]
    if xs.min() < 0 or ys.min() < 0 or xs.max() >= w or ys.max() >= h:
        raise ValidationError("overlay coordinates fall outside the image")
