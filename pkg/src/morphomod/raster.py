"""Pixel substrate: image/mask arrays, PNG I/O, alpha compositing, pre-fill.

Every raster is a numpy array of linear ``[0, 1]`` float64 samples (no gamma
handling; metric arithmetic wants raw pixel values):

* ``(H, W, 3)``  RGB image
* ``(H, W, 4)``  RGB plus straight (unassociated) alpha
* ``(H, W)``     single-channel mask: float probabilities in ``[0, 1]``,
  or ``bool`` once the mask has been hardened

All operations are pure: inputs are never mutated, so values can be shared
freely across worker threads.

PNG files are written as 8-bit; 8-bit and 16-bit grayscale files are read
(16-bit color is decoded at 8-bit precision). Mask files follow the
single-channel convention 0 = background, 255 = watermark.
"""

from __future__ import annotations

import io
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image as _PILImage
from PIL import UnidentifiedImageError

from .errors import DegenerateRegionError, PngFormatError, UnsupportedPngError

__all__ = [
    "FillStrategy",
    "as_image",
    "as_image_with_alpha",
    "as_prob_mask",
    "as_binary_mask",
    "luminance",
    "encode_png",
    "decode_png",
    "load_png",
    "load_mask",
    "save_png",
    "composite",
    "prefill",
]


class FillStrategy(str, Enum):
    """How masked pixels are replaced before inpainting."""

    NONE = "none"
    WHITE = "white"
    BLACK = "black"
    GRAY = "gray"
    AVERAGE_BACKGROUND = "avg-bg"

    @classmethod
    def parse(cls, name: "str | FillStrategy") -> "FillStrategy":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown fill strategy {name!r}; valid: {valid}") from None


_CONSTANT_FILLS = {
    FillStrategy.WHITE: 1.0,
    FillStrategy.BLACK: 0.0,
    FillStrategy.GRAY: 0.5,
}


def _check_unit_range(arr: np.ndarray, what: str) -> None:
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{what} values must lie in [0, 1]")


def as_image(a) -> np.ndarray:
    """Validate and return an ``(H, W, 3)`` float64 image in ``[0, 1]``."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    _check_unit_range(arr, "image")
    return arr


def as_image_with_alpha(a) -> np.ndarray:
    """Validate and return an ``(H, W, 4)`` float64 RGBA raster in ``[0, 1]``."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 4:
        raise ValueError(f"expected an (H, W, 4) RGBA raster, got shape {arr.shape}")
    _check_unit_range(arr, "overlay")
    return arr


def as_prob_mask(a) -> np.ndarray:
    """Validate and return an ``(H, W)`` float64 mask with values in ``[0, 1]``."""
    arr = np.asarray(a)
    if arr.dtype == bool:
        return arr.astype(np.float64)
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected an (H, W) mask, got shape {arr.shape}")
    _check_unit_range(arr, "mask")
    return arr


def as_binary_mask(a) -> np.ndarray:
    """Validate and return an ``(H, W)`` bool mask; numeric input must be 0/1."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise ValueError(f"expected an (H, W) mask, got shape {arr.shape}")
    if arr.dtype == bool:
        return arr
    if not ((arr == 0) | (arr == 1)).all():
        raise ValueError("binary mask may contain only 0 and 1")
    return arr.astype(bool)


def luminance(image) -> np.ndarray:
    """Rec. 601 luma of an RGB image, as an (H, W) array."""
    img = as_image(image)
    return img @ np.array([0.299, 0.587, 0.114])


# --------------------------------------------------------------------------
# PNG I/O


def decode_png(data: bytes) -> np.ndarray:
    """Decode PNG bytes to a float raster.

    Returns ``(H, W, 3)`` for RGB, ``(H, W, 4)`` for RGBA, and ``(H, W)``
    for grayscale files (luminance mapped to a probability mask). Palette
    and gray+alpha images are expanded to RGBA. 1-bit files are rejected.
    """
    try:
        img = _PILImage.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise PngFormatError(f"not a decodable PNG: {exc}") from exc
    if img.format != "PNG":
        raise PngFormatError(f"not a PNG file (detected format: {img.format})")
    mode = img.mode
    if mode in ("P", "LA", "PA"):
        img = img.convert("RGBA")
        mode = "RGBA"
    if mode in ("RGB", "RGBA", "L"):
        return np.asarray(img, dtype=np.float64) / 255.0
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(img, dtype=np.float64) / 65535.0
        return np.clip(arr, 0.0, 1.0)
    raise UnsupportedPngError(f"unsupported PNG pixel mode {mode!r}")


def encode_png(raster) -> bytes:
    """Encode an image, RGBA raster, or mask as 8-bit PNG bytes.

    Bool masks map to 0/255; float rasters are rounded to the nearest byte,
    so a save/load round trip changes any channel by at most 1/255 (and is
    exact for binary masks).
    """
    arr = np.asarray(raster)
    if arr.dtype == bool:
        payload = np.where(arr, np.uint8(255), np.uint8(0))
        mode = "L"
    else:
        arr = np.asarray(arr, dtype=np.float64)
        _check_unit_range(arr, "raster")
        payload = np.round(arr * 255.0).astype(np.uint8)
        if arr.ndim == 2:
            mode = "L"
        elif arr.ndim == 3 and arr.shape[2] == 3:
            mode = "RGB"
        elif arr.ndim == 3 and arr.shape[2] == 4:
            mode = "RGBA"
        else:
            raise ValueError(f"cannot encode raster of shape {arr.shape}")
    buf = io.BytesIO()
    _PILImage.fromarray(payload, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def load_png(path) -> np.ndarray:
    """Load a PNG file; see :func:`decode_png` for the returned shapes.

    Raises ``FileNotFoundError`` for a missing file, ``PngFormatError`` for
    undecodable bytes, ``UnsupportedPngError`` for unsupported bit depths.
    """
    with open(Path(path), "rb") as fh:
        data = fh.read()
    try:
        return decode_png(data)
    except PngFormatError as exc:
        raise PngFormatError(f"{path}: {exc}") from exc


def load_mask(path) -> np.ndarray:
    """Load a mask PNG as an (H, W) probability mask.

    Grayscale files map directly; color files are reduced to luminance.
    """
    arr = load_png(path)
    if arr.ndim == 2:
        return arr
    return luminance(arr[..., :3])


def save_png(raster, path) -> None:
    """Write an image or mask to ``path`` as 8-bit PNG."""
    data = encode_png(raster)
    with open(Path(path), "wb") as fh:
        fh.write(data)


# --------------------------------------------------------------------------
# Compositing and pre-fill


def composite(base, overlay, origin=(0, 0), opacity_scale: float = 1.0) -> np.ndarray:
    """Blend an RGBA overlay onto an RGB base image.

    Per pixel: ``out = a * overlay + (1 - a) * base`` with
    ``a = overlay_alpha * opacity_scale``. ``origin`` is the (row, col) of
    the overlay's top-left corner in the base frame; parts of the overlay
    falling outside the base are clipped. Pixels outside the overlay (and
    the whole image when ``opacity_scale == 0``) are returned bit-exact.
    """
    base = as_image(base)
    overlay = as_image_with_alpha(overlay)
    if not 0.0 <= opacity_scale <= 1.0:
        raise ValueError("opacity_scale must lie in [0, 1]")
    out = base.copy()
    if opacity_scale == 0.0:
        return out
    oy, ox = int(origin[0]), int(origin[1])
    height, width = base.shape[:2]
    h, w = overlay.shape[:2]
    y0, x0 = max(oy, 0), max(ox, 0)
    y1, x1 = min(oy + h, height), min(ox + w, width)
    if y0 >= y1 or x0 >= x1:
        return out
    ov = overlay[y0 - oy : y1 - oy, x0 - ox : x1 - ox]
    a = ov[..., 3:4] * opacity_scale
    out[y0:y1, x0:x1] = a * ov[..., :3] + (1.0 - a) * out[y0:y1, x0:x1]
    return out


def prefill(image, mask, strategy=FillStrategy.AVERAGE_BACKGROUND) -> np.ndarray:
    """Replace masked pixels according to a fill strategy.

    ``white``/``black``/``gray`` fill constants, ``avg-bg`` fills the
    per-channel mean of the unmasked pixels, ``none`` returns the image
    unchanged. Unmasked pixels are always bit-identical to the input.

    Raises ``DegenerateRegionError`` for ``avg-bg`` on an all-ones mask.
    """
    img = as_image(image)
    m = as_binary_mask(mask)
    if m.shape != img.shape[:2]:
        raise ValueError(f"mask shape {m.shape} does not match image {img.shape[:2]}")
    strategy = FillStrategy.parse(strategy)
    out = img.copy()
    if strategy is FillStrategy.NONE:
        return out
    if strategy is FillStrategy.AVERAGE_BACKGROUND:
        background = ~m
        if not background.any():
            raise DegenerateRegionError(
                "prefill: mask covers every pixel, no background to average"
            )
        fill = img[background].mean(axis=0)
    else:
        fill = _CONSTANT_FILLS[strategy]
    out[m] = fill
    return out
