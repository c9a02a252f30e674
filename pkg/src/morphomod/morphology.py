"""Binary morphology: structuring elements, dilation, erosion, thresholding.

Dilation grows a hard mask so that it covers watermark fringes the initial
segmentation missed: ``out(p) = max over footprint offsets o of in(p - o)``.
Square kernels run separably (two 1-D sliding-window passes); disk kernels
decompose into one horizontal run per row offset. Out-of-bounds neighbors
read as background, so a mask never self-amplifies across the image border.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .raster import as_binary_mask, as_prob_mask

__all__ = [
    "KernelShape",
    "StructuringElement",
    "make_kernel",
    "dilate",
    "erode",
    "binarize",
    "invert",
]


class KernelShape(str, Enum):
    SQUARE = "square"
    DISK = "disk"

    @classmethod
    def parse(cls, name: "str | KernelShape") -> "KernelShape":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown kernel shape {name!r}; valid: square, disk") from None


@dataclass(frozen=True, eq=False)
class StructuringElement:
    """A (2d+1) x (2d+1) neighborhood footprint centered on the origin."""

    shape: KernelShape
    d: int
    footprint: np.ndarray  # bool, True where the offset belongs to the kernel

    @property
    def offsets(self) -> list[tuple[int, int]]:
        """The (dy, dx) offsets covered by the footprint."""
        ys, xs = np.nonzero(self.footprint)
        return [(int(y) - self.d, int(x) - self.d) for y, x in zip(ys, xs)]


def make_kernel(d: int, shape=KernelShape.SQUARE) -> StructuringElement:
    """Build a structuring element with dilation parameter ``d``.

    Square: every offset with ``max(|dy|, |dx|) <= d`` (a (2d+1)x(2d+1)
    window). Disk: every offset with ``dy^2 + dx^2 <= d^2``. ``d = 0``
    yields the identity footprint ``{(0, 0)}`` for either shape.
    """
    d = int(d)
    if d < 0:
        raise ValueError("dilation parameter d must be >= 0")
    shape = KernelShape.parse(shape)
    if shape is KernelShape.SQUARE:
        footprint = np.ones((2 * d + 1, 2 * d + 1), dtype=bool)
    else:
        yy, xx = np.mgrid[-d : d + 1, -d : d + 1]
        footprint = (yy * yy + xx * xx) <= d * d
    return StructuringElement(shape=shape, d=d, footprint=footprint)


def _shift(mask: np.ndarray, offset: int, axis: int, fill: bool) -> np.ndarray:
    """Translate along one axis; vacated cells take ``fill``."""
    if offset == 0:
        return mask
    out = np.full_like(mask, fill)
    extent = mask.shape[axis]
    if abs(offset) >= extent:
        return out
    src = [slice(None)] * mask.ndim
    dst = [slice(None)] * mask.ndim
    if offset > 0:
        dst[axis], src[axis] = slice(offset, None), slice(None, -offset)
    else:
        dst[axis], src[axis] = slice(None, offset), slice(-offset, None)
    out[tuple(dst)] = mask[tuple(src)]
    return out


def _window_reduce(mask: np.ndarray, radius: int, axis: int, fill: bool, op) -> np.ndarray:
    """1-D sliding-window any/all of width ``2*radius + 1`` with constant padding."""
    if radius == 0:
        return mask
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(mask, pad, constant_values=fill)
    windows = sliding_window_view(padded, 2 * radius + 1, axis=axis)
    return op(windows, axis=-1)


def _disk_row_radii(d: int) -> list[int]:
    return [math.isqrt(d * d - dy * dy) for dy in range(-d, d + 1)]


def dilate(mask, kernel: StructuringElement) -> np.ndarray:
    """Neighborhood-max of a binary mask over the kernel footprint.

    ``out(p) = 1`` iff some footprint translate of ``p`` hits a 1-pixel;
    out-of-bounds neighbors read as 0.
    """
    m = as_binary_mask(mask)
    d = kernel.d
    if d == 0:
        return m.copy()
    if kernel.shape is KernelShape.SQUARE:
        rows = _window_reduce(m, d, 0, False, np.any)
        return _window_reduce(rows, d, 1, False, np.any)
    out = np.zeros_like(m)
    runs: dict[int, np.ndarray] = {}
    for dy, rx in zip(range(-d, d + 1), _disk_row_radii(d)):
        row = runs.get(rx)
        if row is None:
            row = runs[rx] = _window_reduce(m, rx, 1, False, np.any)
        out |= _shift(row, dy, 0, False)
    return out


def erode(mask, kernel: StructuringElement, *, out_of_bounds: bool = False) -> np.ndarray:
    """Neighborhood-min of a binary mask over the kernel footprint.

    By default out-of-bounds neighbors read as 0, so the outermost ring of
    an all-ones mask erodes away. Pass ``out_of_bounds=True`` to treat the
    surround as foreground instead - that variant is the exact dual of
    :func:`dilate` (``dilate(m) == ~erode(~m, out_of_bounds=True)`` for the
    symmetric kernels built here).
    """
    m = as_binary_mask(mask)
    d = kernel.d
    if d == 0:
        return m.copy()
    fill = bool(out_of_bounds)
    if kernel.shape is KernelShape.SQUARE:
        rows = _window_reduce(m, d, 0, fill, np.all)
        return _window_reduce(rows, d, 1, fill, np.all)
    out = np.ones_like(m)
    runs: dict[int, np.ndarray] = {}
    for dy, rx in zip(range(-d, d + 1), _disk_row_radii(d)):
        row = runs.get(rx)
        if row is None:
            row = runs[rx] = _window_reduce(m, rx, 1, fill, np.all)
        out &= _shift(row, dy, 0, fill)
    return out


def binarize(prob_mask, threshold: float = 0.5) -> np.ndarray:
    """Harden a probability mask: 1 where value >= threshold."""
    prob = as_prob_mask(prob_mask)
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    return prob >= threshold

def invert(mask) -> np.ndarray:
    """Elementwise complement of a binary mask."""
    return ~as_binary_mask(mask)
