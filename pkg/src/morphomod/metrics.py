"""Blind removal/preservation metrics and mask-quality scores.

Removal is scored by comparing the watermarked input against the output
*inside* the ground-truth mask (region suffix ``_w``): a large RMSE and a
small SSIM there mean the marked pixels actually changed. Preservation is
scored over the complementary background region (suffix ``_t``): small RMSE
and SSIM near 1 mean the rest of the image survived untouched. No
watermark-free reference image is needed anywhere.

Region metrics evaluate on region-isolated copies (the complement zeroed in
both inputs) so edits outside a region can never leak into its windowed
statistics: touching only masked pixels leaves the background scores at
their identity values exactly, and vice versa.

Mask quality uses IoU / F1 on hard masks plus a Dice + binary-cross-entropy
score for soft predictions against a hard ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateRegionError
from .raster import as_binary_mask, as_image, as_prob_mask

__all__ = [
    "SSIM_WINDOW_RADIUS",
    "SSIM_SIGMA",
    "SSIM_C1",
    "SSIM_C2",
    "MetricsReport",
    "rmse_region",
    "ssim_map",
    "ssim_region",
    "background_of",
    "iou",
    "f1",
    "dice_bce",
    "report",
]

# 11x11 Gaussian window, sigma 1.5, stabilizers for unit dynamic range.
SSIM_WINDOW_RADIUS = 5
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2

# Clamp for soft mask probabilities so log terms stay finite.
_EPS = 1e-7


def _matched(a, b, region):
    a = as_image(a)
    b = as_image(b)
    m = as_binary_mask(region)
    if a.shape != b.shape or m.shape != a.shape[:2]:
        raise ValueError("images and region mask must share dimensions")
    return a, b, m


def rmse_region(a, b, region) -> float:
    """Root-mean-square difference over (pixel, channel) pairs where region=1."""
    a, b, m = _matched(a, b, region)
    if not m.any():
        raise DegenerateRegionError("rmse_region: region selects no pixels")
    diff = a[m] - b[m]
    return float(np.sqrt(np.mean(diff * diff)))


def _gaussian_kernel_1d() -> np.ndarray:
    x = np.arange(-SSIM_WINDOW_RADIUS, SSIM_WINDOW_RADIUS + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / SSIM_SIGMA) ** 2)
    return k / k.sum()


_SSIM_KERNEL = _gaussian_kernel_1d()


def _blur(field: np.ndarray) -> np.ndarray:
    """Separable Gaussian-weighted local mean with symmetric edge padding."""
    r = SSIM_WINDOW_RADIUS
    padded = np.pad(field, ((r, r), (0, 0)), mode="symmetric")
    rows = sliding_window_view(padded, 2 * r + 1, axis=0) @ _SSIM_KERNEL
    padded = np.pad(rows, ((0, 0), (r, r)), mode="symmetric")
    return sliding_window_view(padded, 2 * r + 1, axis=1) @ _SSIM_KERNEL


def ssim_map(a, b) -> np.ndarray:
    """Per-pixel SSIM of two images, averaged over channels.

    Gaussian-weighted local statistics per channel, the usual
    ``(2*mu_a*mu_b + C1)(2*cov + C2) / ((mu_a^2 + mu_b^2 + C1)(var_a + var_b + C2))``
    map, then the channel mean. Identical inputs give exactly 1 everywhere.
    """
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ValueError("images must share dimensions")
    size = 2 * SSIM_WINDOW_RADIUS + 1
    if a.shape[0] < size or a.shape[1] < size:
        raise ValueError(f"images must be at least {size}x{size} for SSIM")
    out = np.zeros(a.shape[:2])
    for c in range(3):
        x, y = a[..., c], b[..., c]
        mu_x, mu_y = _blur(x), _blur(y)
        var_x = _blur(x * x) - mu_x * mu_x
        var_y = _blur(y * y) - mu_y * mu_y
        cov = _blur(x * y) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * cov + SSIM_C2)
        den = (mu_x * mu_x + mu_y * mu_y + SSIM_C1) * (var_x + var_y + SSIM_C2)
        out += num / den
    return out / 3.0


def ssim_region(a, b, region) -> float:
    """Mean of the SSIM map at pixels where region = 1."""
    a, b, m = _matched(a, b, region)
    if not m.any():
        raise DegenerateRegionError("ssim_region: region selects no pixels")
    return float(ssim_map(a, b)[m].mean())


def background_of(image, mask) -> tuple[np.ndarray, np.ndarray]:
    """Isolate the background: masked pixels zeroed, plus the background mask.

    Returns ``(image * (1 - mask), ~mask)`` so preservation metrics can be
    evaluated over the complement of the watermark.
    """
    img = as_image(image)
    m = as_binary_mask(mask)
    if m.shape != img.shape[:2]:
        raise ValueError("mask dimensions must match the image")
    return np.where(m[..., None], 0.0, img), ~m


def _region_only(image: np.ndarray, m: np.ndarray) -> np.ndarray:
    return np.where(m[..., None], image, 0.0)


def iou(pred, gt) -> float:
    """Intersection-over-union of two hard masks; 1.0 when both are empty."""
    p = as_binary_mask(pred)
    g = as_binary_mask(gt)
    if p.shape != g.shape:
        raise ValueError("masks must share dimensions")
    union = int(np.count_nonzero(p | g))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(p & g)) / union


def f1(pred, gt) -> float:
    """Dice / F1 overlap of two hard masks; 1.0 when both are empty."""
    p = as_binary_mask(pred)
    g = as_binary_mask(gt)
    if p.shape != g.shape:
        raise ValueError("masks must share dimensions")
    total = int(np.count_nonzero(p)) + int(np.count_nonzero(g))
    if total == 0:
        return 1.0
    return 2.0 * int(np.count_nonzero(p & g)) / total


def dice_bce(pred, gt) -> tuple[float, float, float]:
    """Dice loss and mean binary cross-entropy of a soft mask vs. a hard one.

    Probabilities are clamped to ``[1e-7, 1 - 1e-7]`` so hard predictions do
    not blow up the log terms. Returns ``(dice_loss, bce_loss, total)``.
    """
    p = np.clip(as_prob_mask(pred), _EPS, 1.0 - _EPS)
    g = as_binary_mask(gt).astype(np.float64)
    if p.shape != g.shape:
        raise ValueError("masks must share dimensions")
    overlap = float((p * g).sum())
    dice_loss = 1.0 - 2.0 * overlap / (float(p.sum()) + float(g.sum()) + _EPS)
    bce_loss = float(-np.mean(g * np.log(p) + (1.0 - g) * np.log(1.0 - p)))
    return dice_loss, bce_loss, dice_loss + bce_loss


@dataclass(frozen=True)
class MetricsReport:
    """Removal (``*_w``), preservation (``*_t``) and mask-quality scores.

    Fields are ``None`` when not applicable (no predicted mask) or when the
    corresponding region was empty and strict mode was off; ``flags`` then
    records which side degenerated. ``lpips_*`` slots stay ``None`` here and
    exist so external perceptual scorers can fill them.
    """

    rmse_w: float | None = None
    ssim_w: float | None = None
    rmse_t: float | None = None
    ssim_t: float | None = None
    iou: float | None = None
    f1: float | None = None
    dice_loss: float | None = None
    bce_loss: float | None = None
    lpips_w: float | None = None
    lpips_t: float | None = None
    flags: tuple[str, ...] = field(default=())

    CSV_FIELDS = (
        "rmse_w",
        "ssim_w",
        "rmse_t",
        "ssim_t",
        "iou",
        "f1",
        "dice_loss",
        "bce_loss",
        "flags",
    )

    def to_dict(self) -> dict:
        """Flat JSON-ready mapping with snake_case keys."""
        out = {
            name: getattr(self, name)
            for name in (
                "rmse_w", "ssim_w", "rmse_t", "ssim_t",
                "iou", "f1", "dice_loss", "bce_loss", "lpips_w", "lpips_t",
            )
        }
        out["flags"] = list(self.flags)
        return out

    def csv_row(self) -> dict:
        row = {}
        for name in self.CSV_FIELDS:
            value = getattr(self, name)
            if name == "flags":
                row[name] = ";".join(self.flags)
            else:
                # full float precision so per-row means re-aggregate exactly
                row[name] = "" if value is None else repr(value)
        return row


def report(x_wm, x_out, gt_mask, pred_mask=None, *, strict: bool = True) -> MetricsReport:
    """Score one removal result against the watermarked input.

    ``rmse_w``/``ssim_w`` compare the two images inside ``gt_mask``;
    ``rmse_t``/``ssim_t`` compare the zeroed-background pair over the
    complement. When ``pred_mask`` is given, IoU/F1 and the Dice+BCE score
    of the prediction against ``gt_mask`` are filled in.

    An empty region raises ``DegenerateRegionError`` unless ``strict`` is
    off, in which case the affected fields are ``None`` and a flag records
    the degeneracy.
    """
    a, b, m = _matched(x_wm, x_out, gt_mask)
    flags: list[str] = []

    rmse_w = ssim_w = rmse_t = ssim_t = None
    if m.any():
        wm_only_a, wm_only_b = _region_only(a, m), _region_only(b, m)
        rmse_w = rmse_region(wm_only_a, wm_only_b, m)
        ssim_w = ssim_region(wm_only_a, wm_only_b, m)
    elif strict:
        raise DegenerateRegionError("report: ground-truth mask selects no pixels")
    else:
        flags.append("degenerate_wr")

    bg = ~m
    if bg.any():
        bg_a, _ = background_of(a, m)
        bg_b, _ = background_of(b, m)
        rmse_t = rmse_region(bg_a, bg_b, bg)
        ssim_t = ssim_region(bg_a, bg_b, bg)
    elif strict:
        raise DegenerateRegionError("report: mask covers the whole image")
    else:
        flags.append("degenerate_sp")

    iou_v = f1_v = dice_v = bce_v = None
    if pred_mask is not None:
        p = as_binary_mask(pred_mask)
        iou_v = iou(p, m)
        f1_v = f1(p, m)
        dice_v, bce_v, _ = dice_bce(p.astype(np.float64), m)

    return MetricsReport(
        rmse_w=rmse_w, ssim_w=ssim_w, rmse_t=rmse_t, ssim_t=ssim_t,
        iou=iou_v, f1=f1_v, dice_loss=dice_v, bce_loss=bce_v,
        flags=tuple(flags),
    )
