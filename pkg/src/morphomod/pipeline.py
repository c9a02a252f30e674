"""The three-phase removal pipeline: segment, inpaint, restore.

``segment`` turns a mask source (a mask file, a chroma-key color, or an
in-memory prediction) into a hard mask and grows it by the dilation
parameter ``d`` so it covers fringes the source missed. ``inpaint`` hands
the pre-filled image to the configured backend. ``restore`` pastes the
synthesized hole back into the untouched original:
``out = x * (1 - m) + x_hat * m``, which is why background pixels always
survive bit-exact no matter what the backend produced.

Neural mask predictors stay out of scope here; any external model can feed
its prediction in through a mask file or ``ProvidedSource``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import EmptyMaskWarning, PipelineStageError
from .inpaint import (
    DEFAULT_PROMPT,
    InpaintOptions,
    InpaintRequest,
    _prefill_or_fallback,
    select_backend,
)
from .morphology import KernelShape, binarize, dilate, make_kernel
from .raster import FillStrategy, as_binary_mask, as_image, as_prob_mask, load_mask, save_png

__all__ = [
    "FileSource",
    "ChromaSource",
    "ProvidedSource",
    "SegmentSource",
    "PipelineConfig",
    "initial_mask",
    "segment",
    "restore",
    "morphomod",
]


@dataclass(frozen=True)
class FileSource:
    """Initial mask read from a mask PNG."""

    path: "str | Path"


@dataclass(frozen=True)
class ChromaSource:
    """Initial mask from chroma keying: pixels within a per-channel
    tolerance of the target color."""

    color: tuple[float, float, float]
    tolerance: float = 0.1


@dataclass(frozen=True)
class ProvidedSource:
    """Initial mask supplied in memory (probabilities or hard)."""

    mask: np.ndarray


SegmentSource = Union[FileSource, ChromaSource, ProvidedSource]


@dataclass(frozen=True)
class PipelineConfig:
    """Per-run knobs for the full pipeline."""

    d: int = 0
    kernel: KernelShape = KernelShape.SQUARE
    prompt: str = DEFAULT_PROMPT
    backend: str = "harmonic"
    fill: FillStrategy = FillStrategy.AVERAGE_BACKGROUND
    threshold: float = 0.5
    tolerance: float = 1e-5
    max_iterations: int | None = None
    steps: int = 50

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("dilation parameter d must be >= 0")
        object.__setattr__(self, "kernel", KernelShape.parse(self.kernel))
        object.__setattr__(self, "fill", FillStrategy.parse(self.fill))

    def inpaint_options(self) -> InpaintOptions:
        return InpaintOptions(
            fill=FillStrategy.NONE,  # pipeline pre-fills before dispatch
            tolerance=self.tolerance,
            max_iterations=self.max_iterations,
            steps=self.steps,
        )


def initial_mask(image, source: SegmentSource) -> np.ndarray:
    """Resolve a mask source to a probability mask matching the image."""
    img = as_image(image)
    if isinstance(source, FileSource):
        prob = load_mask(source.path)
    elif isinstance(source, ChromaSource):
        target = np.asarray(source.color, dtype=np.float64)
        hit = (np.abs(img - target) <= source.tolerance).all(axis=2)
        prob = hit.astype(np.float64)
    elif isinstance(source, ProvidedSource):
        prob = as_prob_mask(source.mask)
    else:
        raise TypeError(f"unknown segment source {type(source).__name__}")
    if prob.shape != img.shape[:2]:
        raise ValueError(
            f"initial mask shape {prob.shape} does not match image {img.shape[:2]}"
        )
    return prob


def segment(image, source: SegmentSource, d: int, *,
            kernel=KernelShape.SQUARE, threshold: float = 0.5) -> np.ndarray:
    """Produce the refined hard mask: threshold the source, then dilate by d.

    An empty initial mask is legal ("no watermark detected") and is returned
    as-is under an ``EmptyMaskWarning``.
    """
    prob = initial_mask(image, source)
    hard = binarize(prob, threshold)
    if not hard.any():
        warnings.warn("no watermark detected: initial mask is empty", EmptyMaskWarning,
                      stacklevel=2)
        return hard
    return dilate(hard, make_kernel(d, kernel))


def restore(image, mask, cleaned) -> np.ndarray:
    """Composite the synthesized hole into the original background.

    ``out = image * (1 - mask) + cleaned * mask`` per channel; both sides
    are taken bit-exact from their sources.
    """
    x = as_image(image)
    x_hat = as_image(cleaned)
    m = as_binary_mask(mask)
    if x.shape != x_hat.shape or m.shape != x.shape[:2]:
        raise ValueError("image, cleaned image and mask must share dimensions")
    return np.where(m[..., None], x_hat, x)


def morphomod(image, source: SegmentSource, config: PipelineConfig = PipelineConfig(), *,
              backend=None, dump_dir=None, dump_stem: str = "sample"):
    """Run segment -> inpaint -> restore on one image.

    Returns ``(restored, mask)``. ``backend`` overrides the configured
    backend id with a ready callable (useful for batch runs that share one
    client). When ``dump_dir`` is set, the stage outputs are written as
    ``<stem>.mask.png``, ``<stem>.inpainted.png`` and ``<stem>.restored.png``
    for debugging. Stage failures are re-raised with stage attribution.
    """
    x = as_image(image)
    try:
        mask = segment(x, source, config.d, kernel=config.kernel, threshold=config.threshold)
    except Exception as exc:
        raise PipelineStageError("segment", str(exc)) from exc

    try:
        if backend is None:
            backend = select_backend(config.backend)
        prefilled = _prefill_or_fallback(x, mask, config.fill)
        request = InpaintRequest(
            image=prefilled, mask=mask, prompt=config.prompt,
            options=config.inpaint_options(),
        )
        cleaned = backend(request)
    except Exception as exc:
        raise PipelineStageError("inpaint", str(exc)) from exc

    try:
        restored = restore(x, mask, cleaned)
    except Exception as exc:
        raise PipelineStageError("restore", str(exc)) from exc

    if dump_dir is not None:
        dump_dir = Path(dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)
        save_png(mask, dump_dir / f"{dump_stem}.mask.png")
        save_png(cleaned, dump_dir / f"{dump_stem}.inpainted.png")
        save_png(restored, dump_dir / f"{dump_stem}.restored.png")
    return restored, mask
