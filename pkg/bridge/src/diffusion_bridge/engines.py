"""Inpainting engines: the deterministic stub and the diffusion wrapper.

Engines work on 8-bit RGB arrays plus a boolean hole mask and must return
an array of the input's dimensions; any internal resizing is theirs to
undo. The stub never resizes. The diffusion engine downscales to the
configured bound (and to the multiple-of-8 geometry the models want),
generates, then resizes back bilinearly.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

_NAMED_FILLS = {"echo": None, "gray": 0.5, "white": 1.0, "black": 0.0}


class StubEngine:
    """Protocol stub: echoes the input, optionally repainting masked pixels
    with a constant. Fully deterministic, needs no weights."""

    def __init__(self, fill: float | None = None):
        if fill is not None and not 0.0 <= fill <= 1.0:
            raise ValueError("stub fill must lie in [0, 1]")
        self.fill = fill

    @property
    def name(self) -> str:
        return "stub:echo" if self.fill is None else f"stub:{self.fill:g}"

    def run(self, image: np.ndarray, mask: np.ndarray, prompt: str, steps: int) -> np.ndarray:
        out = image.copy()
        if self.fill is not None:
            out[mask] = int(round(self.fill * 255.0))
        return out


def _fit_size(width: int, height: int, max_side: int) -> tuple[int, int]:
    """Target generation size: bounded by max_side, snapped to multiples of 8."""
    scale = min(1.0, max_side / max(width, height))
    w = max(8, int(round(width * scale / 8.0)) * 8)
    h = max(8, int(round(height * scale / 8.0)) * 8)
    return w, h


class DiffusionEngine:
    """Wraps a pretrained diffusion inpainting pipeline.

    The heavy imports happen at construction so stub deployments never pay
    for them; a missing model stack surfaces as a RuntimeError the server
    turns into a startup failure.
    """

    def __init__(self, model_id: str, device: str = "cpu", max_side: int = 512,
                 seed: int | None = None):
        try:
            import torch
            from diffusers import AutoPipelineForInpainting
        except ImportError as exc:
            raise RuntimeError(
                f"model mode needs the diffusion stack (pip install "
                f"'diffusion-bridge[model]'): {exc}"
            ) from exc
        self.name = model_id
        self.device = device
        self.max_side = max_side
        self.seed = seed
        self._torch = torch
        dtype = torch.float16 if device != "cpu" else torch.float32
        self._pipe = AutoPipelineForInpainting.from_pretrained(model_id, torch_dtype=dtype)
        self._pipe.to(device)

    def run(self, image: np.ndarray, mask: np.ndarray, prompt: str, steps: int) -> np.ndarray:
        height, width = image.shape[:2]
        gen_w, gen_h = _fit_size(width, height, self.max_side)
        pil_image = Image.fromarray(image, "RGB").resize((gen_w, gen_h), Image.BILINEAR)
        pil_mask = Image.fromarray(
            np.where(mask, np.uint8(255), np.uint8(0)), "L"
        ).resize((gen_w, gen_h), Image.NEAREST)
        generator = None
        if self.seed is not None:
            generator = self._torch.Generator(self.device).manual_seed(self.seed)
        result = self._pipe(
            prompt=prompt,
            image=pil_image,
            mask_image=pil_mask,
            num_inference_steps=steps,
            width=gen_w,
            height=gen_h,
            generator=generator,
        ).images[0]
        restored = result.convert("RGB").resize((width, height), Image.BILINEAR)
        return np.asarray(restored, dtype=np.uint8)


def build_engine(config):
    """Resolve a config's model field to an engine instance."""
    model = config.model
    if model.startswith("stub:"):
        token = model[len("stub:"):]
        if token in _NAMED_FILLS:
            return StubEngine(_NAMED_FILLS[token])
        try:
            return StubEngine(float(token))
        except ValueError:
            raise ValueError(
                f"unknown stub variant {model!r}; use stub:echo, stub:gray, "
                f"stub:white, stub:black or stub:<float>"
            ) from None
    return DiffusionEngine(model, config.device, config.max_side, config.seed)
