"""HTTP inpainting bridge.

Exposes ``POST /inpaint`` (JSON with base64 PNG image + mask, a text prompt
and a denoising step count) and ``GET /health``. The backend is either a
diffusion inpainting pipeline resolved from a model identifier, or a
deterministic stub for running the protocol without model weights.
"""

from .config import BridgeConfig
from .engines import DiffusionEngine, StubEngine, build_engine
from .server import make_server, serve, stub_mode

__version__ = "0.1.0"
