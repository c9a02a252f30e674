"""Service configuration, resolved from environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class BridgeConfig:
    """Model identifier, device, default step count, resize bound, port.

    ``model`` is either a diffusion model id (resolved by the model loader)
    or ``stub:echo`` / ``stub:gray`` / ``stub:<float>`` for the deterministic
    protocol stub. Images whose longer side exceeds ``max_side`` are resized
    for generation and the result is resized back.
    """

    model: str = "stub:echo"
    device: str = "cpu"
    steps: int = 50
    max_side: int = 512
    port: int = 8008
    seed: int | None = None

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("default steps must be >= 1")
        if self.max_side < 8:
            raise ValueError("max_side must be >= 8")

    @classmethod
    def from_env(cls, env=None) -> "BridgeConfig":
        env = os.environ if env is None else env
        seed = env.get("BRIDGE_SEED")
        return cls(
            model=env.get("BRIDGE_MODEL", cls.model),
            device=env.get("BRIDGE_DEVICE", cls.device),
            steps=int(env.get("BRIDGE_STEPS", cls.steps)),
            max_side=int(env.get("BRIDGE_MAX_SIDE", cls.max_side)),
            port=int(env.get("BRIDGE_PORT", cls.port)),
            seed=int(seed) if seed is not None else None,
        )
