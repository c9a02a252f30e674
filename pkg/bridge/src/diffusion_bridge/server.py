"""The HTTP face of the bridge.

Wire protocol::

    GET  /health  -> 200 {"status": "ok", "model": "<id>"}
    POST /inpaint with JSON
         { "image": <base64 PNG>, "mask": <base64 single-channel PNG,
           255 = inpaint>, "prompt": <string>, "steps": <int >= 1> }
         -> 200 {"image": <base64 PNG>}
         -> 400 malformed request, 422 image/mask dimension mismatch,
            500 engine failure; all errors carry {"error": <string>}

One request is handled at a time, so at most one generation is ever in
flight. The prompt defaults to "Remove." when absent or empty.
"""

from __future__ import annotations

import base64
import io
import json
import sys
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
from PIL import Image, UnidentifiedImageError

from .config import BridgeConfig
from .engines import StubEngine, build_engine

DEFAULT_PROMPT = "Remove."


class _BadRequest(Exception):
    pass


def _decode_rgb(payload: str) -> np.ndarray:
    try:
        raw = base64.b64decode(payload, validate=True)
        img = Image.open(io.BytesIO(raw))
        img.load()
    except (ValueError, UnidentifiedImageError, OSError) as exc:
        raise _BadRequest(f"undecodable image payload: {exc}") from exc
    return np.asarray(img.convert("RGB"), dtype=np.uint8)


def _decode_mask(payload: str) -> np.ndarray:
    try:
        raw = base64.b64decode(payload, validate=True)
        img = Image.open(io.BytesIO(raw))
        img.load()
    except (ValueError, UnidentifiedImageError, OSError) as exc:
        raise _BadRequest(f"undecodable mask payload: {exc}") from exc
    return np.asarray(img.convert("L"), dtype=np.uint8) >= 128


def _encode_png(image: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(image, "RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def _reply(self, status: int, doc: dict):
        body = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/health":
            self._reply(200, {"status": "ok", "model": self.server.engine.name})
        else:
            self._reply(404, {"error": f"unknown path {self.path}"})

    def do_POST(self):
        if self.path != "/inpaint":
            self._reply(404, {"error": f"unknown path {self.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
            try:
                doc = json.loads(self.rfile.read(length).decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise _BadRequest(f"malformed JSON body: {exc}") from exc
            if not isinstance(doc, dict) or "image" not in doc or "mask" not in doc:
                raise _BadRequest("body must be a JSON object with image and mask")
            image = _decode_rgb(doc["image"])
            mask = _decode_mask(doc["mask"])
            prompt = str(doc.get("prompt") or DEFAULT_PROMPT)
            steps = doc.get("steps", self.server.default_steps)
            if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
                raise _BadRequest(f"steps must be an integer >= 1, got {steps!r}")
        except _BadRequest as exc:
            self._reply(400, {"error": str(exc)})
            return

        if image.shape[:2] != mask.shape:
            self._reply(422, {
                "error": f"mask {mask.shape[1]}x{mask.shape[0]} does not match "
                         f"image {image.shape[1]}x{image.shape[0]}"
            })
            return

        try:
            out = self.server.engine.run(image, mask, prompt, steps)
            out = np.asarray(out, dtype=np.uint8)
            if out.shape != image.shape:
                raise RuntimeError(
                    f"engine returned shape {out.shape}, expected {image.shape}"
                )
        except Exception as exc:  # noqa: BLE001 - protocol boundary
            self._reply(500, {"error": f"{type(exc).__name__}: {exc}"})
            return
        self._reply(200, {"image": _encode_png(out)})


def make_server(config: BridgeConfig, engine=None) -> HTTPServer:
    """Build the (unstarted) HTTP server for a config."""
    server = HTTPServer(("0.0.0.0", config.port), _Handler)
    server.engine = engine if engine is not None else build_engine(config)
    server.default_steps = config.steps
    return server


def stub_mode(fill: float | None = None, port: int = 0) -> HTTPServer:
    """Protocol server backed by the deterministic stub (echo when fill is
    None); serves the exact wire contract without any model weights."""
    config = BridgeConfig(model="stub:echo", port=port)
    return make_server(config, engine=StubEngine(fill))


def serve(config: BridgeConfig) -> None:
    """Run the service until interrupted."""
    server = make_server(config)
    print(f"bridge: serving {server.engine.name} on port {server.server_port}")
    server.serve_forever()


def main() -> None:
    try:
        config = BridgeConfig.from_env()
        serve(config)
    except KeyboardInterrupt:
        pass
    except Exception as exc:  # noqa: BLE001 - startup boundary
        print(f"bridge: startup failed: {exc}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
