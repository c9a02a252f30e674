"""Synthetic dataset generators and the box-position disorientation study.

Three recipe families, all deterministic given a seed:

* ``clwd``: translucent marks - a logo is randomly scaled, rotated and
  placed with opacity drawn uniformly from [0.3, 0.7].
* ``alpha1-s`` / ``alpha1-l``: fully opaque marks scaled so the mask covers
  6% (small) or 35% (large) of the host area, within +/-1% / +/-2%.
* ``disorient``: a 32x32 orange box on a 256x256 host, centered in one of
  four bands (north / east / south / west); the box position carries the
  sample's label and the exact box footprint is the mask.

Every generated mask equals the set of pixels where the placed overlay has
alpha > 0, so masks are exact by construction. Hosts and logos default to
procedural stand-ins; point ``build_dataset`` at folders of PNGs to use a
real corpus instead.

Datasets land on disk as ``<root>/watermarked/NNNNN.png`` +
``<root>/mask/NNNNN.png`` (+ ``labels.csv`` for disorient) with a
``manifest.json`` recording the seed and recipe parameters.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CoverageError, DegenerateRegionError
from .pipeline import ChromaSource, PipelineConfig, morphomod
from .raster import as_image, as_image_with_alpha, composite, load_png, save_png

__all__ = [
    "ORANGE",
    "LABELS",
    "BAND_CENTERS",
    "BOX_SIZE",
    "WatermarkSpec",
    "DisorientSample",
    "DatasetManifest",
    "transform_rgba",
    "stamp",
    "synthetic_host",
    "synthetic_logo",
    "emblem_logo",
    "synth_clwd_like",
    "synth_alpha1",
    "synth_disorient",
    "classify_position",
    "disorient",
    "build_dataset",
    "dataset_entries",
]

# Disorient geometry: one box per cardinal band on a fixed-size host. The
# classifier and the generator must share these constants (they are written
# into the manifest), otherwise the position labels lose their meaning.
HOST_SIZE = 256
BOX_SIZE = 32
BAND_MARGIN = 16
BAND_JITTER = 8
LABELS = ("north", "east", "south", "west")
_MID = HOST_SIZE // 2
_NEAR = BAND_MARGIN + BOX_SIZE // 2
_FAR = HOST_SIZE - BAND_MARGIN - BOX_SIZE // 2
BAND_CENTERS = {
    "north": (_NEAR, _MID),
    "east": (_MID, _FAR),
    "south": (_FAR, _MID),
    "west": (_MID, _NEAR),
}
ORANGE = (1.0, 140.0 / 255.0, 0.0)  # byte-exact under 8-bit PNG round trips

ALPHA1_VARIANTS = {"s": (0.06, 0.01), "l": (0.35, 0.02)}

CLWD_SCALE_RANGE = (0.15, 0.40)  # fraction of host width
CLWD_OPACITY_RANGE = (0.3, 0.7)
CLWD_ROTATION_RANGE = (0.0, 360.0)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class WatermarkSpec:
    """Sampled placement parameters for one generated watermark."""

    scale: float  # placed width as a fraction of host width
    position: tuple[int, int]  # (row, col) of the overlay's top-left corner
    rotation: float  # degrees
    opacity: float
    logo: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class DisorientSample:
    image: np.ndarray
    label: str
    mask: np.ndarray


# --------------------------------------------------------------------------
# Overlay geometry


def _bilinear(src: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample (H, W, C) at float coordinates; outside reads as zero."""
    h, w = src.shape[:2]
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    fy, fx = ys - y0, xs - x0
    acc = np.zeros(ys.shape + (src.shape[2],))
    for oy, wy in ((0, 1.0 - fy), (1, fy)):
        for ox, wx in ((0, 1.0 - fx), (1, fx)):
            yi, xi = y0 + oy, x0 + ox
            valid = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
            vals = src[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
            acc += (wy * wx * valid)[..., None] * vals
    return acc


def transform_rgba(overlay, scale: float = 1.0, degrees: float = 0.0) -> np.ndarray:
    """Scale and rotate an RGBA overlay onto a tight canvas.

    Resampling is bilinear on alpha-premultiplied channels; the output alpha
    is re-hardened at 0.5 so downstream masks stay exact {0, 1} sets and
    opaque marks keep their original colors instead of feathered mixtures.
    """
    rgba = as_image_with_alpha(overlay)
    if scale <= 0:
        raise ValueError("scale must be positive")
    h, w = rgba.shape[:2]
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    out_h = max(1, math.ceil(scale * (h * abs(cos_t) + w * abs(sin_t))))
    out_w = max(1, math.ceil(scale * (w * abs(cos_t) + h * abs(sin_t))))
    yy, xx = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    dy = (yy - (out_h - 1) / 2.0) / scale
    dx = (xx - (out_w - 1) / 2.0) / scale
    src_y = cos_t * dy + sin_t * dx + (h - 1) / 2.0
    src_x = -sin_t * dy + cos_t * dx + (w - 1) / 2.0
    premult = np.concatenate([rgba[..., :3] * rgba[..., 3:4], rgba[..., 3:4]], axis=2)
    sampled = _bilinear(premult, src_y, src_x)
    alpha = sampled[..., 3]
    hard = alpha >= 0.5
    out = np.zeros((out_h, out_w, 4))
    rgb = np.clip(sampled[..., :3] / np.maximum(alpha, 1e-12)[..., None], 0.0, 1.0)
    out[hard, :3] = rgb[hard]
    out[hard, 3] = 1.0
    return out


def stamp(host, overlay, position, opacity: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Composite an overlay and return (image, exact mask of alpha > 0)."""
    host = as_image(host)
    overlay = as_image_with_alpha(overlay)
    img = composite(host, overlay, position, opacity)
    mask = np.zeros(host.shape[:2], dtype=bool)
    oy, ox = int(position[0]), int(position[1])
    h, w = overlay.shape[:2]
    y0, x0 = max(oy, 0), max(ox, 0)
    y1, x1 = min(oy + h, host.shape[0]), min(ox + w, host.shape[1])
    if y0 < y1 and x0 < x1:
        mask[y0:y1, x0:x1] = overlay[y0 - oy : y1 - oy, x0 - ox : x1 - ox, 3] > 0
    return img, mask


# --------------------------------------------------------------------------
# Procedural hosts and logos


def synthetic_host(rng, size: int = 256) -> np.ndarray:
    """Smooth low-frequency color field standing in for a photo host."""
    rng = _as_rng(rng)
    yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    img = np.empty((size, size, 3))
    for c in range(3):
        base = rng.uniform(0.30, 0.70)
        gy, gx = rng.uniform(-0.25, 0.25, 2)
        channel = base + gy * (yy - 0.5) + gx * (xx - 0.5)
        for _ in range(2):
            fy, fx = rng.uniform(0.5, 2.0, 2)
            py, px = rng.uniform(0.0, 2.0 * np.pi, 2)
            amp = rng.uniform(0.02, 0.08)
            channel = channel + amp * np.sin(2 * np.pi * fy * yy + py) * np.sin(
                2 * np.pi * fx * xx + px
            )
        img[..., c] = channel
    return np.clip(img, 0.02, 0.98)


def synthetic_logo(rng, size: int = 96) -> np.ndarray:
    """Solid single-color logo (ellipse plus a bar), either dark or bright.

    The fill covers roughly half the canvas, which keeps large-coverage
    placements feasible on square hosts.
    """
    rng = _as_rng(rng)
    color = rng.uniform(0.0, 0.12, 3) if rng.random() < 0.5 else rng.uniform(0.88, 1.0, 3)
    yy, xx = np.mgrid[0:size, 0:size]
    center = (size - 1) / 2.0
    ry = size * rng.uniform(0.32, 0.42)
    rx = size * rng.uniform(0.32, 0.42)
    inside = ((yy - center) / ry) ** 2 + ((xx - center) / rx) ** 2 <= 1.0
    bar_h = max(2, int(size * rng.uniform(0.10, 0.16)))
    bar_y = int(rng.integers(size // 4, size - size // 4 - bar_h))
    inside[bar_y : bar_y + bar_h, int(size * 0.06) : int(size * 0.94)] = True
    canvas = np.zeros((size, size, 4))
    canvas[inside, :3] = color
    canvas[inside, 3] = 1.0
    return canvas


def emblem_logo(rng, *, core_half: int = 31, strip_gaps=(1, 3, 8), strip_len: int = 13) -> np.ndarray:
    """Opaque emblem: a solid square core plus detached one-pixel strips.

    Four strips per gap sit off the core's edges with ``gap`` empty pixels
    in between. One-pixel strips vanish under a one-pixel erosion of the
    exact mask, and a core eroded by one and re-dilated by ``d`` reaches a
    strip at gap ``g`` exactly when ``d >= g + 2`` - handy for staging how
    much of a mark a dilation sweep recovers.
    """
    rng = _as_rng(rng)
    reach = core_half + 1 + max(strip_gaps) + 1
    side = 2 * reach + 1
    c = reach
    alpha = np.zeros((side, side), dtype=bool)
    alpha[c - core_half : c + core_half + 1, c - core_half : c + core_half + 1] = True
    half_len = strip_len // 2
    along = slice(c - half_len, c + half_len + 1)
    for gap in strip_gaps:
        offset = c + core_half + 1 + gap
        alpha[along, offset] = True           # east
        alpha[along, 2 * c - offset] = True   # west
        alpha[offset, along] = True           # south
        alpha[2 * c - offset, along] = True   # north
    color = rng.uniform(0.0, 0.12, 3) if rng.random() < 0.5 else rng.uniform(0.88, 1.0, 3)
    canvas = np.zeros((side, side, 4))
    canvas[alpha, :3] = color
    canvas[alpha, 3] = 1.0
    return canvas


# --------------------------------------------------------------------------
# Recipes


def synth_clwd_like(host, logo, rng) -> tuple[np.ndarray, np.ndarray, WatermarkSpec]:
    """Translucent watermark with random scale, rotation, position, opacity."""
    host = as_image(host)
    rng = _as_rng(rng)
    height, width = host.shape[:2]
    scale_frac = rng.uniform(*CLWD_SCALE_RANGE)
    rotation = rng.uniform(*CLWD_ROTATION_RANGE)
    opacity = rng.uniform(*CLWD_OPACITY_RANGE)
    factor = scale_frac * width / logo.shape[1]
    placed = transform_rgba(logo, factor, rotation)
    th, tw = placed.shape[:2]
    if th > height or tw > width:
        raise CoverageError(
            f"scaled logo ({tw}x{th}) does not fit host ({width}x{height})"
        )
    position = (int(rng.integers(0, height - th + 1)), int(rng.integers(0, width - tw + 1)))
    img, mask = stamp(host, placed, position, opacity)
    spec = WatermarkSpec(scale=tw / width, position=position, rotation=rotation,
                         opacity=opacity, logo=logo)
    return img, mask, spec


def _normalize_variant(variant: str) -> str:
    v = str(variant).lower()
    if v.startswith("alpha1-"):
        v = v[len("alpha1-"):]
    if v not in ALPHA1_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected 's' or 'l'")
    return v


def synth_alpha1(host, logo, variant, rng) -> tuple[np.ndarray, np.ndarray, WatermarkSpec]:
    """Fully opaque watermark scaled to hit the variant's coverage target.

    Small targets 6% of the host area (+/-1% absolute), large targets 35%
    (+/-2%). Raises ``CoverageError`` when the logo cannot reach the target
    on this host.
    """
    host = as_image(host)
    logo = as_image_with_alpha(logo)
    rng = _as_rng(rng)
    target, tolerance = ALPHA1_VARIANTS[_normalize_variant(variant)]
    height, width = host.shape[:2]
    target_px = target * height * width
    logo_px = int(np.count_nonzero(logo[..., 3] > 0))
    if logo_px == 0:
        raise CoverageError("logo has no opaque pixels")
    factor_max = 0.999 * min(height / logo.shape[0], width / logo.shape[1])
    factor = min(math.sqrt(target_px / logo_px), factor_max)
    placed = transform_rgba(logo, factor, 0.0)
    coverage = np.count_nonzero(placed[..., 3]) / (height * width)
    for _ in range(12):
        if abs(coverage - target) <= 0.25 * tolerance:
            break
        count = np.count_nonzero(placed[..., 3])
        if count == 0:
            raise CoverageError("scaled logo vanished; cannot reach coverage target")
        factor = min(factor * math.sqrt(target_px / count), factor_max)
        placed = transform_rgba(logo, factor, 0.0)
        coverage = np.count_nonzero(placed[..., 3]) / (height * width)
    if abs(coverage - target) > tolerance:
        raise CoverageError(
            f"coverage {coverage:.4f} unattainable for target {target:.2f} "
            f"(logo/host pair too constrained)"
        )
    th, tw = placed.shape[:2]
    position = (int(rng.integers(0, height - th + 1)), int(rng.integers(0, width - tw + 1)))
    img, mask = stamp(host, placed, position, 1.0)
    spec = WatermarkSpec(scale=tw / width, position=position, rotation=0.0,
                         opacity=1.0, logo=logo)
    return img, mask, spec


def _value_noise(rng, size: int, cells: int = 8, amplitude: float = 0.12) -> np.ndarray:
    grid = rng.random((cells + 1, cells + 1))
    coords = np.linspace(0.0, cells, size)
    ys, xs = np.meshgrid(coords, coords, indexing="ij")
    field = _bilinear(grid[..., None], ys, xs)[..., 0]
    return 0.5 + amplitude * (field - 0.5) * 2.0


def _paint_box(image: np.ndarray, cy: int, cx: int) -> tuple[int, int, int, int]:
    half = BOX_SIZE // 2
    y0, y1 = cy - half, cy + half
    x0, x1 = cx - half, cx + half
    image[y0:y1, x0:x1] = ORANGE
    return y0, y1, x0, x1


def synth_disorient(rng, label: str | None = None, *, textured: bool = False) -> DisorientSample:
    """One position-encoded sample: an orange box centered in a cardinal band.

    The background is uniform mid-gray (or gray value noise when
    ``textured``); the box center jitters up to +/-8 px inside its band, far
    less than the distance between bands, so the label is unambiguous.
    """
    rng = _as_rng(rng)
    if label is None:
        label = LABELS[int(rng.integers(len(LABELS)))]
    elif label not in LABELS:
        raise ValueError(f"unknown label {label!r}; expected one of {LABELS}")
    jy, jx = (int(v) for v in rng.integers(-BAND_JITTER, BAND_JITTER + 1, 2))
    if textured:
        gray = _value_noise(rng, HOST_SIZE)
        image = np.repeat(gray[..., None], 3, axis=2)
    else:
        image = np.full((HOST_SIZE, HOST_SIZE, 3), 0.5)
    cy, cx = BAND_CENTERS[label]
    y0, y1, x0, x1 = _paint_box(image, cy + jy, cx + jx)
    mask = np.zeros((HOST_SIZE, HOST_SIZE), dtype=bool)
    mask[y0:y1, x0:x1] = True
    return DisorientSample(image=image, label=label, mask=mask)


def classify_position(image, tolerance: float = 0.1) -> str:
    """Label an image by the centroid of its orange-chroma pixels."""
    img = as_image(image)
    target = np.asarray(ORANGE)
    hit = (np.abs(img - target) <= tolerance).all(axis=2)
    if not hit.any():
        raise DegenerateRegionError("no orange-chroma pixels found")
    ys, xs = np.nonzero(hit)
    cy, cx = ys.mean(), xs.mean()
    return min(
        BAND_CENTERS,
        key=lambda name: (BAND_CENTERS[name][0] - cy) ** 2 + (BAND_CENTERS[name][1] - cx) ** 2,
    )


def disorient(image, rng, *, backend: str = "harmonic", tolerance: float = 0.1,
              d: int = 1) -> tuple[np.ndarray, str, str]:
    """Move the message box so the original recipient decodes a wrong label.

    Steps: classify the box position, remove the box with the chroma-keyed
    removal pipeline, then paint a new box at a position drawn uniformly
    from the other three bands. The new label never equals the old one.
    """
    rng = _as_rng(rng)
    old_label = classify_position(image, tolerance)
    config = PipelineConfig(d=d, backend=backend)
    restored, _ = morphomod(image, ChromaSource(ORANGE, tolerance), config)
    others = [name for name in LABELS if name != old_label]
    new_label = others[int(rng.integers(len(others)))]
    jy, jx = (int(v) for v in rng.integers(-BAND_JITTER, BAND_JITTER + 1, 2))
    out = restored.copy()
    cy, cx = BAND_CENTERS[new_label]
    _paint_box(out, cy + jy, cx + jx)
    return out, old_label, new_label


# --------------------------------------------------------------------------
# Dataset layout


@dataclass
class DatasetManifest:
    """Index of a generated dataset: seed, recipe parameters, file list."""

    recipe: str
    seed: int
    count: int
    parameters: dict
    entries: list

    def save(self, root) -> None:
        root = Path(root)
        for entry in self.entries:
            for key in ("watermarked", "mask"):
                if not (root / entry[key]).exists():
                    raise FileNotFoundError(f"manifest references missing file {entry[key]}")
        doc = {
            "recipe": self.recipe,
            "seed": self.seed,
            "count": self.count,
            "parameters": self.parameters,
            "entries": self.entries,
        }
        (root / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n")

    @classmethod
    def load(cls, root) -> "DatasetManifest":
        doc = json.loads((Path(root) / "manifest.json").read_text())
        return cls(
            recipe=doc["recipe"], seed=doc["seed"], count=doc["count"],
            parameters=doc.get("parameters", {}), entries=doc["entries"],
        )


def _list_pngs(folder, what: str) -> list[Path]:
    folder = Path(folder)
    if not folder.is_dir():
        raise FileNotFoundError(f"{what} folder not found: {folder}")
    files = sorted(folder.glob("*.png"))
    if not files:
        raise FileNotFoundError(f"{what} folder has no PNG files: {folder}")
    return files


def _load_host_file(path) -> np.ndarray:
    arr = load_png(path)
    if arr.ndim == 2:
        return np.repeat(arr[..., None], 3, axis=2)
    if arr.shape[2] == 4:
        alpha = arr[..., 3:4]
        return arr[..., :3] * alpha + (1.0 - alpha)  # flatten onto white
    return arr


def _load_logo_file(path) -> np.ndarray:
    arr = load_png(path)
    if arr.ndim == 2:
        arr = np.repeat(arr[..., None], 3, axis=2)
    if arr.shape[2] == 3:
        arr = np.concatenate([arr, np.ones(arr.shape[:2] + (1,))], axis=2)
    return arr


def build_dataset(root, recipe: str, count: int, seed: int, *,
                  hosts=None, logos=None, size: int = 256,
                  textured: bool = False) -> DatasetManifest:
    """Generate ``count`` samples of a recipe into the standard layout.

    Per-sample RNG streams derive from ``(seed, index)``, so output is
    byte-reproducible and independent of any batching order.
    """
    recipe = str(recipe).lower()
    if recipe not in ("alpha1-s", "alpha1-l", "clwd", "disorient"):
        raise ValueError(f"unknown recipe {recipe!r}")
    root = Path(root)
    (root / "watermarked").mkdir(parents=True, exist_ok=True)
    (root / "mask").mkdir(parents=True, exist_ok=True)

    host_files = _list_pngs(hosts, "host") if hosts else None
    logo_files = _list_pngs(logos, "logo") if logos else None

    if recipe == "disorient":
        parameters = {
            "host_size": HOST_SIZE, "box_size": BOX_SIZE, "jitter": BAND_JITTER,
            "band_centers": {k: list(v) for k, v in BAND_CENTERS.items()},
            "box_color": list(ORANGE), "textured": textured,
        }
    elif recipe == "clwd":
        parameters = {
            "size": size, "scale_range": list(CLWD_SCALE_RANGE),
            "opacity_range": list(CLWD_OPACITY_RANGE),
            "rotation_range": list(CLWD_ROTATION_RANGE),
        }
    else:
        target, tolerance = ALPHA1_VARIANTS[recipe[-1]]
        parameters = {"size": size, "coverage_target": target,
                      "coverage_tolerance": tolerance, "opacity": 1.0}

    entries = []
    labels: list[str] = []
    for index in range(count):
        rng = np.random.default_rng((int(seed), index))
        name = f"{index:05d}.png"
        label = None
        if recipe == "disorient":
            sample = synth_disorient(rng, textured=textured)
            img, mask, label = sample.image, sample.mask, sample.label
            labels.append(label)
        else:
            if host_files is not None:
                host = _load_host_file(host_files[int(rng.integers(len(host_files)))])
            else:
                host = synthetic_host(rng, size)
            if logo_files is not None:
                logo = _load_logo_file(logo_files[int(rng.integers(len(logo_files)))])
            else:
                logo = synthetic_logo(rng)
            if recipe == "clwd":
                img, mask, _ = synth_clwd_like(host, logo, rng)
            else:
                img, mask, _ = synth_alpha1(host, logo, recipe[-1], rng)
        save_png(img, root / "watermarked" / name)
        save_png(mask, root / "mask" / name)
        entry = {"watermarked": f"watermarked/{name}", "mask": f"mask/{name}"}
        if label is not None:
            entry["label"] = label
        entries.append(entry)

    if recipe == "disorient":
        with open(root / "labels.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "label"])
            for index, label in enumerate(labels):
                writer.writerow([f"{index:05d}", label])

    manifest = DatasetManifest(recipe=recipe, seed=int(seed), count=count,
                               parameters=parameters, entries=entries)
    manifest.save(root)
    return manifest


def dataset_entries(root) -> list[dict]:
    """Resolve a dataset folder to absolute per-sample paths.

    Prefers ``manifest.json``; otherwise pairs ``watermarked/*.png`` with
    same-named files under ``mask/`` and picks up ``labels.csv`` if present.
    """
    root = Path(root)
    entries = []
    if (root / "manifest.json").exists():
        manifest = DatasetManifest.load(root)
        for index, entry in enumerate(manifest.entries):
            entries.append({
                "index": index,
                "name": Path(entry["watermarked"]).stem,
                "watermarked": root / entry["watermarked"],
                "mask": root / entry["mask"],
                "label": entry.get("label"),
            })
        return entries
    watermarked = sorted((root / "watermarked").glob("*.png"))
    if not watermarked:
        raise FileNotFoundError(f"no dataset found under {root}")
    labels = {}
    if (root / "labels.csv").exists():
        with open(root / "labels.csv", newline="") as fh:
            for row in csv.DictReader(fh):
                labels[row["index"]] = row["label"]
    for index, path in enumerate(watermarked):
        entries.append({
            "index": index,
            "name": path.stem,
            "watermarked": path,
            "mask": root / "mask" / path.name,
            "label": labels.get(path.stem),
        })
    return entries
