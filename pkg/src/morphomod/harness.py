"""Command-line batch harness.

Subcommands::

    morphomod synth     --recipe alpha1-s --count 100 --seed 7 --out data/a1s
    morphomod remove    --dataset data/a1s --out runs/base --d 3
    morphomod sweep     --dataset data/a1s --out runs/sweep --d 0,1,3,5,10
    morphomod disorient --dataset data/dis --out runs/dis --seed 9
    morphomod eval      --dataset data/a1s --results runs/base/restored --out runs/eval

Flag values fall back to a ``--config`` TOML file (flat keys named like the
flags, underscores for dashes), then to built-in defaults. Removal runs fan
out over a thread pool (``--jobs``, default: all cores); per-image results
are ordered by index regardless of completion order, and per-image failures
are recorded in the CSV while the run continues.

Exit codes: 0 success, 1 usage error, 2 partial per-image failures, 3 fatal.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import datagen
from .errors import MorphoModError
from .inpaint import DEFAULT_PROMPT, select_backend
from .metrics import report
from .morphology import binarize
from .pipeline import ChromaSource, FileSource, PipelineConfig, morphomod
from .raster import load_mask, load_png, save_png

__all__ = ["main", "cli", "EXIT_OK", "EXIT_USAGE", "EXIT_PARTIAL", "EXIT_FATAL"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2
EXIT_FATAL = 3

METRIC_COLUMNS = ("rmse_w", "ssim_w", "rmse_t", "ssim_t", "iou", "f1", "dice_loss", "bce_loss")
CSV_COLUMNS = ("index", "file") + METRIC_COLUMNS + ("flags", "error")

_DEFAULTS = {
    "d": 0,
    "kernel": "square",
    "backend": "harmonic",
    "prompt": DEFAULT_PROMPT,
    "fill": "avg-bg",
    "mask_source": "file",
    "threshold": 0.5,
    "tolerance": 1e-5,
    "steps": 50,
    "seed": 0,
    "jobs": 0,  # 0 = all cores
    "count": 10,
    "size": 256,
    "dump_stages": False,
    "textured": False,
}


class UsageError(MorphoModError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); remap to our code
        raise UsageError(message)


def _setting(args, config: dict, key: str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return _DEFAULTS[key]


def _jobs(args, config) -> int:
    jobs = int(_setting(args, config, "jobs"))
    return jobs if jobs > 0 else (os.cpu_count() or 1)


def _pmap(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _pipeline_config(args, config: dict, d: int | None = None) -> PipelineConfig:
    return PipelineConfig(
        d=int(_setting(args, config, "d")) if d is None else d,
        kernel=_setting(args, config, "kernel"),
        prompt=_setting(args, config, "prompt"),
        backend=_setting(args, config, "backend"),
        fill=_setting(args, config, "fill"),
        threshold=float(_setting(args, config, "threshold")),
        tolerance=float(_setting(args, config, "tolerance")),
        steps=int(_setting(args, config, "steps")),
    )


def _parse_mask_source(spec: str):
    if spec == "file":
        return ("file",)
    if spec.startswith("chroma:"):
        parts = spec.split(":")
        if len(parts) not in (2, 3) or len(parts[1]) != 6:
            raise UsageError(f"bad mask source {spec!r}; expected chroma:<rrggbb>[:<tol>]")
        try:
            color = tuple(int(parts[1][i : i + 2], 16) / 255.0 for i in (0, 2, 4))
            tol = float(parts[2]) if len(parts) == 3 else 0.1
        except ValueError:
            raise UsageError(f"bad mask source {spec!r}") from None
        return ("chroma", color, tol)
    if spec.startswith("dir:"):
        path = spec[len("dir:"):]
        if not path:
            raise UsageError("mask source dir: needs a path")
        return ("dir", Path(path))
    raise UsageError(
        f"unknown mask source {spec!r}; expected file, chroma:<hex>:<tol> or dir:<path>"
    )


def _segment_source(mask_source, entry):
    kind = mask_source[0]
    if kind == "file":
        return FileSource(entry["mask"])
    if kind == "chroma":
        return ChromaSource(mask_source[1], mask_source[2])
    return FileSource(mask_source[1] / f"{entry['name']}.png")


def _load_rgb(path) -> np.ndarray:
    arr = load_png(path)
    if arr.ndim == 2:
        return np.repeat(arr[..., None], 3, axis=2)
    if arr.shape[2] == 4:
        alpha = arr[..., 3:4]
        return arr[..., :3] * alpha + (1.0 - alpha)
    return arr


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def _write_metrics_csv(path: Path, rows: list[dict]) -> dict:
    """Write per-image rows plus a mean row; returns the means."""
    means = {}
    for column in METRIC_COLUMNS:
        values = [row[column] for row in rows if row.get(column) is not None]
        means[column] = float(np.mean(values)) if values else None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [row["index"], row["file"]]
                + [_fmt(row.get(col)) for col in METRIC_COLUMNS]
                + [row.get("flags", ""), row.get("error", "")]
            )
        writer.writerow(
            ["mean", ""] + [_fmt(means[col]) for col in METRIC_COLUMNS] + ["", ""]
        )
    return means


def _run_removal_batch(dataset, out_dir: Path, config: PipelineConfig, mask_source,
                       jobs: int, dump_stages: bool):
    """Remove watermarks for every dataset entry; returns (rows, means, failures)."""
    entries = datagen.dataset_entries(dataset)
    restored_dir = out_dir / "restored"
    restored_dir.mkdir(parents=True, exist_ok=True)
    stages_dir = out_dir / "stages"
    if dump_stages:
        stages_dir.mkdir(parents=True, exist_ok=True)
    backend = select_backend(config.backend)

    def worker(entry):
        row = {"index": entry["index"], "file": entry["name"], "flags": "", "error": ""}
        try:
            image = _load_rgb(entry["watermarked"])
            gt_mask = binarize(load_mask(entry["mask"]), 0.5)
            source = _segment_source(mask_source, entry)
            restored, pred_mask = morphomod(
                image, source, config, backend=backend,
                dump_dir=stages_dir if dump_stages else None, dump_stem=entry["name"],
            )
            save_png(restored, restored_dir / f"{entry['name']}.png")
            scores = report(image, restored, gt_mask, pred_mask, strict=False)
            for column in METRIC_COLUMNS:
                row[column] = getattr(scores, column)
            flags = list(scores.flags)
            if not pred_mask.any():
                flags.append("empty_mask")
            row["flags"] = ";".join(flags)
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    rows = _pmap(worker, entries, jobs)
    means = _write_metrics_csv(out_dir / "metrics.csv", rows)
    failures = sum(1 for row in rows if row["error"])
    return rows, means, failures


# --------------------------------------------------------------------------
# Subcommands


def _cmd_synth(args, config) -> int:
    manifest = datagen.build_dataset(
        args.out,
        recipe=args.recipe,
        count=int(_setting(args, config, "count")),
        seed=int(_setting(args, config, "seed")),
        hosts=args.hosts,
        logos=args.logos,
        size=int(_setting(args, config, "size")),
        textured=bool(_setting(args, config, "textured")),
    )
    print(f"synth: wrote {manifest.count} {manifest.recipe} samples to {args.out}")
    return EXIT_OK


def _cmd_remove(args, config) -> int:
    out_dir = Path(args.out)
    pipeline_config = _pipeline_config(args, config)
    mask_source = _parse_mask_source(str(_setting(args, config, "mask_source")))
    rows, means, failures = _run_removal_batch(
        args.dataset, out_dir, pipeline_config, mask_source,
        _jobs(args, config), bool(_setting(args, config, "dump_stages")),
    )
    shown = {k: round(v, 6) for k, v in means.items() if v is not None}
    print(f"remove: {len(rows)} images, {failures} failed; means: {shown}")
    print(f"remove: metrics at {out_dir / 'metrics.csv'}")
    return EXIT_PARTIAL if failures else EXIT_OK


def _parse_d_list(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    try:
        ds = [int(part) for part in str(value).split(",") if part != ""]
    except ValueError:
        raise UsageError(f"bad dilation list {value!r}; expected e.g. 0,1,3,5,10") from None
    return ds


def _cmd_sweep(args, config) -> int:
    ds = sorted(set(_parse_d_list(_setting(args, config, "d"))))
    if len(ds) < 2:
        raise UsageError("sweep needs at least two dilation values (--d 0,3,...)")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    mask_source = _parse_mask_source(str(_setting(args, config, "mask_source")))
    jobs = _jobs(args, config)
    dump = bool(_setting(args, config, "dump_stages"))

    sweep_rows = []
    total_failures = 0
    for d in ds:
        pipeline_config = _pipeline_config(args, config, d=d)
        started = time.perf_counter()
        _, means, failures = _run_removal_batch(
            args.dataset, out_dir / f"d_{d}", pipeline_config, mask_source, jobs, dump,
        )
        wall = time.perf_counter() - started
        total_failures += failures
        sweep_rows.append({"d": d, "wall_time_s": wall, **{f"mean_{k}": v for k, v in means.items()}})
        print(f"sweep: d={d} done in {wall:.1f}s")

    columns = ["d", "mean_rmse_w", "mean_ssim_w", "mean_rmse_t", "mean_ssim_t",
               "mean_iou", "mean_f1", "wall_time_s"]
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in sweep_rows:
            writer.writerow([row["d"]] + [_fmt(row.get(col)) for col in columns[1:]])

    violations = []
    for column in ("mean_rmse_w", "mean_rmse_t"):
        series = [(row["d"], row.get(column)) for row in sweep_rows]
        for (d_prev, prev), (d_next, nxt) in zip(series, series[1:]):
            if prev is not None and nxt is not None and nxt < prev:
                violations.append(
                    f"{column} decreased from d={d_prev} ({prev:.6f}) to d={d_next} ({nxt:.6f})"
                )
    for violation in violations:
        print(f"sweep: trend VIOLATION: {violation}")
    if not violations:
        print("sweep: trend check OK (mean RMSE_W and RMSE_T non-decreasing in d)")
    summary = {"rows": sweep_rows, "trend_ok": not violations, "violations": violations}
    (out_dir / "sweep_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_PARTIAL if total_failures else EXIT_OK


def _cmd_disorient(args, config) -> int:
    entries = datagen.dataset_entries(args.dataset)
    out_dir = Path(args.out)
    (out_dir / "disoriented").mkdir(parents=True, exist_ok=True)
    backend = str(_setting(args, config, "backend"))
    seed = int(_setting(args, config, "seed"))

    def worker(entry):
        result = {"index": entry["index"], "name": entry["name"], "error": ""}
        try:
            if entry["label"] is None:
                raise ValueError("sample has no position label")
            image = _load_rgb(entry["watermarked"])
            result["label"] = entry["label"]
            result["predicted"] = datagen.classify_position(image)
            moved, old_label, new_label = datagen.disorient(
                image, np.random.default_rng((seed, entry["index"])), backend=backend,
            )
            save_png(moved, out_dir / "disoriented" / f"{entry['name']}.png")
            result["old"] = old_label
            result["new"] = new_label
            result["predicted_after"] = datagen.classify_position(moved)
        except Exception as exc:
            result["error"] = f"{type(exc).__name__}: {exc}"
        return result

    results = _pmap(worker, entries, _jobs(args, config))
    evaluated = [r for r in results if not r["error"]]
    errors = [r for r in results if r["error"]]
    for failure in errors:
        print(f"disorient: sample {failure['name']} skipped: {failure['error']}", file=sys.stderr)

    if evaluated:
        original_acc = 100.0 * sum(r["predicted"] == r["label"] for r in evaluated) / len(evaluated)
        disoriented_acc = 100.0 * sum(
            r["predicted_after"] == r["label"] for r in evaluated
        ) / len(evaluated)
    else:
        original_acc = disoriented_acc = float("nan")

    with open(out_dir / "labels_disoriented.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "old", "new"])
        for r in evaluated:
            writer.writerow([f"{r['index']:05d}", r["old"], r["new"]])
    summary = {
        "samples": len(results),
        "evaluated": len(evaluated),
        "errors": len(errors),
        "original_accuracy": original_acc,
        "disoriented_accuracy": disoriented_acc,
    }
    (out_dir / "disorient_report.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"disorient: original accuracy {original_acc:.1f}%")
    print(f"disorient: disoriented accuracy {disoriented_acc:.1f}%")
    return EXIT_PARTIAL if errors else EXIT_OK


def _cmd_eval(args, config) -> int:
    entries = datagen.dataset_entries(args.dataset)
    results_dir = Path(args.results)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pred_dir = Path(args.pred_masks) if args.pred_masks else None

    def worker(entry):
        row = {"index": entry["index"], "file": entry["name"], "flags": "", "error": ""}
        try:
            image = _load_rgb(entry["watermarked"])
            restored = _load_rgb(results_dir / f"{entry['name']}.png")
            gt_mask = binarize(load_mask(entry["mask"]), 0.5)
            pred_mask = None
            if pred_dir is not None:
                pred_mask = binarize(load_mask(pred_dir / f"{entry['name']}.png"), 0.5)
            scores = report(image, restored, gt_mask, pred_mask, strict=False)
            for column in METRIC_COLUMNS:
                row[column] = getattr(scores, column)
            row["flags"] = ";".join(scores.flags)
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    rows = _pmap(worker, entries, _jobs(args, config))
    means = _write_metrics_csv(out_dir / "metrics.csv", rows)
    failures = sum(1 for row in rows if row["error"])
    shown = {k: round(v, 6) for k, v in means.items() if v is not None}
    print(f"eval: {len(rows)} images, {failures} failed; means: {shown}")
    return EXIT_PARTIAL if failures else EXIT_OK


# --------------------------------------------------------------------------
# Argument plumbing


def _add_config_flags(parser):
    parser.add_argument("--config", help="TOML file with default flag values")
    parser.add_argument("--jobs", type=int, help="worker threads (default: all cores)")


def _add_pipeline_flags(parser):
    parser.add_argument("--d", help="dilation parameter (sweep: comma list)")
    parser.add_argument("--kernel", choices=["square", "disk"])
    parser.add_argument("--backend", help="harmonic or remote:<url>")
    parser.add_argument("--prompt")
    parser.add_argument("--fill", choices=["none", "white", "black", "gray", "avg-bg"])
    parser.add_argument("--mask-source", dest="mask_source",
                        help="file | chroma:<rrggbb>[:<tol>] | dir:<path>")
    parser.add_argument("--threshold", type=float, help="mask binarization threshold")
    parser.add_argument("--tolerance", type=float, help="harmonic solver tolerance")
    parser.add_argument("--steps", type=int, help="denoising steps for remote backends")
    parser.add_argument("--dump-stages", dest="dump_stages", action="store_const", const=True)


def _build_parser() -> _Parser:
    parser = _Parser(prog="morphomod", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--recipe", required=True,
                         choices=["alpha1-s", "alpha1-l", "clwd", "disorient"])
    p_synth.add_argument("--count", type=int)
    p_synth.add_argument("--seed", type=int)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--hosts", help="folder of host PNGs (default: procedural)")
    p_synth.add_argument("--logos", help="folder of logo PNGs (default: procedural)")
    p_synth.add_argument("--size", type=int)
    p_synth.add_argument("--textured", action="store_const", const=True)
    _add_config_flags(p_synth)
    p_synth.set_defaults(func=_cmd_synth)

    p_remove = sub.add_parser("remove", help="run removal over a dataset")
    p_remove.add_argument("--dataset", required=True)
    p_remove.add_argument("--out", required=True)
    _add_pipeline_flags(p_remove)
    _add_config_flags(p_remove)
    p_remove.set_defaults(func=_cmd_remove)

    p_sweep = sub.add_parser("sweep", help="removal metrics across dilation values")
    p_sweep.add_argument("--dataset", required=True)
    p_sweep.add_argument("--out", required=True)
    _add_pipeline_flags(p_sweep)
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_dis = sub.add_parser("disorient", help="run the box disorientation agent")
    p_dis.add_argument("--dataset", required=True)
    p_dis.add_argument("--out", required=True)
    p_dis.add_argument("--backend")
    p_dis.add_argument("--seed", type=int)
    _add_config_flags(p_dis)
    p_dis.set_defaults(func=_cmd_disorient)

    p_eval = sub.add_parser("eval", help="metrics only, on existing outputs")
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--results", required=True, help="folder of restored PNGs")
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--pred-masks", dest="pred_masks",
                        help="folder of predicted masks to score as IoU/F1")
    _add_config_flags(p_eval)
    p_eval.set_defaults(func=_cmd_eval)
    return parser


def _load_config(args) -> dict:
    path = getattr(args, "config", None)
    if not path:
        return {}
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must be a TOML table")
    return doc


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            raise UsageError("a subcommand is required (synth, remove, sweep, disorient, eval)")
        config = _load_config(args)
        return args.func(args, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"fatal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FATAL


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
