"""``jed`` command-line front end.

Subcommands::

    jed enhance   IN... [-o OUT|DIR] [--report R.json] [--figures DIR] [param flags]
    jed decompose IN... [--out-l L.png] [--out-r R.png] [-o DIR] [param flags]
    jed he        IN... [-o OUT|DIR]
    jed metrics   IN... [--reference REF] [--patch X,Y,W,H]

Every run emits one JSON report (to ``--report`` or stdout). Exit status is
0 when every image succeeded, 1 when any image failed and 2 for usage or
configuration errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .errors import ImageDecodeError, NumericalError, ParameterError
from .imagecore import format_for_path, gray_to_color, read_image, write_image
from .metrics import (
    Patch,
    find_flat_patch,
    flat_patch_noise_std,
    histogram_equalize,
    image_metrics,
    mean_brightness,
)
from .params import JedParams, load_config
from .pipeline import recompose
from .retinex import decompose

log = logging.getLogger("jed")

# flag name -> JedParams key
PARAM_FLAGS = {
    "alpha": float,
    "beta": float,
    "omega": float,
    "lambda": float,
    "sigma": float,
    "eps-thresh": float,
    "eps-stab": float,
    "eps-div": float,
    "gamma": float,
    "tol": float,
    "max-iter": int,
}

IMAGE_ERRORS = (ImageDecodeError, OSError, ValueError, IndexError, NumericalError)


def _add_io(p, output_help):
    p.add_argument("inputs", nargs="+", type=Path, metavar="INPUT", help="PNG or PPM image(s)")
    p.add_argument("-o", "--output", type=Path, help=output_help)
    p.add_argument("--report", type=Path, help="write the JSON report here instead of stdout")
    p.add_argument("-j", "--jobs", type=int, default=1, help="images processed concurrently")


def _add_params(p):
    g = p.add_argument_group("method parameters (override --config)")
    g.add_argument("--config", type=Path, help="flat 'key = value' parameter file")
    for flag, typ in PARAM_FLAGS.items():
        g.add_argument(f"--{flag}", type=typ, dest=f"p_{flag.replace('-', '_')}", metavar="N" if typ is int else "F")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jed", description="Joint low-light enhancement and denoising.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="enhance low-light images")
    _add_io(p, "output file, or directory for several inputs (default: <stem>_jed next to input)")
    _add_params(p)
    p.add_argument("--figures", type=Path, metavar="DIR", help="write a diagnostic figure per image")

    p = sub.add_parser("decompose", help="write illumination and reflectance maps")
    _add_io(p, "directory for the maps (default: next to input)")
    _add_params(p)
    p.add_argument("--out-l", type=Path, help="illumination output (single input only)")
    p.add_argument("--out-r", type=Path, help="reflectance output (single input only)")
    p.add_argument("--figures", type=Path, metavar="DIR", help="write a diagnostic figure per image")

    p = sub.add_parser("he", help="histogram-equalization baseline")
    _add_io(p, "output file, or directory for several inputs (default: <stem>_he next to input)")
    p.add_argument("--figures", type=Path, metavar="DIR", help="write a diagnostic figure per image")

    p = sub.add_parser("metrics", help="brightness and flat-patch noise measurements")
    p.add_argument("inputs", nargs="+", type=Path, metavar="INPUT")
    p.add_argument("--reference", type=Path, help="treat this image as 'before' and each input as 'after'")
    p.add_argument("--patch", type=Patch.parse, metavar="X,Y,W,H", help="flat patch (default: flattest 8x8 block)")
    p.add_argument("--report", type=Path)
    return parser


def resolve_params(args) -> JedParams:
    params = load_config(args.config) if args.config else JedParams()
    overrides = {}
    for flag in PARAM_FLAGS:
        value = getattr(args, f"p_{flag.replace('-', '_')}")
        if value is not None:
            overrides[flag.replace("-", "_")] = value
    return params.replace(**overrides)


def output_path(src: Path, output: Path | None, n_inputs: int, suffix: str) -> Path:
    name = f"{src.stem}_{suffix}{src.suffix}"
    if output is None:
        return src.with_name(name)
    if n_inputs > 1 or output.is_dir() or not output.suffix:
        output.mkdir(parents=True, exist_ok=True)
        return output / name
    return output


# -- per-image jobs ---------------------------------------------------------

def _enhance(src: Path, S, params: JedParams):
    # same computation as pipeline.enhance, minus the warnings machinery,
    # which is not thread-safe under --jobs
    result = decompose(S, params)
    if not result.converged:
        log.warning("%s: solver did not converge; output built from best iterates", src)
    return recompose(result, params.gamma), result


def _run_enhance(src: Path, args, params: JedParams) -> dict:
    out_path = output_path(src, args.output, len(args.inputs), "jed")
    format_for_path(out_path)
    S = read_image(src)
    out, result = _enhance(src, S, params)
    write_image(out_path, out)
    entry = {
        "output": str(out_path),
        "solver_reports": [r.to_dict() for r in result.reports],
        "converged": result.converged,
        "metrics": image_metrics(S, out),
    }
    if args.figures:
        entry["figure"] = _figure(args.figures, src, S, out, result)
    return entry


def _run_decompose(src: Path, args, params: JedParams) -> dict:
    if (args.out_l or args.out_r) and len(args.inputs) > 1:
        raise ValueError("--out-l/--out-r need a single input; use -o DIR for batches")
    out_dir = args.output
    l_path = args.out_l or output_path(src, out_dir, 2 if out_dir else 1, "illumination")
    r_path = args.out_r or output_path(src, out_dir, 2 if out_dir else 1, "reflectance")
    format_for_path(l_path)
    format_for_path(r_path)
    S = read_image(src)
    out, result = _enhance(src, S, params)
    write_image(l_path, gray_to_color(result.illumination))
    write_image(r_path, result.reflectance)
    entry = {
        "output": {"illumination": str(l_path), "reflectance": str(r_path)},
        "solver_reports": [r.to_dict() for r in result.reports],
        "converged": result.converged,
        "metrics": image_metrics(S, out),
    }
    if args.figures:
        entry["figure"] = _figure(args.figures, src, S, out, result)
    return entry


def _run_he(src: Path, args, params) -> dict:
    out_path = output_path(src, args.output, len(args.inputs), "he")
    format_for_path(out_path)
    S = read_image(src)
    out = histogram_equalize(S)
    write_image(out_path, out)
    entry = {"output": str(out_path), "metrics": image_metrics(S, out)}
    if args.figures:
        entry["figure"] = _figure(args.figures, src, S, out, None, title="histogram equalization")
    return entry


def _run_metrics(src: Path, args, params) -> dict:
    img = read_image(src)
    if args.reference is not None:
        ref = read_image(args.reference)
        if ref.shape != img.shape:
            raise ValueError(f"reference shape {ref.shape[:2]} differs from {img.shape[:2]}")
        return {"output": None, "metrics": image_metrics(ref, img, args.patch)}
    patch = args.patch or find_flat_patch(img)
    return {
        "output": None,
        "metrics": {
            "mean_brightness": mean_brightness(img),
            "noise_std": flat_patch_noise_std(img, patch),
            "patch": list(patch),
        },
    }


def _figure(fig_dir: Path, src: Path, S, out, result, title=None) -> str:
    from .figures import save_enhancement_figure

    fig_dir.mkdir(parents=True, exist_ok=True)
    path = fig_dir / f"{src.stem}_figure.png"
    if result is None:
        save_enhancement_figure(path, S, out, title=title or src.name)
    else:
        save_enhancement_figure(
            path, S, out, illumination=result.illumination, reflectance=result.reflectance, title=title or src.name
        )
    return str(path)


JOBS = {"enhance": _run_enhance, "decompose": _run_decompose, "he": _run_he, "metrics": _run_metrics}


def _process(job, src: Path, args, params) -> dict:
    entry = {"input": str(src), "success": True}
    if params is not None:
        entry["params"] = params.to_dict()
    t0 = time.perf_counter()
    try:
        entry.update(job(src, args, params))
    except IMAGE_ERRORS as exc:
        log.error("%s: %s", src, exc)
        entry.update(success=False, error=f"{type(exc).__name__}: {exc}")
    entry["wall_clock_ms"] = (time.perf_counter() - t0) * 1000.0
    return entry


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    params = None
    if args.command in ("enhance", "decompose"):
        try:
            params = resolve_params(args)
        except (OSError, ParameterError) as exc:
            print(f"jed: configuration error: {exc}", file=sys.stderr)
            return 2

    job = JOBS[args.command]
    jobs = max(1, getattr(args, "jobs", 1))
    if jobs == 1:
        entries = [_process(job, src, args, params) for src in args.inputs]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(lambda s: _process(job, s, args, params), args.inputs))

    report = {
        "command": args.command,
        "n_inputs": len(args.inputs),
        "n_failed": sum(not e["success"] for e in entries),
        "entries": entries,
    }
    text = json.dumps(report, indent=2) + "\n"
    if args.report:
        args.report.write_text(text)
    else:
        sys.stdout.write(text)
    return 1 if report["n_failed"] else 0


def main():
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(levelname)s: %(message)s")
    sys.exit(run_cli())
