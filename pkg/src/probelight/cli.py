"""Command-line front end.

Subcommands cover the full estimation pipeline: fitting global lighting from
a G-buffer, rendering its panorama, warping a view to a probe location,
composing a local light probe, relighting simple objects, extracting sun
positions, computing metrics, filtering renderings and rotating maps.  All
angles on the command line are degrees; all file radiance is linear.  Exit
codes: 0 on success, 2 for input or validation problems, 3 for numerical
failures such as an ill-conditioned fit or degenerate geometry.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataselect import filter_images
from .envmap import EnvMap, rotate_azimuth, sample_bilinear, tonemap
from .errors import InputError, NumericalError
from .fit import fit_sh_lighting
from .gbuffer import ProbeLocation, load_gbuffer
from .hdrio import (read_envmap, read_mask_png, read_pfm, read_png, write_envmap,
                    write_mask_png, write_pfm, write_png)
from .metrics import angular_errors, mae, ssim, sun_position, tonemapped_ssim_loss
from .sh import diffuse_convolve, render_envmap, sh_project
from .warp import WarpedPanorama, compose_local, warp_to_probe


def _write_json(path, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump({"version": __version__, **payload}, f, indent=2)
        f.write("\n")


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(p) for p in text.lower().split("x"))
    except ValueError as exc:
        raise InputError(f"size must look like 256x128, got {text!r}") from exc
    return w, h


def _parse_pixel(text: str) -> tuple[int, int]:
    try:
        x, y = (int(p) for p in text.split(","))
    except ValueError as exc:
        raise InputError(f"pixel must look like X,Y, got {text!r}") from exc
    return x, y


def _parse_rgb(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        parts = ()
    if len(parts) != 3:
        raise InputError(f"albedo must look like R,G,B, got {text!r}")
    return parts


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_fit_sh(args) -> int:
    g = load_gbuffer(args.gbuffer, invert_shadow=args.invert_shadow)
    result = fit_sh_lighting(g)
    result.coeffs.save(args.out)
    if args.report:
        _write_json(args.report, {
            "residual": result.residual,
            "condition_number": result.condition_number,
            "mask_pixel_count": result.pixel_count,
            "reconstruction_loss": result.reconstruction_loss,
        })
    return 0


def _cmd_diffuse_conv(args) -> int:
    env = read_envmap(args.env)
    out_dims = _parse_size(args.size) if args.size else None
    write_envmap(args.out, diffuse_convolve(env, out_dims))
    return 0


def _cmd_sh_project(args) -> int:
    env = read_envmap(args.env)
    conv_dims = _parse_size(args.size) if args.size else None
    sh_project(env, conv_dims).save(args.out)
    return 0


def _warp_bundle(args) -> WarpedPanorama:
    g = load_gbuffer(args.gbuffer, invert_shadow=args.invert_shadow)
    probe = ProbeLocation.at(g, _parse_pixel(args.pixel))
    return warp_to_probe(g, probe, _parse_size(args.size), threads=args.threads)


def _write_warp(w: WarpedPanorama, paths) -> None:
    color_path, shadow_path, valid_path, depth_path = paths
    write_pfm(color_path, w.color)
    write_pfm(shadow_path, w.shadow)
    write_mask_png(valid_path, w.validity)
    write_pfm(depth_path, w.depth)


def _cmd_warp(args) -> int:
    paths = args.out.split(",")
    if len(paths) != 4:
        raise InputError("warp --out needs four comma-separated paths: "
                         "color.pfm,shadow.pfm,valid.png,depth.pfm")
    _write_warp(_warp_bundle(args), paths)
    return 0


def _cmd_compose(args) -> int:
    color = read_pfm(args.color)
    if color.ndim == 2:
        color = np.repeat(color[:, :, None], 3, axis=2)
    validity = read_mask_png(args.valid)
    sky = read_envmap(args.sky)
    if color.shape[:2] != validity.shape:
        raise InputError(f"colour layer {color.shape[:2]} does not match "
                         f"validity mask {validity.shape}")
    h, w = validity.shape
    pan = WarpedPanorama(color=color, shadow=np.zeros((h, w)), validity=validity,
                         depth=np.where(validity, 1.0, 0.0))
    write_envmap(args.out, compose_local(pan, sky, gamma=args.gamma))
    return 0


def _cmd_relight(args) -> int:
    env = read_envmap(args.env)
    albedo = np.array(_parse_rgb(args.albedo))
    irradiance = diffuse_convolve(env, (64, 32))
    size = args.resolution
    image = np.zeros((size, size, 3))
    if args.object == "sphere":
        coords = (np.arange(size) + 0.5) / size * 2.0 - 1.0
        px, py = np.meshgrid(coords, coords)
        r2 = px * px + py * py
        visible = r2 <= 1.0
        normals = np.stack([px, py, -np.sqrt(np.clip(1.0 - r2, 0.0, None))], axis=-1)
        values = albedo * sample_bilinear(irradiance.data, normals)
        image[visible] = values[visible]
    else:
        up = np.array([0.0, -1.0, 0.0])
        image[:, :] = albedo * sample_bilinear(irradiance.data, up)
    write_png(args.out, tonemap(image, args.ev, args.gamma))
    return 0


def _sun_payload(env: EnvMap, threshold: float) -> dict:
    sun = sun_position(env, threshold=threshold)
    return {
        "direction": {"x": sun.direction.x, "y": sun.direction.y, "z": sun.direction.z},
        "azimuth_deg": math.degrees(sun.direction.azimuth),
        "elevation_deg": math.degrees(sun.direction.elevation),
        "pixel_centroid": list(sun.pixel_centroid),
        "component_size": sun.component_size,
    }


def _cmd_sun_pos(args) -> int:
    payload = {"version": __version__, **_sun_payload(read_envmap(args.env), args.sun_threshold)}
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_metrics(args) -> int:
    est = read_envmap(args.est)
    gt = read_envmap(args.gt)
    est_sun = _sun_payload(est, args.sun_threshold)
    gt_sun = _sun_payload(gt, args.sun_threshold)
    errors = angular_errors(sun_position(est, args.sun_threshold).direction,
                            sun_position(gt, args.sun_threshold).direction)
    _write_json(args.report, {
        "mae": mae(est, gt),
        "mae_normalized": mae(est, gt, normalize=True),
        "ssim_tonemapped": ssim(tonemap(est), tonemap(gt)),
        "tonemapped_ssim_loss": tonemapped_ssim_loss(est, gt),
        "sun": {
            "est": est_sun,
            "gt": gt_sun,
            "angular_errors_deg": {k: math.degrees(v) for k, v in errors.items()},
        },
    })
    return 0


_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")


def _load_image_dir(directory) -> tuple[list[Path], list[np.ndarray]]:
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"{directory} is not a directory")
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
    if not paths:
        raise InputError(f"no images found in {directory}")
    images = []
    for p in paths:
        img = read_png(p)
        if img.ndim == 2:
            img = np.repeat(img[:, :, None], 3, axis=2)
        images.append(img)
    return paths, images


def _cmd_filter(args) -> int:
    cand_paths, candidates = _load_image_dir(args.candidates)
    _, references = _load_image_dir(args.references)
    scores, kept = filter_images(candidates, references, threshold=args.threshold)
    with open(args.report, "w") as f:
        f.write("path,score,kept\n")
        for path, score, keep in zip(cand_paths, scores, kept):
            f.write(f"{path},{score:.6f},{str(bool(keep)).lower()}\n")
    return 0


def _cmd_rotate(args) -> int:
    env = read_envmap(args.env)
    write_envmap(args.out, rotate_azimuth(env, math.radians(args.angle)))
    return 0


def _cmd_pipeline(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    out_dims = _parse_size(args.size)

    def stage(name, fn):
        try:
            return fn()
        except InputError as exc:
            raise InputError(f"stage '{name}' failed: {exc}") from exc
        except NumericalError as exc:
            raise type(exc)(f"stage '{name}' failed: {exc}") from exc

    g = stage("load", lambda: load_gbuffer(args.gbuffer, invert_shadow=args.invert_shadow))

    def run_fit():
        result = fit_sh_lighting(g)
        result.coeffs.save(outdir / "shcoeffs.json")
        _write_json(outdir / "fit_report.json", {
            "residual": result.residual,
            "condition_number": result.condition_number,
            "mask_pixel_count": result.pixel_count,
            "reconstruction_loss": result.reconstruction_loss,
        })
        return result.coeffs
    coeffs = stage("fit", run_fit)

    def run_sky():
        sky = render_envmap(coeffs, out_dims)
        write_envmap(outdir / "sky.pfm", sky)
        return sky
    sky = stage("sky", run_sky)

    def run_warp():
        probe = ProbeLocation.at(g, _parse_pixel(args.pixel))
        w = warp_to_probe(g, probe, out_dims, threads=args.threads)
        _write_warp(w, (outdir / "warp_color.pfm", outdir / "warp_shadow.pfm",
                        outdir / "warp_valid.png", outdir / "warp_depth.pfm"))
        return w
    warped = stage("warp", run_warp)

    def run_compose():
        local = compose_local(warped, sky)
        write_envmap(outdir / "local.pfm", local)
        return local
    local = stage("compose", run_compose)

    if args.gt_global or args.gt_local:
        def run_metrics():
            payload = {}
            if args.gt_global:
                gt = read_envmap(args.gt_global)
                errors = angular_errors(sun_position(sky).direction,
                                        sun_position(gt).direction)
                payload["global"] = {
                    "mae": mae(sky, gt),
                    "mae_normalized": mae(sky, gt, normalize=True),
                    "sun_angular_errors_deg": {k: math.degrees(v) for k, v in errors.items()},
                }
            if args.gt_local:
                gt = read_envmap(args.gt_local)
                payload["local"] = {
                    "mae": mae(local, gt),
                    "mae_normalized": mae(local, gt, normalize=True),
                    "ssim_tonemapped": ssim(tonemap(local), tonemap(gt)),
                    "tonemapped_ssim_loss": tonemapped_ssim_loss(local, gt),
                }
            _write_json(outdir / "metrics.json", payload)
        stage("metrics", run_metrics)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probelight",
                                     description="Environment-map lighting toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-sh", help="fit global lighting coefficients from a G-buffer")
    p.add_argument("--gbuffer", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--invert-shadow", action="store_true",
                   help="input shadow maps store 1 = shadowed")
    p.set_defaults(handler=_cmd_fit_sh)

    p = sub.add_parser("diffuse-conv", help="cosine-weighted convolution of a panorama")
    p.add_argument("--env", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--size", help="output dims as WxH (default: input dims)")
    p.set_defaults(handler=_cmd_diffuse_conv)

    p = sub.add_parser("sh-project", help="project a panorama onto lighting coefficients")
    p.add_argument("--env", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--size", help="convolution dims as WxH (default: input dims)")
    p.set_defaults(handler=_cmd_sh_project)

    p = sub.add_parser("warp", help="warp a view to a probe-centred panorama")
    p.add_argument("--gbuffer", required=True)
    p.add_argument("--pixel", required=True, help="probe pixel as X,Y")
    p.add_argument("--out", required=True,
                   help="color.pfm,shadow.pfm,valid.png,depth.pfm")
    p.add_argument("--size", default="256x128")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--invert-shadow", action="store_true")
    p.set_defaults(handler=_cmd_warp)

    p = sub.add_parser("compose", help="fill warp holes with sky radiance")
    p.add_argument("--color", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--sky", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--gamma", type=float, default=2.2)
    p.set_defaults(handler=_cmd_compose)

    p = sub.add_parser("relight", help="relight a Lambertian object under a panorama")
    p.add_argument("--env", required=True)
    p.add_argument("--object", choices=("sphere", "plane"), default="sphere")
    p.add_argument("--albedo", default="1,1,1")
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=int, default=128)
    p.add_argument("--ev", type=float, default=-0.3, help="exposure in stops")
    p.add_argument("--gamma", type=float, default=2.2)
    p.set_defaults(handler=_cmd_relight)

    p = sub.add_parser("sun-pos", help="extract the sun direction from a sky panorama")
    p.add_argument("--env", required=True)
    p.add_argument("--sun-threshold", type=float, default=0.98,
                   help="fraction of peak luminance")
    p.set_defaults(handler=_cmd_sun_pos)

    p = sub.add_parser("metrics", help="compare an estimated panorama against ground truth")
    p.add_argument("--est", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--sun-threshold", type=float, default=0.98)
    p.set_defaults(handler=_cmd_metrics)

    p = sub.add_parser("filter", help="filter renderings by colour-histogram similarity")
    p.add_argument("--candidates", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--report", required=True)
    p.set_defaults(handler=_cmd_filter)

    p = sub.add_parser("rotate", help="rotate a panorama around its vertical axis")
    p.add_argument("--env", required=True)
    p.add_argument("--angle", type=float, required=True, help="degrees")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_rotate)

    p = sub.add_parser("pipeline", help="fit, render, warp and compose in one run")
    p.add_argument("--gbuffer", required=True)
    p.add_argument("--pixel", required=True, help="probe pixel as X,Y")
    p.add_argument("--outdir", required=True)
    p.add_argument("--size", default="256x128")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--invert-shadow", action="store_true")
    p.add_argument("--gt-global", help="ground-truth global panorama (.pfm)")
    p.add_argument("--gt-local", help="ground-truth local panorama (.pfm)")
    p.set_defaults(handler=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
