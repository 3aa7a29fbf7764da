"""Deterministic synthetic scenes for demos and verification.

Real G-buffers come from an upstream intrinsic decomposition; everything here
builds small piecewise-planar stand-ins whose ground-truth lighting
coefficients are known exactly, so fits and warps can be checked end to end.
All generators are seeded and produce identical output on every call.
"""

from __future__ import annotations

import math

import numpy as np

from .envmap import EnvMap, grid_directions
from .gbuffer import CameraIntrinsics, GBuffer
from .sh import ShCoeffs, _basis_raw


def make_intrinsics(width: int, height: int, fov_x_deg: float = 90.0) -> CameraIntrinsics:
    """Pinhole intrinsics with the principal point between the centre pixels."""
    fx = (width / 2.0) / math.tan(math.radians(fov_x_deg) / 2.0)
    return CameraIntrinsics(fx=fx, fy=fx, cx=width / 2.0 - 0.5, cy=height / 2.0 - 0.5)


def demo_lighting(seed: int = 0, dc: float = 0.4, amplitude: float = 0.05) -> ShCoeffs:
    """Random lighting coefficients with a dominant constant term.

    The constant term keeps Lambertian shading strictly positive for any
    normal, so rendered images stay inside [0, 1].
    """
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-amplitude, amplitude, size=(3, 9))
    coeffs[:, 0] = dc + rng.uniform(0.0, amplitude, size=3)
    return ShCoeffs(coeffs)


def _checker(height: int, width: int, block: int = 8) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width]
    return ((ys // block + xs // block) % 2).astype(np.float64)


def _render_image(albedo: np.ndarray, normal: np.ndarray, scene: np.ndarray,
                  coeffs: ShCoeffs, gamma: float) -> np.ndarray:
    shading = _basis_raw(normal) @ coeffs.coeffs.T
    linear = np.clip(albedo * shading, 0.0, None)
    image = linear ** (1.0 / gamma)
    image[~scene] = 0.0
    return np.clip(image, 0.0, 1.0)


def _apply_shadow(image, shadow, scene, rows, cols, lit=0.93, dark=0.12, darkening=0.35):
    shadow[scene] = lit
    block = np.zeros_like(scene)
    block[rows[0]:rows[1], cols[0]:cols[1]] = True
    block &= scene
    shadow[block] = dark
    image[block] *= darkening


def faceted_scene(width: int = 160, height: int = 120, n_facets: int = 16, seed: int = 7,
                  coeffs: ShCoeffs | None = None, gamma: float = 2.2,
                  with_shadow: bool = True) -> tuple[GBuffer, ShCoeffs]:
    """Vertical strips of differently tilted planes under known lighting.

    The facet normals span a wide cone around camera-forward (rejection
    sampled so no strip approaches grazing incidence), giving the nine basis
    functions full rank; a sky band sits at the top and an optional shadowed
    block darkens part of the scene.
    """
    rng = np.random.default_rng(seed)
    coeffs = demo_lighting(seed=seed) if coeffs is None else coeffs
    intrinsics = make_intrinsics(width, height)
    sky_rows = max(4, int(0.12 * height))

    sky_mask = np.zeros((height, width), dtype=bool)
    sky_mask[:sky_rows] = True
    scene = ~sky_mask

    normal = np.zeros((height, width, 3))
    plane_distance = np.ones((height, width))
    albedo = np.zeros((height, width, 3))
    edges = np.linspace(0, width, n_facets + 1).astype(int)
    xs = np.arange(width)
    ys = np.arange(height)
    vx = (xs - intrinsics.cx) / intrinsics.fx
    vy = (ys - intrinsics.cy) / intrinsics.fy
    for k in range(n_facets):
        lo, hi = edges[k], edges[k + 1]
        corners_x = (vx[lo], vx[hi - 1])
        corners_y = (vy[sky_rows], vy[-1])
        while True:
            a, b = rng.uniform(-1.4, 1.4, size=2)
            worst = max(a * px + b * py for px in corners_x for py in corners_y)
            if worst <= 0.72:
                break
        n = np.array([a, b, -1.0])
        normal[:, lo:hi] = n / np.linalg.norm(n)
        plane_distance[:, lo:hi] = rng.uniform(2.0, 4.0)
        albedo[:, lo:hi] = rng.uniform(0.25, 0.9, size=3)
    albedo *= (0.85 + 0.15 * _checker(height, width))[:, :, None]
    normal[sky_mask] = 0.0

    image = _render_image(albedo, normal, scene, coeffs, gamma)
    image[sky_mask] = [0.70, 0.80, 0.95]
    albedo[sky_mask] = 0.0

    shadow = np.zeros((height, width))
    if with_shadow:
        _apply_shadow(image, shadow, scene,
                      rows=(int(0.60 * height), int(0.85 * height)),
                      cols=(int(0.30 * width), int(0.55 * width)))
    else:
        shadow[scene] = 0.93

    return GBuffer(image=image, albedo=albedo, normal=normal, plane_distance=plane_distance,
                   shadow=shadow, sky_mask=sky_mask, intrinsics=intrinsics), coeffs


def fronto_plane_scene(width: int = 80, height: int = 60, fov_x_deg: float = 100.0,
                       plane_z: float = 2.0, albedo_rgb=(0.6, 0.5, 0.4),
                       coeffs: ShCoeffs | None = None, gamma: float = 2.2
                       ) -> tuple[GBuffer, ShCoeffs]:
    """A single camera-facing plane filling the whole frame (no sky)."""
    coeffs = demo_lighting(seed=3) if coeffs is None else coeffs
    intrinsics = make_intrinsics(width, height, fov_x_deg)
    sky_mask = np.zeros((height, width), dtype=bool)
    normal = np.zeros((height, width, 3))
    normal[:, :, 2] = -1.0
    plane_distance = np.full((height, width), plane_z)
    albedo = np.empty((height, width, 3))
    albedo[:] = albedo_rgb
    image = _render_image(albedo, normal, ~sky_mask, coeffs, gamma)
    shadow = np.full((height, width), 0.9)
    return GBuffer(image=image, albedo=albedo, normal=normal, plane_distance=plane_distance,
                   shadow=shadow, sky_mask=sky_mask, intrinsics=intrinsics), coeffs


def two_plane_scene(width: int = 120, height: int = 90, fov_x_deg: float = 100.0,
                    wall_z: float = 3.0, camera_height: float = 1.6,
                    coeffs: ShCoeffs | None = None, gamma: float = 2.2,
                    with_shadow: bool = True) -> tuple[GBuffer, ShCoeffs]:
    """Frontal wall above a ground plane, with a sky band at the top.

    The wall/ground split sits on the row where the ground passes in front of
    the wall, so the two planes meet along a consistent 3D edge.
    """
    rng = np.random.default_rng(11)
    coeffs = demo_lighting(seed=5) if coeffs is None else coeffs
    intrinsics = make_intrinsics(width, height, fov_x_deg)
    sky_rows = max(3, int(0.10 * height))
    split = int(math.ceil(intrinsics.cy + intrinsics.fy * camera_height / wall_z))
    split = min(max(split, sky_rows + 1), height - 2)

    sky_mask = np.zeros((height, width), dtype=bool)
    sky_mask[:sky_rows] = True
    scene = ~sky_mask

    normal = np.zeros((height, width, 3))
    plane_distance = np.ones((height, width))
    normal[sky_rows:split, :, 2] = -1.0
    plane_distance[sky_rows:split] = wall_z
    normal[split:, :, 1] = -1.0
    plane_distance[split:] = camera_height

    albedo = np.empty((height, width, 3))
    albedo[:split] = rng.uniform(0.4, 0.8, size=3)
    albedo[split:] = rng.uniform(0.3, 0.7, size=3)
    albedo *= (0.85 + 0.15 * _checker(height, width))[:, :, None]

    image = _render_image(albedo, normal, scene, coeffs, gamma)
    image[sky_mask] = [0.70, 0.80, 0.95]
    albedo[sky_mask] = 0.0
    normal[sky_mask] = 0.0

    shadow = np.zeros((height, width))
    if with_shadow:
        _apply_shadow(image, shadow, scene,
                      rows=(int(0.70 * height), int(0.92 * height)),
                      cols=(int(0.15 * width), int(0.45 * width)))
    else:
        shadow[scene] = 0.93

    return GBuffer(image=image, albedo=albedo, normal=normal, plane_distance=plane_distance,
                   shadow=shadow, sky_mask=sky_mask, intrinsics=intrinsics), coeffs


def sun_disc_envmap(map_dims=(256, 128), azimuth: float = 0.5, elevation: float = 0.7,
                    radius: float = 0.12, sun_value: float = 500.0,
                    background: float = 0.05) -> EnvMap:
    """Sky map with a uniform circular sun cap over a dim background.

    The cap is the set of pixel centres within ``radius`` radians of the sun
    axis, so its true solid-angle-weighted centroid is the axis itself.
    """
    dirs = grid_directions(map_dims)
    axis = np.array([math.cos(elevation) * math.sin(azimuth),
                     -math.sin(elevation),
                     math.cos(elevation) * math.cos(azimuth)])
    cap = dirs @ axis >= math.cos(radius)
    data = np.full(dirs.shape, background)
    data[cap] = sun_value
    return EnvMap(data)


def smooth_random_envmap(map_dims=(64, 32), seed: int = 0, passes: int = 2) -> EnvMap:
    """Positive random map, box-blurred so it has mostly low frequencies."""
    w, h = map_dims
    rng = np.random.default_rng(seed)
    data = rng.uniform(0.05, 2.0, size=(h, w, 3))
    for _ in range(passes):
        data = (data + np.roll(data, 1, axis=1) + np.roll(data, -1, axis=1)) / 3.0
        mid = (data[1:-1] + data[:-2] + data[2:]) / 3.0
        data[1:-1] = mid
    return EnvMap(data)
