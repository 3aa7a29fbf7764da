"""Evaluation metrics and supervision losses for lighting estimation.

Includes the per-layer supervision terms (squared-error for albedo and
shadow, cosine distance for normals, absolute error for plane distance and
environment maps), HDR mean absolute error with optional per-map luminance
normalisation, Gaussian-window SSIM, the tonemapped SSIM loss, and sun
position extraction from sky panoramas with wraparound-aware connected
components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .envmap import (Direction, EnvMap, direction_to_pixel, grid_directions,
                     row_solid_angles, tonemap)
from .errors import InputError, NumericalError

#: Rec. 709 luma weights used wherever a scalar luminance is needed
LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

SUN_THRESHOLD = 0.98


def _as_array(value) -> np.ndarray:
    return value.data if isinstance(value, EnvMap) else np.asarray(value, dtype=np.float64)


# ---------------------------------------------------------------------------
# Direct supervision
# ---------------------------------------------------------------------------

def supervision_losses(est: dict, gt: dict) -> dict[str, float]:
    """Per-layer supervision record between an estimate set and ground truth.

    Both dicts may hold any of the keys ``albedo``, ``normal``,
    ``plane_distance``, ``shadow``, ``global_env`` and ``local_env`` (arrays
    or EnvMaps); key sets and per-key shapes must match.  Squared-error terms
    (albedo, shadow) are root-mean-square, absolute-error terms
    (plane_distance, environment maps) are mean absolute, and the normal term
    is ``mean(1 - est . gt)``; all reductions are means so the record is
    comparable across resolutions.
    """
    if set(est) != set(gt):
        raise InputError(f"estimate keys {sorted(est)} do not match ground truth keys {sorted(gt)}")
    known = {"albedo", "normal", "plane_distance", "shadow", "global_env", "local_env"}
    unknown = set(est) - known
    if unknown:
        raise InputError(f"unknown supervision keys: {sorted(unknown)}")
    record = {}
    for key in ("albedo", "normal", "plane_distance", "shadow", "global_env", "local_env"):
        if key not in est:
            continue
        a = _as_array(est[key])
        b = _as_array(gt[key])
        if a.shape != b.shape:
            raise InputError(f"{key}: shape {a.shape} vs {b.shape}")
        if key == "normal":
            record[key] = float(np.mean(1.0 - np.sum(a * b, axis=-1)))
        elif key in ("albedo", "shadow"):
            record[key] = float(np.sqrt(np.mean((a - b) ** 2)))
        else:
            record[key] = float(np.mean(np.abs(a - b)))
    return record


def mae(est, gt, normalize: bool = False) -> float:
    """Mean absolute per-pixel-per-channel error between two HDR maps.

    With ``normalize`` both maps are first divided by their own mean
    luminance, which makes the result invariant to global rescaling of either
    map; all-black maps cannot be normalised.
    """
    a = _as_array(est)
    b = _as_array(gt)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch: {a.shape} vs {b.shape}")
    if normalize:
        mean_a = float(np.mean(a @ LUMA_WEIGHTS)) if a.ndim == 3 else float(np.mean(a))
        mean_b = float(np.mean(b @ LUMA_WEIGHTS)) if b.ndim == 3 else float(np.mean(b))
        if mean_a <= 0 or mean_b <= 0:
            raise InputError("cannot normalise a map with non-positive mean luminance")
        a = a / mean_a
        b = b / mean_b
    return float(np.mean(np.abs(a - b)))


# ---------------------------------------------------------------------------
# SSIM
# ---------------------------------------------------------------------------

def _gaussian_kernel(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2.0
    k = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    return k / k.sum()


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation with a 1D kernel along both axes."""
    win = len(kernel)
    rows = np.lib.stride_tricks.sliding_window_view(img, win, axis=0) @ kernel
    return np.lib.stride_tricks.sliding_window_view(rows, win, axis=1) @ kernel


def _ssim_single(a: np.ndarray, b: np.ndarray, kernel: np.ndarray) -> float:
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    mu_a = _filter_valid(a, kernel)
    mu_b = _filter_valid(b, kernel)
    var_a = _filter_valid(a * a, kernel) - mu_a * mu_a
    var_b = _filter_valid(b * b, kernel) - mu_b * mu_b
    cov = _filter_valid(a * b, kernel) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(a, b) -> float:
    """Mean structural similarity between two [0, 1] images.

    Gaussian 11x11 window with sigma 1.5 and the standard stabilisers
    (K1 = 0.01, K2 = 0.03, dynamic range 1); window statistics are taken in
    valid mode, so images must be at least the window size.  RGB inputs are
    averaged over per-channel SSIM.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch: {a.shape} vs {b.shape}")
    for name, img in (("first", a), ("second", b)):
        if img.min() < -1e-9 or img.max() > 1.0 + 1e-9:
            raise InputError(f"{name} image must lie in [0, 1]")
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise InputError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    kernel = _gaussian_kernel()
    if a.ndim == 2:
        return _ssim_single(a, b, kernel)
    return float(np.mean([_ssim_single(a[:, :, c], b[:, :, c], kernel) for c in range(a.shape[2])]))


def tonemapped_ssim_loss(est: EnvMap, gt: EnvMap, exposure_stops: float = -0.3,
                         gamma: float = 2.2) -> float:
    """1 - SSIM between the tonemapped versions of two HDR maps.

    Zero exactly when the compressed images agree, which includes pairs that
    differ only above the tonemapping clamp.
    """
    if est.dims != gt.dims:
        raise InputError(f"dims mismatch: {est.dims} vs {gt.dims}")
    return 1.0 - ssim(tonemap(est, exposure_stops, gamma), tonemap(gt, exposure_stops, gamma))


# ---------------------------------------------------------------------------
# Sun position
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SunPosition:
    direction: Direction
    pixel_centroid: tuple[float, float]
    component_size: int


def wrapped_components(mask: np.ndarray) -> np.ndarray:
    """4-connected component labels with horizontal wraparound.

    Returns an int label array (0 = background).  Components touching both
    the left and right edge on the same rows are merged across the seam.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=[[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    if count == 0 or mask.shape[1] < 2:
        return labels
    parent = list(range(count + 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    seam = mask[:, 0] & mask[:, -1]
    for row in np.flatnonzero(seam):
        a, b = find(labels[row, 0]), find(labels[row, -1])
        if a != b:
            parent[max(a, b)] = min(a, b)
    lut = np.array([find(i) for i in range(count + 1)])
    return lut[labels]


def sun_position(h_map: EnvMap, threshold: float = SUN_THRESHOLD) -> SunPosition:
    """Sun direction from a sky panorama.

    Thresholds luminance at ``threshold`` times the map maximum, takes the
    largest 4-connected component (with horizontal wraparound), and returns
    its solid-angle-weighted mean direction, renormalised.  The direction is
    invariant to global positive rescaling of the map.
    """
    luminance = h_map.data @ LUMA_WEIGHTS
    peak = float(luminance.max())
    if peak <= 0:
        raise InputError("sun extraction needs a map with a positive maximum")
    labels = wrapped_components(luminance >= threshold * peak)
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    best = int(np.argmax(sizes))
    rows, cols = np.nonzero(labels == best)
    dirs = grid_directions(h_map.dims)[rows, cols]
    weights = row_solid_angles(h_map.dims)[rows]
    mean = weights @ dirs
    norm = float(np.linalg.norm(mean))
    if norm == 0:
        raise NumericalError("sun component directions cancel out")
    direction = Direction.from_vector(mean / norm)
    return SunPosition(
        direction=direction,
        pixel_centroid=direction_to_pixel(h_map.dims, direction),
        component_size=int(sizes[best]),
    )


def angular_errors(est: Direction, gt: Direction) -> dict[str, float]:
    """Great-circle, azimuth and elevation gaps between two directions (radians).

    The azimuth gap wraps, so 179 deg vs -179 deg is 2 deg, never 358.
    """
    dot = est.x * gt.x + est.y * gt.y + est.z * gt.z
    total = math.acos(min(1.0, max(-1.0, dot)))
    dphi = abs(est.azimuth - gt.azimuth) % (2.0 * math.pi)
    return {
        "total": total,
        "azimuth": min(dphi, 2.0 * math.pi - dphi),
        "elevation": abs(est.elevation - gt.elevation),
    }
