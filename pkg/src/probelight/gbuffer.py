"""Intrinsic G-buffers: per-pixel albedo, normal, plane distance and shadow.

The scene behind a G-buffer is piecewise planar: each pixel stores the unit
normal n and the distance p of its supporting plane, so the 3D point behind
pixel (x, y) is the intersection of the back-projected ray

    v = ((x - cx)/fx, (y - cy)/fy, 1)

with the plane {P : n . P + p = 0}, namely P = -p / (v . n) * v.  Plane
distances are positive for planes in front of the camera with normals facing
it.  Shadow maps store lit-ness (1 = fully lit, 0 = fully shadowed); loaders
accept the opposite polarity via ``invert_shadow``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .envmap import Direction
from .errors import DegenerateGeometryError, InputError
from . import hdrio

GRAZE_EPS = 1e-4
PROBE_OFFSET_M = 0.10
_NORMAL_TOL = 1e-3
_BORDER_FRACTION = 0.05


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise InputError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")

    def to_json_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy}

    @classmethod
    def from_json_dict(cls, payload: dict) -> "CameraIntrinsics":
        try:
            return cls(float(payload["fx"]), float(payload["fy"]),
                       float(payload["cx"]), float(payload["cy"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed intrinsics payload: {payload!r}") from exc


class GBuffer:
    """Container for one image's intrinsic layers plus camera intrinsics.

    Layers share a single resolution.  Normals must be unit length and plane
    distances positive on non-sky pixels; sky pixels may hold anything.
    """

    __slots__ = ("image", "albedo", "normal", "plane_distance", "shadow", "sky_mask", "intrinsics")

    def __init__(self, image, albedo, normal, plane_distance, shadow, sky_mask,
                 intrinsics: CameraIntrinsics):
        self.image = np.asarray(image, dtype=np.float64)
        self.albedo = np.asarray(albedo, dtype=np.float64)
        self.normal = np.asarray(normal, dtype=np.float64)
        self.plane_distance = np.asarray(plane_distance, dtype=np.float64)
        self.shadow = np.asarray(shadow, dtype=np.float64)
        self.sky_mask = np.asarray(sky_mask, dtype=bool)
        self.intrinsics = intrinsics
        self._validate()

    def _validate(self) -> None:
        shape = self.sky_mask.shape
        if len(shape) != 2:
            raise InputError(f"sky mask must be 2D, got shape {shape}")
        for name, layer, depth in (("image", self.image, 3), ("albedo", self.albedo, 3),
                                   ("normal", self.normal, 3),
                                   ("plane_distance", self.plane_distance, 0),
                                   ("shadow", self.shadow, 0)):
            expected = shape + (depth,) if depth else shape
            if layer.shape != expected:
                raise InputError(f"layer {name} has shape {layer.shape}, expected {expected}")
            if not np.isfinite(layer).all():
                raise InputError(f"layer {name} contains non-finite values")
        for name, layer in (("image", self.image), ("albedo", self.albedo), ("shadow", self.shadow)):
            if (layer < 0).any() or (layer > 1).any():
                raise InputError(f"layer {name} must lie in [0, 1]")
        scene = ~self.sky_mask
        if scene.any():
            norms = np.linalg.norm(self.normal[scene], axis=-1)
            if np.abs(norms - 1.0).max() > _NORMAL_TOL:
                raise InputError("non-sky normals must be unit length")
            if (self.plane_distance[scene] <= 0).any():
                raise InputError("non-sky plane distances must be positive")

    @property
    def width(self) -> int:
        return self.sky_mask.shape[1]

    @property
    def height(self) -> int:
        return self.sky_mask.shape[0]


@dataclass(frozen=True)
class ProbeLocation:
    """A 2D pixel choice together with the 3D probe centre derived from it."""

    pixel: tuple[int, int]
    center: np.ndarray

    @classmethod
    def at(cls, g: GBuffer, pixel, offset: float = PROBE_OFFSET_M) -> "ProbeLocation":
        x, y = int(pixel[0]), int(pixel[1])
        if not (0 <= x < g.width and 0 <= y < g.height):
            raise InputError(f"probe pixel {pixel} outside {g.width}x{g.height} image")
        border_x = _BORDER_FRACTION * g.width
        border_y = _BORDER_FRACTION * g.height
        if g.sky_mask[y, x]:
            warnings.warn(f"probe pixel {(x, y)} lies on the sky", stacklevel=2)
        elif (x < border_x or x >= g.width - border_x
              or y < border_y or y >= g.height - border_y):
            warnings.warn(f"probe pixel {(x, y)} is within 5% of the image border", stacklevel=2)
        return cls(pixel=(x, y), center=probe_center(g, (x, y), offset=offset))


def backproject_ray(intrinsics: CameraIntrinsics, pixel) -> np.ndarray:
    """Unnormalised viewing ray ((x - cx)/fx, (y - cy)/fy, 1) through a pixel."""
    x, y = pixel
    return np.array([(x - intrinsics.cx) / intrinsics.fx,
                     (y - intrinsics.cy) / intrinsics.fy,
                     1.0])


def reproject(intrinsics: CameraIntrinsics, pixel, n, p: float,
              graze_eps: float = GRAZE_EPS) -> np.ndarray:
    """3D point behind a pixel given its supporting plane (n, p).

    Raises :class:`DegenerateGeometryError` when the ray grazes the plane
    (|v . n| below ``graze_eps``), which would blow the point up to infinity.
    """
    normal = n.as_array() if isinstance(n, Direction) else np.asarray(n, dtype=np.float64)
    ray = backproject_ray(intrinsics, pixel)
    vn = float(ray @ normal)
    if abs(vn) < graze_eps:
        raise DegenerateGeometryError(
            f"ray through pixel {tuple(pixel)} grazes its plane (v.n = {vn:.3g})", pixel=tuple(pixel))
    return (-p / vn) * ray


def reproject_all(g: GBuffer, graze_eps: float = GRAZE_EPS) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel 3D points with a validity mask.

    Sky pixels and grazing-incidence pixels are marked invalid instead of
    raising; their points are zero.
    """
    ys, xs = np.mgrid[0:g.height, 0:g.width]
    rays = np.empty((g.height, g.width, 3))
    rays[:, :, 0] = (xs - g.intrinsics.cx) / g.intrinsics.fx
    rays[:, :, 1] = (ys - g.intrinsics.cy) / g.intrinsics.fy
    rays[:, :, 2] = 1.0
    vn = np.einsum("hwc,hwc->hw", rays, g.normal)
    valid = ~g.sky_mask & (np.abs(vn) >= graze_eps)
    scale = np.zeros_like(vn)
    np.divide(-g.plane_distance, vn, out=scale, where=valid)
    points = rays * scale[:, :, None]
    points[~valid] = 0.0
    return points, valid


def probe_center(g: GBuffer, pixel, offset: float = PROBE_OFFSET_M) -> np.ndarray:
    """Probe centre: the pixel's 3D point pushed ``offset`` metres off its plane.

    The push direction is the surface normal oriented toward the camera
    (flipped when n . v > 0), and the normal is renormalised first so the
    offset magnitude is exact.
    """
    x, y = int(pixel[0]), int(pixel[1])
    if not (0 <= x < g.width and 0 <= y < g.height):
        raise InputError(f"pixel {pixel} outside {g.width}x{g.height} image")
    n = g.normal[y, x]
    point = reproject(g.intrinsics, (x, y), n, float(g.plane_distance[y, x]))
    unit = n / np.linalg.norm(n)
    if float(unit @ backproject_ray(g.intrinsics, (x, y))) > 0:
        unit = -unit
    return point + offset * unit


# ---------------------------------------------------------------------------
# Shadow-map thresholding
# ---------------------------------------------------------------------------

def otsu_threshold(values: np.ndarray, bins: int = 256) -> float:
    """Otsu cut on a [0, 1] valued array, over a ``bins``-bin histogram.

    Returns the lower edge of the first bin of the brighter class, so the
    bright class is exactly ``values >= threshold``.  A histogram with no
    between-class variance anywhere (a single occupied bin) yields 0.0, i.e.
    everything bright.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise InputError("cannot threshold an empty array")
    if (v < 0).any() or (v > 1).any():
        raise InputError("shadow values must lie in [0, 1]")
    idx = np.minimum((v * bins).astype(np.int64), bins - 1)
    hist = np.bincount(idx, minlength=bins).astype(np.float64)
    prob = hist / hist.sum()
    centers = (np.arange(bins) + 0.5) / bins
    omega0 = np.cumsum(prob)[:-1]
    omega1 = 1.0 - omega0
    cummean = np.cumsum(prob * centers)
    total_mean = cummean[-1]
    mu0 = np.zeros(bins - 1)
    mu1 = np.zeros(bins - 1)
    np.divide(cummean[:-1], omega0, out=mu0, where=omega0 > 0)
    np.divide(total_mean - cummean[:-1], omega1, out=mu1, where=omega1 > 0)
    between = omega0 * omega1 * (mu0 - mu1) ** 2
    best = int(np.argmax(between))
    if between[best] <= 0.0:
        return 0.0
    return (best + 1) / bins


def nonshadow_mask(shadow: np.ndarray) -> np.ndarray:
    """Boolean mask of directly lit pixels via Otsu segmentation.

    The brighter class of the lit-ness map is kept; degenerate (unimodal)
    maps carry no shadow evidence and yield an all-true mask.
    """
    shadow = np.asarray(shadow, dtype=np.float64)
    return shadow >= otsu_threshold(shadow)


# ---------------------------------------------------------------------------
# Manifest I/O
# ---------------------------------------------------------------------------

_LAYER_NAMES = ("image", "albedo", "normal", "plane_distance", "shadow", "sky_mask")


def _load_layer(path: Path, name: str):
    suffix = path.suffix.lower()
    if not path.exists():
        raise InputError(f"layer file {path} does not exist")
    if name == "sky_mask":
        return hdrio.read_mask_png(path) if suffix == ".png" else hdrio.read_pfm(path) > 0.5
    if suffix == ".pfm":
        return hdrio.read_pfm(path)
    if suffix == ".png":
        return hdrio.read_png(path)
    raise InputError(f"layer {name}: unsupported format {suffix!r}")


def load_gbuffer(manifest_path, invert_shadow: bool = False) -> GBuffer:
    """Load a G-buffer from a JSON manifest pointing at per-layer files.

    Layer paths are resolved relative to the manifest.  ``invert_shadow``
    flips shadow maps whose convention is 1 = shadowed.
    """
    manifest_path = Path(manifest_path)
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{manifest_path}: cannot read manifest ({exc})") from exc
    if "intrinsics" not in manifest or "layers" not in manifest:
        raise InputError(f"{manifest_path}: manifest needs 'intrinsics' and 'layers'")
    intrinsics = CameraIntrinsics.from_json_dict(manifest["intrinsics"])
    layers = {}
    for name in _LAYER_NAMES:
        if name not in manifest["layers"]:
            raise InputError(f"{manifest_path}: manifest missing layer {name!r}")
        layers[name] = _load_layer(manifest_path.parent / manifest["layers"][name], name)
    if invert_shadow:
        layers["shadow"] = 1.0 - layers["shadow"]
    return GBuffer(intrinsics=intrinsics, **layers)


def save_gbuffer(g: GBuffer, directory, name: str = "gbuffer") -> Path:
    """Write all layers plus a manifest into ``directory``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "image": f"{name}_image.pfm",
        "albedo": f"{name}_albedo.pfm",
        "normal": f"{name}_normal.pfm",
        "plane_distance": f"{name}_plane_distance.pfm",
        "shadow": f"{name}_shadow.pfm",
        "sky_mask": f"{name}_sky_mask.png",
    }
    hdrio.write_pfm(directory / paths["image"], g.image)
    hdrio.write_pfm(directory / paths["albedo"], g.albedo)
    hdrio.write_pfm(directory / paths["normal"], g.normal)
    hdrio.write_pfm(directory / paths["plane_distance"], g.plane_distance)
    hdrio.write_pfm(directory / paths["shadow"], g.shadow)
    hdrio.write_mask_png(directory / paths["sky_mask"], g.sky_mask)
    manifest = {"intrinsics": g.intrinsics.to_json_dict(), "layers": paths}
    manifest_path = directory / f"{name}.json"
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return manifest_path
