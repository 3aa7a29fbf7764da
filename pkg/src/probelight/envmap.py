"""Equirectangular environment maps and the direction math that goes with them.

Conventions used throughout the package (internal choices; equirectangular
assets in the wild use several different ones, so they are fixed here once):

* Camera-aligned, right-handed frame: ``+x`` right, ``+y`` down, ``+z``
  forward, matching the pinhole back-projection
  ``v = ((x - cx)/fx, (y - cy)/fy, 1)``.  "Up" is therefore ``-y``.
* Equirectangular layout: ``width == 2 * height``, row 0 is the zenith band,
  azimuth increases to the right and the centre column looks along
  camera-forward (azimuth 0).
* Azimuth lives in ``[-pi, pi)``, elevation in ``[-pi/2, pi/2]``, and the
  direction for ``(azimuth, elevation)`` is
  ``(cos(el)*sin(az), -sin(el), cos(el)*cos(az))``.
* Pixel centres sit at half-integer offsets: pixel ``(u, v)`` has azimuth
  ``2*pi*(u + 0.5)/width - pi`` and elevation ``pi/2 - pi*(v + 0.5)/height``.

All functions are pure and operate on float64 arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

_UNIT_TOL = 1e-6


@dataclass(frozen=True)
class Direction:
    """Unit direction vector with spherical (azimuth, elevation) accessors.

    The constructor rejects vectors whose norm deviates from 1 by more than
    1e-6 and renormalises the accepted ones, so stored components are unit to
    machine precision.
    """

    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if not math.isfinite(n2) or abs(math.sqrt(n2) - 1.0) > _UNIT_TOL:
            raise InputError(f"direction must be a unit vector, got squared norm {n2!r}")
        norm = math.sqrt(n2)
        object.__setattr__(self, "x", self.x / norm)
        object.__setattr__(self, "y", self.y / norm)
        object.__setattr__(self, "z", self.z / norm)

    @classmethod
    def from_vector(cls, v) -> "Direction":
        """Normalise an arbitrary non-zero 3-vector."""
        v = np.asarray(v, dtype=float)
        norm = float(np.sqrt(v @ v))
        if norm == 0.0 or not math.isfinite(norm):
            raise InputError("cannot normalise a zero or non-finite vector")
        return cls(float(v[0]) / norm, float(v[1]) / norm, float(v[2]) / norm)

    @classmethod
    def from_azimuth_elevation(cls, azimuth: float, elevation: float) -> "Direction":
        ce = math.cos(elevation)
        return cls(ce * math.sin(azimuth), -math.sin(elevation), ce * math.cos(azimuth))

    @property
    def azimuth(self) -> float:
        """Horizontal angle in [-pi, pi); 0 looks along +z and grows rightward."""
        a = math.atan2(self.x, self.z)
        return -math.pi if a == math.pi else a

    @property
    def elevation(self) -> float:
        """Angle above the horizon in [-pi/2, pi/2]; +pi/2 is the zenith (-y)."""
        return math.asin(min(1.0, max(-1.0, -self.y)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


class EnvMap:
    """Equirectangular HDR radiance map: linear RGB with ``width == 2 * height``.

    Radiance is relative (unitless) and must be finite.  Plain maps must be
    non-negative; ``allow_negative=True`` marks difference images.
    """

    __slots__ = ("data", "allow_negative")

    #: probe resolution used as the default for freshly created maps
    DEFAULT_WIDTH = 256

    def __init__(self, data, allow_negative: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InputError(f"environment map must have shape (h, w, 3), got {arr.shape}")
        h, w = arr.shape[:2]
        if h < 1 or w != 2 * h:
            raise InputError(f"environment map width must be twice its height, got {w}x{h}")
        if not np.isfinite(arr).all():
            raise InputError("environment map contains non-finite radiance")
        if not allow_negative and (arr < 0.0).any():
            raise InputError("negative radiance in a map not flagged as a difference image")
        self.data = arr
        self.allow_negative = bool(allow_negative)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> tuple[int, int]:
        """(width, height) tuple, the order used by all map_dims arguments."""
        return self.data.shape[1], self.data.shape[0]

    @classmethod
    def zeros(cls, width: int = DEFAULT_WIDTH, height: int | None = None) -> "EnvMap":
        height = width // 2 if height is None else height
        return cls(np.zeros((height, width, 3)))

    @classmethod
    def constant(cls, value, width: int = DEFAULT_WIDTH, height: int | None = None) -> "EnvMap":
        height = width // 2 if height is None else height
        data = np.empty((height, width, 3))
        data[:] = np.asarray(value, dtype=float)
        return cls(data)

    def copy(self) -> "EnvMap":
        return EnvMap(self.data.copy(), allow_negative=self.allow_negative)


def _check_dims(map_dims) -> tuple[int, int]:
    w, h = int(map_dims[0]), int(map_dims[1])
    if h < 1 or w != 2 * h:
        raise InputError(f"map dims must satisfy width == 2 * height, got {w}x{h}")
    return w, h


def pixel_to_direction(map_dims, pixel) -> Direction:
    """Direction of the centre of an integer pixel ``(u, v)``.

    Raises :class:`InputError` when the pixel lies outside the map.
    """
    w, h = _check_dims(map_dims)
    u, v = pixel
    if not (0 <= u < w and 0 <= v < h):
        raise InputError(f"pixel {pixel} outside {w}x{h} map")
    azimuth = 2.0 * math.pi * (u + 0.5) / w - math.pi
    elevation = math.pi / 2.0 - math.pi * (v + 0.5) / h
    return Direction.from_azimuth_elevation(azimuth, elevation)


def direction_to_pixel(map_dims, d: Direction) -> tuple[float, float]:
    """Continuous pixel coordinates of a direction (inverse of pixel centres).

    ``u`` wraps periodically in azimuth; the poles map to ``v = -0.5`` and
    ``v = height - 0.5``.
    """
    w, h = _check_dims(map_dims)
    u = (d.azimuth + math.pi) * w / (2.0 * math.pi) - 0.5
    v = (math.pi / 2.0 - d.elevation) * h / math.pi - 0.5
    return u, v


def directions_to_pixels(map_dims, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`direction_to_pixel` for an ``(..., 3)`` array of unit vectors."""
    w, h = _check_dims(map_dims)
    dirs = np.asarray(dirs, dtype=np.float64)
    azimuth = np.arctan2(dirs[..., 0], dirs[..., 2])
    elevation = np.arcsin(np.clip(-dirs[..., 1], -1.0, 1.0))
    u = (azimuth + math.pi) * w / (2.0 * math.pi) - 0.5
    v = (math.pi / 2.0 - elevation) * h / math.pi - 0.5
    return u, v


def grid_directions(map_dims) -> np.ndarray:
    """Unit directions of all pixel centres as an ``(h, w, 3)`` array."""
    w, h = _check_dims(map_dims)
    azimuth = 2.0 * math.pi * (np.arange(w) + 0.5) / w - math.pi
    elevation = math.pi / 2.0 - math.pi * (np.arange(h) + 0.5) / h
    ce = np.cos(elevation)
    out = np.empty((h, w, 3))
    out[:, :, 0] = ce[:, None] * np.sin(azimuth)[None, :]
    out[:, :, 1] = -np.sin(elevation)[:, None]
    out[:, :, 2] = ce[:, None] * np.cos(azimuth)[None, :]
    return out


def row_solid_angles(map_dims) -> np.ndarray:
    """Per-row pixel solid angle in steradians, shape ``(h,)``.

    Uses the exact spherical band area ``(2*pi/w) * (sin(top) - sin(bottom))``
    for each latitude band, so the sum over the whole map is 4*pi up to
    floating point rounding.
    """
    w, h = _check_dims(map_dims)
    edges = math.pi / 2.0 - math.pi * np.arange(h + 1) / h
    sines = np.sin(edges)
    return (2.0 * math.pi / w) * (sines[:-1] - sines[1:])


def solid_angle(map_dims, pixel) -> float:
    """Solid angle of one pixel; depends only on the pixel's row."""
    w, h = _check_dims(map_dims)
    u, v = pixel
    if not (0 <= u < w and 0 <= v < h):
        raise InputError(f"pixel {pixel} outside {w}x{h} map")
    return float(row_solid_angles(map_dims)[int(v)])


def rotate_azimuth(m: EnvMap, angle: float) -> EnvMap:
    """Rotate a map around the vertical axis by ``angle`` radians.

    Content shifts to the right (toward larger azimuth) for positive angles,
    with horizontal wraparound.  Integer-pixel angles take an exact roll
    path; everything else is bilinear along rows.
    """
    if not math.isfinite(angle):
        raise InputError("rotation angle must be finite")
    w = m.width
    shift = angle * w / (2.0 * math.pi)
    nearest = round(shift)
    if abs(shift - nearest) < 1e-9:
        rolled = np.roll(m.data, int(nearest) % w, axis=1)
        return EnvMap(rolled, allow_negative=m.allow_negative)
    src = np.arange(w) - shift
    i0 = np.floor(src).astype(np.int64)
    frac = src - i0
    i0 %= w
    i1 = (i0 + 1) % w
    out = (1.0 - frac)[None, :, None] * m.data[:, i0] + frac[None, :, None] * m.data[:, i1]
    return EnvMap(out, allow_negative=m.allow_negative)


def tonemap(m, exposure_stops: float = -0.3, gamma: float = 2.2) -> np.ndarray:
    """Compress HDR radiance to a displayable [0, 1] image.

    Applies ``clamp((2**exposure_stops * H) ** (1/gamma), 0, 1)`` per channel.
    Negative radiance is clamped to zero before the fractional power so the
    result is always finite.
    """
    if gamma <= 0:
        raise InputError("gamma must be positive")
    data = m.data if isinstance(m, EnvMap) else np.asarray(m, dtype=np.float64)
    scaled = np.maximum(2.0 ** exposure_stops * data, 0.0)
    return np.minimum(scaled ** (1.0 / gamma), 1.0)


def sample_bilinear(data: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Sample an equirectangular image at unit directions with bilinear filtering.

    Wraps horizontally and clamps vertically.  ``data`` is ``(h, w)`` or
    ``(h, w, c)``; ``dirs`` is ``(..., 3)``; the result has shape
    ``dirs.shape[:-1] (+ (c,))``.
    """
    data = np.asarray(data, dtype=np.float64)
    h, w = data.shape[:2]
    u, v = directions_to_pixels((w, h), dirs)
    u0 = np.floor(u).astype(np.int64)
    v0 = np.floor(v).astype(np.int64)
    fu = u - u0
    fv = v - v0
    u1 = (u0 + 1) % w
    u0 %= w
    v1 = np.clip(v0 + 1, 0, h - 1)
    v0 = np.clip(v0, 0, h - 1)
    if data.ndim == 3:
        fu = fu[..., None]
        fv = fv[..., None]
    top = (1.0 - fu) * data[v0, u0] + fu * data[v0, u1]
    bottom = (1.0 - fu) * data[v1, u0] + fu * data[v1, u1]
    return (1.0 - fv) * top + fv * bottom
