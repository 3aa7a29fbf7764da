"""Second-order spherical-harmonics lighting.

The 9-term basis is the raw polynomial form

    b(n) = [1, nx, ny, nz, 3*nz^2 - 1, nx*ny, nx*nz, ny*nz, nx^2 - ny^2]

without orthonormalisation constants.  Coefficients fitted against this basis
are therefore not interchangeable with orthonormal real-SH coefficients; all
shading, convolution losses and fits in this package use the same basis so the
distinction never leaks.
"""

from __future__ import annotations

import json
import logging
import math

import numpy as np

from .envmap import Direction, EnvMap, grid_directions, row_solid_angles
from .errors import InputError, NumericalError

logger = logging.getLogger(__name__)

BASIS_SIZE = 9
_UNIT_TOL = 1e-6
_COND_LIMIT = 1e12


class ShCoeffs:
    """3x9 coefficient matrix, one row per RGB channel.

    Flattens row-major to a 27-vector (all red coefficients first) and back
    without loss.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        arr = np.asarray(coeffs, dtype=np.float64)
        if arr.shape != (3, BASIS_SIZE):
            raise InputError(f"SH coefficients must have shape (3, 9), got {arr.shape}")
        if not np.isfinite(arr).all():
            raise InputError("SH coefficients must be finite")
        self.coeffs = arr

    @classmethod
    def zeros(cls) -> "ShCoeffs":
        return cls(np.zeros((3, BASIS_SIZE)))

    @classmethod
    def from_flat(cls, flat) -> "ShCoeffs":
        arr = np.asarray(flat, dtype=np.float64)
        if arr.shape != (27,):
            raise InputError(f"flattened SH coefficients must have shape (27,), got {arr.shape}")
        return cls(arr.reshape(3, BASIS_SIZE))

    def flatten(self) -> np.ndarray:
        return self.coeffs.reshape(27).copy()

    def __add__(self, other: "ShCoeffs") -> "ShCoeffs":
        return ShCoeffs(self.coeffs + other.coeffs)

    def __mul__(self, scalar: float) -> "ShCoeffs":
        return ShCoeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def to_json_dict(self) -> dict:
        return {"coeffs": [[float(v) for v in row] for row in self.coeffs]}

    @classmethod
    def from_json_dict(cls, payload: dict) -> "ShCoeffs":
        if "coeffs" not in payload:
            raise InputError("SH JSON payload must contain a 'coeffs' key")
        return cls(payload["coeffs"])

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "ShCoeffs":
        try:
            with open(path) as f:
                payload = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: cannot read SH coefficients ({exc})") from exc
        return cls.from_json_dict(payload)


def _basis_raw(normals: np.ndarray) -> np.ndarray:
    """Evaluate the basis on an (..., 3) array without validating norms."""
    xent = normals[..., 0]
    yent = normals[..., 1]
    zent = normals[..., 2]
    return np.stack(
        [
            np.ones_like(xent),
            xent,
            yent,
            zent,
            3.0 * zent * zent - 1.0,
            xent * yent,
            xent * zent,
            yent * zent,
            xent * xent - yent * yent,
        ],
        axis=-1,
    )


def sh_basis(n) -> np.ndarray:
    """Basis vector b(n) for a unit direction (Direction or (..., 3) array).

    Raises :class:`InputError` when any norm deviates from 1 by more than 1e-6.
    """
    if isinstance(n, Direction):
        arr = n.as_array()
    else:
        arr = np.asarray(n, dtype=np.float64)
        if arr.shape[-1] != 3:
            raise InputError(f"direction array must end in dimension 3, got {arr.shape}")
    norms = np.sqrt(np.sum(arr * arr, axis=-1))
    if not np.all(np.abs(norms - 1.0) <= _UNIT_TOL):
        raise InputError("basis input contains non-unit directions")
    return _basis_raw(arr)


def sh_shade(coeffs: ShCoeffs, n, albedo=(1.0, 1.0, 1.0)) -> np.ndarray:
    """Lambertian RGB response ``albedo_c * (row_c(L) . b(n))``."""
    basis = sh_basis(n)
    albedo = np.asarray(albedo, dtype=np.float64)
    return albedo * (basis @ coeffs.coeffs.T)


def render_envmap(coeffs: ShCoeffs, map_dims=(256, 128), clamp_negative: bool = True) -> EnvMap:
    """Evaluate ``L . b(n)`` at every pixel direction of an equirect map.

    This is the low-frequency panorama encoded by a coefficient set (a unit
    albedo Lambertian sphere rendered into panorama coordinates).  Negative
    lobes are clamped by default so the result is valid radiance.
    """
    basis = _basis_raw(grid_directions(map_dims))
    data = basis @ coeffs.coeffs.T
    if clamp_negative:
        data = np.maximum(data, 0.0)
        return EnvMap(data)
    return EnvMap(data, allow_negative=bool((data < 0).any()))


def diffuse_convolve(h_map: EnvMap, out_dims=None) -> EnvMap:
    """Cosine-weighted hemispherical average of a radiance map.

    For each output pixel with normal n the result is

        (1/K) * sum_{w . n > 0} H(w) * s(w) * (w . n),   K = sum_{w . n > 0} s(w)

    where s(w) is the per-pixel solid angle.  Input pixels are accumulated in
    row-major order with no reassociation, so the reduction is deterministic
    and reproducible by a plain double loop.  Cost is O(n_in * n_out).
    """
    in_dims = h_map.dims
    out_dims = in_dims if out_dims is None else (int(out_dims[0]), int(out_dims[1]))
    out_w, out_h = out_dims
    out_dirs = grid_directions(out_dims).reshape(-1, 3)
    in_dirs = grid_directions(in_dims).reshape(-1, 3)
    sangles = np.repeat(row_solid_angles(in_dims), in_dims[0])
    radiance = h_map.data.reshape(-1, 3)
    weighted = radiance * sangles[:, None]  # H(w) * s(w), reused per output pixel

    ox = np.ascontiguousarray(out_dirs[:, 0])
    oy = np.ascontiguousarray(out_dirs[:, 1])
    oz = np.ascontiguousarray(out_dirs[:, 2])
    num = np.zeros((out_dirs.shape[0], 3))
    den = np.zeros(out_dirs.shape[0])
    for j in range(in_dirs.shape[0]):
        dx, dy, dz = in_dirs[j]
        dot = ox * dx + oy * dy + oz * dz
        front = dot > 0.0
        np.add(den, sangles[j], out=den, where=front)
        np.add(num, weighted[j] * dot[:, None], out=num, where=front[:, None])
    out = np.zeros_like(num)
    np.divide(num, den[:, None], out=out, where=den[:, None] > 0.0)
    return EnvMap(out.reshape(out_h, out_w, 3), allow_negative=h_map.allow_negative)


def diffuse_conv_loss(h_map: EnvMap, coeffs: ShCoeffs, conv_dims=(64, 32)) -> float:
    """Mean squared gap between the convolved map and the coefficient shading.

    ``conv_dims`` controls the evaluation grid (the loss is stable within
    about a percent between 64x32 and 128x64).  The mean runs over all pixel
    and channel entries.
    """
    convolved = diffuse_convolve(h_map, conv_dims).data.reshape(-1, 3)
    basis = _basis_raw(grid_directions(conv_dims).reshape(-1, 3))
    model = basis @ coeffs.coeffs.T
    diff = convolved - model
    return float(np.mean(diff * diff))


def fit_sh_image(image: EnvMap) -> ShCoeffs:
    """Least-squares coefficients reproducing a per-direction panorama.

    Solves, per channel, ``min_L sum_i s_i (b(n_i) . L - image_i)^2`` with
    solid-angle weights over the full sphere of pixel centres.  The normal
    matrix is guarded against (theoretically impossible) singularity.
    """
    dims = image.dims
    basis = _basis_raw(grid_directions(dims).reshape(-1, 3))
    weights = np.repeat(row_solid_angles(dims), dims[0])
    target = image.data.reshape(-1, 3)
    weighted_basis = basis * weights[:, None]
    normal_matrix = basis.T @ weighted_basis
    rhs = weighted_basis.T @ target
    cond = float(np.linalg.cond(normal_matrix))
    logger.debug("sh fit normal-matrix condition number: %.6g", cond)
    if not math.isfinite(cond) or cond > _COND_LIMIT:
        raise NumericalError(f"singular SH normal matrix (condition number {cond:.3g})")
    solution = np.linalg.solve(normal_matrix, rhs)
    return ShCoeffs(solution.T)


def sh_project(h_map: EnvMap, conv_dims=None) -> ShCoeffs:
    """Coefficients whose shading best matches the diffuse-convolved map.

    Convolves at ``conv_dims`` (input resolution by default) and fits the
    basis to the result, which makes the returned coefficients the
    low-frequency lighting summary of the map.
    """
    return fit_sh_image(diffuse_convolve(h_map, conv_dims))
