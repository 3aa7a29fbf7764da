"""Global lighting estimation by inverse rendering on directly lit pixels.

An image formed by Lambertian shading under low-frequency lighting satisfies

    I = (A * (L . b(N))) ** (1/gamma)

per channel on pixels that are neither sky nor shadowed.  Fitting happens in
the gamma-expanded (linear) domain, where the model is linear in the 27
coefficients and the minimiser is closed form; at the noise-free optimum the
linear and compressed-domain objectives agree.  The compressed-domain
reconstruction loss is still evaluated and reported for comparability.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedError, InputError
from .gbuffer import GBuffer, nonshadow_mask
from .sh import ShCoeffs, _basis_raw

logger = logging.getLogger(__name__)

ALBEDO_FLOOR = 1e-3
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class FitResult:
    """Fitted coefficients plus the diagnostics the solve produced."""

    coeffs: ShCoeffs
    residual: float
    condition_number: float
    pixel_count: int
    reconstruction_loss: float


def lighting_mask(g: GBuffer) -> np.ndarray:
    """Pixels usable for lighting estimation: non-sky and directly lit."""
    return nonshadow_mask(g.shadow) & ~g.sky_mask


def reconstruction_loss(g: GBuffer, coeffs: ShCoeffs, gamma: float = 2.2) -> float:
    """RMS gap between the image and its re-rendering from fitted lighting.

    Negative shading is clamped to zero before gamma compression; the RMS runs
    over all channels of the masked pixels, so values at shadowed or sky
    pixels never influence the result.
    """
    mask = lighting_mask(g)
    if not mask.any():
        raise InputError("no usable pixels: mask of lit non-sky pixels is empty")
    shading = _basis_raw(g.normal[mask]) @ coeffs.coeffs.T
    model = np.maximum(g.albedo[mask] * shading, 0.0) ** (1.0 / gamma)
    diff = g.image[mask] - model
    return float(np.sqrt(np.mean(diff * diff)))


def fit_sh_lighting(g: GBuffer, gamma: float = 2.2, albedo_floor: float = ALBEDO_FLOOR,
                    cond_limit: float = _COND_LIMIT) -> FitResult:
    """Closed-form lighting coefficients from a G-buffer.

    Solves three independent 9-unknown weighted least-squares systems (one per
    channel) on the gamma-expanded image, using only lit non-sky pixels whose
    albedo exceeds ``albedo_floor`` in that channel.  Raises
    :class:`IllConditionedError` when the observed normals do not constrain
    all nine coefficients (e.g. a single plane orientation).
    """
    mask = lighting_mask(g)
    count = int(mask.sum())
    if count < 27:
        raise InputError(f"need at least 27 usable pixels, found {count}")
    basis = _basis_raw(g.normal[mask])
    albedo = g.albedo[mask]
    target = np.clip(g.image[mask], 0.0, None) ** gamma

    coeffs = np.zeros((3, 9))
    sq_sum = 0.0
    eq_count = 0
    worst_cond = 0.0
    for c in range(3):
        usable = albedo[:, c] > albedo_floor
        if int(usable.sum()) < 9:
            raise InputError(f"channel {c}: fewer than 9 pixels above the albedo floor")
        design = albedo[usable, c, None] * basis[usable]
        normal_matrix = design.T @ design
        cond = float(np.linalg.cond(normal_matrix))
        worst_cond = max(worst_cond, cond)
        if not math.isfinite(cond) or cond > cond_limit:
            raise IllConditionedError(
                f"channel {c}: normals too coplanar to fit 9 coefficients "
                f"(condition number {cond:.3g})", condition_number=cond)
        solution = np.linalg.solve(normal_matrix, design.T @ target[usable, c])
        coeffs[c] = solution
        resid = design @ solution - target[usable, c]
        sq_sum += float(resid @ resid)
        eq_count += int(usable.sum())
    logger.debug("lighting fit condition number: %.6g over %d pixels", worst_cond, count)

    fitted = ShCoeffs(coeffs)
    return FitResult(
        coeffs=fitted,
        residual=math.sqrt(sq_sum / eq_count),
        condition_number=worst_cond,
        pixel_count=count,
        reconstruction_loss=reconstruction_loss(g, fitted, gamma=gamma),
    )
