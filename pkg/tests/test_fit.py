import numpy as np
import pytest

from probelight import (GBuffer, IllConditionedError, InputError, ShCoeffs,
                        fit_sh_lighting, lighting_mask, reconstruction_loss)
from probelight.sh import _basis_raw
from probelight.synth import faceted_scene


def _with_image(g, image):
    return GBuffer(image=image, albedo=g.albedo, normal=g.normal,
                   plane_distance=g.plane_distance, shadow=g.shadow,
                   sky_mask=g.sky_mask, intrinsics=g.intrinsics)


def _add_linear_noise(g, sigma, seed):
    rng = np.random.default_rng(seed)
    linear = np.clip(g.image, 0, None) ** 2.2
    noisy = np.clip(linear + rng.normal(0, sigma, linear.shape), 0, None) ** (1 / 2.2)
    return _with_image(g, np.clip(noisy, 0, 1))


def test_loss_zero_on_exact_model(faceted):
    g, coeffs = faceted
    assert reconstruction_loss(g, coeffs) < 1e-9


def test_loss_equals_masked_rms_for_zero_lighting(faceted):
    g, _ = faceted
    mask = lighting_mask(g)
    expected = float(np.sqrt(np.mean(g.image[mask] ** 2)))
    assert reconstruction_loss(g, ShCoeffs.zeros()) == pytest.approx(expected, rel=1e-12)


def test_loss_ignores_masked_out_pixels(faceted):
    g, coeffs = faceted
    base = reconstruction_loss(g, coeffs)
    mask = lighting_mask(g)
    tampered = g.image.copy()
    tampered[~mask] = 0.123
    assert reconstruction_loss(_with_image(g, tampered), coeffs) == base


def test_loss_requires_usable_pixels(faceted):
    g, coeffs = faceted
    all_sky = GBuffer(image=g.image, albedo=g.albedo, normal=g.normal,
                      plane_distance=g.plane_distance, shadow=g.shadow,
                      sky_mask=np.ones_like(g.sky_mask), intrinsics=g.intrinsics)
    with pytest.raises(InputError):
        reconstruction_loss(all_sky, coeffs)


def test_fit_round_trip_noise_free(faceted):
    g, coeffs = faceted
    result = fit_sh_lighting(g)
    assert np.abs(result.coeffs.coeffs - coeffs.coeffs).max() < 1e-6
    assert result.pixel_count > 27
    assert np.isfinite(result.condition_number)


def test_fit_round_trip_with_noise(faceted):
    g, coeffs = faceted
    result = fit_sh_lighting(_add_linear_noise(g, 0.01, seed=42))
    assert np.abs(result.coeffs.coeffs - coeffs.coeffs).max() < 5e-2


def test_fit_error_shrinks_with_pixel_count():
    sizes = [(80, 60), (160, 120), (320, 240)]
    errors = []
    for width, height in sizes:
        g, coeffs = faceted_scene(width, height)
        noisy = _add_linear_noise(g, 0.01, seed=9)
        result = fit_sh_lighting(noisy)
        errors.append(np.abs(result.coeffs.coeffs - coeffs.coeffs).max())
    assert errors[0] > errors[-1]


def test_fit_single_plane_is_ill_conditioned(fronto):
    g, _ = fronto
    with pytest.raises(IllConditionedError) as excinfo:
        fit_sh_lighting(g)
    assert excinfo.value.condition_number is None or excinfo.value.condition_number > 1e12


def test_fit_homogeneity(faceted):
    g, _ = faceted
    base = fit_sh_lighting(g).coeffs.coeffs
    k = 0.7
    scaled = fit_sh_lighting(_with_image(g, np.clip(g.image * k, 0, 1))).coeffs.coeffs
    assert np.abs(scaled - base * k ** 2.2).max() < 1e-9 * max(1.0, np.abs(base).max())


def test_fit_is_linear_domain_argmin(faceted):
    g, _ = faceted
    result = fit_sh_lighting(g)
    mask = lighting_mask(g)
    basis = _basis_raw(g.normal[mask])
    albedo = g.albedo[mask]
    target = np.clip(g.image[mask], 0, None) ** 2.2

    def linear_residual(coeffs):
        total = 0.0
        for c in range(3):
            usable = albedo[:, c] > 1e-3
            design = albedo[usable, c, None] * basis[usable]
            r = design @ coeffs[c] - target[usable, c]
            total += float(r @ r)
        return total

    best = linear_residual(result.coeffs.coeffs)
    rng = np.random.default_rng(11)
    for _ in range(10):
        perturbed = result.coeffs.coeffs + rng.normal(0, 0.01, (3, 9))
        assert linear_residual(perturbed) > best


def test_fit_reports_compressed_domain_loss(faceted):
    g, coeffs = faceted
    result = fit_sh_lighting(g)
    assert result.reconstruction_loss == pytest.approx(
        reconstruction_loss(g, result.coeffs), abs=1e-15)
    assert result.reconstruction_loss < 1e-9


def test_fit_requires_enough_pixels(fronto):
    g, _ = fronto
    tiny_sky = np.ones_like(g.sky_mask)
    tiny_sky[:3, :5] = False  # 15 usable pixels, below the 27 coefficient count
    tiny = GBuffer(image=g.image, albedo=g.albedo, normal=g.normal,
                   plane_distance=g.plane_distance, shadow=g.shadow,
                   sky_mask=tiny_sky, intrinsics=g.intrinsics)
    with pytest.raises(InputError):
        fit_sh_lighting(tiny)
