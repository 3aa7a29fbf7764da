"""Acceptance suite: one test per release criterion.

Each criterion runs at its stated tolerance and time budget and prints one
PASS/FAIL line (visible with ``pytest -s``).  The oracles come from
``tests/oracles.py`` and are plain-loop reference implementations that share
nothing with the optimized code paths they check.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from probelight import (Direction, EnvMap, GBuffer, ProbeLocation, ShCoeffs,
                        angular_errors, diffuse_convolve, filter_images,
                        fit_sh_image, fit_sh_lighting, grid_directions,
                        probe_center, reconstruction_loss, reproject_all,
                        row_solid_angles, ssim, sun_position, tonemap,
                        tonemapped_ssim_loss, warp_to_probe, wrapped_components)
from probelight.cli import main
from probelight.dataselect import color_histogram
from probelight.gbuffer import save_gbuffer
from probelight.sh import _basis_raw
from probelight.synth import (faceted_scene, smooth_random_envmap,
                              sun_disc_envmap, two_plane_scene)

from oracles import (bfs_components, brute_force_diffuse, brute_force_ssim,
                     pairwise_filter_scores, zbuffer_scan)


@contextmanager
def criterion(number, name, limit_s):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {number} ({name}): FAIL")
        raise
    elapsed = time.perf_counter() - start
    within = elapsed < limit_s
    verdict = "PASS" if within else "FAIL (over time budget)"
    print(f"\nACCEPTANCE {number} ({name}): {verdict} [{elapsed:.2f}s / {limit_s:.0f}s]")
    assert within, f"runtime {elapsed:.2f}s exceeds the {limit_s}s budget"


def test_01_solid_angle_closure():
    with criterion(1, "solid-angle closure", 1.0):
        for dims in [(16, 8), (64, 32), (256, 128)]:
            total = float(row_solid_angles(dims).sum() * dims[0])
            assert abs(total - 4 * math.pi) / (4 * math.pi) < 1e-9, dims


def test_02_diffuse_convolution_oracle():
    with criterion(2, "diffuse-convolution oracle", 30.0):
        small = smooth_random_envmap((32, 16), seed=9)
        assert np.array_equal(diffuse_convolve(small).data,
                              brute_force_diffuse(small, (32, 16)))
        mid = smooth_random_envmap((64, 32), seed=10)
        gap = np.abs(diffuse_convolve(mid).data - brute_force_diffuse(mid, (64, 32)))
        assert gap.max() < 1e-12
        flat = diffuse_convolve(EnvMap.constant(1.0, 128, 64))
        assert np.abs(flat.data - 0.5).max() < 1e-3


def test_03_sh_round_trip():
    with criterion(3, "coefficient fit round-trip", 10.0):
        for seed in range(10):
            coeffs = ShCoeffs(np.random.default_rng(seed).normal(0, 0.5, (3, 9)))
            shaded = _basis_raw(grid_directions((64, 32))) @ coeffs.coeffs.T
            recovered = fit_sh_image(EnvMap(shaded, allow_negative=True))
            assert np.abs(recovered.coeffs - coeffs.coeffs).max() < 1e-6, seed


def test_04_inverse_rendering_fit():
    with criterion(4, "inverse-rendering fit round-trip", 10.0):
        # 16 distinct facet orientations; 9 independent ones are the minimum
        # for the 9-coefficient system to have full rank
        g, truth = faceted_scene()
        clean = fit_sh_lighting(g)
        assert np.abs(clean.coeffs.coeffs - truth.coeffs).max() < 1e-6
        assert reconstruction_loss(g, truth) < 1e-9

        rng = np.random.default_rng(42)
        linear = np.clip(g.image, 0, None) ** 2.2
        noisy_img = np.clip(np.clip(linear + rng.normal(0, 0.01, linear.shape), 0, None)
                            ** (1 / 2.2), 0, 1)
        noisy = GBuffer(image=noisy_img, albedo=g.albedo, normal=g.normal,
                        plane_distance=g.plane_distance, shadow=g.shadow,
                        sky_mask=g.sky_mask, intrinsics=g.intrinsics)
        assert np.abs(fit_sh_lighting(noisy).coeffs.coeffs - truth.coeffs).max() < 5e-2


def test_05_reprojection_and_probe_geometry():
    with criterion(5, "reprojection and probe geometry", 5.0):
        rng = np.random.default_rng(0)
        for seed in range(5):
            g, _ = faceted_scene(96, 72, seed=seed + 1)
            points, valid = reproject_all(g)
            residual = np.abs(np.einsum("hwc,hwc->hw", g.normal, points) + g.plane_distance)
            assert residual[valid].max() < 1e-9, seed
            for _ in range(5):
                x = int(rng.integers(0, g.width))
                y = int(rng.integers(int(0.2 * g.height), g.height))
                center = probe_center(g, (x, y))
                offset = center - points[y, x]
                assert np.linalg.norm(offset) == pytest.approx(0.10, abs=1e-12)


def test_06_warp_oracles():
    with criterion(6, "warp oracles", 30.0):
        g, _ = two_plane_scene(80, 60, fov_x_deg=110.0)
        probe = ProbeLocation.at(g, (40, 45))

        w = warp_to_probe(g, probe, (32, 16))
        best = zbuffer_scan(g, probe.center, (32, 16))
        assert int(w.validity.sum()) == len(best)
        for key, (dist, src) in best.items():
            r, c = divmod(key, 32)
            assert w.depth[r, c] == dist
            sy, sx = divmod(src, g.width)
            assert np.array_equal(w.color[r, c], g.image[sy, sx])

        out_dims = (512, 256)
        fine = warp_to_probe(g, probe, out_dims)
        fine_best = zbuffer_scan(g, probe.center, out_dims)
        dirs = grid_directions(out_dims)
        intr = g.intrinsics
        for key, (dist, src) in fine_best.items():
            r, c = divmod(key, out_dims[0])
            point = probe.center + fine.depth[r, c] * dirs[r, c]
            px = intr.fx * point[0] / point[2] + intr.cx
            py = intr.fy * point[1] / point[2] + intr.cy
            sy, sx = divmod(src, g.width)
            assert abs(px - sx) <= 1.0 and abs(py - sy) <= 1.0

        base = warp_to_probe(g, probe, (64, 32), threads=1)
        for threads in (2, 8):
            other = warp_to_probe(g, probe, (64, 32), threads=threads)
            for field in ("color", "shadow", "validity", "depth"):
                assert np.array_equal(getattr(base, field), getattr(other, field))


def test_07_sun_extraction():
    with criterion(7, "sun extraction", 10.0):
        pitch = 2 * math.pi / 256
        rng = np.random.default_rng(3)
        for _ in range(20):
            azimuth = rng.uniform(-math.pi, math.pi)
            elevation = rng.uniform(-1.0, 1.3)
            env = sun_disc_envmap((256, 128), azimuth, elevation, radius=0.12)
            sun = sun_position(env)
            err = angular_errors(sun.direction,
                                 Direction.from_azimuth_elevation(azimuth, elevation))
            assert err["azimuth"] <= pitch + 1e-9
            assert err["elevation"] <= math.pi / 128 + 1e-9

        seam = sun_disc_envmap((256, 128), math.pi - 0.01, 0.3, radius=0.15)
        luma = seam.data @ np.array([0.2126, 0.7152, 0.0722])
        labels = wrapped_components(luma >= 0.98 * luma.max())
        assert (np.bincount(labels.ravel())[1:] > 0).sum() == 1
        assert bfs_components(luma >= 0.98 * luma.max()).max() == 1

        env = sun_disc_envmap((128, 64), 0.8, 0.5)
        assert sun_position(EnvMap(env.data * 10.0)).direction == sun_position(env).direction


def test_08_metrics():
    with criterion(8, "metrics", 10.0):
        rng = np.random.default_rng(6)
        x = rng.uniform(0, 1, (32, 32))
        assert abs(ssim(x, x) - 1.0) < 1e-12
        for seed in range(3):
            r = np.random.default_rng(seed)
            a = r.uniform(0, 1, (32, 32))
            b = r.uniform(0, 1, (32, 32))
            assert abs(ssim(a, b) - brute_force_ssim(a, b)) < 1e-9

        env = smooth_random_envmap((32, 16), seed=9)
        assert tonemapped_ssim_loss(env, env) == 0.0
        base = 1.3 + rng.uniform(0, 5, (16, 32, 3))
        above_a = EnvMap(base)
        above_b = EnvMap(base + rng.uniform(0, 3, base.shape))
        assert np.all(tonemap(above_a) == 1.0)
        assert tonemapped_ssim_loss(above_a, above_b) == 0.0

        err = angular_errors(Direction.from_azimuth_elevation(math.radians(179), 0.0),
                             Direction.from_azimuth_elevation(math.radians(-179), 0.0))
        assert err["azimuth"] == pytest.approx(math.radians(2.0), abs=1e-12)


def test_09_data_filtering():
    with criterion(9, "data filtering", 10.0):
        rng = np.random.default_rng(12)
        references = [rng.uniform(0, 1, (16, 16, 3)) for _ in range(20)]
        candidates = [rng.uniform(0, 1, (16, 16, 3)) for _ in range(48)]
        candidates.append(references[5].copy())
        candidates.append(np.zeros((16, 16, 3)))  # all mass in the black bin
        bright_refs = [np.full((16, 16, 3), 0.95)]

        scores, kept = filter_images(candidates, references, threshold=0.7)
        assert scores[48] == pytest.approx(1.0, abs=1e-12)
        assert kept[48]
        disjoint, disjoint_kept = filter_images([candidates[49]], bright_refs, threshold=0.7)
        assert disjoint[0] == 0.0 and not disjoint_kept[0]

        expected = pairwise_filter_scores(candidates, references, color_histogram)
        assert np.allclose(scores, expected, atol=1e-12)


def test_10_pipeline_determinism(tmp_path):
    with criterion(10, "end-to-end pipeline determinism", 60.0):
        g, _ = faceted_scene()
        manifest = save_gbuffer(g, tmp_path / "scene")
        outputs = ("shcoeffs.json", "fit_report.json", "sky.pfm", "warp_color.pfm",
                   "warp_shadow.pfm", "warp_valid.png", "warp_depth.pfm", "local.pfm")
        digests = []
        for run in ("a", "b"):
            outdir = tmp_path / run
            code = main(["pipeline", "--gbuffer", str(manifest), "--pixel", "80,90",
                         "--outdir", str(outdir), "--size", "256x128"])
            assert code == 0
            digests.append([(outdir / name).read_bytes() for name in outputs])
        for name, first, second in zip(outputs, digests[0], digests[1]):
            assert first == second, f"{name} differs between runs"
