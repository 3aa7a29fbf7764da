"""Independent reference implementations used to verify the optimized paths.

Everything here is deliberately unoptimized (plain Python loops, dicts, BFS)
and shares nothing with the library implementations beyond the direction and
solid-angle grids, which are inputs to the operations under test.
"""

from __future__ import annotations

import math

import numpy as np

from probelight.envmap import directions_to_pixels, grid_directions, row_solid_angles
from probelight.gbuffer import reproject_all
from probelight.metrics import SSIM_WINDOW, _gaussian_kernel


def brute_force_diffuse(env, out_dims):
    """Double loop over output then input pixels, accumulating in row-major order."""
    in_w, _ = env.dims
    out_w, out_h = out_dims
    out_dirs = grid_directions(out_dims).reshape(-1, 3)
    in_dirs = grid_directions(env.dims).reshape(-1, 3)
    sangles = np.repeat(row_solid_angles(env.dims), in_w)
    radiance = env.data.reshape(-1, 3)
    in_list = [(float(d[0]), float(d[1]), float(d[2])) for d in in_dirs]
    s_list = [float(x) for x in sangles]
    rad_list = [(float(r[0]), float(r[1]), float(r[2])) for r in radiance]
    out = np.zeros((out_dirs.shape[0], 3))
    for i in range(out_dirs.shape[0]):
        ox, oy, oz = (float(out_dirs[i, 0]), float(out_dirs[i, 1]), float(out_dirs[i, 2]))
        n0 = n1 = n2 = 0.0
        den = 0.0
        for j, (dx, dy, dz) in enumerate(in_list):
            dot = ox * dx + oy * dy + oz * dz
            if dot > 0.0:
                sj = s_list[j]
                den += sj
                r = rad_list[j]
                n0 += r[0] * sj * dot
                n1 += r[1] * sj * dot
                n2 += r[2] * sj * dot
        if den > 0.0:
            out[i] = (n0 / den, n1 / den, n2 / den)
    return out.reshape(out_h, out_w, 3)


def semi_vectorised_diffuse(env, out_dims):
    """Per-output-pixel numpy reduction; different summation order than the library."""
    in_w, _ = env.dims
    out_w, out_h = out_dims
    out_dirs = grid_directions(out_dims).reshape(-1, 3)
    in_dirs = grid_directions(env.dims).reshape(-1, 3)
    sangles = np.repeat(row_solid_angles(env.dims), in_w)
    radiance = env.data.reshape(-1, 3)
    out = np.zeros((out_dirs.shape[0], 3))
    for i in range(out_dirs.shape[0]):
        dots = in_dirs @ out_dirs[i]
        front = dots > 0.0
        den = sangles[front].sum()
        if den > 0:
            out[i] = (radiance[front] * (sangles[front] * dots[front])[:, None]).sum(axis=0) / den
    return out.reshape(out_h, out_w, 3)


def zbuffer_scan(g, center, out_dims):
    """Min-depth scan over all valid source points; returns {flat_out: (depth, src_idx)}."""
    out_w, out_h = out_dims
    points, valid = reproject_all(g)
    flat_pts = points.reshape(-1, 3)
    flat_valid = valid.reshape(-1)
    best = {}
    for j in range(flat_pts.shape[0]):
        if not flat_valid[j]:
            continue
        rel = flat_pts[j] - center
        dist = math.sqrt(rel[0] ** 2 + rel[1] ** 2 + rel[2] ** 2)
        if dist <= 1e-9:
            continue
        u, v = directions_to_pixels(out_dims, (rel / dist)[None, :])
        ui = int(np.floor(u[0] + 0.5)) % out_w
        vi = min(max(int(np.floor(v[0] + 0.5)), 0), out_h - 1)
        key = vi * out_w + ui
        if key not in best or (dist, j) < best[key]:
            best[key] = (dist, j)
    return best


def brute_force_ssim(a, b):
    """Per-window SSIM with an explicit 2D kernel (greyscale images)."""
    k1d = _gaussian_kernel()
    w2d = np.outer(k1d, k1d)
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    h, w = a.shape
    n = SSIM_WINDOW
    vals = []
    for i in range(h - n + 1):
        for j in range(w - n + 1):
            wa = a[i:i + n, j:j + n]
            wb = b[i:i + n, j:j + n]
            mu_a = (w2d * wa).sum()
            mu_b = (w2d * wb).sum()
            var_a = (w2d * wa * wa).sum() - mu_a ** 2
            var_b = (w2d * wb * wb).sum() - mu_b ** 2
            cov = (w2d * wa * wb).sum() - mu_a * mu_b
            vals.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                        / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)))
    return float(np.mean(vals))


def bfs_components(mask):
    """4-connected components with horizontal wraparound via breadth-first search."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=int)
    current = 0
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or labels[sy, sx]:
                continue
            current += 1
            stack = [(sy, sx)]
            labels[sy, sx] = current
            while stack:
                y, x = stack.pop()
                for ny, nx in ((y - 1, x), (y + 1, x), (y, (x - 1) % w), (y, (x + 1) % w)):
                    if 0 <= ny < h and mask[ny, nx] and not labels[ny, nx]:
                        labels[ny, nx] = current
                        stack.append((ny, nx))
    return labels


def pairwise_filter_scores(candidates, references, hist_fn):
    """O(candidates x references) histogram-intersection scan."""
    scores = []
    for cand in candidates:
        hc = hist_fn(cand)
        best = 0.0
        for ref in references:
            hr = hist_fn(ref)
            best = max(best, float(np.minimum(hc, hr).sum()))
        scores.append(best)
    return np.array(scores)


def otsu_best_variance(values, bins=256):
    """Exhaustive between-class variance over every candidate split."""
    v = np.asarray(values, dtype=np.float64).ravel()
    idx = np.minimum((v * bins).astype(np.int64), bins - 1)
    hist = np.bincount(idx, minlength=bins).astype(np.float64)
    prob = hist / hist.sum()
    centers = (np.arange(bins) + 0.5) / bins
    best = -1.0
    variances = []
    for k in range(bins - 1):
        w0 = prob[:k + 1].sum()
        w1 = 1.0 - w0
        if w0 <= 0 or w1 <= 0:
            variances.append(0.0)
            continue
        mu0 = (prob[:k + 1] * centers[:k + 1]).sum() / w0
        mu1 = (prob[k + 1:] * centers[k + 1:]).sum() / w1
        var = w0 * w1 * (mu0 - mu1) ** 2
        variances.append(var)
        best = max(best, var)
    return best, np.array(variances)
