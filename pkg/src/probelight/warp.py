"""Forward panoramic warping of a limited-FOV view to a probe-centred panorama.

Every valid scene point is splatted onto the output pixel nearest to its
direction as seen from the probe centre; collisions are resolved by a Z-buffer
(minimum distance wins, exact ties broken by the smallest row-major source
pixel index).  No hole filling is performed: output pixels nothing projects to
stay invalid with colour and shadow zero, to be filled later by composition
with a sky map.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .envmap import EnvMap, directions_to_pixels
from .errors import EmptyWarpError, InputError
from .gbuffer import GBuffer, ProbeLocation, reproject_all


@dataclass
class WarpedPanorama:
    """Probe-centred panorama of warped colour and shadow with depth records.

    Invalid pixels hold colour 0, shadow 0 and depth 0; valid pixels carry the
    winning source pixel's values and its positive distance from the probe.
    """

    color: np.ndarray
    shadow: np.ndarray
    validity: np.ndarray
    depth: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        return self.validity.shape[1], self.validity.shape[0]


def _project_chunk(points, center, out_dims):
    """Distances, output pixel indices and flat pixel ids for one point chunk."""
    out_w, out_h = out_dims
    rel = points - center
    dist = np.sqrt(np.sum(rel * rel, axis=-1))
    safe = np.maximum(dist, 1e-300)
    dirs = rel / safe[:, None]
    u, v = directions_to_pixels(out_dims, dirs)
    ui = np.floor(u + 0.5).astype(np.int64) % out_w
    vi = np.clip(np.floor(v + 0.5).astype(np.int64), 0, out_h - 1)
    return dist, vi * out_w + ui


def warp_to_probe(g: GBuffer, probe: ProbeLocation, out_dims=(256, 128),
                  threads: int = 1) -> WarpedPanorama:
    """Splat the G-buffer's 3D points into a panorama centred at the probe.

    ``threads`` partitions the source points for projection; the Z-buffer
    reduction is a deterministic global sort, so results are byte-identical
    for any thread count.
    """
    out_w, out_h = int(out_dims[0]), int(out_dims[1])
    if out_w != 2 * out_h or out_h < 1:
        raise InputError(f"output dims must satisfy width == 2 * height, got {out_w}x{out_h}")
    points, valid = reproject_all(g)
    flat_valid = valid.reshape(-1)
    src_idx = np.flatnonzero(flat_valid)
    if src_idx.size == 0:
        raise EmptyWarpError("no valid scene point to warp (all sky or grazing)")
    pts = points.reshape(-1, 3)[src_idx]
    center = np.asarray(probe.center, dtype=np.float64)

    threads = max(1, int(threads))
    if threads == 1 or src_idx.size < 2 * threads:
        dist, flat_out = _project_chunk(pts, center, (out_w, out_h))
    else:
        chunks = np.array_split(np.arange(src_idx.size), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda c: _project_chunk(pts[c], center, (out_w, out_h)), chunks))
        dist = np.concatenate([r[0] for r in results])
        flat_out = np.concatenate([r[1] for r in results])

    too_close = dist <= 1e-9
    if too_close.any():
        keep = ~too_close
        dist, flat_out, src_idx = dist[keep], flat_out[keep], src_idx[keep]
        if src_idx.size == 0:
            raise EmptyWarpError("probe centre coincides with every scene point")

    # nearest point per output pixel, ties by smallest source index
    order = np.lexsort((src_idx, dist, flat_out))
    sorted_out = flat_out[order]
    _, first = np.unique(sorted_out, return_index=True)
    winners = order[first]
    win_pixels = sorted_out[first]
    win_src = src_idx[winners]

    color = np.zeros((out_h, out_w, 3))
    shadow = np.zeros((out_h, out_w))
    validity = np.zeros((out_h, out_w), dtype=bool)
    depth = np.zeros((out_h, out_w))
    rows, cols = np.divmod(win_pixels, out_w)
    color[rows, cols] = g.image.reshape(-1, 3)[win_src]
    shadow[rows, cols] = g.shadow.reshape(-1)[win_src]
    depth[rows, cols] = dist[winners]
    validity[rows, cols] = True
    return WarpedPanorama(color=color, shadow=shadow, validity=validity, depth=depth)


def compose_local(w: WarpedPanorama, sky: EnvMap, gamma: float = 2.2) -> EnvMap:
    """Fill a warped panorama's holes with sky radiance.

    Valid warp pixels are gamma-expanded from LDR back to linear HDR; invalid
    pixels take the sky map's radiance.  This is the deterministic baseline
    for assembling a complete local light probe.
    """
    if sky.dims != w.dims:
        raise InputError(f"sky dims {sky.dims} do not match warp dims {w.dims}")
    linear = np.clip(w.color, 0.0, None) ** gamma
    out = np.where(w.validity[:, :, None], linear, sky.data)
    return EnvMap(out, allow_negative=sky.allow_negative)
