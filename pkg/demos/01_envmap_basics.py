"""Equirectangular basics: build a sky, rotate it, inspect solid angles, tonemap.

Run from the repository root:  python3 demos/01_envmap_basics.py
Outputs land in demos/output/.
"""

import math
from pathlib import Path

from probelight import (pixel_to_direction, rotate_azimuth, row_solid_angles,
                        tonemap, write_envmap, write_png)
from probelight.synth import sun_disc_envmap

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# A 256x128 sky with a bright sun disc 40 degrees up, slightly east of forward.
sky = sun_disc_envmap((256, 128), azimuth=math.radians(25), elevation=math.radians(40),
                      radius=0.10, sun_value=800.0, background=0.08)
write_envmap(OUT / "sky.pfm", sky)
print(f"sky: {sky.width}x{sky.height}, radiance range "
      f"[{sky.data.min():.3f}, {sky.data.max():.1f}]")

# Every pixel direction is known in closed form; the solid angles of one
# column cover each latitude band exactly, so the whole map sums to 4*pi.
total = row_solid_angles(sky.dims).sum() * sky.width
print(f"solid angle closure: {total:.12f} vs 4*pi = {4 * math.pi:.12f}")
zenith = pixel_to_direction(sky.dims, (128, 0))
print(f"top-row centre direction: azimuth {math.degrees(zenith.azimuth):+.2f} deg, "
      f"elevation {math.degrees(zenith.elevation):.2f} deg")

# Rotating around the vertical axis slides the panorama columns with wrap.
rotated = rotate_azimuth(sky, math.radians(90))
write_envmap(OUT / "sky_rot90.pfm", rotated)
energy = lambda m: float((m.data * row_solid_angles(m.dims)[:, None, None]).sum())
print(f"energy before/after rotation: {energy(sky):.6f} / {energy(rotated):.6f}")

# Tonemapping compresses HDR to a displayable PNG; the sun clamps to white.
write_png(OUT / "sky_preview.png", tonemap(sky, exposure_stops=-0.3, gamma=2.2))
write_png(OUT / "sky_rot90_preview.png", tonemap(rotated, exposure_stops=-0.3, gamma=2.2))
print(f"wrote previews to {OUT}")
