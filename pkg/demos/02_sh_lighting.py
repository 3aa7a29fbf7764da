"""Spherical-harmonics lighting: diffuse convolution and coefficient projection.

Run from the repository root:  python3 demos/02_sh_lighting.py
"""

import math
from pathlib import Path

import numpy as np

from probelight import (diffuse_conv_loss, diffuse_convolve, sh_project,
                        tonemap, write_envmap, write_png)
from probelight.sh import render_envmap
from probelight.synth import sun_disc_envmap

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

sky = sun_disc_envmap((128, 64), azimuth=math.radians(-30), elevation=math.radians(35),
                      radius=0.12, sun_value=300.0, background=0.1)

# The diffuse convolution turns radiance into Lambertian irradiance per
# normal direction: a blurry panorama whose peak faces the sun.
irradiance = diffuse_convolve(sky, (64, 32))
write_envmap(OUT / "irradiance.pfm", irradiance)
peak = np.unravel_index(irradiance.data.sum(axis=2).argmax(), (32, 64))
print(f"irradiance peak at pixel (u={peak[1]}, v={peak[0]}) of 64x32")

# Nine coefficients per channel summarise the low-frequency lighting.
coeffs = sh_project(sky)
print("fitted coefficient matrix (rows = RGB):")
print(np.array_str(coeffs.coeffs, precision=4, suppress_small=True))
print(f"convolution loss of the fit: {diffuse_conv_loss(sky, coeffs):.3e}")

# Rendering the coefficients back onto the sphere gives the smooth panorama
# the coefficients encode (negative lobes clamp to zero radiance).
low_freq = render_envmap(coeffs, (128, 64))
write_envmap(OUT / "low_freq_sky.pfm", low_freq)
write_png(OUT / "low_freq_preview.png", tonemap(low_freq, exposure_stops=1.0))
coeffs.save(OUT / "sky_coeffs.json")
print(f"wrote irradiance map, low-frequency sky and coefficients to {OUT}")
