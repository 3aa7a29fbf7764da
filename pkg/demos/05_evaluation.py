"""Evaluation metrics: sun position, angular errors, MAE and tonemapped SSIM.

Run from the repository root:  python3 demos/05_evaluation.py
"""

import math

from probelight import (angular_errors, mae, rotate_azimuth, ssim, sun_position,
                        tonemap, tonemapped_ssim_loss)
from probelight.synth import sun_disc_envmap

truth = sun_disc_envmap((256, 128), azimuth=math.radians(60), elevation=math.radians(30))
# a deliberately wrong estimate: rotated 10 degrees and dimmer
estimate = rotate_azimuth(truth, math.radians(10))
estimate.data *= 0.8

sun_est = sun_position(estimate)
sun_gt = sun_position(truth)
errs = angular_errors(sun_est.direction, sun_gt.direction)
print(f"sun (est):  azimuth {math.degrees(sun_est.direction.azimuth):7.2f} deg, "
      f"elevation {math.degrees(sun_est.direction.elevation):6.2f} deg, "
      f"component {sun_est.component_size} px")
print(f"sun (true): azimuth {math.degrees(sun_gt.direction.azimuth):7.2f} deg, "
      f"elevation {math.degrees(sun_gt.direction.elevation):6.2f} deg")
print("angular errors (deg): "
      + ", ".join(f"{k} {math.degrees(v):.2f}" for k, v in errs.items()))

print(f"MAE (raw):        {mae(estimate, truth):.4f}")
print(f"MAE (normalised): {mae(estimate, truth, normalize=True):.4f} "
      "(insensitive to the 0.8 intensity scale)")
print(f"SSIM of tonemapped maps: {ssim(tonemap(estimate), tonemap(truth)):.4f}")
print(f"tonemapped SSIM loss:    {tonemapped_ssim_loss(estimate, truth):.4f}")
print(f"both zero against itself: {tonemapped_ssim_loss(truth, truth):.4f}, "
      f"MAE {mae(truth, truth):.4f}")
