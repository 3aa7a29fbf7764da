"""Spatially-varying outdoor lighting toolkit.

Numpy-based building blocks for working with equirectangular HDR environment
maps: direction and solid-angle math, second-order spherical-harmonics
lighting, inverse-rendering lighting fits from intrinsic G-buffers, forward
panoramic warping with Z-buffering, local light-probe composition, evaluation
metrics and rendering-quality filtering.
"""

__version__ = "0.1.0"

from .dataselect import color_histogram, filter_images, histogram_similarity
from .envmap import (Direction, EnvMap, direction_to_pixel, directions_to_pixels,
                     grid_directions, pixel_to_direction, rotate_azimuth,
                     row_solid_angles, sample_bilinear, solid_angle, tonemap)
from .errors import (DegenerateGeometryError, EmptyWarpError, IllConditionedError,
                     InputError, NumericalError, ProbelightError)
from .fit import FitResult, fit_sh_lighting, lighting_mask, reconstruction_loss
from .gbuffer import (CameraIntrinsics, GBuffer, ProbeLocation, load_gbuffer,
                      nonshadow_mask, otsu_threshold, probe_center, reproject,
                      reproject_all, save_gbuffer)
from .hdrio import (read_envmap, read_pfm, read_png, read_rgbe, write_envmap,
                    write_pfm, write_png)
from .metrics import (SunPosition, angular_errors, mae, ssim, sun_position,
                      supervision_losses, tonemapped_ssim_loss, wrapped_components)
from .sh import (ShCoeffs, diffuse_conv_loss, diffuse_convolve, fit_sh_image,
                 render_envmap, sh_basis, sh_project, sh_shade)
from .warp import WarpedPanorama, compose_local, warp_to_probe

__all__ = [
    "__version__",
    "CameraIntrinsics", "Direction", "EnvMap", "FitResult", "GBuffer",
    "ProbeLocation", "ShCoeffs", "SunPosition", "WarpedPanorama",
    "ProbelightError", "InputError", "NumericalError", "DegenerateGeometryError",
    "IllConditionedError", "EmptyWarpError",
    "angular_errors", "color_histogram", "compose_local", "diffuse_conv_loss",
    "diffuse_convolve", "direction_to_pixel", "directions_to_pixels",
    "filter_images", "fit_sh_image", "fit_sh_lighting", "grid_directions",
    "histogram_similarity", "lighting_mask", "load_gbuffer", "mae",
    "nonshadow_mask", "otsu_threshold", "pixel_to_direction", "probe_center",
    "read_envmap", "read_pfm", "read_png", "read_rgbe", "reconstruction_loss",
    "render_envmap", "reproject", "reproject_all", "rotate_azimuth",
    "row_solid_angles", "sample_bilinear", "save_gbuffer", "sh_basis",
    "sh_project", "sh_shade", "solid_angle", "ssim", "sun_position",
    "supervision_losses", "tonemap", "tonemapped_ssim_loss", "warp_to_probe",
    "wrapped_components", "write_envmap", "write_pfm", "write_png",
]
