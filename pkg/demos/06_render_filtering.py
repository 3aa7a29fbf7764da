"""Rendering-quality filtering by colour-histogram intersection.

Candidates whose colour distribution resembles at least one reference image
score close to 1 and survive; washed-out or pitch-black renderings score low
and are dropped at the 0.7 threshold.

Run from the repository root:  python3 demos/06_render_filtering.py
"""

import numpy as np

from probelight import color_histogram, filter_images, histogram_similarity

rng = np.random.default_rng(0)

# stand-ins for natural photographs: mid-toned colourful noise
references = [rng.uniform(0.15, 0.85, (48, 64, 3)) for _ in range(8)]

candidates = {
    "faithful render": np.clip(references[2] + rng.normal(0, 0.02, (48, 64, 3)), 0, 1),
    "unrelated scene": rng.uniform(0.15, 0.85, (48, 64, 3)),
    "overexposed": np.clip(rng.uniform(0.85, 1.0, (48, 64, 3)), 0, 1),
    "pitch black": np.full((48, 64, 3), 0.01),
}

scores, kept = filter_images(list(candidates.values()), references, threshold=0.7)
for (name, _), score, keep in zip(candidates.items(), scores, kept):
    print(f"{name:20s} score {score:.3f}  ->  {'kept' if keep else 'dropped'}")

h_dark = color_histogram(candidates["pitch black"])
h_bright = color_histogram(candidates["overexposed"])
print(f"\ndisjoint colour supports intersect at exactly "
      f"{histogram_similarity(h_dark, h_bright):.1f}")
