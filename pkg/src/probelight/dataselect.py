"""Rendering-quality filtering by colour-histogram similarity.

Candidates are scored against a reference set of natural images: each image
is reduced to a normalised joint RGB histogram (16x16x16 bins, which keeps
colour co-occurrence that marginal histograms would lose), the similarity of
two histograms is their intersection (sum of bin-wise minima, 1 only for
identical histograms), and a candidate's score is its best similarity over
all references.  Candidates are kept when the score strictly exceeds the
threshold, 0.7 by default.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

HISTOGRAM_BINS = 16
SCORE_THRESHOLD = 0.7


def color_histogram(image: np.ndarray, bins: int = HISTOGRAM_BINS) -> np.ndarray:
    """Normalised joint RGB histogram of a [0, 1] image, shape (bins,)*3."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InputError(f"expected an RGB image, got shape {img.shape}")
    if img.size == 0:
        raise InputError("cannot histogram an empty image")
    if img.min() < 0 or img.max() > 1:
        raise InputError("image values must lie in [0, 1]")
    idx = np.minimum((img * bins).astype(np.int64), bins - 1)
    flat = (idx[:, :, 0] * bins + idx[:, :, 1]) * bins + idx[:, :, 2]
    hist = np.bincount(flat.ravel(), minlength=bins ** 3).astype(np.float64)
    return (hist / hist.sum()).reshape(bins, bins, bins)


def histogram_similarity(h1: np.ndarray, h2: np.ndarray) -> float:
    """Histogram intersection: sum of bin-wise minima, in [0, 1]."""
    a = np.asarray(h1, dtype=np.float64)
    b = np.asarray(h2, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"histogram shapes differ: {a.shape} vs {b.shape}")
    for name, h in (("first", a), ("second", b)):
        if abs(h.sum() - 1.0) > 1e-6 or (h < 0).any():
            raise InputError(f"{name} histogram is not normalised")
    return float(np.minimum(a, b).sum())


def filter_images(candidates, references, threshold: float = SCORE_THRESHOLD,
                  bins: int = HISTOGRAM_BINS) -> tuple[np.ndarray, np.ndarray]:
    """Score candidates against references and keep the ones above threshold.

    Returns ``(scores, kept)`` aligned with the candidate order: the score is
    the best histogram intersection over all references, and a candidate is
    kept only when its score is strictly larger than ``threshold``.
    """
    references = list(references)
    if not references:
        raise InputError("reference set must not be empty")
    ref_hists = np.stack([color_histogram(r, bins).ravel() for r in references])
    scores = np.empty(len(candidates))
    for i, candidate in enumerate(candidates):
        hist = color_histogram(candidate, bins).ravel()
        scores[i] = np.minimum(ref_hists, hist[None, :]).sum(axis=1).max()
    return scores, scores > threshold
