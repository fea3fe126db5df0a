"""Fuzzy-set similarity: the integral Jaccard measure, its Gaussian closed
form, and the weighted merge used during redundancy removal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fuzzy import GaussianMF


@dataclass(frozen=True)
class SimilarityConfig:
    """Quadrature settings: integration covers the union of
    [center - m*width, center + m*width] for both sets."""

    quadrature_step: float = 1e-3
    support_radius_multiplier: float = 6.0

    def __post_init__(self):
        if not self.quadrature_step > 0:
            raise ValueError("quadrature_step must be positive")
        if self.support_radius_multiplier < 4:
            raise ValueError("support_radius_multiplier must be at least 4")


DEFAULT_SIMILARITY_CONFIG = SimilarityConfig()


def similarity_integral(a: GaussianMF, b: GaussianMF, cfg: SimilarityConfig = DEFAULT_SIMILARITY_CONFIG) -> float:
    """Jaccard overlap of two fuzzy sets: area of the pointwise minimum over
    the area of the pointwise maximum, by composite trapezoidal quadrature."""
    m = cfg.support_radius_multiplier
    lo = min(a.center - m * a.width, b.center - m * b.width)
    hi = max(a.center + m * a.width, b.center + m * b.width)
    n_pts = max(int(np.ceil((hi - lo) / cfg.quadrature_step)) + 1, 2)
    x = np.linspace(lo, hi, n_pts)
    fa = np.exp(-((x - a.center) ** 2) / (2.0 * a.width**2))
    fb = np.exp(-((x - b.center) ** 2) / (2.0 * b.width**2))
    inter = float(np.trapezoid(np.minimum(fa, fb), x))
    area_a = float(np.trapezoid(fa, x))
    area_b = float(np.trapezoid(fb, x))
    return inter / (area_a + area_b - inter)


def similarity_gaussian(a: GaussianMF, b: GaussianMF) -> float:
    """Closed-form similarity s*e^(-d^2/s^2) / (2s - s*e^(-d^2/s^2)) with
    d the center distance and s the mean width; 1 exactly at d = 0 and
    strictly decreasing in d."""
    s = 0.5 * (a.width + b.width)
    d = abs(a.center - b.center)
    e = float(np.exp(-(d * d) / (s * s)))
    return e / (2.0 - e)


def merge(a: GaussianMF, b: GaussianMF, weight_a: float, weight_b: float) -> GaussianMF:
    """Merge two Gaussian sets into one: centers combine by the consequent
    weights of the owning rules, and the width inflates by half the center
    gap so the result still covers both originals."""
    if weight_a < 0 or weight_b < 0:
        raise ValueError("merge weights must be non-negative")
    if a == b:
        return a
    if weight_a == 0.0 and weight_b == 0.0:
        weight_a = weight_b = 1.0
    total = weight_a + weight_b
    center = (weight_a * a.center + weight_b * b.center) / total
    width = (weight_a * a.width + weight_b * b.width) / total + 0.5 * abs(a.center - b.center)
    return GaussianMF(center, width)
