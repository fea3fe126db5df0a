"""Gradient-descent fine-tuning of membership centers and widths.

Per-sample updates apply the Gaussian derivative factors
(x-c)/sigma^2 and (x-c)^2/sigma^3 scaled by a rule-level error signal chosen
so each step is exact gradient descent on half the squared residual;
consequents stay fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .fuzzy import COVERAGE_FLOOR, CoverageError, FuzzyRuleBase, InferenceMode, infer_batch, make_rulebase


@dataclass(frozen=True)
class RefineConfig:
    delta: float
    epochs: int
    min_sigma: float | None = None  # width floor; defaults to 1e-3 x input range
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.min_sigma is not None and not self.min_sigma > 0:
            raise ValueError("min_sigma must be positive")


@dataclass(frozen=True)
class RefineResult:
    rulebase: FuzzyRuleBase
    trace: tuple[float, ...]  # per-epoch mean squared error
    diverged: bool = False


def _tie_labels(centers, widths):
    """Group labels per dimension: antecedents with exactly equal (center,
    width) are one shared fuzzy set and must move together, as partitions
    produced by merging do."""
    m, n = centers.shape
    labels = []
    for d in range(n):
        seen: dict[tuple[float, float], int] = {}
        lab = np.empty(m, dtype=np.intp)
        for r in range(m):
            lab[r] = seen.setdefault((centers[r, d], widths[r, d]), len(seen))
        labels.append(lab)
    return labels


def _step_arrays(centers, widths, consequents, mode, labels, x, y, delta, min_sigma):
    """One in-place gradient step on (centers, widths) for a single sample."""
    diff = x[None, :] - centers
    per_dim = np.exp(-(diff * diff) / (2.0 * widths**2))
    mu = per_dim.prod(axis=1)
    if mode is InferenceMode.ADDITIVE:
        f = float(mu @ consequents)
        rule_weight = consequents
    else:
        total = float(mu.sum())
        if total < COVERAGE_FLOOR:
            raise CoverageError(f"no rule covers the sample (firing sum {total!r})")
        f = float(mu @ consequents) / total
        rule_weight = (consequents - f) / total
    scale = delta * (y - f) * rule_weight * mu  # (m,)
    dc = scale[:, None] * diff / widths**2
    dw = scale[:, None] * (diff * diff) / widths**3
    for d, lab in enumerate(labels):
        groups = int(lab.max()) + 1
        centers[:, d] += np.bincount(lab, weights=dc[:, d], minlength=groups)[lab]
        widths[:, d] += np.bincount(lab, weights=dw[:, d], minlength=groups)[lab]
    np.maximum(widths, min_sigma, out=widths)


def _effective_min_sigma(cfg: RefineConfig, X: np.ndarray | None) -> float:
    if cfg.min_sigma is not None:
        return cfg.min_sigma
    if X is None:
        return 1e-12
    spread = float(X.max() - X.min())
    return 1e-3 * spread if spread > 0 else 1e-6


def gradient_step(rb: FuzzyRuleBase, x, y: float, cfg: RefineConfig) -> FuzzyRuleBase:
    """Return the rule base after one exact gradient-descent step on the
    squared residual at (x, y); widths are clamped at the floor and
    consequents are unchanged. Value-identical antecedents (sets shared
    across rules after merging) move together."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != rb.input_dimension:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {rb.input_dimension}")
    centers, widths, consequents = rb.arrays()
    labels = _tie_labels(centers, widths)
    _step_arrays(centers, widths, consequents, rb.mode, labels, x, float(y), cfg.delta, _effective_min_sigma(cfg, None))
    return make_rulebase(centers, widths, consequents, rb.mode)


def refine(rb: FuzzyRuleBase, data: Dataset, cfg: RefineConfig) -> RefineResult:
    """Run ``epochs`` passes of per-sample gradient steps in seeded shuffled
    order; the trace holds the mean squared error after each epoch. Stops
    early, flagged, if an epoch ends above ten times the initial error."""
    if data.n_features != rb.input_dimension:
        raise ValueError(f"dimension mismatch: {data.n_features} vs {rb.input_dimension}")
    if cfg.epochs == 0:
        return RefineResult(rb, ())
    centers, widths, consequents = rb.arrays()
    labels = _tie_labels(centers, widths)
    min_sigma = _effective_min_sigma(cfg, data.x)
    rng = np.random.default_rng(cfg.shuffle_seed)
    initial = _mse(centers, widths, consequents, rb.mode, data)
    trace = []
    diverged = False
    for _ in range(cfg.epochs):
        for idx in rng.permutation(data.n_samples):
            _step_arrays(centers, widths, consequents, rb.mode, labels, data.x[idx], float(data.y[idx]), cfg.delta, min_sigma)
        epoch_mse = _mse(centers, widths, consequents, rb.mode, data)
        trace.append(epoch_mse)
        if epoch_mse > 10.0 * initial:
            diverged = True
            break
    return RefineResult(make_rulebase(centers, widths, consequents, rb.mode), tuple(trace), diverged)


def _mse(centers, widths, consequents, mode, data: Dataset) -> float:
    rb = make_rulebase(centers, widths, consequents, mode)
    residual = infer_batch(rb, data.x) - data.y
    return float(np.mean(residual * residual))
