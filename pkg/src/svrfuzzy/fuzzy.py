"""Gaussian-membership fuzzy rule bases with normalized and additive inference."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .svr import KernelKind, SvrModel

COVERAGE_FLOOR = 1e-300


class CoverageError(ArithmeticError):
    """Normalized inference failed: no rule fires at the query point."""


@dataclass(frozen=True)
class GaussianMF:
    """One Gaussian membership function; value at the center is 1."""

    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("membership width must be positive")
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "width", float(self.width))


@dataclass(frozen=True)
class FuzzyRule:
    antecedents: tuple[GaussianMF, ...]
    consequent: float

    def __post_init__(self):
        ants = tuple(self.antecedents)
        if not ants:
            raise ValueError("a rule needs at least one antecedent")
        object.__setattr__(self, "antecedents", ants)
        object.__setattr__(self, "consequent", float(self.consequent))


class InferenceMode(str, Enum):
    NORMALIZED = "normalized"
    ADDITIVE = "additive"


@dataclass(frozen=True)
class FuzzyRuleBase:
    rules: tuple[FuzzyRule, ...]
    mode: InferenceMode
    input_dimension: int

    def __post_init__(self):
        rules = tuple(self.rules)
        if not rules:
            raise ValueError("rule base must be non-empty")
        for r in rules:
            if len(r.antecedents) != self.input_dimension:
                raise ValueError(
                    f"rule has {len(r.antecedents)} antecedents, expected {self.input_dimension}"
                )
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "mode", InferenceMode(self.mode))

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Parameters as arrays: centers (m, n), widths (m, n), consequents (m,)."""
        centers = np.array([[mf.center for mf in r.antecedents] for r in self.rules])
        widths = np.array([[mf.width for mf in r.antecedents] for r in self.rules])
        consequents = np.array([r.consequent for r in self.rules])
        return centers, widths, consequents


def make_rulebase(centers, widths, consequents, mode: InferenceMode) -> FuzzyRuleBase:
    """Build a rule base from parameter arrays (inverse of ``arrays``)."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    widths = np.atleast_2d(np.asarray(widths, dtype=np.float64))
    consequents = np.asarray(consequents, dtype=np.float64).ravel()
    rules = tuple(
        FuzzyRule(tuple(GaussianMF(c, w) for c, w in zip(crow, wrow)), z)
        for crow, wrow, z in zip(centers, widths, consequents)
    )
    return FuzzyRuleBase(rules, mode, centers.shape[1])


# ---------------------------------------------------------------------------
# Evaluation


def mf_eval(mf: GaussianMF, x: float) -> float:
    return float(np.exp(-((x - mf.center) ** 2) / (2.0 * mf.width**2)))


def _firings(centers, widths, X) -> np.ndarray:
    """Firing strengths (T, m): product over dimensions of the per-dimension
    Gaussian memberships, in dimension order."""
    diff = X[:, None, :] - centers[None, :, :]
    per_dim = np.exp(-(diff * diff) / (2.0 * widths[None, :, :] ** 2))
    return per_dim.prod(axis=2)


def firing_strength(rule: FuzzyRule, x) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != len(rule.antecedents):
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {len(rule.antecedents)}")
    centers = np.array([[mf.center for mf in rule.antecedents]])
    widths = np.array([[mf.width for mf in rule.antecedents]])
    return float(_firings(centers, widths, x[None, :])[0, 0])


def _combine(firings: np.ndarray, consequents: np.ndarray, mode: InferenceMode) -> np.ndarray:
    if mode is InferenceMode.ADDITIVE:
        return firings @ consequents
    denom = firings.sum(axis=1)
    if np.any(denom < COVERAGE_FLOOR):
        bad = int(np.argmin(denom))
        raise CoverageError(f"no rule covers query {bad}: firing sum {denom[bad]!r}")
    return (firings @ consequents) / denom


def infer_batch(rb: FuzzyRuleBase, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != rb.input_dimension:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {rb.input_dimension}")
    centers, widths, consequents = rb.arrays()
    return _combine(_firings(centers, widths, X), consequents, rb.mode)


def infer(rb: FuzzyRuleBase, x) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    return float(infer_batch(rb, x[None, :])[0])


# ---------------------------------------------------------------------------
# Construction from a trained SVR model


def from_svr(model: SvrModel) -> FuzzyRuleBase:
    """One rule per support vector: antecedent centers are the SV components,
    antecedent widths are the kernel widths, consequents are the dual weights.

    Plain kernels map to additive inference, normalized kernels to normalized
    inference; either equivalence requires a zero bias.
    """
    if model.bias != 0.0:
        raise ValueError("rule-base equivalence requires a zero bias")
    if model.n_support == 0:
        raise ValueError("model has no support vectors")
    mode = (
        InferenceMode.ADDITIVE
        if model.kernel.kind is KernelKind.PLAIN_GAUSSIAN
        else InferenceMode.NORMALIZED
    )
    n = model.n_features
    widths = np.repeat(model.kernel.widths[:, None], n, axis=1)
    return make_rulebase(model.support_vectors, widths, model.betas, mode)


def format_rules(rb: FuzzyRuleBase, variable_names: list[str] | None = None) -> str:
    """Human-readable listing, one rule per line:
    ``Rj: if x1 is Gaussmf(width, center) and ... then y is z`` (2 decimals)."""
    if variable_names is None:
        variable_names = [f"x{d + 1}" for d in range(rb.input_dimension)]
    elif len(variable_names) != rb.input_dimension:
        raise ValueError("one variable name per input dimension is required")
    lines = []
    for idx, rule in enumerate(rb.rules, start=1):
        parts = [
            f"{name} is Gaussmf({mf.width:.2f}, {mf.center:.2f})"
            for name, mf in zip(variable_names, rule.antecedents)
        ]
        lines.append(f"R{idx}: if " + " and ".join(parts) + f" then y is {rule.consequent:.2f}")
    return "\n".join(lines)
