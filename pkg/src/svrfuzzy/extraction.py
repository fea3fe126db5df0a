"""Conversion of a trained SVR into an interpretable fuzzy rule base.

The extraction sweep trains at increasing epsilon (fewer support vectors per
step), removes redundant fuzzy sets by similarity-driven merging, re-fits
consequents for the normalized inference form, and keeps the simplest iterate
whose training error still meets the tolerance. Membership parameters are
optionally fine-tuned by gradient descent afterwards.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .fuzzy import FuzzyRuleBase, GaussianMF, InferenceMode, from_svr, infer_batch, make_rulebase
from .similarity import merge, similarity_gaussian
from .svr import (
    ConvergenceWarning,
    KernelConfig,
    KernelKind,
    SvrModel,
    gram_matrix,
    predict_batch,
    solve_box_regression,
)


class DegenerateModelError(RuntimeError):
    """Extraction produced a model with no support vectors."""


@dataclass(frozen=True)
class ExtractionConfig:
    C: float
    epsilon_init: float
    sigma_init: float
    epsilon_step: float
    tol: float  # mean-squared-error tolerance for the sweep
    k: float  # pairwise similarity threshold
    max_outer_iterations: int = 50
    delta: float = 0.01  # refinement learning rate
    refine_epochs: int = 0
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.epsilon_init < 0:
            raise ValueError("epsilon_init must be non-negative")
        if not self.sigma_init > 0:
            raise ValueError("sigma_init must be positive")
        if not self.epsilon_step > 0:
            raise ValueError("epsilon_step must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.k < 1:
            raise ValueError("k must lie strictly between 0 and 1")
        if self.max_outer_iterations <= 0:
            raise ValueError("max_outer_iterations must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.refine_epochs < 0:
            raise ValueError("refine_epochs must be non-negative")


@dataclass(frozen=True)
class IterationRecord:
    epsilon: float
    sv_count: int
    error: float  # mean squared training error of the rebuilt model


@dataclass(frozen=True)
class ExtractionReport:
    iterations: tuple[IterationRecord, ...]
    final_rule_count: int
    final_training_error: float
    merges_performed: int
    converged: bool
    selected_epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "iterations", tuple(self.iterations))


@dataclass(frozen=True)
class InterpretableModel:
    rulebase: FuzzyRuleBase
    report: ExtractionReport


# ---------------------------------------------------------------------------
# Error measure


def training_error(predict_fn, data: Dataset) -> float:
    """Mean squared deviation of a predictor over the dataset. ``predict_fn``
    maps an (l, n) input matrix to l predictions."""
    residual = np.asarray(predict_fn(data.x), dtype=np.float64) - data.y
    return float(np.mean(residual * residual))


def rulebase_error(rb: FuzzyRuleBase, data: Dataset) -> float:
    return training_error(lambda X: infer_batch(rb, X), data)


# ---------------------------------------------------------------------------
# Redundancy removal


def _interpretability_test_counted(rb: FuzzyRuleBase, k: float) -> tuple[FuzzyRuleBase, int]:
    if not 0 < k < 1:
        raise ValueError("k must lie strictly between 0 and 1")
    n = rb.input_dimension
    centers, widths, _ = rb.arrays()
    # Per dimension: a compact table of fuzzy sets (slot order = first
    # appearance) and, per rule, the slot it points at. Merging rewrites the
    # lower slot and repoints the owners, so rules share merged sets exactly
    # as Table-style partitions do.
    set_c = [list(centers[:, d]) for d in range(n)]
    set_w = [list(widths[:, d]) for d in range(n)]
    assign = [list(range(rb.n_rules)) for _ in range(n)]
    consequents = {r_idx: rule.consequent for r_idx, rule in enumerate(rb.rules)}
    alive = list(range(rb.n_rules))
    merges = 0

    while True:
        # Highest-similarity pair across dimensions; ties break to the lowest
        # (dimension, slot-pair) in lexicographic order via strict comparisons
        # and row-major upper-triangle scans.
        best_val, best = k, None
        for d in range(n):
            c = np.asarray(set_c[d])
            w = np.asarray(set_w[d])
            if c.shape[0] < 2:
                continue
            sb = 0.5 * (w[:, None] + w[None, :])
            dist = np.abs(c[:, None] - c[None, :])
            e = np.exp(-(dist * dist) / (sb * sb))
            sim = e / (2.0 - e)
            iu, ju = np.triu_indices(c.shape[0], 1)
            flat = sim[iu, ju]
            t = int(np.argmax(flat))
            if flat[t] > best_val:
                best_val, best = float(flat[t]), (d, int(iu[t]), int(ju[t]))
        if best is None:
            break
        d, sa, sb_ = best
        owners_a = [r for r in alive if assign[d][r] == sa]
        owners_b = [r for r in alive if assign[d][r] == sb_]
        weight_a = sum(abs(consequents[r]) for r in owners_a)
        weight_b = sum(abs(consequents[r]) for r in owners_b)
        merged = merge(
            GaussianMF(set_c[d][sa], set_w[d][sa]),
            GaussianMF(set_c[d][sb_], set_w[d][sb_]),
            weight_a,
            weight_b,
        )
        set_c[d][sa], set_w[d][sa] = merged.center, merged.width
        del set_c[d][sb_], set_w[d][sb_]
        for r in alive:
            if assign[d][r] == sb_:
                assign[d][r] = sa
            elif assign[d][r] > sb_:
                assign[d][r] -= 1
        merges += 1
        # Rules whose full antecedent tuples now coincide collapse into one;
        # summing consequents preserves the additive output mass.
        seen: dict[tuple[int, ...], int] = {}
        for r in list(alive):
            key = tuple(assign[d2][r] for d2 in range(n))
            if key in seen:
                consequents[seen[key]] += consequents[r]
                alive.remove(r)
            else:
                seen[key] = r

    rules_c = np.array([[set_c[d][assign[d][r]] for d in range(n)] for r in alive])
    rules_w = np.array([[set_w[d][assign[d][r]] for d in range(n)] for r in alive])
    rules_z = np.array([consequents[r] for r in alive])
    return make_rulebase(rules_c, rules_w, rules_z, rb.mode), merges


def interpretability_test(rb: FuzzyRuleBase, k: float) -> FuzzyRuleBase:
    """Merge per-dimension antecedent pairs whose closed-form similarity
    exceeds ``k`` (highest first; ties break lexicographically), fusing rules
    whose antecedent tuples become identical. Never increases the rule count;
    the result has all per-dimension pairwise similarities at most ``k``."""
    merged, _ = _interpretability_test_counted(rb, k)
    return merged


def max_pairwise_similarity(rb: FuzzyRuleBase) -> float:
    """Largest closed-form similarity over distinct antecedent sets, per
    dimension; 0.0 when every dimension has a single distinct set."""
    centers, widths, _ = rb.arrays()
    worst = 0.0
    for d in range(rb.input_dimension):
        distinct: list[GaussianMF] = []
        for c, w in zip(centers[:, d], widths[:, d]):
            mf = GaussianMF(c, w)
            if mf not in distinct:
                distinct.append(mf)
        for ia in range(len(distinct)):
            for ib in range(ia + 1, len(distinct)):
                worst = max(worst, similarity_gaussian(distinct[ia], distinct[ib]))
    return worst


# ---------------------------------------------------------------------------
# Normalized rebuild


def _partition_matrix(rb: FuzzyRuleBase, X: np.ndarray) -> np.ndarray:
    """Row-normalized firing strengths of the rule base at the query points.
    For isotropic single-width rules this equals the row-normalized Gram of
    ``svr.modified_hessian``."""
    from .fuzzy import _firings

    centers, widths, _ = rb.arrays()
    firing = _firings(centers, widths, X)
    denom = firing.sum(axis=1)
    if np.any(denom < 1e-300):
        raise DegenerateModelError("merged rule base does not cover its own centers")
    return firing / denom[:, None]


def _rebuild_normalized(rb_merged: FuzzyRuleBase, plain_model: SvrModel, cfg: ExtractionConfig) -> FuzzyRuleBase:
    """Re-fit consequents so the normalized inference form reproduces the
    trained SVR at the (merged) rule centers: a box-constrained exact
    interpolation solved with the row-normalized QP matrix."""
    centers, widths, _ = rb_merged.arrays()
    targets = predict_batch(plain_model, centers)
    u = _partition_matrix(rb_merged, centers)
    m = centers.shape[0]
    z, _, conv, _ = solve_box_regression(u, targets, cfg.C, 0.0, 1e-10, max(50_000, 200 * m * m))
    if not conv:
        warnings.warn("consequent re-fit stopped before tolerance", ConvergenceWarning, stacklevel=2)
    return make_rulebase(centers, widths, z, InferenceMode.NORMALIZED)


# ---------------------------------------------------------------------------
# The extraction sweep


def model_extraction(data: Dataset, cfg: ExtractionConfig) -> InterpretableModel:
    """Run the full extraction sweep and return the interpretable model.

    Epsilon starts small and grows by ``epsilon_step`` per iteration, pruning
    support vectors; each iterate is trained, merged at threshold ``k``,
    rebuilt in normalized form, and scored by mean squared error. The selected
    model is the last iterate meeting ``tol`` before the error crosses back
    above it; when no iterate meets ``tol``, the lowest-error iterate is
    returned flagged non-converged. Refinement epochs, when configured, run
    afterwards.
    """
    X, y = data.x, data.y
    l = data.n_samples
    gram = gram_matrix(X, cfg.sigma_init)
    kkt_tol = 1e-3
    solver_cap = 10 * l * l

    records: list[IterationRecord] = []
    good = None  # last iterate meeting tol: (epsilon, rulebase, merges)
    best = None  # lowest-error iterate, the fallback when tol is never met
    warm = None
    for it in range(cfg.max_outer_iterations):
        eps = cfg.epsilon_init + it * cfg.epsilon_step
        beta, _, conv, _ = solve_box_regression(gram, y, cfg.C, eps, kkt_tol, solver_cap, beta0=warm)
        if not conv:
            warnings.warn(f"SVR training at epsilon={eps} hit the iteration cap", ConvergenceWarning, stacklevel=2)
        warm = beta
        keep = np.abs(beta) > 1e-12 * cfg.C
        sv_count = int(np.count_nonzero(keep))
        if sv_count == 0:
            records.append(IterationRecord(eps, 0, float(np.mean(y * y))))
            break  # larger epsilon cannot bring support vectors back
        plain = SvrModel(
            support_vectors=X[keep].copy(),
            betas=beta[keep].copy(),
            bias=0.0,
            kernel=KernelConfig(KernelKind.PLAIN_GAUSSIAN, np.full(sv_count, cfg.sigma_init)),
            converged=conv,
        )
        merged, n_merges = _interpretability_test_counted(from_svr(plain), cfg.k)
        rb_norm = _rebuild_normalized(merged, plain, cfg)
        err = rulebase_error(rb_norm, data)
        records.append(IterationRecord(eps, sv_count, err))
        if best is None or err < best[3]:
            best = (eps, rb_norm, n_merges, err)
        if err <= cfg.tol:
            good = (eps, rb_norm, n_merges)
            if rb_norm.n_rules <= 1:
                break  # no further complexity to shed
        elif good is not None:
            break  # epsilon growth pushed the error back above tol

    if good is not None:
        sel_eps, rb_final, merges = good
        converged = True
    elif best is not None:
        sel_eps, rb_final, merges, _ = best
        converged = False
    else:
        raise DegenerateModelError(
            f"no support vectors at epsilon={cfg.epsilon_init}; increase C or decrease epsilon"
        )
    if cfg.refine_epochs > 0:
        from .refine import RefineConfig, refine

        rcfg = RefineConfig(
            delta=cfg.delta,
            epochs=cfg.refine_epochs,
            min_sigma=None,
            shuffle_seed=cfg.shuffle_seed,
        )
        rb_final = refine(rb_final, data, rcfg).rulebase
        if max_pairwise_similarity(rb_final) > cfg.k:
            # Refinement drifted two sets back above the threshold; restore
            # the interpretability bound.
            rb_final, extra = _interpretability_test_counted(rb_final, cfg.k)
            merges += extra

    report = ExtractionReport(
        iterations=tuple(records),
        final_rule_count=rb_final.n_rules,
        final_training_error=rulebase_error(rb_final, data),
        merges_performed=merges,
        converged=converged,
        selected_epsilon=sel_eps,
    )
    return InterpretableModel(rulebase=rb_final, report=report)
