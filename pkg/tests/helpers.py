"""Shared test oracles: exact dual enumeration, random rule bases, KKT checks."""

from __future__ import annotations

import itertools

import numpy as np

from svrfuzzy import FuzzyRuleBase, InferenceMode, make_rulebase
from svrfuzzy.svr import dual_objective


def brute_force_dual(gram: np.ndarray, y: np.ndarray, C: float, epsilon: float) -> float:
    """Exact optimum of the box dual by enumerating every KKT pattern: each
    coordinate is zero, at a bound, or free with a fixed sign; free blocks
    solve a linear system. Independent of the coordinate-ascent solver."""
    l = y.shape[0]
    best = -np.inf
    for pattern in itertools.product(range(5), repeat=l):
        beta = np.zeros(l)
        free, signs = [], []
        for i, p in enumerate(pattern):
            if p == 1:
                beta[i] = C
            elif p == 2:
                beta[i] = -C
            elif p == 3:
                free.append(i)
                signs.append(1.0)
            elif p == 4:
                free.append(i)
                signs.append(-1.0)
        if free:
            f_idx = np.array(free)
            s = np.array(signs)
            bound = [i for i in range(l) if i not in free]
            rhs = y[f_idx] - epsilon * s
            if bound:
                rhs = rhs - gram[np.ix_(f_idx, bound)] @ beta[bound]
            try:
                bf = np.linalg.solve(gram[np.ix_(f_idx, f_idx)], rhs)
            except np.linalg.LinAlgError:
                continue
            if np.any(np.sign(bf) != s) or np.any(np.abs(bf) > C):
                continue
            beta[f_idx] = bf
        value = dual_objective(gram, y, beta, epsilon)
        if value > best:
            best = value
    return best


def grid_dual(gram: np.ndarray, y: np.ndarray, C: float, epsilon: float, points: int = 41) -> float:
    """Literal dense-grid search over the box; only feasible for 1-2 samples."""
    l = y.shape[0]
    axis = np.linspace(-C, C, points)
    best = -np.inf
    for combo in itertools.product(axis, repeat=l):
        value = dual_objective(gram, y, np.asarray(combo), epsilon)
        if value > best:
            best = value
    return best


def kkt_violations(beta: np.ndarray, residuals: np.ndarray, C: float, epsilon: float) -> float:
    """Largest violation of the epsilon-SVR KKT residual conditions."""
    worst = 0.0
    for b, r in zip(beta, residuals):
        if b == 0.0:
            worst = max(worst, abs(r) - epsilon)
        elif abs(b) >= C:
            worst = max(worst, epsilon - abs(r))
        else:
            worst = max(worst, abs(abs(r) - epsilon))
    return worst


def random_rulebase(rng: np.random.Generator, max_rules: int = 4, max_dim: int = 2,
                    mode: InferenceMode | None = None) -> FuzzyRuleBase:
    m = int(rng.integers(1, max_rules + 1))
    n = int(rng.integers(1, max_dim + 1))
    if mode is None:
        mode = InferenceMode.ADDITIVE if rng.integers(2) == 0 else InferenceMode.NORMALIZED
    return make_rulebase(
        rng.uniform(-2.0, 2.0, (m, n)),
        rng.uniform(0.3, 1.5, (m, n)),
        rng.uniform(-2.0, 2.0, m),
        mode,
    )


def half_squared_loss(rb: FuzzyRuleBase, x, y: float) -> float:
    from svrfuzzy import infer

    return 0.5 * (y - infer(rb, x)) ** 2


def fd_loss_gradient(rb: FuzzyRuleBase, x, y: float, which: str, rule: int, dim: int, h: float = 1e-6) -> float:
    """Central finite difference of the half-squared residual with respect to
    one membership parameter."""
    centers, widths, z = rb.arrays()
    arr = centers if which == "c" else widths
    arr[rule, dim] += h
    hi = half_squared_loss(make_rulebase(centers, widths, z, rb.mode), x, y)
    arr[rule, dim] -= 2 * h
    lo = half_squared_loss(make_rulebase(centers, widths, z, rb.mode), x, y)
    return (hi - lo) / (2 * h)
