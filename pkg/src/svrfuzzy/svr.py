"""Epsilon-insensitive support vector regression with (normalized) Gaussian kernels.

The dual is solved over the weight differences beta_i = alpha_i - alpha_i*:
exact greedy coordinate ascent when the bias is fixed at zero (the equality
constraint disappears), and maximal-violating-pair updates that preserve
sum(beta) = 0 when the bias is free.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import Dataset


class KernelKind(str, Enum):
    PLAIN_GAUSSIAN = "plain_gaussian"
    NORMALIZED_GAUSSIAN = "normalized_gaussian"


class ConvergenceWarning(UserWarning):
    """The solver stopped at the iteration cap before meeting the KKT tolerance."""


@dataclass(frozen=True)
class KernelConfig:
    """Kernel kind plus one width per center (uniform initially, individually
    adaptable later)."""

    kind: KernelKind
    widths: np.ndarray

    def __post_init__(self):
        widths = np.asarray(self.widths, dtype=np.float64).ravel()
        if widths.size and not np.all(widths > 0):
            raise ValueError("all kernel widths must be positive")
        widths.flags.writeable = False
        object.__setattr__(self, "kind", KernelKind(self.kind))
        object.__setattr__(self, "widths", widths)


@dataclass(frozen=True)
class SvrTrainConfig:
    C: float
    epsilon: float
    sigma: float
    kkt_tolerance: float = 1e-3
    max_passes: int | None = None  # sweeps over the data; defaults to 10 * n_samples
    fix_bias_to_zero: bool = True

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.kkt_tolerance > 0:
            raise ValueError("kkt_tolerance must be positive")
        if self.max_passes is not None and self.max_passes <= 0:
            raise ValueError("max_passes must be positive")


@dataclass(frozen=True)
class SvrModel:
    """Trained model: support vectors with nonzero dual weights, bias, kernel.

    ``converged`` records whether the solver met its KKT tolerance.
    """

    support_vectors: np.ndarray  # (m, n)
    betas: np.ndarray  # (m,)
    bias: float
    kernel: KernelConfig
    converged: bool = True

    def __post_init__(self):
        sv = np.atleast_2d(np.asarray(self.support_vectors, dtype=np.float64))
        betas = np.asarray(self.betas, dtype=np.float64).ravel()
        if sv.shape[0] != betas.shape[0]:
            raise ValueError("support vector and beta counts differ")
        if betas.shape[0] != self.kernel.widths.shape[0]:
            raise ValueError("kernel widths must match the number of centers")
        sv.flags.writeable = False
        betas.flags.writeable = False
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def n_support(self) -> int:
        return self.betas.shape[0]

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]


# ---------------------------------------------------------------------------
# Kernels


def gaussian_kernel(xi, x, sigma: float) -> float:
    """exp(-||xi - x||^2 / (2 sigma^2)); exactly symmetric in its arguments."""
    xi = np.asarray(xi, dtype=np.float64).ravel()
    x = np.asarray(x, dtype=np.float64).ravel()
    if xi.shape != x.shape:
        raise ValueError(f"dimension mismatch: {xi.shape[0]} vs {x.shape[0]}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    d2 = float(np.sum((xi - x) ** 2))
    return float(np.exp(-d2 / (2.0 * sigma * sigma)))


def center_responses(X, centers, widths) -> np.ndarray:
    """Gaussian response of every center at every query point: (T, m) with
    entry [t, j] = exp(-||X_t - c_j||^2 / (2 widths_j^2))."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    widths = np.asarray(widths, dtype=np.float64).ravel()
    if X.shape[1] != centers.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {centers.shape[1]}")
    diff = X[:, None, :] - centers[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    return np.exp(-d2 / (2.0 * widths[None, :] ** 2))


def normalized_responses(X, centers, widths) -> np.ndarray:
    """Partition-of-unity responses: each row of the result sums to 1."""
    r = center_responses(X, centers, widths)
    if r.shape[1] == 0:
        raise ValueError("normalized kernel requires at least one center")
    denom = r.sum(axis=1)
    if np.any(denom < 1e-300):
        bad = int(np.argmin(denom))
        raise ValueError(f"query {bad} is not covered by any center (denominator underflow)")
    return r / denom[:, None]


def normalized_kernel(center_index: int, x, centers, widths) -> float:
    """Gaussian response of one center divided by the sum of responses of all
    centers at ``x``."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if centers.shape[0] == 0:
        raise ValueError("normalized kernel requires at least one center")
    if not 0 <= center_index < centers.shape[0]:
        raise ValueError(f"center index {center_index} out of range")
    x = np.asarray(x, dtype=np.float64).ravel()
    row = normalized_responses(x[None, :], centers, widths)[0]
    return float(row[center_index])


def gram_matrix(points, sigma: float) -> np.ndarray:
    """Plain-Gaussian Gram matrix with a shared width; exactly symmetric with
    unit diagonal."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    widths = np.full(points.shape[0], float(sigma))
    return center_responses(points, points, widths)


def normalized_gram(centers, widths) -> np.ndarray:
    """Row-normalized Gram matrix over the centers: every row sums to 1."""
    return normalized_responses(centers, centers, widths)


def modified_hessian(centers, widths) -> np.ndarray:
    """Block QP matrix [[D, -D], [-D, D]] built from the row-normalized Gram D."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if centers.shape[0] == 0:
        raise ValueError("at least one center is required")
    d = normalized_gram(centers, widths)
    return np.block([[d, -d], [-d, d]])


# ---------------------------------------------------------------------------
# Prediction


def predict_batch(model: SvrModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.n_support == 0:
        if model.kernel.kind is KernelKind.NORMALIZED_GAUSSIAN:
            raise ValueError("normalized-kernel model has no centers")
        return np.full(X.shape[0], model.bias)
    if X.shape[1] != model.n_features:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {model.n_features}")
    if model.kernel.kind is KernelKind.PLAIN_GAUSSIAN:
        resp = center_responses(X, model.support_vectors, model.kernel.widths)
    else:
        resp = normalized_responses(X, model.support_vectors, model.kernel.widths)
    return resp @ model.betas + model.bias


def predict(model: SvrModel, x) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    return float(predict_batch(model, x[None, :])[0])


def dual_objective(gram, y, beta, epsilon: float) -> float:
    """Dual value W(beta) = y.beta - epsilon*||beta||_1 - 0.5 beta'K beta."""
    beta = np.asarray(beta, dtype=np.float64)
    return float(y @ beta - epsilon * np.sum(np.abs(beta)) - 0.5 * beta @ gram @ beta)


# ---------------------------------------------------------------------------
# Solvers


def _soft(v: float, epsilon: float) -> float:
    if v > epsilon:
        return v - epsilon
    if v < -epsilon:
        return v + epsilon
    return 0.0


def _greedy_coordinate_python(phi, y, C, epsilon, tol, max_iter, beta, f):
    """Reference implementation of the greedy coordinate loop; the numba
    kernel below must stay operation-for-operation identical."""
    m = y.shape[0]
    it = 0
    while it < max_iter:
        best_v = -1.0
        best_i = 0
        for i in range(m):
            b = beta[i]
            g = y[i] - f[i]
            if b == 0.0:
                v = abs(g) - epsilon
                if v < 0.0:
                    v = 0.0
            elif b >= C:
                v = epsilon - g
                if v < 0.0:
                    v = 0.0
            elif b <= -C:
                v = g + epsilon
                if v < 0.0:
                    v = 0.0
            elif b > 0.0:
                v = abs(g - epsilon)
            else:
                v = abs(g + epsilon)
            if v > best_v:
                best_v = v
                best_i = i
        if best_v <= tol:
            return it, True
        i = best_i
        q = (y[i] - f[i]) + phi[i, i] * beta[i]
        if q > epsilon:
            t = (q - epsilon) / phi[i, i]
        elif q < -epsilon:
            t = (q + epsilon) / phi[i, i]
        else:
            t = 0.0
        if t > C:
            t = C
        elif t < -C:
            t = -C
        step = t - beta[i]
        if step == 0.0:
            return it, False  # no representable progress left
        beta[i] = t
        for r in range(m):
            f[r] += step * phi[r, i]
        it += 1
    return it, False


try:  # pragma: no cover - exercised through solve_box_regression
    from numba import njit

    _greedy_coordinate = njit(cache=True)(_greedy_coordinate_python)
except ImportError:  # pragma: no cover
    _greedy_coordinate = _greedy_coordinate_python


def solve_box_regression(phi, y, C, epsilon, tol, max_iter, beta0=None):
    """Greedy coordinate ascent for the box-constrained epsilon-insensitive
    fit with square basis-response matrix ``phi`` (data points at rows,
    centers at columns, rows aligned with targets ``y``).

    Each step exactly maximizes the dual along the most KKT-violating
    coordinate; ties break to the lowest index. Returns
    (beta, fitted, converged, iterations).
    """
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    m = y.shape[0]
    if phi.shape != (m, m):
        raise ValueError("phi must be square and aligned with y")
    if not np.all(phi.diagonal() > 0):
        raise ValueError("phi must have a strictly positive diagonal")
    if beta0 is None:
        beta = np.zeros(m)
        f = np.zeros(m)
    else:
        beta = np.ascontiguousarray(beta0, dtype=np.float64).copy()
        f = phi @ beta
    it, converged = _greedy_coordinate(phi, y, float(C), float(epsilon), float(tol), int(max_iter), beta, f)
    return beta, f, converged, it


def _bias_intervals(beta, F, C, epsilon):
    """Admissible bias interval [lo_i, hi_i] per point, from the KKT
    conditions at the current beta; F_i = y_i - (K beta)_i."""
    at_hi = beta >= C
    at_lo = beta <= -C
    at_zero = beta == 0.0
    pos = (beta > 0.0) & ~at_hi
    neg = (beta < 0.0) & ~at_lo
    lo = np.select(
        [at_zero, pos, at_hi, neg, at_lo],
        [F - epsilon, F - epsilon, -np.inf, F + epsilon, F + epsilon],
    )
    hi = np.select(
        [at_zero, pos, at_hi, neg, at_lo],
        [F + epsilon, F - epsilon, F - epsilon, F + epsilon, np.inf],
    )
    return lo, hi


def _pair_gain(t, f_gap, eta, epsilon, bi, bj):
    return (
        t * f_gap
        - 0.5 * eta * t * t
        - epsilon * (abs(bi + t) - abs(bi))
        - epsilon * (abs(bj - t) - abs(bj))
    )


def _solve_free_bias(K, y, C, epsilon, tol, max_iter):
    """Maximal-violating-pair ascent preserving sum(beta) = 0; exact
    piecewise-quadratic line search along (e_i - e_j)."""
    m = y.shape[0]
    beta = np.zeros(m)
    f0 = np.zeros(m)  # K @ beta, bias excluded
    converged = False
    it = 0
    while it < max_iter:
        F = y - f0
        lo, hi = _bias_intervals(beta, F, C, epsilon)
        i = int(np.argmax(lo))
        j = int(np.argmin(hi))
        if lo[i] - hi[j] <= tol or i == j:
            converged = True
            break
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        t_lo = max(-C - beta[i], beta[j] - C)
        t_hi = min(C - beta[i], beta[j] + C)
        bounds = sorted({t_lo, t_hi} | {t for t in (-beta[i], beta[j]) if t_lo < t < t_hi})
        f_gap = F[i] - F[j]
        best_t, best_gain = 0.0, 0.0
        for a, b in zip(bounds[:-1], bounds[1:]):
            if not b > a:
                continue
            mid = 0.5 * (a + b)
            s_i = 1.0 if beta[i] + mid > 0 else -1.0
            s_j = 1.0 if beta[j] - mid > 0 else -1.0
            slope0 = f_gap - epsilon * s_i + epsilon * s_j
            if eta > 1e-300:
                cand = min(max(slope0 / eta, a), b)
            else:
                cand = b if slope0 > 0 else a
            gain = _pair_gain(cand, f_gap, eta, epsilon, beta[i], beta[j])
            if gain > best_gain:
                best_t, best_gain = cand, gain
        if best_gain <= 0.0:
            break  # numerical stall; KKT gap could not be reduced further
        t = best_t
        beta[i] = 0.0 if t == -beta[i] else min(max(beta[i] + t, -C), C)
        beta[j] = 0.0 if t == beta[j] else min(max(beta[j] - t, -C), C)
        f0 += t * (K[:, i] - K[:, j])
        it += 1
    F = y - f0
    lo, hi = _bias_intervals(beta, F, C, epsilon)
    lo_max, hi_min = float(np.max(lo)), float(np.min(hi))
    if np.isinf(lo_max) and np.isinf(hi_min):
        bias = 0.0
    elif np.isinf(lo_max):
        bias = hi_min
    elif np.isinf(hi_min):
        bias = lo_max
    else:
        bias = 0.5 * (lo_max + hi_min)
    return beta, bias, converged, it


# ---------------------------------------------------------------------------
# Training


def train_svr(data: Dataset, cfg: SvrTrainConfig) -> SvrModel:
    """Train an epsilon-SVR with the plain Gaussian kernel.

    Points strictly inside the epsilon tube end with beta = 0; box and (when
    the bias is free) equality constraints hold at the KKT tolerance. Failure
    to converge within the iteration cap raises a ConvergenceWarning and
    returns the best iterate.
    """
    X, y = data.x, data.y
    l = data.n_samples
    K = gram_matrix(X, cfg.sigma)
    max_passes = cfg.max_passes if cfg.max_passes is not None else 10 * l
    max_iter = max_passes * l
    if cfg.fix_bias_to_zero:
        beta, _, conv, _ = solve_box_regression(K, y, cfg.C, cfg.epsilon, cfg.kkt_tolerance, max_iter)
        bias = 0.0
    else:
        beta, bias, conv, _ = _solve_free_bias(K, y, cfg.C, cfg.epsilon, cfg.kkt_tolerance, max_iter)
    if not conv:
        warnings.warn(
            f"KKT tolerance {cfg.kkt_tolerance} not reached within {max_iter} updates; "
            "returning best iterate",
            ConvergenceWarning,
            stacklevel=2,
        )
    keep = np.abs(beta) > 1e-12 * cfg.C
    widths = np.full(int(np.count_nonzero(keep)), cfg.sigma)
    return SvrModel(
        support_vectors=X[keep].copy(),
        betas=beta[keep].copy(),
        bias=float(bias),
        kernel=KernelConfig(KernelKind.PLAIN_GAUSSIAN, widths),
        converged=conv,
    )


def fit_normalized_model(centers, widths, targets, C, kkt_tolerance=1e-3, max_iter=None) -> SvrModel:
    """Re-express target values over fixed centers with the partition-of-unity
    kernel (bias 0, epsilon 0: exact interpolation at the centers within the
    box). The QP matrix is the row-normalized Gram of ``modified_hessian``."""
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    targets = np.asarray(targets, dtype=np.float64).ravel()
    m = centers.shape[0]
    if m == 0:
        raise ValueError("at least one center is required")
    if targets.shape[0] != m:
        raise ValueError("one target per center is required")
    if max_iter is None:
        # plain Gauss-Seidel on dense partitions converges slowly; iterations
        # are O(m) each, so a generous cap is cheap
        max_iter = max(50_000, 200 * m * m)
    d = normalized_gram(centers, widths)
    beta, _, conv, _ = solve_box_regression(d, targets, C, 0.0, kkt_tolerance, max_iter)
    if not conv:
        warnings.warn("normalized re-fit stopped before reaching tolerance", ConvergenceWarning, stacklevel=2)
    return SvrModel(
        support_vectors=centers,
        betas=beta,
        bias=0.0,
        kernel=KernelConfig(KernelKind.NORMALIZED_GAUSSIAN, widths),
        converged=conv,
    )
