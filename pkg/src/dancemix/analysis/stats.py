"""Pearson, PCA, CCA, and PLS over session feature matrices.

All four are written against plain numpy/scipy primitives rather than a
stats package so their numerical behavior is pinned down by our own tests:
p-values via the regularized incomplete beta, PCA via symmetric
eigendecomposition, CCA via SVD of the ridge-whitened cross-covariance,
PLS via NIPALS with deflation. Columns are z-scored internally by default
because movement and audio features live on wildly different scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import (
    DegenerateVarianceError,
    InvalidArgumentError,
    NumericalRankError,
    UndefinedCorrelationError,
)


def _as_matrix(X, name: str) -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return arr


def _standardize(X: np.ndarray, name: str) -> np.ndarray:
    mean = X.mean(axis=0)
    std = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
    if np.any(std == 0.0):
        col = int(np.argmax(std == 0.0))
        raise DegenerateVarianceError(f"{name} column {col} has zero variance")
    return (X - mean) / std


# --- pearson ---------------------------------------------------------------------

def pearson(x, y) -> tuple[float, float]:
    """Sample correlation and two-sided p from the exact t distribution."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise InvalidArgumentError("pearson inputs must have equal length")
    n = x.size
    if n < 3:
        raise InvalidArgumentError(f"pearson needs n >= 3, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidArgumentError("pearson inputs must be finite")
    xc = x - x.mean()
    yc = y - y.mean()
    ssx = float(np.dot(xc, xc))
    ssy = float(np.dot(yc, yc))
    if ssx == 0.0 or ssy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for constant input")
    # single sqrt of the product keeps exact-linear inputs at exactly +-1
    r = float(np.dot(xc, yc) / np.sqrt(ssx * ssy))
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        return r, 0.0
    # two-sided: P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    t2 = r * r * df / (1.0 - r * r)
    p = float(special.betainc(df / 2.0, 0.5, df / (df + t2)))
    return r, min(1.0, max(0.0, p))


def pearson_permutation_p(x, y, n_perm: int = 10_000, seed: int = 0) -> float:
    """Permutation-null two-sided p, kept for validating the analytic one."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    r_obs, _ = pearson(x, y)
    rng = np.random.Generator(np.random.PCG64(seed))
    hits = 0
    for _ in range(n_perm):
        r_perm, _ = pearson(x, rng.permutation(y))
        if abs(r_perm) >= abs(r_obs) - 1e-15:
            hits += 1
    return (hits + 1) / (n_perm + 1)


# --- PCA --------------------------------------------------------------------------

@dataclass
class PCAResult:
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance_ratio: np.ndarray  # (k,), non-increasing
    mean: np.ndarray
    scale: np.ndarray | None  # None when standardize=False

    def transform(self, X) -> np.ndarray:
        X = _as_matrix(X, "X") - self.mean
        if self.scale is not None:
            X = X / self.scale
        return X @ self.components.T


def pca(X, k: int, standardize: bool = True) -> PCAResult:
    X = _as_matrix(X, "X")
    n, d = X.shape
    if n < 2:
        raise InvalidArgumentError("pca needs at least two rows")
    if not 1 <= k <= min(n - 1, d):
        raise InvalidArgumentError(f"k must be in [1, {min(n - 1, d)}], got {k}")
    mean = X.mean(axis=0)
    scale = None
    Z = X - mean
    if standardize:
        scale = X.std(axis=0, ddof=1)
        if np.any(scale == 0.0):
            col = int(np.argmax(scale == 0.0))
            raise DegenerateVarianceError(f"column {col} has zero variance")
        Z = Z / scale
    cov = (Z.T @ Z) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    total = eigvals.sum()
    if total == 0.0:
        raise DegenerateVarianceError("data has zero total variance")
    return PCAResult(
        components=eigvecs[:, order[:k]].T.copy(),
        explained_variance_ratio=eigvals[:k] / total,
        mean=mean,
        scale=scale,
    )


# --- CCA --------------------------------------------------------------------------

@dataclass
class CCAResult:
    correlations: np.ndarray  # (k,), descending in [0, 1]
    x_weights: np.ndarray  # (p, k)
    y_weights: np.ndarray  # (q, k)


def _inv_sqrt(cov: np.ndarray, ridge: float, name: str) -> np.ndarray:
    """Inverse square root for whitening, with the ridge as an eigenvalue floor.

    Flooring (rather than adding ridge*I) leaves well-conditioned covariances
    untouched, so cca(X, X) stays at exactly 1 while degenerate directions
    are still repaired. ridge=0 disables the repair and rank deficiency
    becomes an error.
    """
    eigvals, eigvecs = np.linalg.eigh(cov)
    if not np.all(np.isfinite(eigvals)) or np.any(eigvals < -1e-8 * max(1.0, eigvals.max())):
        raise NumericalRankError(f"{name} covariance is not positive semi-definite")
    if ridge > 0.0:
        eigvals = np.maximum(eigvals, ridge)
    elif eigvals.min() <= 1e-12 * max(1.0, eigvals.max()):
        raise NumericalRankError(f"{name} covariance is rank-deficient and the ridge is off")
    return eigvecs @ np.diag(1.0 / np.sqrt(eigvals)) @ eigvecs.T


def cca(X, Y, k: int | None = None, ridge: float = 1e-6, standardize: bool = True) -> CCAResult:
    X = _as_matrix(X, "X")
    Y = _as_matrix(Y, "Y")
    n, p = X.shape
    n2, q = Y.shape
    if n != n2:
        raise InvalidArgumentError("X and Y must have the same number of rows")
    if n <= max(p, q):
        raise InvalidArgumentError(f"cca needs n > max(p, q); got n={n}, p={p}, q={q}")
    if k is None:
        k = min(p, q)
    if not 1 <= k <= min(p, q):
        raise InvalidArgumentError(f"k must be in [1, {min(p, q)}]")
    if standardize:
        X = _standardize(X, "X")
        Y = _standardize(Y, "Y")
    else:
        X = X - X.mean(axis=0)
        Y = Y - Y.mean(axis=0)
    sxx = (X.T @ X) / (n - 1)
    syy = (Y.T @ Y) / (n - 1)
    sxy = (X.T @ Y) / (n - 1)
    wx = _inv_sqrt(sxx, ridge, "X")
    wy = _inv_sqrt(syy, ridge, "Y")
    u, s, vt = np.linalg.svd(wx @ sxy @ wy)
    return CCAResult(
        correlations=np.clip(s[:k], 0.0, 1.0),
        x_weights=(wx @ u[:, :k]),
        y_weights=(wy @ vt[:k].T),
    )


# --- PLS ---------------------------------------------------------------------------

@dataclass
class PLSModel:
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: np.ndarray
    y_scale: np.ndarray
    coef: np.ndarray  # (d, m) on the standardized scale

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X, "X")
        Z = (X - self.x_mean) / self.x_scale
        return (Z @ self.coef) * self.y_scale + self.y_mean


@dataclass
class PLSResult:
    r2: np.ndarray  # (m,), one per target column
    model: PLSModel  # fit on all rows
    n_components: int
    folds: int  # 0 = train-set R² (no cross-validation)


def _nipals_fit(X: np.ndarray, Y: np.ndarray, k: int) -> PLSModel:
    x_mean, y_mean = X.mean(axis=0), Y.mean(axis=0)
    x_scale = X.std(axis=0, ddof=1)
    y_scale = Y.std(axis=0, ddof=1)
    if np.any(x_scale == 0.0):
        raise DegenerateVarianceError("predictor column with zero variance")
    if np.any(y_scale == 0.0):
        raise DegenerateVarianceError("target column with zero variance")
    E = (X - x_mean) / x_scale
    F = (Y - y_mean) / y_scale
    d, m = E.shape[1], F.shape[1]
    W = np.zeros((d, k))
    P = np.zeros((d, k))
    Q = np.zeros((m, k))
    for a in range(k):
        u = F[:, int(np.argmax(F.var(axis=0)))].copy()
        if np.allclose(u, 0.0):
            k = a
            break
        t = np.zeros(E.shape[0])
        for _ in range(500):
            w = E.T @ u
            norm = np.linalg.norm(w)
            if norm == 0.0:
                break
            w /= norm
            t_new = E @ w
            q = F.T @ t_new
            qn = np.linalg.norm(q)
            if qn == 0.0:
                t = t_new
                break
            u = F @ (q / qn)
            if np.linalg.norm(t_new - t) <= 1e-12 * max(1.0, np.linalg.norm(t_new)):
                t = t_new
                break
            t = t_new
        tt = float(t @ t)
        if tt == 0.0:
            k = a
            break
        p_load = E.T @ t / tt
        q_load = F.T @ t / tt
        E = E - np.outer(t, p_load)
        F = F - np.outer(t, q_load)
        W[:, a], P[:, a], Q[:, a] = w, p_load, q_load
    if k == 0:
        raise DegenerateVarianceError("no usable PLS component")
    W, P, Q = W[:, :k], P[:, :k], Q[:, :k]
    coef = W @ np.linalg.solve(P.T @ W, Q.T)
    return PLSModel(x_mean=x_mean, x_scale=x_scale, y_mean=y_mean, y_scale=y_scale, coef=coef)


def pls_regression(X, Y, n_components: int = 2, folds: int = 5) -> PLSResult:
    """NIPALS partial least squares; R² per target on held-out folds.

    folds=0 skips cross-validation and reports train-set R² (the exact-fit
    mode; R² = 1 on noiseless linear data).
    """
    X = _as_matrix(X, "X")
    Y = _as_matrix(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise InvalidArgumentError("X and Y must have the same number of rows")
    n = X.shape[0]
    if n < 3:
        raise InvalidArgumentError("pls needs at least three rows")
    if not 1 <= n_components <= min(n - 1, X.shape[1]):
        raise InvalidArgumentError(
            f"n_components must be in [1, {min(n - 1, X.shape[1])}]"
        )
    if folds < 0 or folds == 1 or folds > n:
        raise InvalidArgumentError("folds must be 0 or in [2, n]")

    model = _nipals_fit(X, Y, n_components)
    if folds == 0:
        pred = model.predict(X)
    else:
        # contiguous blocks: session rows are time-ordered, so block folds
        # do not leak adjacent-segment correlation into the held-out score
        pred = np.empty_like(Y)
        for idx in np.array_split(np.arange(n), folds):
            mask = np.ones(n, dtype=bool)
            mask[idx] = False
            fold_model = _nipals_fit(X[mask], Y[mask], min(n_components, int(mask.sum()) - 1))
            pred[idx] = fold_model.predict(X[idx])
    ss_res = np.sum((Y - pred) ** 2, axis=0)
    ss_tot = np.sum((Y - Y.mean(axis=0)) ** 2, axis=0)
    if np.any(ss_tot == 0.0):
        raise DegenerateVarianceError("target column with zero variance")
    return PLSResult(r2=1.0 - ss_res / ss_tot, model=model, n_components=n_components, folds=folds)
