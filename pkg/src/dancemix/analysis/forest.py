"""Random-forest regression for feature-importance rankings.

Plain CART regression trees: bootstrap per tree, variance-impurity splits,
min-leaf 5, unlimited depth, every feature considered at every split.
Importance is the standard impurity-decrease accumulation normalized to
sum 1; model quality is out-of-bag R². Each tree draws its bootstrap from a
seed spawned off (seed, tree_index), so results are identical no matter how
trees might be scheduled.

The sizes this runs at (hundreds of 10 s segments by 47 features) make a
vectorized split scan in numpy entirely adequate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateVarianceError, InsufficientDataError, InvalidArgumentError

MIN_SAMPLES = 20
DEFAULT_TREES = 200
MIN_LEAF = 5


@dataclass
class _Node:
    feature: int = -1  # -1 marks a leaf
    threshold: float = 0.0
    value: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int) -> tuple[int, float, float] | None:
    """(feature, threshold, sse_decrease) of the best variance-reducing split."""
    n = y.size
    sse_parent = float(np.sum((y - y.mean()) ** 2))
    best: tuple[int, float, float] | None = None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        total, total_sq = csum[-1], csq[-1]
        # candidate split after position i puts i+1 rows left
        counts = np.arange(1, n)
        left_sse = csq[:-1] - csum[:-1] ** 2 / counts
        right_counts = n - counts
        right_sum = total - csum[:-1]
        right_sse = (total_sq - csq[:-1]) - right_sum**2 / right_counts
        decrease = sse_parent - (left_sse + right_sse)
        valid = (
            (counts >= min_leaf)
            & (right_counts >= min_leaf)
            & (xs[:-1] < xs[1:])  # only between distinct values
        )
        if not np.any(valid):
            continue
        idx = np.flatnonzero(valid)
        best_idx = idx[np.argmax(decrease[idx])]
        dec = float(decrease[best_idx])
        if dec > 1e-12 and (best is None or dec > best[2]):
            threshold = 0.5 * (xs[best_idx] + xs[best_idx + 1])
            best = (j, float(threshold), dec)
    return best


def _grow(X: np.ndarray, y: np.ndarray, importances: np.ndarray, n_total: int, min_leaf: int) -> _Node:
    node = _Node(value=float(y.mean()))
    if y.size < 2 * min_leaf or np.all(y == y[0]):
        return node
    split = _best_split(X, y, min_leaf)
    if split is None:
        return node
    j, threshold, decrease = split
    importances[j] += decrease / n_total
    mask = X[:, j] <= threshold
    node.feature = j
    node.threshold = threshold
    node.left = _grow(X[mask], y[mask], importances, n_total, min_leaf)
    node.right = _grow(X[~mask], y[~mask], importances, n_total, min_leaf)
    return node


def _predict_one(node: _Node, row: np.ndarray) -> float:
    while node.feature >= 0:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node.value


@dataclass
class RFResult:
    importances: np.ndarray  # (d,), >= 0, sums to 1
    r2_oob: float
    n_trees: int
    oob_coverage: int  # samples that received at least one OOB prediction


def rf_importance(
    X,
    y,
    n_trees: int = DEFAULT_TREES,
    seed: int = 0,
    min_leaf: int = MIN_LEAF,
) -> RFResult:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise InvalidArgumentError("X must be (n, d) with one y per row")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InvalidArgumentError("rf inputs must be finite")
    n, d = X.shape
    if n < MIN_SAMPLES:
        raise InsufficientDataError(f"rf_importance needs n >= {MIN_SAMPLES}, got {n}")
    if np.all(y == y[0]):
        raise DegenerateVarianceError("target is constant")
    if n_trees < 1:
        raise InvalidArgumentError("n_trees must be >= 1")

    importances = np.zeros(d)
    oob_sum = np.zeros(n)
    oob_count = np.zeros(n, dtype=np.int64)
    for t in range(n_trees):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(t,))))
        boot = rng.integers(0, n, size=n)
        tree_imp = np.zeros(d)
        tree = _grow(X[boot], y[boot], tree_imp, n, min_leaf)
        total = tree_imp.sum()
        if total > 0:
            importances += tree_imp / total
        oob = np.setdiff1d(np.arange(n), boot, assume_unique=False)
        for i in oob:
            oob_sum[i] += _predict_one(tree, X[i])
            oob_count[i] += 1

    total = importances.sum()
    importances = importances / total if total > 0 else np.full(d, 1.0 / d)
    covered = oob_count > 0
    if covered.sum() >= 2:
        pred = oob_sum[covered] / oob_count[covered]
        resid = y[covered] - pred
        ss_tot = float(np.sum((y[covered] - y[covered].mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else float("nan")
    else:
        r2 = float("nan")
    return RFResult(
        importances=importances,
        r2_oob=r2,
        n_trees=n_trees,
        oob_coverage=int(covered.sum()),
    )
