"""Run the full statistical battery over a SessionDataset.

Produces a JSON-ready report: Pearson correlation table (movement energy
stat x audio feature), per-side PCA summaries, CCA between the two blocks,
PLS predicting audio features from movement energy, and random-forest
importance of audio features for each energy statistic.

Small-session fallbacks are explicit and land in report notes: constant
columns are excluded (correlation cells stay, reported as undefined), the
audio block is PCA-reduced before CCA when there are fewer segments than
audio features, PLS falls back to train-set R² when there are too few rows
to fold, and the forest is skipped below its minimum n.
"""

from __future__ import annotations

import numpy as np

from ..errors import InsufficientDataError, UndefinedCorrelationError
from .forest import MIN_SAMPLES as RF_MIN_SAMPLES
from .forest import rf_importance
from .report import AnalysisReport
from .stats import cca, pca, pearson, pls_regression

PCA_MAX_COMPONENTS = 10
CCA_MAX_AUDIO_DIMS = 16


def _valid_columns(X: np.ndarray, names: tuple[str, ...]) -> tuple[np.ndarray, list[str], list[str]]:
    keep = X.std(axis=0) > 0.0
    kept = [n for n, k in zip(names, keep) if k]
    dropped = [n for n, k in zip(names, keep) if not k]
    return X[:, keep], kept, dropped


def _correlation_table(dataset) -> list[dict]:
    rows = []
    for i, stat in enumerate(dataset.energy_columns):
        for j, feature in enumerate(dataset.audio_columns):
            try:
                r, p = pearson(dataset.energy[:, i], dataset.audio[:, j])
                rows.append({"energy_stat": stat, "feature": feature, "r": r, "p": p})
            except UndefinedCorrelationError:
                rows.append({"energy_stat": stat, "feature": feature, "r": None, "p": None})
    return rows


def _pca_summary(X: np.ndarray, names: list[str], notes: list[str], label: str) -> dict | None:
    n = X.shape[0]
    k = min(PCA_MAX_COMPONENTS, n - 1, X.shape[1])
    if k < 1:
        notes.append(f"pca_{label}: skipped, no usable columns")
        return None
    res = pca(X, k, standardize=True)
    return {
        "columns": list(names),
        "explained_variance_ratio": [float(v) for v in res.explained_variance_ratio],
        "components": [[float(v) for v in row] for row in res.components],
    }


def _cca_block(energy, e_names, audio, a_names, notes: list[str]) -> dict | None:
    n, p = energy.shape
    q = audio.shape[1]
    reduced_to = None
    y_block, y_names = audio, list(a_names)
    if n <= q:
        reduced_to = min(q, n - 2, CCA_MAX_AUDIO_DIMS)
        if reduced_to < 1 or n <= max(p, reduced_to):
            notes.append("cca: skipped, too few segments even after reduction")
            return None
        res = pca(audio, reduced_to, standardize=True)
        y_block = res.transform(audio)
        y_names = [f"audio_pc{i + 1}" for i in range(reduced_to)]
        notes.append(
            f"cca: audio block reduced to {reduced_to} principal components "
            f"(n={n} segments <= {q} features)"
        )
    if n <= max(p, y_block.shape[1]):
        notes.append("cca: skipped, n too small")
        return None
    res = cca(energy, y_block)
    return {
        "correlations": [float(v) for v in res.correlations],
        "x_columns": list(e_names),
        "y_columns": y_names,
        "x_weights": [[float(v) for v in row] for row in res.x_weights],
        "y_weights": [[float(v) for v in row] for row in res.y_weights],
        "audio_reduced_to": reduced_to,
    }


def run_battery(dataset, rf_trees: int = 200, seed: int = 0) -> AnalysisReport:
    n = dataset.n_segments
    notes: list[str] = []

    energy_v, e_names, e_dropped = _valid_columns(dataset.energy, dataset.energy_columns)
    audio_v, a_names, a_dropped = _valid_columns(dataset.audio, dataset.audio_columns)
    for name in e_dropped:
        notes.append(f"constant movement column excluded from multivariate runs: {name}")
    for name in a_dropped:
        notes.append(f"constant audio column excluded from multivariate runs: {name}")
    if energy_v.shape[1] == 0 or audio_v.shape[1] == 0:
        raise InsufficientDataError("every column on one side is constant")

    correlations = _correlation_table(dataset)

    pca_movement = _pca_summary(energy_v, e_names, notes, "movement")
    pca_audio = _pca_summary(audio_v, a_names, notes, "audio")
    cca_block = _cca_block(energy_v, e_names, audio_v, a_names, notes)

    folds = 5 if n >= 15 else 0
    if folds == 0:
        notes.append(f"pls: n={n} too small for folding; reporting train-set R²")
    pls_block = None
    try:
        res = pls_regression(
            energy_v, audio_v, n_components=min(2, energy_v.shape[1], n - 1), folds=folds
        )
        pls_block = {
            "targets": list(a_names),
            "r2": [float(v) for v in res.r2],
            "n_components": res.n_components,
            "folds": res.folds,
        }
    except Exception as exc:
        notes.append(f"pls: failed ({exc})")

    rf_blocks: list[dict] = []
    if n < RF_MIN_SAMPLES:
        notes.append(f"rf: skipped, n={n} < {RF_MIN_SAMPLES}")
    else:
        for t_idx, stat in enumerate(e_names):
            res = rf_importance(
                audio_v, energy_v[:, t_idx], n_trees=rf_trees, seed=seed + t_idx
            )
            rf_blocks.append(
                {
                    "target": stat,
                    "r2_oob": None if np.isnan(res.r2_oob) else float(res.r2_oob),
                    "importances": {
                        name: float(v) for name, v in zip(a_names, res.importances)
                    },
                }
            )

    return AnalysisReport(
        metadata={
            "n_segments": n,
            "segment_s": dataset.segment_s,
            "dropped_rows": dataset.dropped_rows,
            "n_correlation_tests": len(correlations),
            "seed": seed,
            "notes": notes,
        },
        correlations=correlations,
        pca_movement=pca_movement,
        pca_audio=pca_audio,
        cca=cca_block,
        pls=pls_block,
        rf=rf_blocks,
    )
