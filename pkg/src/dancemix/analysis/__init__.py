"""Statistical coupling analysis between movement energy and audio features."""

from .forest import RFResult, rf_importance
from .report import AnalysisReport, render_figures, render_text, write_csvs, write_report
from .session import (
    ENERGY_COLUMNS,
    MIN_SESSION_SECONDS,
    SEGMENT_SECONDS,
    SessionDataset,
    analyze_session,
    build_dataset,
)
from .sessionstats import run_battery
from .stats import (
    CCAResult,
    PCAResult,
    PLSResult,
    cca,
    pca,
    pearson,
    pearson_permutation_p,
    pls_regression,
)

__all__ = [
    "ENERGY_COLUMNS",
    "MIN_SESSION_SECONDS",
    "SEGMENT_SECONDS",
    "AnalysisReport",
    "CCAResult",
    "PCAResult",
    "PLSResult",
    "RFResult",
    "SessionDataset",
    "analyze_session",
    "build_dataset",
    "cca",
    "pca",
    "pearson",
    "pearson_permutation_p",
    "pls_regression",
    "render_figures",
    "render_text",
    "rf_importance",
    "run_battery",
    "write_csvs",
    "write_report",
]
