"""Report container and its output formats.

One report, four renderings: canonical JSON (lossless round trip), plain
text tables for reading in a terminal, CSV files for spreadsheets, and
matplotlib figures rendered to PNG. Undefined statistics stay null in every
format; they are never replaced with a number.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import InvalidArgumentError

REPORT_VERSION = 1


@dataclass
class AnalysisReport:
    metadata: dict
    correlations: list[dict]
    pca_movement: dict | None
    pca_audio: dict | None
    cca: dict | None
    pls: dict | None
    rf: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["version"] = REPORT_VERSION
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "AnalysisReport":
        doc = dict(doc)
        if doc.pop("version", REPORT_VERSION) != REPORT_VERSION:
            raise InvalidArgumentError("unsupported report version")
        return cls(**doc)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "AnalysisReport":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# --- text rendering -----------------------------------------------------------------

def _fmt(v, width: int = 8, digits: int = 3) -> str:
    if v is None:
        return "--".rjust(width)
    return f"{v:.{digits}f}".rjust(width)


def render_text(report: AnalysisReport) -> str:
    lines: list[str] = []
    meta = report.metadata
    lines.append("session analysis")
    lines.append(
        f"segments: {meta['n_segments']} x {meta['segment_s']:.0f} s"
        f" (dropped {meta['dropped_rows']}); correlation tests: {meta['n_correlation_tests']}"
    )
    lines.append("")

    lines.append("strongest correlations (|r|, top 15)")
    lines.append(f"{'energy stat':<12} {'feature':<22} {'r':>8} {'p':>10}")
    defined = [c for c in report.correlations if c["r"] is not None]
    defined.sort(key=lambda c: -abs(c["r"]))
    for c in defined[:15]:
        lines.append(
            f"{c['energy_stat']:<12} {c['feature']:<22} {_fmt(c['r'])} {c['p']:>10.2e}"
        )
    undefined = len(report.correlations) - len(defined)
    if undefined:
        lines.append(f"(undefined cells: {undefined})")
    lines.append("")

    for label, block in (("movement PCA", report.pca_movement), ("audio PCA", report.pca_audio)):
        if block is None:
            lines.append(f"{label}: skipped")
            continue
        ratios = " ".join(f"{v:.3f}" for v in block["explained_variance_ratio"])
        lines.append(f"{label}: explained variance ratios {ratios}")
    lines.append("")

    if report.cca is None:
        lines.append("CCA: skipped")
    else:
        corr = " ".join(f"{v:.3f}" for v in report.cca["correlations"])
        suffix = ""
        if report.cca.get("audio_reduced_to"):
            suffix = f" (audio reduced to {report.cca['audio_reduced_to']} PCs)"
        lines.append(f"CCA canonical correlations: {corr}{suffix}")
    lines.append("")

    if report.pls is None:
        lines.append("PLS: skipped")
    else:
        mode = "train-set" if report.pls["folds"] == 0 else f"{report.pls['folds']}-fold"
        lines.append(f"PLS R² per audio feature ({mode}, top 10)")
        pairs = sorted(zip(report.pls["targets"], report.pls["r2"]), key=lambda kv: -kv[1])
        for name, r2 in pairs[:10]:
            lines.append(f"  {name:<22} {_fmt(r2)}")
    lines.append("")

    if not report.rf:
        lines.append("random forest: skipped")
    else:
        for block in report.rf:
            r2 = "--" if block["r2_oob"] is None else f"{block['r2_oob']:.3f}"
            top = sorted(block["importances"].items(), key=lambda kv: -kv[1])[:5]
            tops = ", ".join(f"{n}={v:.3f}" for n, v in top)
            lines.append(f"rf[{block['target']}]: oob R² {r2}; top {tops}")
    if report.metadata.get("notes"):
        lines.append("")
        lines.append("notes:")
        for note in report.metadata["notes"]:
            lines.append(f"  - {note}")
    return "\n".join(lines) + "\n"


# --- delimited output ------------------------------------------------------------------

def write_csvs(report: AnalysisReport, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    path = out_dir / "correlations.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["energy_stat", "feature", "r", "p"])
        for c in report.correlations:
            writer.writerow(
                [
                    c["energy_stat"],
                    c["feature"],
                    "" if c["r"] is None else repr(c["r"]),
                    "" if c["p"] is None else repr(c["p"]),
                ]
            )
    written.append(path)

    if report.pls is not None:
        path = out_dir / "pls_r2.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature", "r2", "folds"])
            for name, r2 in zip(report.pls["targets"], report.pls["r2"]):
                writer.writerow([name, repr(r2), report.pls["folds"]])
        written.append(path)

    if report.rf:
        path = out_dir / "rf_importance.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["target", "feature", "importance"])
            for block in report.rf:
                for name, value in sorted(block["importances"].items()):
                    writer.writerow([block["target"], name, repr(value)])
        written.append(path)
    return written


# --- figures ---------------------------------------------------------------------------

def render_figures(report: AnalysisReport, out_dir: str | Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    stats = sorted({c["energy_stat"] for c in report.correlations})
    feats = list(dict.fromkeys(c["feature"] for c in report.correlations))
    grid = np.full((len(stats), len(feats)), np.nan)
    for c in report.correlations:
        if c["r"] is not None:
            grid[stats.index(c["energy_stat"]), feats.index(c["feature"])] = c["r"]
    fig, ax = plt.subplots(figsize=(14, 3.2))
    im = ax.imshow(grid, aspect="auto", cmap="RdBu_r", vmin=-1, vmax=1)
    ax.set_yticks(range(len(stats)), stats)
    ax.set_xticks(range(len(feats)), feats, rotation=90, fontsize=5)
    ax.set_title("movement energy vs audio feature correlation (r)")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    path = out_dir / "correlation_heatmap.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    if report.pca_movement or report.pca_audio:
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
        for ax, (label, block) in zip(
            axes, (("movement", report.pca_movement), ("audio", report.pca_audio))
        ):
            if block is None:
                ax.set_axis_off()
                continue
            ratios = block["explained_variance_ratio"]
            ax.bar(range(1, len(ratios) + 1), ratios)
            ax.set_title(f"{label} PCA explained variance")
            ax.set_xlabel("component")
        fig.tight_layout()
        path = out_dir / "pca_variance.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

    if report.cca is not None:
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        corr = report.cca["correlations"]
        ax.bar(range(1, len(corr) + 1), corr)
        ax.set_ylim(0, 1)
        ax.set_title("canonical correlations")
        ax.set_xlabel("pair")
        fig.tight_layout()
        path = out_dir / "cca_correlations.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

    if report.rf:
        fig, axes = plt.subplots(1, len(report.rf), figsize=(4.2 * len(report.rf), 3.6))
        if len(report.rf) == 1:
            axes = [axes]
        for ax, block in zip(axes, report.rf):
            top = sorted(block["importances"].items(), key=lambda kv: kv[1])[-10:]
            names = [n for n, _ in top]
            values = [v for _, v in top]
            ax.barh(range(len(top)), values)
            ax.set_yticks(range(len(top)), names, fontsize=6)
            ax.set_title(f"rf importance: {block['target']}", fontsize=9)
        fig.tight_layout()
        path = out_dir / "rf_importance.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written


def write_report(
    report: AnalysisReport, out_dir: str | Path, figures: bool = True
) -> dict[str, list[Path]]:
    """Write every rendering of the report under out_dir; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    report.save(json_path)
    text_path = out_dir / "report.txt"
    text_path.write_text(render_text(report), encoding="utf-8")
    paths = {
        "json": [json_path],
        "text": [text_path],
        "csv": write_csvs(report, out_dir),
        "figures": render_figures(report, out_dir / "figures") if figures else [],
    }
    return paths
