"""Report serialization and the two-block accuracy table."""

from __future__ import annotations

import json
from pathlib import Path

from .evaluate import EvalReport

_SCHEME_TITLES = {
    "cv10": "Stratified 10-fold Cross-Validation",
    "occ": "Online Change Classification",
}
_SAMPLING_TITLES = {
    "baseline": "Baseline",
    "smote": "SMOTE",
    "smote_tomek": "SMOTE+Tomek",
    "cluster_centroids": "Cluster Centroids",
}


def save_reports(path: str | Path, reports: list[EvalReport]) -> None:
    Path(path).write_text(
        json.dumps([r.to_dict() for r in reports], indent=2) + "\n",
        encoding="utf-8",
    )


def load_reports(path: str | Path) -> list[dict]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _cell(mean: float, std: float) -> str:
    return f"{mean:.3f} +/- {std:.3f}"


def format_table(reports: list[EvalReport]) -> str:
    """Accuracy table, one block per evaluation scheme."""
    lines: list[str] = []
    width = (22, 18, 18, 18)
    for scheme in ("cv10", "occ"):
        block = [r for r in reports if r.scheme == scheme]
        if not block:
            continue
        lines.append(_SCHEME_TITLES[scheme])
        header = ("Sampling technique", "Precision", "Recall", "F1 score")
        lines.append("  " + "".join(h.ljust(w) for h, w in zip(header, width)))
        for sampling in ("baseline", "smote", "smote_tomek", "cluster_centroids"):
            for r in block:
                if r.sampling == sampling:
                    row = (
                        _SAMPLING_TITLES[sampling],
                        _cell(r.precision_mean, r.precision_std),
                        _cell(r.recall_mean, r.recall_std),
                        _cell(r.f1_mean, r.f1_std),
                    )
                    lines.append("  " + "".join(c.ljust(w) for c, w in zip(row, width)))
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def format_significances(report: EvalReport) -> str:
    lines = ["Feature significances (sum to 1):"]
    for name, value in report.significances.items():
        lines.append(f"  {name:<6} {value:.3f}")
    return "\n".join(lines) + "\n"
