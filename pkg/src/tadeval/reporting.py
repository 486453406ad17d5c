"""Correlation statistics and baseline-relative summary tables."""
from __future__ import annotations

import io
import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .baselines import SeedSummary
from .io import format_number
from .protocols import ProtocolConfig, k_sweep, roc_pr, sweep_best_f1


@dataclass(frozen=True)
class CorrelationReport:
    """Pearson and Kendall tau-b; a coefficient is ``None`` when undefined."""

    pearson_pcc: float | None
    kendall_krc: float | None
    n_points: int
    errors: dict = field(default_factory=dict)


def correlate(xs, ys) -> CorrelationReport:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("correlate needs two 1-D sequences of equal length")
    if x.size < 2:
        raise ValueError("correlate needs at least 2 points")
    errors = {}
    pcc = krc = None
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        which = "x" if np.ptp(x) == 0 else "y"
        errors["pearson"] = f"zero variance in {which}"
        errors["kendall"] = f"all values tied in {which}"
    else:
        xc = x - x.mean()
        yc = y - y.mean()
        pcc = float(np.clip(np.dot(xc, yc) / np.sqrt(np.dot(xc, xc) * np.dot(yc, yc)), -1.0, 1.0))
        krc = float(stats.kendalltau(x, y, variant="b").statistic)
    return CorrelationReport(pcc, krc, int(x.size), errors)


# --------------------------------------------------------------------------
# method vs baseline table
# --------------------------------------------------------------------------

METRICS = ("f1", "f1_pa", "pak_auc", "auroc", "aupr")
HEADERS = {"f1": "F1", "f1_pa": "F1_PA", "pak_auc": "F1_PA%K AUC", "auroc": "AUROC", "aupr": "AUPR"}


def score_metrics(scores, labels, k_grid=None) -> dict[str, float]:
    """Best point-wise F1, best PA F1, PA%K AUC (best threshold per K), AUROC, AUPR."""
    kw = {} if k_grid is None else {"k_grid": k_grid}
    curves = roc_pr(scores, labels)
    return {
        "f1": sweep_best_f1(scores, labels, ProtocolConfig.point()).best_f1,
        "f1_pa": sweep_best_f1(scores, labels, ProtocolConfig.pa()).best_f1,
        "pak_auc": k_sweep(scores, labels, None, **kw).auc,
        "auroc": curves.auroc,
        "aupr": curves.aupr,
    }


@dataclass
class ReportRow:
    name: str
    values: dict[str, SeedSummary]
    is_baseline: bool = False
    marks: dict[str, str] = field(default_factory=dict)
    improved: bool | None = None


def summarize_runs(runs: list[dict[str, float]]) -> dict[str, SeedSummary]:
    return {m: SeedSummary(np.array([r[m] for r in runs])) for m in METRICS}


def mark_against_baselines(row: ReportRow, case1: ReportRow, case2: ReportRow | None, case3: ReportRow | None):
    """Arrow marks relative to the baselines.

    F1_PA is compared with Case 1; F1 with the larger of Case 2 and Case 3.
    ``improved`` requires both to be strictly higher.
    """
    pa_up = row.values["f1_pa"].mean > case1.values["f1_pa"].mean
    refs = [r.values["f1"].mean for r in (case2, case3) if r is not None]
    f1_up = row.values["f1"].mean > max(refs) if refs else None
    row.marks["f1_pa"] = "↑" if pa_up else "↓"
    if f1_up is not None:
        row.marks["f1"] = "↑" if f1_up else "↓"
    row.improved = bool(pa_up and f1_up) if f1_up is not None else None


@dataclass
class Report:
    rows: list[ReportRow]

    def to_markdown(self) -> str:
        cols = ["Method"] + [HEADERS[m] for m in METRICS] + ["Improved"]
        lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
        for row in self.rows:
            cells = [f"**{row.name}**" if row.is_baseline else row.name]
            for m in METRICS:
                s = row.values[m]
                text = f"{s.mean:.3f}" if s.values.size == 1 else f"{s.mean:.3f} ± {s.std:.3f}"
                if m in row.marks:
                    text += f" {row.marks[m]}"
                cells.append(text)
            cells.append("" if row.improved is None else ("yes" if row.improved else "no"))
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["method", "baseline", "repeats"]
        for m in METRICS:
            header += [m, f"{m}_std"]
        w.writerow(header + ["improved"])
        for row in self.rows:
            out = [row.name, int(row.is_baseline), row.values["f1"].values.size]
            for m in METRICS:
                out += [format_number(row.values[m].mean), format_number(row.values[m].std)]
            out.append("" if row.improved is None else int(row.improved))
            w.writerow(out)
        return buf.getvalue()


def build_report(methods: dict[str, list], baselines: dict[str, list], labels, k_grid=None) -> Report:
    """Evaluate score series and lay them out against the baselines.

    ``methods`` and ``baselines`` map a name to a list of score arrays (one
    per seed; deterministic methods pass a single array).  Baseline keys
    ``case1``/``case2``/``case3`` are recognised for the arrow marks.
    """
    rows = []
    base_rows = {}
    for name, runs in baselines.items():
        row = ReportRow(_BASELINE_NAMES.get(name, name), summarize_runs([score_metrics(s, labels, k_grid) for s in runs]), True)
        base_rows[name] = row
    for name, runs in methods.items():
        row = ReportRow(name, summarize_runs([score_metrics(s, labels, k_grid) for s in runs]))
        if "case1" in base_rows:
            mark_against_baselines(row, base_rows["case1"], base_rows.get("case2"), base_rows.get("case3"))
        rows.append(row)
    return Report(rows + list(base_rows.values()))


_BASELINE_NAMES = {"case1": "Case 1", "case2": "Case 2", "case3": "Case 3"}
