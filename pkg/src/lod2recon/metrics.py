"""Segmentation overlap and height-error statistics on correctly segmented pixels."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .codec import DatasetSplit
from .errors import EmptyEvalError, FrameMismatchError


@dataclass
class HeightStats:
    m: int
    mean_abs_pct_error: float
    mean_accuracy: float
    mean_difference: float
    mse: float
    skipped_nonpositive: int = 0


@dataclass
class EvalReport:
    iou: float
    m: int
    mean_abs_pct_error: Optional[float] = None
    mean_accuracy: Optional[float] = None
    mean_difference: Optional[float] = None
    mse: Optional[float] = None
    skipped_nonpositive: int = 0
    per_split: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        d = dict(d)
        per = {k: cls.from_dict(v) for k, v in d.pop("per_split", {}).items()}
        return cls(**d, per_split=per)


def iou(pred, truth) -> float:
    """Jaccard index of two boolean masks (or two sets); 1.0 when both are empty."""
    if isinstance(pred, (set, frozenset)) or isinstance(truth, (set, frozenset)):
        pred, truth = set(pred), set(truth)
        union = len(pred | truth)
        return 1.0 if union == 0 else len(pred & truth) / union
    pred, truth = np.asarray(pred, dtype=bool), np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape:
        raise FrameMismatchError(f"mask shapes differ: {pred.shape} vs {truth.shape}")
    union = int(np.count_nonzero(pred | truth))
    return 1.0 if union == 0 else int(np.count_nonzero(pred & truth)) / union


def height_error_stats(z_hat, z) -> HeightStats:
    z_hat = np.asarray(z_hat, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if z_hat.shape != z.shape:
        raise FrameMismatchError("prediction and truth height counts differ")
    m = len(z)
    if m == 0:
        raise EmptyEvalError("no correctly segmented pixels to evaluate")
    diff = z_hat - z
    pos = z > 0
    skipped = int(m - np.count_nonzero(pos))
    pct = float(np.mean(100.0 * np.abs(diff[pos]) / z[pos])) if pos.any() else float("nan")
    return HeightStats(
        m=m,
        mean_abs_pct_error=pct,
        mean_accuracy=100.0 - pct,
        mean_difference=float(np.mean(np.abs(diff))),
        mse=float(np.mean(diff * diff)),
        skipped_nonpositive=skipped,
    )


def _report(pred, truth, pred_h, truth_h) -> EvalReport:
    both = pred & truth
    rep = EvalReport(iou=iou(pred, truth), m=int(np.count_nonzero(both)))
    if rep.m:
        st = height_error_stats(pred_h[both], truth_h[both])
        rep.mean_abs_pct_error = st.mean_abs_pct_error
        rep.mean_accuracy = st.mean_accuracy
        rep.mean_difference = st.mean_difference
        rep.mse = st.mse
        rep.skipped_nonpositive = st.skipped_nonpositive
    return rep


def evaluate(
    pred_mask: np.ndarray,
    truth_mask: np.ndarray,
    pred_heights: np.ndarray,
    truth_heights: np.ndarray,
    split_of_pixel: Optional[np.ndarray] = None,
    require_heights: bool = True,
) -> EvalReport:
    """Overall and per-split report.

    With ``require_heights`` an empty overlap raises :class:`EmptyEvalError`;
    otherwise (and always for a split with no overlap) height fields stay None.
    """
    shapes = {np.shape(a) for a in (pred_mask, truth_mask, pred_heights, truth_heights)}
    if split_of_pixel is not None:
        shapes.add(np.shape(split_of_pixel))
    if len(shapes) != 1:
        raise FrameMismatchError(f"inconsistent frames: {sorted(shapes)}")
    pred = np.asarray(pred_mask, dtype=bool)
    truth = np.asarray(truth_mask, dtype=bool)
    pred_h = np.asarray(pred_heights, dtype=float)
    truth_h = np.asarray(truth_heights, dtype=float)
    report = _report(pred, truth, pred_h, truth_h)
    if require_heights and report.m == 0:
        raise EmptyEvalError(f"no correctly segmented pixels (IoU {report.iou:.4f})")
    if split_of_pixel is not None:
        for split in DatasetSplit:
            region = split_of_pixel == int(split)
            if (region & (pred | truth)).any():
                report.per_split[split.name.lower()] = _report(pred & region, truth & region, pred_h, truth_h)
    return report


ROWS = (
    ("Jaccard index (IoU)", "iou", lambda v: f"{100 * v:.2f} %"),
    ("Heights' mean accuracy", "mean_accuracy", lambda v: f"{v:.2f} %"),
    ("Heights' mean abs. error", "mean_abs_pct_error", lambda v: f"{v:.2f} %"),
    ("Heights' mean difference", "mean_difference", lambda v: f"{v:.2f} m"),
    ("Heights' mean square error", "mse", lambda v: f"{v:.2f} m^2"),
    ("Correct pixels (M)", "m", lambda v: f"{v}"),
)


def render_table(reports: dict[str, EvalReport]) -> str:
    """Aligned text table, one column per named report."""
    names = list(reports)
    cells = [["Statistic"] + names]
    for title, key, fmt in ROWS:
        row = [title]
        for name in names:
            v = getattr(reports[name], key)
            row.append("-" if v is None or (isinstance(v, float) and np.isnan(v)) else fmt(v))
        cells.append(row)
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
    lines = [" | ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines)


def split_columns(report: EvalReport) -> dict[str, EvalReport]:
    cols = {name.capitalize(): rep for name, rep in report.per_split.items()}
    cols["All"] = report
    return cols
