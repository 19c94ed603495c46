"""
Disparity evaluation: MAE and ">t" error rates over ground-truth-valid
pixels, plus hint statistics.

Conventions:

* ``|pred - gt| > t`` is an error; an error of exactly ``t`` is not.
* A pixel with valid ground truth but invalid prediction counts as an error
  at every threshold and is left out of the MAE (with a warning).
"""

import warnings
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .core import DisparityMap, as_disparity_map, as_hint_map

THRESHOLDS = (2, 3, 4, 5)


def _check_dims(pred: DisparityMap, gt: DisparityMap):
    if pred.shape != gt.shape:
        raise ValueError(f"prediction {pred.shape} and ground truth {gt.shape} differ in size")


def mae(pred, gt) -> float:
    """Mean absolute error over pixels valid in both maps."""
    pred, gt = as_disparity_map(pred), as_disparity_map(gt)
    _check_dims(pred, gt)
    missing = gt.valid & ~pred.valid
    if missing.any():
        warnings.warn(
            f"{int(missing.sum())} ground-truth pixels have no valid prediction; excluded from MAE",
            stacklevel=2,
        )
    domain = gt.valid & pred.valid
    if not domain.any():
        raise ValueError("empty evaluation domain")
    return float(np.mean(np.abs(pred.values[domain] - gt.values[domain])))


def error_rate(pred, gt, t: float) -> float:
    """Percentage of ground-truth-valid pixels with error strictly above ``t``."""
    if not t > 0:
        raise ValueError(f"threshold must be > 0, got {t}")
    pred, gt = as_disparity_map(pred), as_disparity_map(gt)
    _check_dims(pred, gt)
    if not gt.valid.any():
        raise ValueError("empty evaluation domain")
    err = np.abs(pred.values - gt.values)
    bad = ~pred.valid | (err > t)
    return float(100.0 * np.count_nonzero(bad[gt.valid]) / np.count_nonzero(gt.valid))


@dataclass(frozen=True)
class HintStats:
    count: int
    density: float
    mae: Optional[float]


def hint_stats(h, gt) -> HintStats:
    """Hint count, density, and hint MAE against ``gt`` (``None`` when undefined)."""
    h, gt = as_hint_map(h), as_disparity_map(gt)
    if h.shape != gt.shape:
        raise ValueError(f"hints {h.shape} and ground truth {gt.shape} differ in size")
    present = h.values > 0
    count = int(np.count_nonzero(present))
    dens = count / h.values.size if h.values.size else 0.0
    checked = present & gt.valid
    err = None
    if checked.any():
        err = float(np.mean(np.abs(h.values[checked] - gt.values[checked])))
    return HintStats(count, dens, err)


@dataclass
class EvalReport:
    mae: float
    err_rates: Dict[float, float]
    n_pixels: int
    name: str = ""
    hints: Optional[HintStats] = None

    def columns(self):
        cols = ["name", "mae"] + [f"err_gt{_fmt_t(t)}" for t in self.err_rates] + ["n_pixels"]
        if self.hints is not None:
            cols += ["hint_count", "hint_density", "hint_mae"]
        return cols

    def csv_header(self) -> str:
        return ",".join(self.columns())

    def csv_row(self) -> str:
        vals = [self.name, f"{self.mae:.6f}"]
        vals += [f"{v:.4f}" for v in self.err_rates.values()]
        vals.append(str(self.n_pixels))
        if self.hints is not None:
            vals += [
                str(self.hints.count),
                f"{self.hints.density:.6f}",
                "" if self.hints.mae is None else f"{self.hints.mae:.6f}",
            ]
        return ",".join(vals)

    def to_text(self) -> str:
        lines = [f"{self.name or 'evaluation'}: {self.n_pixels} pixels", f"  MAE  {self.mae:.4f} px"]
        for t, v in self.err_rates.items():
            lines.append(f"  >{_fmt_t(t):<3} {v:.2f} %")
        if self.hints is not None:
            hm = "n/a" if self.hints.mae is None else f"{self.hints.mae:.4f} px"
            lines.append(
                f"  hints {self.hints.count} [{100 * self.hints.density:.3f}%], MAE {hm}"
            )
        return "\n".join(lines)


def _fmt_t(t) -> str:
    return f"{t:g}"


def evaluate(
    pred, gt, hints=None, thresholds: Sequence[float] = THRESHOLDS, name: str = ""
) -> EvalReport:
    pred, gt = as_disparity_map(pred), as_disparity_map(gt)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        value = mae(pred, gt)
    rates = {t: error_rate(pred, gt, t) for t in thresholds}
    stats = hint_stats(hints, gt) if hints is not None else None
    return EvalReport(value, rates, int(np.count_nonzero(gt.valid)), name, stats)
