"""Statistics over simulated response-time curves: linear and log-transformed
slopes, fits against human reference data, ms-per-iteration scaling, and the
linear-vs-log model comparison.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .experiments import CellResult

__all__ = [
    "RTCurve",
    "ReferenceSeries",
    "curve_from_cells",
    "subject_curves",
    "fit_linear",
    "fit_log",
    "slope_between",
    "ms_per_iteration",
    "fit_r2_vs_reference",
    "per_subject_log_slopes",
    "paired_slope_comparison",
    "load_reference_csv",
]


@dataclass
class RTCurve:
    """Mean response time (in model iterations) by set size for one condition."""

    condition: str
    set_sizes: tuple[int, ...]
    mean_rt: tuple[float, ...]
    sem: tuple[float, ...]

    def __post_init__(self) -> None:
        if list(self.set_sizes) != sorted(set(self.set_sizes)):
            raise ValueError("set sizes must be strictly increasing")

    def rt_at(self, set_size: int) -> float:
        try:
            return self.mean_rt[self.set_sizes.index(set_size)]
        except ValueError:
            raise ValueError(f"set size {set_size} not in curve") from None

    def without_target_only(self) -> "RTCurve":
        keep = [i for i, n in enumerate(self.set_sizes) if n > 1]
        return RTCurve(self.condition,
                       tuple(self.set_sizes[i] for i in keep),
                       tuple(self.mean_rt[i] for i in keep),
                       tuple(self.sem[i] for i in keep))


@dataclass
class ReferenceSeries:
    """Digitized human mean RTs (ms) by set size, with mandatory provenance."""

    label: str
    set_sizes: tuple[int, ...]
    mean_rt_ms: tuple[float, ...]
    provenance: str

    def __post_init__(self) -> None:
        if not self.provenance:
            raise ValueError("reference series requires a provenance note")


def curve_from_cells(cells: list[CellResult], condition: str) -> RTCurve:
    """Grand mean over subject means per set size, with SEM across subjects."""
    by_size: dict[int, list[float]] = {}
    for cell in cells:
        if cell.condition == condition:
            by_size.setdefault(cell.set_size, []).append(cell.mean_rt)
    if not by_size:
        raise ValueError(f"no cells for condition {condition!r}")
    sizes = tuple(sorted(by_size))
    means, sems = [], []
    for n in sizes:
        vals = np.array(by_size[n])
        means.append(float(vals.mean()))
        sems.append(float(vals.std(ddof=1) / math.sqrt(len(vals)))
                    if len(vals) > 1 else 0.0)
    return RTCurve(condition, sizes, tuple(means), tuple(sems))


def subject_curves(cells: list[CellResult], condition: str) -> dict[int, RTCurve]:
    """One per-subject curve of that subject's cell means."""
    by_subject: dict[int, dict[int, float]] = {}
    for cell in cells:
        if cell.condition == condition:
            by_subject.setdefault(cell.subject, {})[cell.set_size] = cell.mean_rt
    out = {}
    for subject, points in by_subject.items():
        sizes = tuple(sorted(points))
        out[subject] = RTCurve(condition, sizes,
                               tuple(points[n] for n in sizes),
                               tuple(0.0 for _ in sizes))
    return out


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line fit returning (slope, intercept, R^2)."""
    if x.size < 2:
        raise ValueError("need at least two points to fit a line")
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _curve_xy(curve: RTCurve, include_target_only: bool) -> tuple[np.ndarray, np.ndarray]:
    if not include_target_only:
        curve = curve.without_target_only()
    return np.array(curve.set_sizes, dtype=float), np.array(curve.mean_rt)


def fit_linear(curve: RTCurve, include_target_only: bool = True
               ) -> tuple[float, float, float]:
    """OLS of mean RT on set size: (slope, intercept, R^2)."""
    x, y = _curve_xy(curve, include_target_only)
    return _ols(x, y)


def fit_log(curve: RTCurve, include_target_only: bool = True
            ) -> tuple[float, float, float]:
    """OLS of mean RT on the natural log of set size: (slope, intercept, R^2)."""
    x, y = _curve_xy(curve, include_target_only)
    if np.any(x <= 0):
        raise ValueError("log fit requires positive set sizes")
    return _ols(np.log(x), y)


def slope_between(curve: RTCurve, n_low: int, n_high: int) -> float:
    """Two-point slope in iterations per item."""
    if n_low == n_high:
        raise ValueError("set sizes must differ")
    return (curve.rt_at(n_high) - curve.rt_at(n_low)) / (n_high - n_low)


def _shared_grid(curve: RTCurve, reference: ReferenceSeries,
                 exclude_target_only: bool) -> tuple[np.ndarray, np.ndarray]:
    sizes = [n for n in curve.set_sizes if not (exclude_target_only and n == 1)]
    ref_sizes = [n for n in reference.set_sizes
                 if not (exclude_target_only and n == 1)]
    if sizes != ref_sizes:
        raise ValueError(
            f"set-size grids differ: model {sizes} vs reference {ref_sizes}")
    model = np.array([curve.rt_at(n) for n in sizes])
    ref = np.array([reference.mean_rt_ms[reference.set_sizes.index(n)]
                    for n in sizes])
    return model, ref


def ms_per_iteration(curve: RTCurve, reference: ReferenceSeries,
                     exclude_target_only: bool = True) -> float:
    """Range of the human data divided by the range of the model data."""
    model, ref = _shared_grid(curve, reference, exclude_target_only)
    model_range = model.max() - model.min()
    if model_range == 0:
        raise ValueError("model curve is constant; scale undefined")
    return float((ref.max() - ref.min()) / model_range)


def _r2(pred: np.ndarray, obs: np.ndarray) -> float:
    ss_res = float(np.sum((obs - pred) ** 2))
    ss_tot = float(np.sum((obs - obs.mean()) ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return 1.0 - ss_res / ss_tot


def fit_r2_vs_reference(curves: list[RTCurve], references: list[ReferenceSeries],
                        exclude_target_only: bool = True
                        ) -> tuple[dict[str, float], float]:
    """Per-condition and concatenated R^2 of the model against human data.

    Each model curve is rescaled to milliseconds with its own ms-per-iteration
    ratio and mean-aligned to its reference before computing the coefficient
    of determination.  A constant model curve scales to a flat prediction at
    the reference mean (R^2 <= 0 whenever the reference varies).
    """
    if len(curves) != len(references):
        raise ValueError("need one reference series per model curve")
    per_condition: dict[str, float] = {}
    all_pred, all_obs = [], []
    for curve, reference in zip(curves, references):
        model, ref = _shared_grid(curve, reference, exclude_target_only)
        model_range = model.max() - model.min()
        scale = ((ref.max() - ref.min()) / model_range) if model_range > 0 else 0.0
        pred = model * scale
        pred = pred - pred.mean() + ref.mean()
        per_condition[curve.condition] = _r2(pred, ref)
        all_pred.append(pred)
        all_obs.append(ref)
    combined = _r2(np.concatenate(all_pred), np.concatenate(all_obs))
    return per_condition, combined


def per_subject_log_slopes(cells: list[CellResult], condition: str,
                           include_target_only: bool = False) -> np.ndarray:
    """Log-slope (rt per natural-log unit of set size) fitted per subject."""
    curves = subject_curves(cells, condition)
    return np.array([fit_log(curves[s], include_target_only)[0]
                     for s in sorted(curves)])


def paired_slope_comparison(slopes_a: np.ndarray, slopes_b: np.ndarray
                            ) -> tuple[float, float, bool]:
    """Matched-seed comparison of per-subject slopes.

    Returns (mean difference, SEM of the difference, indistinguishable?),
    where indistinguishable means |mean| < 2 SEM.
    """
    diff = np.asarray(slopes_a) - np.asarray(slopes_b)
    mean = float(diff.mean())
    sem = float(diff.std(ddof=1) / math.sqrt(diff.size))
    return mean, sem, abs(mean) < 2.0 * sem


def load_reference_csv(text: str, provenance: str = "user-supplied CSV"
                       ) -> list[ReferenceSeries]:
    """Parse ``label,set_size,mean_rt_ms`` rows into reference series."""
    reader = csv.DictReader(io.StringIO(text))
    needed = {"label", "set_size", "mean_rt_ms"}
    if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
        raise ValueError("reference CSV must have header label,set_size,mean_rt_ms")
    grouped: dict[str, list[tuple[int, float]]] = {}
    for row in reader:
        grouped.setdefault(row["label"], []).append(
            (int(row["set_size"]), float(row["mean_rt_ms"])))
    out = []
    for label, points in grouped.items():
        points.sort()
        out.append(ReferenceSeries(
            label=label,
            set_sizes=tuple(n for n, _ in points),
            mean_rt_ms=tuple(v for _, v in points),
            provenance=provenance))
    return out
