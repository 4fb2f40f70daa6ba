"""Covariate-aware analysis: stratified Fdr runs, running-median detrending,
and ordinary least squares for borrowing strength across related cases."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .empirical_null import CentralFitConfig, fit_empirical_null
from .errors import DataError, DomainError
from .fdr import FdrReport, NullModel, bh_threshold
from .zvalues import ZVector


@dataclass
class Stratification:
    """Named, non-empty strata that partition the cases."""

    strata: list[tuple[str, np.ndarray]]
    n_cases: int

    def __post_init__(self):
        if not self.strata:
            raise DataError("at least one stratum required")
        seen = np.zeros(self.n_cases, dtype=bool)
        normalized = []
        for name, indices in self.strata:
            idx = np.asarray(indices, dtype=int)
            if idx.size == 0:
                raise DataError(f"stratum {name!r} is empty")
            if idx.min() < 0 or idx.max() >= self.n_cases:
                raise DataError(f"stratum {name!r} has out-of-range case indices")
            if seen[idx].any():
                raise DataError(f"stratum {name!r} overlaps another stratum")
            seen[idx] = True
            normalized.append((str(name), idx))
        if not seen.all():
            raise DataError("strata must partition all cases")
        self.strata = normalized

    @classmethod
    def split_at(cls, z: ZVector, thresholds) -> "Stratification":
        """Cut the covariate at the given threshold(s); strata are the intervals."""
        if z.covariate is None:
            raise DataError("splitting requires a covariate")
        cuts = sorted(float(t) for t in np.atleast_1d(thresholds))
        if not cuts:
            raise DataError("at least one split threshold required")
        edges = [-math.inf] + cuts + [math.inf]
        strata = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            mask = (z.covariate >= lo) & (z.covariate < hi)
            if lo == -math.inf:
                name = f"x<{hi:g}"
            elif hi == math.inf:
                name = f"x>={lo:g}"
            else:
                name = f"{lo:g}<=x<{hi:g}"
            idx = np.nonzero(mask)[0]
            if idx.size == 0:
                raise DataError(f"stratum {name!r} is empty")
            strata.append((name, idx))
        return cls(strata=strata, n_cases=len(z))

    @classmethod
    def from_labels(cls, labels) -> "Stratification":
        """Group cases by stratum label, in order of first appearance."""
        labels = [str(label) for label in labels]
        order: list[str] = []
        for label in labels:
            if label not in order:
                order.append(label)
        arr = np.asarray(labels)
        strata = [(name, np.nonzero(arr == name)[0]) for name in order]
        return cls(strata=strata, n_cases=len(labels))


@dataclass
class StratifiedFdrResult:
    """Per-stratum Fdr reports next to the pooled analysis.

    Which analysis is the right one is left to the analyst; this report only
    juxtaposes them. Discovery indices are global case indices throughout.
    """

    per_stratum: dict[str, FdrReport]
    pooled: FdrReport
    nulls: dict[str, NullModel]


def stratified_fdr(
    z: ZVector,
    stratification: Stratification,
    q: float,
    null: NullModel,
    side: str = "right",
    per_stratum_empirical: bool = False,
    central: CentralFitConfig = CentralFitConfig(),
) -> StratifiedFdrResult:
    """Run the Fdr threshold scan inside each stratum and once pooled.

    By default every stratum shares the supplied null; with
    per_stratum_empirical an empirical null is fitted inside each stratum
    (stratum centers can differ, not just their tails).
    """
    if stratification.n_cases != len(z):
        raise DataError("stratification was built for a different number of cases")
    per_stratum: dict[str, FdrReport] = {}
    nulls: dict[str, NullModel] = {}
    for name, idx in stratification.strata:
        sub = z.subset(idx)
        stratum_null = null
        if per_stratum_empirical:
            stratum_null = fit_empirical_null(sub, central).to_null_model()
        report = bh_threshold(sub, q, stratum_null, side)
        report.discoveries = idx[report.discoveries]
        per_stratum[name] = report
        nulls[name] = stratum_null
    pooled = bh_threshold(z, q, null, side)
    return StratifiedFdrResult(per_stratum=per_stratum, pooled=pooled, nulls=nulls)


@dataclass
class DetrendResult:
    """Detrended z-values: adjusted = z - running median against the covariate."""

    adjusted: ZVector
    window: int
    trend: np.ndarray


def running_median_detrend(z: ZVector, window: int) -> DetrendResult:
    """Subtract a running median of z taken along the covariate ordering.

    The window is centered and must be odd; near the boundaries it shrinks
    one-sidedly to the available neighbors.
    """
    if z.covariate is None:
        raise DataError("detrending requires a covariate")
    n = len(z)
    if not isinstance(window, (int, np.integer)) or isinstance(window, bool):
        raise DomainError(f"window must be an integer, got {window!r}")
    if window % 2 == 0:
        raise DomainError(f"window must be odd, got {window}")
    if not 3 <= window <= n:
        raise DomainError(f"window must lie in [3, {n}], got {window}")

    order = np.argsort(z.covariate, kind="stable")
    ordered = z.z[order]
    half = window // 2
    trend_ordered = np.empty(n)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        trend_ordered[i] = np.median(ordered[lo:hi])

    trend = np.empty(n)
    trend[order] = trend_ordered
    adjusted = ZVector(
        z=z.z - trend,
        labels=list(z.labels) if z.labels is not None else None,
        covariate=z.covariate.copy(),
    )
    return DetrendResult(adjusted=adjusted, window=int(window), trend=trend)


@dataclass
class LineFit:
    """Ordinary least squares line with a prediction function."""

    intercept: float
    slope: float

    def predict(self, x0: float) -> float:
        return self.intercept + self.slope * x0

    @property
    def predictor(self) -> Callable[[float], float]:
        return self.predict


def least_squares_line(x, y) -> LineFit:
    """Fit intercept + slope * x by ordinary least squares."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DataError("x and y must be one-dimensional sequences of equal length")
    if xs.size < 2:
        raise DataError("need at least two points")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise DataError("inputs must be finite")
    x_mean = xs.mean()
    sxx = float(((xs - x_mean) ** 2).sum())
    if sxx == 0.0:
        raise DataError("x values are all equal; the line is undetermined")
    y_mean = ys.mean()
    slope = float(((xs - x_mean) * (ys - y_mean)).sum()) / sxx
    return LineFit(intercept=float(y_mean - slope * x_mean), slope=slope)
