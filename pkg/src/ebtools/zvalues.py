"""Z-value construction: two-sample t statistics mapped to the normal scale."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import normal_quantile, student_t_cdf
from .errors import DataError, DomainError, SaturationWarning

#: Largest |z| the t->z map emits; beyond this the null cdf saturates double
#: precision, so values are clamped (ranking preserved) and the rows flagged.
Z_SATURATION = 8.29


def as_z_array(z) -> np.ndarray:
    """Coerce a ZVector or sequence to a validated 1-d float array."""
    if isinstance(z, ZVector):
        return z.z
    arr = np.asarray(z, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("z must be a non-empty one-dimensional sequence")
    if not np.all(np.isfinite(arr)):
        raise DomainError("z-values must be finite")
    return arr


@dataclass
class ZVector:
    """Per-case z-values with optional case labels and a per-case covariate."""

    z: np.ndarray
    labels: list[str] | None = None
    covariate: np.ndarray | None = None
    clamped: np.ndarray | None = None

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        if self.z.ndim != 1 or self.z.size == 0:
            raise DataError("z must be a non-empty one-dimensional sequence")
        if not np.all(np.isfinite(self.z)):
            raise DataError("z-values must all be finite")
        n = self.z.size
        if self.labels is not None:
            self.labels = [str(label) for label in self.labels]
            if len(self.labels) != n:
                raise DataError(f"{len(self.labels)} labels for {n} z-values")
        if self.covariate is not None:
            self.covariate = np.asarray(self.covariate, dtype=float)
            if self.covariate.shape != (n,):
                raise DataError("covariate must have one value per case")
            if not np.all(np.isfinite(self.covariate)):
                raise DataError("covariate values must all be finite")
        if self.clamped is not None:
            self.clamped = np.asarray(self.clamped, dtype=bool)
            if self.clamped.shape != (n,):
                raise DataError("clamped flags must have one entry per case")

    def __len__(self) -> int:
        return int(self.z.size)

    def label_of(self, i: int) -> str:
        """Case label, defaulting to the 1-based position."""
        return self.labels[i] if self.labels is not None else str(i + 1)

    def all_labels(self) -> list[str]:
        return [self.label_of(i) for i in range(len(self))]

    def subset(self, indices) -> "ZVector":
        idx = np.asarray(indices, dtype=int)
        return ZVector(
            z=self.z[idx],
            labels=[self.labels[i] for i in idx] if self.labels is not None else None,
            covariate=self.covariate[idx] if self.covariate is not None else None,
            clamped=self.clamped[idx] if self.clamped is not None else None,
        )


@dataclass
class ExpressionMatrix:
    """Cases-by-subjects expression values with a binary group label per subject."""

    values: np.ndarray
    row_labels: list[str]
    is_treatment: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] < 1:
            raise DataError("expression matrix must be 2-dimensional with at least one row")
        if not np.all(np.isfinite(self.values)):
            raise DataError("expression matrix must not contain missing or non-finite values")
        self.row_labels = [str(label) for label in self.row_labels]
        if len(self.row_labels) != self.values.shape[0]:
            raise DataError("one row label required per matrix row")
        self.is_treatment = np.asarray(self.is_treatment, dtype=bool)
        if self.is_treatment.shape != (self.values.shape[1],):
            raise DataError("one group flag required per matrix column")
        n_treat = int(self.is_treatment.sum())
        n_control = int(self.is_treatment.size - n_treat)
        if n_treat < 2 or n_control < 2:
            raise DataError(
                f"each group needs at least 2 subjects (control={n_control}, treatment={n_treat})"
            )

    @property
    def n_cases(self) -> int:
        return int(self.values.shape[0])


def two_sample_t(matrix: ExpressionMatrix) -> tuple[np.ndarray, int]:
    """Pooled-variance two-sample t per row; positive t means treatment > control.

    Returns the t statistics and the shared degrees of freedom n1 + n2 - 2.
    Rows with zero pooled variance are an error, named in the message.
    """
    treat = matrix.values[:, matrix.is_treatment]
    control = matrix.values[:, ~matrix.is_treatment]
    n_t, n_c = treat.shape[1], control.shape[1]
    df = n_t + n_c - 2

    mean_t = treat.mean(axis=1)
    mean_c = control.mean(axis=1)
    ss_t = ((treat - mean_t[:, None]) ** 2).sum(axis=1)
    ss_c = ((control - mean_c[:, None]) ** 2).sum(axis=1)
    pooled_var = (ss_t + ss_c) / df

    degenerate = np.nonzero(pooled_var == 0.0)[0]
    if degenerate.size:
        names = ", ".join(repr(matrix.row_labels[i]) for i in degenerate[:5])
        more = "" if degenerate.size <= 5 else f" (and {degenerate.size - 5} more)"
        raise DataError(f"zero pooled variance in row(s) {names}{more}")

    t = (mean_t - mean_c) / np.sqrt(pooled_var * (1.0 / n_t + 1.0 / n_c))
    return t, df


def t_to_z(t, df) -> ZVector:
    """Map t statistics to z-values via the normal quantile of the t cdf.

    The map is monotone and odd; t = 0 gives z = 0 exactly. Statistics so
    extreme that the cdf saturates are clamped to +-Z_SATURATION and flagged.
    """
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise DomainError("t statistics must be finite")

    # Work on the lower tail of -|t|: symmetric, and free of 1 - p cancellation.
    lower = student_t_cdf(-np.abs(arr), df)
    underflow = lower <= 0.0
    tiny = np.finfo(float).tiny
    magnitude = -normal_quantile(np.clip(lower, tiny, 0.5))
    clamped = underflow | (magnitude > Z_SATURATION)
    magnitude = np.minimum(magnitude, Z_SATURATION)

    z = np.where(arr < 0.0, -magnitude, magnitude)
    z[arr == 0.0] = 0.0
    if clamped.any():
        warnings.warn(
            f"{int(clamped.sum())} row(s) saturated the t->z map; z clamped to +-{Z_SATURATION}",
            SaturationWarning,
            stacklevel=2,
        )
    return ZVector(z=z, clamped=clamped)


def matrix_to_zvector(matrix: ExpressionMatrix) -> ZVector:
    """Full pipeline: two-sample t per row, then the t->z transform, labels attached."""
    t, df = two_sample_t(matrix)
    zv = t_to_z(t, df)
    zv.labels = list(matrix.row_labels)
    return zv
