"""Tail-area false-discovery-rate estimation and thresholding.

The estimate for a cutoff c is (expected null count beyond c) / (observed
count beyond c), with the null count taken from either the theoretical
standard normal or an empirically fitted normal, scaled by the null
proportion p0.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import (
    GaussianParams,
    check_side,
    normal_pdf,
    normal_tail,
)
from .errors import DomainError, EmptyTailWarning
from .zvalues import as_z_array

logger = logging.getLogger(__name__)

THEORETICAL = "theoretical"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class GaussianMixture:
    """Finite normal mixture; a plain Gaussian is the one-component case.

    Components with sd = 0 are point masses: they can be sampled from but
    carry no density, so pdf/tail refuse them.
    """

    weights: tuple[float, ...]
    means: tuple[float, ...]
    sds: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "sds", tuple(float(s) for s in self.sds))
        k = len(self.weights)
        if k == 0 or len(self.means) != k or len(self.sds) != k:
            raise DomainError("mixture needs matching, non-empty weights/means/sds")
        if any(not math.isfinite(v) for v in self.weights + self.means + self.sds):
            raise DomainError("mixture parameters must be finite")
        if any(w <= 0.0 for w in self.weights):
            raise DomainError("mixture weights must be positive")
        if any(s < 0.0 for s in self.sds):
            raise DomainError("mixture sds must be >= 0")
        total = sum(self.weights)
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"mixture weights must sum to 1, got {total}")

    @classmethod
    def single(cls, mean: float, sd: float) -> "GaussianMixture":
        return cls(weights=(1.0,), means=(mean,), sds=(sd,))

    @classmethod
    def point_mass_plus_normal(
        cls, p_zero: float, mean: float, sd: float
    ) -> "GaussianMixture":
        """Spike at zero with probability p_zero, normal component otherwise."""
        if not 0.0 < p_zero < 1.0:
            raise DomainError("p_zero must lie strictly inside (0, 1)")
        return cls(weights=(p_zero, 1.0 - p_zero), means=(0.0, mean), sds=(0.0, sd))

    def _require_density(self):
        if any(s == 0.0 for s in self.sds):
            raise DomainError("mixture with point-mass components has no density")

    def pdf(self, z):
        self._require_density()
        arr = np.asarray(z, dtype=float)
        out = np.zeros_like(arr, dtype=float)
        for w, m, s in zip(self.weights, self.means, self.sds):
            out = out + w * normal_pdf(arr, GaussianParams(m, s))
        return out if arr.ndim else float(out)

    def tail(self, c, side: str):
        """Mixture probability beyond c on the given side."""
        self._require_density()
        check_side(side)
        arr = np.asarray(c, dtype=float)
        out = np.zeros_like(arr, dtype=float)
        for w, m, s in zip(self.weights, self.means, self.sds):
            out = out + w * normal_tail(arr, GaussianParams(m, s), side)
        return out if arr.ndim else float(out)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        which = rng.choice(len(self.weights), size=n, p=self.weights)
        means = np.asarray(self.means)[which]
        sds = np.asarray(self.sds)[which]
        return rng.normal(means, sds)


@dataclass(frozen=True)
class NullModel:
    """Null distribution for z-values plus the null proportion p0."""

    kind: str
    params: GaussianParams
    p0: float

    def __post_init__(self):
        if self.kind not in (THEORETICAL, EMPIRICAL):
            raise DomainError(f"null kind must be {THEORETICAL!r} or {EMPIRICAL!r}")
        if self.kind == THEORETICAL and (self.params.mean != 0.0 or self.params.sd != 1.0):
            raise DomainError("theoretical null is the standard normal; use empirical otherwise")
        if not 0.0 < self.p0 <= 1.0:
            raise DomainError(f"p0 must lie in (0, 1], got {self.p0}")

    @classmethod
    def theoretical(cls, p0: float | None = None) -> "NullModel":
        if p0 is None:
            logger.info("p0 not supplied; defaulting to 1.0 (classical step-up convention)")
            p0 = 1.0
        return cls(kind=THEORETICAL, params=GaussianParams(0.0, 1.0), p0=p0)

    @classmethod
    def empirical(cls, mean: float, sd: float, p0: float) -> "NullModel":
        return cls(kind=EMPIRICAL, params=GaussianParams(mean, sd), p0=p0)

    def tail(self, c, side: str):
        return normal_tail(c, self.params, side)


@dataclass(frozen=True)
class TwoGroupsModel:
    """Mixture model for simultaneous testing: each case is null with
    probability p0 (z from the null normal) or non-null (z from alt)."""

    p0: float
    null: GaussianParams = GaussianParams(0.0, 1.0)
    alt: GaussianMixture | None = None

    def __post_init__(self):
        if not 0.0 < self.p0 <= 1.0:
            raise DomainError(f"p0 must lie in (0, 1], got {self.p0}")
        if isinstance(self.alt, GaussianParams):
            object.__setattr__(
                self, "alt", GaussianMixture.single(self.alt.mean, self.alt.sd)
            )
        if self.p0 < 1.0:
            if self.alt is None:
                raise DomainError("p0 < 1 requires an alternative density")
            if any(s <= 0.0 for s in self.alt.sds):
                raise DomainError("alternative density components need sd > 0")

    def mixture_tail(self, c, side: str):
        """Tail of the marginal z distribution: p0 * null tail + p1 * alt tail."""
        check_side(side)
        out = self.p0 * normal_tail(c, self.null, side)
        if self.p0 < 1.0:
            out = out + (1.0 - self.p0) * self.alt.tail(c, side)
        return out

    def pdf(self, z):
        out = self.p0 * normal_pdf(z, self.null)
        if self.p0 < 1.0:
            out = out + (1.0 - self.p0) * self.alt.pdf(z)
        return out

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draw n z-values; returns (z, is_null)."""
        is_null = rng.random(n) < self.p0
        z = np.empty(n)
        k = int(is_null.sum())
        z[is_null] = rng.normal(self.null.mean, self.null.sd, k)
        if k < n:
            z[~is_null] = self.alt.sample(n - k, rng)
        return z, is_null


class CurvePoint(NamedTuple):
    """One row of the estimated Fdr curve at a candidate cutoff."""

    cutoff: float
    n_beyond: int
    expected_null: float
    fdr: float

    @property
    def fdr_clipped(self) -> float:
        return min(self.fdr, 1.0)


@dataclass
class FdrReport:
    """Result of a tail-area Fdr threshold scan."""

    side: str
    q: float
    threshold: float | None
    discoveries: np.ndarray
    fdr_at_threshold: float | None
    curve: list[CurvePoint]
    case_fdr: np.ndarray
    null: NullModel
    n_cases: int

    @property
    def n_discoveries(self) -> int:
        return int(self.discoveries.size)

    def to_dict(self, include_curve: bool = True) -> dict:
        out = {
            "side": self.side,
            "q": self.q,
            "threshold": self.threshold,
            "n_cases": self.n_cases,
            "n_discoveries": self.n_discoveries,
            "discoveries": [int(i) for i in self.discoveries],
            "fdr_at_threshold": self.fdr_at_threshold,
            "fdr_at_threshold_clipped": (
                None if self.fdr_at_threshold is None else min(self.fdr_at_threshold, 1.0)
            ),
            "null": {
                "kind": self.null.kind,
                "mean": self.null.params.mean,
                "sd": self.null.params.sd,
                "p0": self.null.p0,
            },
        }
        if include_curve:
            out["curve"] = [
                {
                    "cutoff": p.cutoff,
                    "n_beyond": p.n_beyond,
                    "expected_null": p.expected_null,
                    "fdr": p.fdr,
                    "fdr_clipped": p.fdr_clipped,
                }
                for p in self.curve
            ]
        return out


def _counts_beyond(sorted_z: np.ndarray, cutoffs: np.ndarray, side: str) -> np.ndarray:
    n = sorted_z.size
    if side == "right":
        return n - np.searchsorted(sorted_z, cutoffs, side="left")
    return np.searchsorted(sorted_z, cutoffs, side="right")


def fdr_hat(z, c: float, null: NullModel, side: str = "right") -> float:
    """Estimated tail-area false discovery rate at cutoff c.

    Returns (n_cases * p0 * null tail beyond c) / (observed count beyond c).
    The raw ratio is returned and may exceed 1. An empty tail is flagged and
    reported as +inf.
    """
    check_side(side)
    arr = as_z_array(z)
    if math.isnan(c):
        raise DomainError("cutoff must not be NaN")
    sorted_z = np.sort(arr)
    n_beyond = int(_counts_beyond(sorted_z, np.asarray([c]), side)[0])
    expected_null = arr.size * null.p0 * null.tail(c, side)
    if n_beyond == 0:
        warnings.warn(
            f"no z-values beyond {c} on the {side}; Fdr estimate undefined (+inf)",
            EmptyTailWarning,
            stacklevel=2,
        )
        return math.inf
    return expected_null / n_beyond


def bh_threshold(z, q: float, null: NullModel, side: str = "right") -> FdrReport:
    """Largest discovery set whose estimated Fdr does not exceed q.

    Candidate cutoffs are the observed z-values; on the right side the
    threshold is the smallest candidate with estimate <= q (the mirror image
    on the left). Cases tied with the threshold are all discovered. With the
    theoretical null and p0 = 1 the discovery set coincides with the
    classical step-up procedure on one-sided p-values.
    """
    check_side(side)
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie strictly inside (0, 1), got {q}")
    arr = as_z_array(z)
    n = arr.size

    sorted_z = np.sort(arr)
    cutoffs = np.unique(arr)
    n_beyond = _counts_beyond(sorted_z, cutoffs, side)
    expected_null = n * null.p0 * null.tail(cutoffs, side)
    fdr = expected_null / n_beyond
    curve = [
        CurvePoint(float(c), int(k), float(e), float(f))
        for c, k, e, f in zip(cutoffs, n_beyond, expected_null, fdr)
    ]

    positions = np.searchsorted(cutoffs, arr)
    case_fdr = fdr[positions]

    ok = np.nonzero(fdr <= q)[0]
    if ok.size == 0:
        return FdrReport(
            side=side,
            q=q,
            threshold=None,
            discoveries=np.empty(0, dtype=int),
            fdr_at_threshold=None,
            curve=curve,
            case_fdr=case_fdr,
            null=null,
            n_cases=n,
        )

    pick = ok[0] if side == "right" else ok[-1]
    threshold = float(cutoffs[pick])
    if side == "right":
        discoveries = np.nonzero(arr >= threshold)[0]
    else:
        discoveries = np.nonzero(arr <= threshold)[0]
    return FdrReport(
        side=side,
        q=q,
        threshold=threshold,
        discoveries=discoveries,
        fdr_at_threshold=float(fdr[pick]),
        curve=curve,
        case_fdr=case_fdr,
        null=null,
        n_cases=n,
    )


def true_fdr(model: TwoGroupsModel, c: float, side: str = "right") -> float:
    """Exact tail-area false discovery rate under a two-groups model."""
    check_side(side)
    if math.isnan(c):
        raise DomainError("cutoff must not be NaN")
    null_tail = normal_tail(c, model.null, side)
    mix_tail = model.mixture_tail(c, side)
    if mix_tail == 0.0:
        raise DomainError(f"mixture tail mass is zero at {c}; true Fdr undefined")
    return model.p0 * null_tail / mix_tail
