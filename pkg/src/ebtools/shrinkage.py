"""Point estimation under the normal-normal model: exact Bayes and James-Stein."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyWarning, DomainError


@dataclass(frozen=True)
class NormalNormalModel:
    """Two-level sampling model: true means from a normal prior, observations
    normal around their true mean with known sampling variance."""

    prior_mean: float
    prior_var: float
    sampling_var: float

    def __post_init__(self):
        for name in ("prior_mean", "prior_var", "sampling_var"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.prior_var < 0.0:
            raise DomainError(f"prior_var must be >= 0, got {self.prior_var}")
        if self.sampling_var <= 0.0:
            raise DomainError(f"sampling_var must be > 0, got {self.sampling_var}")

    @property
    def shrinkage_weight(self) -> float:
        """Weight kept on the observation: prior_var / (prior_var + sampling_var)."""
        return self.prior_var / (self.prior_var + self.sampling_var)


@dataclass
class ShrinkageResult:
    """Shrunken estimates plus the center and weight that produced them."""

    estimates: np.ndarray
    center: float
    shrinkage_weight: float
    method: str
    degenerate: bool = False


def posterior_odds(prior_odds: float, likelihood_ratio: float) -> float:
    """Combine prior odds with a likelihood ratio by multiplication."""
    for name, value in (("prior_odds", prior_odds), ("likelihood_ratio", likelihood_ratio)):
        if not math.isfinite(value) or value <= 0.0:
            raise DomainError(f"{name} must be a positive finite number, got {value}")
    return prior_odds * likelihood_ratio


def bayes_posterior_mean(x, model: NormalNormalModel) -> ShrinkageResult:
    """Posterior mean of each true effect given its observation (squared-error Bayes rule)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("observations must be finite")
    weight = model.shrinkage_weight
    estimates = model.prior_mean + weight * (arr - model.prior_mean)
    return ShrinkageResult(
        estimates=estimates,
        center=model.prior_mean,
        shrinkage_weight=weight,
        method="exact-bayes",
    )


def james_stein(x, sampling_var: float) -> ShrinkageResult:
    """Positive-part James-Stein estimate, shrinking toward the grand mean.

    The center and weight are estimated from the observations themselves:
    center is the grand mean, and the weight is
    max(0, 1 - (N - 3) * sampling_var / sum((x - center)^2)).
    Requires at least 4 cases; identical observations yield zero weight and
    a degeneracy flag.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DomainError("observations must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise DomainError("observations must be finite")
    n = arr.size
    if n < 4:
        raise DomainError(f"James-Stein estimation needs at least 4 cases, got {n}")
    if not (math.isfinite(sampling_var) and sampling_var > 0.0):
        raise DomainError(f"sampling_var must be > 0, got {sampling_var}")

    center = float(arr.mean())
    spread = float(((arr - center) ** 2).sum())
    if spread == 0.0:
        warnings.warn(
            "all observations identical; shrinkage weight set to 0",
            DegeneracyWarning,
            stacklevel=2,
        )
        return ShrinkageResult(
            estimates=np.full(n, center),
            center=center,
            shrinkage_weight=0.0,
            method="james-stein",
            degenerate=True,
        )

    weight = max(0.0, 1.0 - (n - 3) * sampling_var / spread)
    estimates = center + weight * (arr - center)
    return ShrinkageResult(
        estimates=estimates,
        center=center,
        shrinkage_weight=weight,
        method="james-stein",
    )
