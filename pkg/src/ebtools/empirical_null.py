"""Empirical null estimation from the center of the z-value histogram.

The central z-values (between two sample quantiles) are treated as draws
from a normal distribution truncated to that interval; its location and
scale are maximum-likelihood estimates, and the null proportion p0 is the
observed central fraction divided by the fitted interval mass.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distributions import GaussianParams, normal_cdf, normal_pdf, normal_tail
from .errors import ClipWarning, ConvergenceError, DataError, DomainError
from .fdr import NullModel
from .zvalues import as_z_array

MIN_CENTRAL_COUNT = 200
GRADIENT_TOL = 1e-8
MAX_ITERATIONS = 500


@dataclass(frozen=True)
class CentralFitConfig:
    """Quantile levels bounding the central interval used for the fit."""

    lower_q: float = 0.25
    upper_q: float = 0.75

    def __post_init__(self):
        if not 0.0 < self.lower_q < self.upper_q < 1.0:
            raise DomainError(
                f"need 0 < lower_q < upper_q < 1, got ({self.lower_q}, {self.upper_q})"
            )


@dataclass
class EmpiricalNullFit:
    """Fitted null location/scale and null proportion."""

    mean: float
    sd: float
    p0: float
    interval: tuple[float, float] | None = None
    n_in_interval: int = 0
    converged: bool = True
    loglik_trace: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.sd <= 0.0:
            raise DomainError(f"fitted sd must be positive, got {self.sd}")
        if not 0.0 < self.p0 <= 1.0:
            raise DomainError(f"p0 must lie in (0, 1], got {self.p0}")
        if self.interval is not None and not self.interval[0] < self.interval[1]:
            raise DomainError("interval must satisfy lo < hi")

    def to_null_model(self) -> NullModel:
        return NullModel.empirical(self.mean, self.sd, self.p0)

    def to_dict(self) -> dict:
        return {
            "delta0": self.mean,
            "sigma0": self.sd,
            "p0": self.p0,
            "interval": list(self.interval) if self.interval is not None else None,
            "n": self.n_in_interval,
            "converged": self.converged,
        }


def _mean_loglik_and_grad(theta, central, lo, hi):
    """Mean truncated-normal log-likelihood and its gradient in (mean, log sd)."""
    mean, log_sd = theta
    sd = math.exp(log_sd)
    u = (central - mean) / sd
    a = (lo - mean) / sd
    b = (hi - mean) / sd
    mass = normal_cdf(b) - normal_cdf(a)
    if mass <= 0.0 or not math.isfinite(mass):
        return -math.inf, np.zeros(2)

    mean_u = float(u.mean())
    mean_u2 = float((u * u).mean())
    loglik = -log_sd - 0.5 * mean_u2 - math.log(mass) - 0.5 * math.log(2.0 * math.pi)

    pdf_a, pdf_b = normal_pdf(a), normal_pdf(b)
    d_mean = mean_u / sd - (pdf_a - pdf_b) / (sd * mass)
    d_sd = (mean_u2 - 1.0) / sd - (a * pdf_a - b * pdf_b) / (sd * mass)
    return loglik, np.array([d_mean, d_sd * sd])


def _maximize_truncated_loglik(central, lo, hi):
    """BFGS ascent with backtracking; the objective never decreases across iterations."""
    sd0 = float(np.std(central)) or (hi - lo) / 4.0
    theta = np.array([float(np.median(central)), math.log(max(sd0, 1e-3))])
    inv_hess = np.eye(2)

    loglik, grad = _mean_loglik_and_grad(theta, central, lo, hi)
    trace = [(float(theta[0]), math.exp(theta[1]), loglik)]
    if not math.isfinite(loglik):
        raise ConvergenceError("central interval carries no null mass at the start", trace)

    for _ in range(MAX_ITERATIONS):
        if float(np.linalg.norm(grad)) <= GRADIENT_TOL:
            return theta, trace
        direction = inv_hess @ grad
        if float(direction @ grad) <= 0.0:
            direction = grad
            inv_hess = np.eye(2)

        step = 1.0
        slope = float(direction @ grad)
        while step > 1e-14:
            candidate = theta + step * direction
            new_loglik, new_grad = _mean_loglik_and_grad(candidate, central, lo, hi)
            if math.isfinite(new_loglik) and new_loglik >= loglik + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            raise ConvergenceError(
                "truncated-likelihood line search stalled", trace
            )

        delta_theta = candidate - theta
        delta_grad = new_grad - grad
        curvature = float(delta_theta @ -delta_grad)
        if curvature > 1e-12:
            rho = 1.0 / curvature
            outer = np.outer(delta_theta, -delta_grad)
            eye = np.eye(2)
            inv_hess = (eye - rho * outer) @ inv_hess @ (eye - rho * outer.T)
            inv_hess += rho * np.outer(delta_theta, delta_theta)

        theta, loglik, grad = candidate, new_loglik, new_grad
        trace.append((float(theta[0]), math.exp(theta[1]), loglik))

    raise ConvergenceError(
        f"empirical null fit did not reach gradient norm {GRADIENT_TOL} "
        f"within {MAX_ITERATIONS} iterations",
        trace,
    )


def fit_empirical_null(z, config: CentralFitConfig = CentralFitConfig()) -> EmpiricalNullFit:
    """Fit an empirical null N(mean, sd^2) and null proportion p0 from central z-values.

    The interval is set by sample quantiles of z; at least 200 values must fall
    inside it (small-sample empirical nulls are unreliable and are refused).
    p0 is clipped to (0, 1] with a warning if sampling noise pushes it above 1.
    """
    arr = as_z_array(z)
    lo, hi = (float(v) for v in np.quantile(arr, [config.lower_q, config.upper_q]))
    if not lo < hi:
        raise DataError("central interval is degenerate; z-values too concentrated")
    inside = (arr >= lo) & (arr <= hi)
    central = arr[inside]
    if central.size < MIN_CENTRAL_COUNT:
        raise DataError(
            f"empirical null needs at least {MIN_CENTRAL_COUNT} central z-values, "
            f"found {central.size}"
        )

    theta, trace = _maximize_truncated_loglik(central, lo, hi)
    mean = float(theta[0])
    sd = float(math.exp(theta[1]))

    mass = normal_cdf((hi - mean) / sd) - normal_cdf((lo - mean) / sd)
    raw_p0 = (central.size / arr.size) / mass
    p0 = raw_p0
    if raw_p0 > 1.0:
        warnings.warn(
            f"raw null proportion {raw_p0:.4f} exceeds 1; clipped to 1.0",
            ClipWarning,
            stacklevel=2,
        )
        p0 = 1.0

    return EmpiricalNullFit(
        mean=mean,
        sd=sd,
        p0=p0,
        interval=(lo, hi),
        n_in_interval=int(central.size),
        converged=True,
        loglik_trace=[t[2] for t in trace],
    )


def null_expected_exceedances(fit: EmpiricalNullFit, n_cases: int, c: float, side: str = "right") -> float:
    """Expected number of null cases beyond c among n_cases under the fitted null."""
    if n_cases < 1:
        raise DomainError(f"n_cases must be positive, got {n_cases}")
    return n_cases * fit.p0 * normal_tail(c, GaussianParams(fit.mean, fit.sd), side)
