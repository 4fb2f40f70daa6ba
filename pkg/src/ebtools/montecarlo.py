"""Monte Carlo generators and certification oracles for the toolkit's guarantees.

Randomness comes from numpy's PCG64 (default_rng); every replication draws
from its own SeedSequence-spawned substream, so results are reproducible
from the master seed and replications stay independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .effect_size import fit_marginal_density, tweedie_estimate
from .errors import DomainError
from .fdr import GaussianMixture, NullModel, TwoGroupsModel, bh_threshold
from .shrinkage import NormalNormalModel, bayes_posterior_mean, james_stein
from .zvalues import ZVector

RNG_ALGORITHM = "numpy.random.default_rng (PCG64); per-replication SeedSequence substreams"

MIN_CERTIFICATION_REPS = 100


@dataclass
class SimConfig:
    """Configuration for one simulation scenario."""

    seed: int
    replications: int
    n_cases: int
    normal_model: NormalNormalModel | None = None
    two_groups: TwoGroupsModel | None = None
    prior: GaussianMixture | None = None
    fixed_means: np.ndarray | None = None
    q: float | None = None
    estimator: str = "james-stein"
    side: str = "right"
    null_model: NullModel | None = None
    keep_traces: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError("replications must be positive")
        if self.n_cases < 1:
            raise DomainError("n_cases must be positive")
        if self.fixed_means is not None:
            self.fixed_means = np.asarray(self.fixed_means, dtype=float)
            if self.fixed_means.shape != (self.n_cases,):
                raise DomainError("fixed_means must have one value per case")
        if self.estimator not in ("james-stein", "exact-bayes"):
            raise DomainError(f"unknown estimator {self.estimator!r}")


@dataclass
class SimResult:
    """Replication-averaged metrics with Monte Carlo standard errors."""

    metrics: dict[str, float]
    standard_errors: dict[str, float]
    replications: int
    seed: int
    traces: dict[str, np.ndarray] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metrics": self.metrics,
            "standard_errors": self.standard_errors,
            "replications": self.replications,
            "seed": self.seed,
        }


def _substreams(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _require_certification(cfg: SimConfig):
    if cfg.replications < MIN_CERTIFICATION_REPS:
        raise DomainError(
            f"certification runs need at least {MIN_CERTIFICATION_REPS} replications, "
            f"got {cfg.replications}"
        )


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, se


def _ratio_of_means_se(num: np.ndarray, den: np.ndarray) -> float:
    """Delta-method standard error of mean(num)/mean(den) over replications."""
    r = num.size
    num_mean, den_mean = num.mean(), den.mean()
    cov = np.cov(num, den, ddof=1)
    var_ratio = (
        cov[0, 0] / den_mean**2
        + num_mean**2 * cov[1, 1] / den_mean**4
        - 2.0 * num_mean * cov[0, 1] / den_mean**3
    ) / r
    return float(math.sqrt(max(var_ratio, 0.0)))


def simulate_normal_normal(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Exact draws from the two-level normal model, one row per replication.

    Returns (true_means, observations), each with shape (replications, n_cases).
    """
    model = cfg.normal_model
    if model is None:
        raise DomainError("simulate_normal_normal requires a normal_model")
    mu = np.empty((cfg.replications, cfg.n_cases))
    x = np.empty((cfg.replications, cfg.n_cases))
    prior_sd = math.sqrt(model.prior_var)
    sampling_sd = math.sqrt(model.sampling_var)
    for r, rng in enumerate(_substreams(cfg.seed, cfg.replications)):
        mu[r] = rng.normal(model.prior_mean, prior_sd, cfg.n_cases)
        x[r] = rng.normal(mu[r], sampling_sd)
    return mu, x


def certify_dominance(cfg: SimConfig) -> SimResult:
    """Estimate total squared error of the shrinkage estimator against the identity.

    True means are either redrawn from the prior each replication or held
    fixed (the frequentist setting of the dominance guarantee). Reports the
    risk ratio with a delta-method standard error.
    """
    _require_certification(cfg)
    model = cfg.normal_model
    if model is None:
        raise DomainError("certify_dominance requires a normal_model")
    if cfg.n_cases < 4:
        raise DomainError(
            f"dominance certification needs at least 4 cases, got {cfg.n_cases}"
        )

    err_estimator = np.empty(cfg.replications)
    err_identity = np.empty(cfg.replications)
    prior_sd = math.sqrt(model.prior_var)
    sampling_sd = math.sqrt(model.sampling_var)
    for r, rng in enumerate(_substreams(cfg.seed, cfg.replications)):
        if cfg.fixed_means is not None:
            mu = cfg.fixed_means
        else:
            mu = rng.normal(model.prior_mean, prior_sd, cfg.n_cases)
        x = rng.normal(mu, sampling_sd)
        if cfg.estimator == "james-stein":
            estimates = james_stein(x, model.sampling_var).estimates
        else:
            estimates = bayes_posterior_mean(x, model).estimates
        err_estimator[r] = ((estimates - mu) ** 2).sum()
        err_identity[r] = ((x - mu) ** 2).sum()

    est_mean, est_se = _mean_se(err_estimator)
    id_mean, id_se = _mean_se(err_identity)
    ratio = est_mean / id_mean
    result = SimResult(
        metrics={
            "estimator_risk": est_mean,
            "identity_risk": id_mean,
            "risk_ratio": ratio,
        },
        standard_errors={
            "estimator_risk": est_se,
            "identity_risk": id_se,
            "risk_ratio": _ratio_of_means_se(err_estimator, err_identity),
        },
        replications=cfg.replications,
        seed=cfg.seed,
    )
    if cfg.keep_traces:
        result.traces = {"estimator_error": err_estimator, "identity_error": err_identity}
    return result


def certify_fdr_control(cfg: SimConfig) -> SimResult:
    """Mean false discovery proportion of the threshold rule under a two-groups model.

    The proportion is 0 on replications with no discoveries. Unless a null
    model is supplied, the rule runs against the theoretical null with p0 = 1
    (the classical convention the control guarantee is stated for).
    """
    _require_certification(cfg)
    if cfg.two_groups is None:
        raise DomainError("certify_fdr_control requires a two_groups model")
    if cfg.q is None or not 0.0 < cfg.q < 1.0:
        raise DomainError("certify_fdr_control requires q strictly inside (0, 1)")
    null = cfg.null_model if cfg.null_model is not None else NullModel.theoretical(p0=1.0)

    fdp = np.empty(cfg.replications)
    n_disc = np.empty(cfg.replications)
    for r, rng in enumerate(_substreams(cfg.seed, cfg.replications)):
        z, is_null = cfg.two_groups.sample(cfg.n_cases, rng)
        report = bh_threshold(ZVector(z), cfg.q, null, cfg.side)
        n_disc[r] = report.n_discoveries
        if report.n_discoveries == 0:
            fdp[r] = 0.0
        else:
            fdp[r] = float(is_null[report.discoveries].mean())

    fdp_mean, fdp_se = _mean_se(fdp)
    disc_mean, disc_se = _mean_se(n_disc)
    result = SimResult(
        metrics={"mean_fdp": fdp_mean, "mean_discoveries": disc_mean},
        standard_errors={"mean_fdp": fdp_se, "mean_discoveries": disc_se},
        replications=cfg.replications,
        seed=cfg.seed,
    )
    if cfg.keep_traces:
        result.traces = {"fdp": fdp, "n_discoveries": n_disc}
    return result


def certify_tweedie(
    cfg: SimConfig,
    grid: np.ndarray | None = None,
    df: int = 7,
    bins: int = 90,
    min_bin_draws: int = 500,
) -> SimResult:
    """Compare the effect-size pipeline against reference posterior means.

    Effects are drawn from the configured prior with unit-variance normal
    observations. For a single-component prior the closed-form posterior mean
    is the reference; a binned conditional-mean reference from the same draws
    is always reported (bins below min_bin_draws draws are ignored).
    """
    _require_certification(cfg)
    prior = cfg.prior
    if prior is None:
        raise DomainError("certify_tweedie requires a prior")
    if grid is None:
        grid = np.linspace(-3.0, 3.0, 61)
    grid = np.asarray(grid, dtype=float)

    closed_form = None
    if len(prior.weights) == 1:
        prior_mean, prior_var = prior.means[0], prior.sds[0] ** 2
        weight = prior_var / (prior_var + 1.0)
        closed_form = prior_mean + weight * (grid - prior_mean)

    bin_edges = np.arange(grid.min(), grid.max() + 0.25, 0.25)
    dev_closed = np.empty(cfg.replications)
    dev_binned = np.empty(cfg.replications)
    for r, rng in enumerate(_substreams(cfg.seed, cfg.replications)):
        mu = prior.sample(cfg.n_cases, rng)
        z = rng.normal(mu, 1.0)
        fit = fit_marginal_density(z, df=df, bins=bins)

        if closed_form is not None:
            dev_closed[r] = float(np.max(np.abs(tweedie_estimate(fit, grid) - closed_form)))
        else:
            dev_closed[r] = math.nan

        which = np.digitize(z, bin_edges) - 1
        deviations = []
        for b in range(bin_edges.size - 1):
            mask = which == b
            if int(mask.sum()) < min_bin_draws:
                continue
            z_bin = float(z[mask].mean())
            deviations.append(abs(float(tweedie_estimate(fit, z_bin)) - float(mu[mask].mean())))
        dev_binned[r] = max(deviations) if deviations else math.nan

    metrics: dict[str, float] = {}
    errors: dict[str, float] = {}
    if closed_form is not None:
        mean, se = _mean_se(dev_closed)
        metrics["max_dev_closed_form"] = mean
        errors["max_dev_closed_form"] = se
    finite_binned = dev_binned[np.isfinite(dev_binned)]
    if finite_binned.size:
        mean, se = _mean_se(finite_binned)
        metrics["max_dev_binned"] = mean
        errors["max_dev_binned"] = se

    result = SimResult(
        metrics=metrics,
        standard_errors=errors,
        replications=cfg.replications,
        seed=cfg.seed,
    )
    if cfg.keep_traces:
        result.traces = {"max_dev_closed_form": dev_closed, "max_dev_binned": dev_binned}
    return result
