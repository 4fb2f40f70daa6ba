"""Figure rendering for the report path; PNG files land next to the tables."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .distributions import normal_pdf
from .effect_size import tweedie_estimate
from .fdr import FdrReport, NullModel
from .relevance import Stratification
from .zvalues import ZVector

DPI = 150


def _finish(fig, path) -> str:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return str(path)


def _overlay_null(ax, null: NullModel, grid: np.ndarray, label: str):
    ax.plot(grid, null.p0 * normal_pdf(grid, null.params), lw=1.5, label=label)


def save_z_histogram(
    path,
    z: ZVector,
    nulls: list[tuple[str, NullModel]] | None = None,
    threshold: float | None = None,
) -> str:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(z.z, bins=min(90, max(20, len(z) // 50 or 20)), density=True,
            color="#9ecae1", edgecolor="white", label="z-values")
    grid = np.linspace(z.z.min() - 0.5, z.z.max() + 0.5, 400)
    for label, null in nulls or []:
        _overlay_null(ax, null, grid, label)
    if threshold is not None:
        ax.axvline(threshold, color="crimson", ls="--", lw=1.2,
                   label=f"threshold {threshold:g}")
    ax.set_xlabel("z")
    ax.set_ylabel("density")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_fdr_curve(path, report: FdrReport) -> str:
    cutoffs = [p.cutoff for p in report.curve]
    values = [p.fdr_clipped for p in report.curve]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(cutoffs, values, lw=1.2, color="#3182bd")
    ax.axhline(report.q, color="gray", ls=":", lw=1.0, label=f"q = {report.q:g}")
    if report.threshold is not None:
        ax.axvline(report.threshold, color="crimson", ls="--", lw=1.2,
                   label=f"threshold {report.threshold:g}")
    ax.set_xlabel("cutoff")
    ax.set_ylabel("estimated Fdr (clipped)")
    ax.set_ylim(0, 1.05)
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_shrinkage_plot(path, labels, observed, estimates, center: float) -> str:
    observed = np.asarray(observed)
    estimates = np.asarray(estimates)
    order = np.argsort(observed)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(observed[order], observed[order], color="gray", lw=1.0, label="identity")
    ax.scatter(observed, estimates, s=22, color="#3182bd", zorder=3, label="shrunken")
    ax.axhline(center, color="crimson", ls=":", lw=1.0, label=f"center {center:.3g}")
    ax.set_xlabel("observed")
    ax.set_ylabel("estimate")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_effect_size_curve(path, fit, z: np.ndarray, mu_hat: np.ndarray,
                           top_indices: np.ndarray) -> str:
    lo, hi = fit.data_range
    grid = np.linspace(lo, hi, 400)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(grid, tweedie_estimate(fit, grid), lw=1.4, color="#3182bd",
            label="estimated effect size")
    ax.plot(grid, grid, color="gray", lw=0.8, ls=":", label="identity")
    ax.scatter(z[top_indices], mu_hat[top_indices], s=26, color="crimson",
               zorder=3, label="top cases")
    ax.axhline(0.0, color="black", lw=0.6)
    ax.set_xlabel("z")
    ax.set_ylabel("posterior mean effect")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_density_fit(path, fit, z: np.ndarray) -> str:
    lo, hi = fit.data_range
    grid = np.linspace(lo, hi, 400)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(z, bins=fit.bin_edges, density=True, color="#9ecae1",
            edgecolor="white", label="z-values")
    ax.plot(grid, fit.pdf(grid), lw=1.5, color="#08519c", label="fitted density")
    ax.set_xlabel("z")
    ax.set_ylabel("density")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_stratum_histograms(path, z: ZVector, strat: Stratification) -> str:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, idx in strat.strata:
        ax.hist(z.z[idx], bins=40, density=True, histtype="step", lw=1.4, label=name)
    ax.set_xlabel("z")
    ax.set_ylabel("density")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_covariate_trend(path, z: ZVector, trend: np.ndarray | None = None) -> str:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.scatter(z.covariate, z.z, s=4, alpha=0.35, color="#3182bd", label="z")
    if trend is not None:
        order = np.argsort(z.covariate)
        ax.plot(z.covariate[order], trend[order], color="crimson", lw=1.5,
                label="running median")
    ax.set_xlabel("covariate")
    ax.set_ylabel("z")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_metric_histogram(path, values: np.ndarray, name: str,
                          reference: float | None = None) -> str:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(values, bins=40, color="#9ecae1", edgecolor="white")
    if reference is not None:
        ax.axvline(reference, color="crimson", ls="--", lw=1.2, label=f"{reference:g}")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel(name)
    ax.set_ylabel("replications")
    return _finish(fig, path)
