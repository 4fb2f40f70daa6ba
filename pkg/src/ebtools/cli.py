"""Command-line orchestration: configuration, file I/O, and report emission.

Each run writes one output directory holding summary.json, flat
tab-separated tables, and (unless disabled) PNG figures rendered from the
same results.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .effect_size import effect_size_report
from .empirical_null import CentralFitConfig, EmpiricalNullFit, fit_empirical_null
from .errors import DataError, ToolkitError, ToolkitWarning
from .fdr import GaussianMixture, NullModel, TwoGroupsModel, bh_threshold
from .fileio import (
    read_json,
    read_matrix,
    read_values,
    read_zvector,
    write_json,
    write_table,
    write_zvector,
)
from .montecarlo import (
    SimConfig,
    certify_dominance,
    certify_fdr_control,
    certify_tweedie,
)
from .relevance import Stratification, running_median_detrend, stratified_fdr
from .shrinkage import NormalNormalModel, james_stein
from .zvalues import matrix_to_zvector

logger = logging.getLogger(__name__)


@dataclass
class AnalysisConfig:
    """One validated run request: the subcommand plus its echoed options."""

    subcommand: str
    out_dir: Path
    options: dict
    figures: bool = True


@dataclass
class RunSummary:
    """What a run did: version, config echo, timing, outputs, and warnings."""

    version: str
    subcommand: str
    config: dict
    elapsed_seconds: float
    outputs: dict
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "subcommand": self.subcommand,
            "config": self.config,
            "elapsed_seconds": self.elapsed_seconds,
            "outputs": self.outputs,
            "warnings": self.warnings,
        }


def _require(options: dict, name: str):
    value = options.get(name)
    if value is None:
        raise DataError(f"missing required option --{name.replace('_', '-')}")
    return value


def _existing_path(options: dict, name: str) -> Path:
    path = Path(_require(options, name))
    if not path.exists():
        raise DataError(f"input file does not exist: {path}")
    return path


def _central_config(options: dict) -> CentralFitConfig:
    return CentralFitConfig(
        lower_q=options.get("lower_q", 0.25), upper_q=options.get("upper_q", 0.75)
    )


def _resolve_null(options: dict, zv) -> NullModel:
    kind = options.get("null", "theoretical")
    p0 = options.get("p0")
    if kind == "theoretical":
        return NullModel.theoretical(p0)
    if options.get("null_fit"):
        payload = read_json(_existing_path(options, "null_fit"))
        try:
            fit = EmpiricalNullFit(
                mean=float(payload["delta0"]),
                sd=float(payload["sigma0"]),
                p0=float(payload["p0"]),
            )
        except KeyError as exc:
            raise DataError(f"null fit JSON lacks key {exc}") from exc
    else:
        fit = fit_empirical_null(zv, _central_config(options))
    return NullModel.empirical(fit.mean, fit.sd, p0 if p0 is not None else fit.p0)


def _report_outputs(report, zv, out_dir: Path, prefix: str = "") -> dict:
    discoveries_path = out_dir / f"{prefix}discoveries.tsv"
    write_table(
        discoveries_path,
        ["label", "z", "fdr", "fdr_clipped"],
        [
            (
                zv.label_of(i),
                zv.z[i],
                report.case_fdr[local],
                min(float(report.case_fdr[local]), 1.0),
            )
            for local, i in enumerate(report.discoveries)
        ],
    )
    curve_path = out_dir / f"{prefix}curve.tsv"
    write_table(
        curve_path,
        ["cutoff", "n_beyond", "expected_null", "fdr", "fdr_clipped"],
        [(p.cutoff, p.n_beyond, p.expected_null, p.fdr, p.fdr_clipped) for p in report.curve],
    )
    return {"discoveries_table": str(discoveries_path), "curve_table": str(curve_path)}


def _cmd_zvals(config: AnalysisConfig, out_dir: Path) -> dict:
    options = config.options
    matrix = read_matrix(
        _existing_path(options, "matrix"),
        _existing_path(options, "groups"),
        treatment=options.get("treatment"),
    )
    zv = matrix_to_zvector(matrix)
    z_path = out_dir / "zvalues.tsv"
    write_zvector(z_path, zv)
    outputs = {
        "zvector": str(z_path),
        "n_cases": len(zv),
        "n_clamped": int(zv.clamped.sum()) if zv.clamped is not None else 0,
        "df": int(matrix.values.shape[1] - 2),
    }
    if config.figures:
        from . import plots

        outputs["figure_histogram"] = plots.save_z_histogram(
            out_dir / "z_histogram.png",
            zv,
            nulls=[("theoretical null", NullModel.theoretical(p0=1.0))],
        )
    return outputs


def _cmd_js(config: AnalysisConfig, out_dir: Path) -> dict:
    options = config.options
    labels, values = read_values(_existing_path(options, "values"))
    result = james_stein(values, float(_require(options, "sigma0_sq")))
    table_path = out_dir / "shrinkage.tsv"
    write_table(
        table_path,
        ["label", "observed", "estimate"],
        list(zip(labels, values, result.estimates)),
    )
    outputs = {
        "table": str(table_path),
        "center": result.center,
        "shrinkage_weight": result.shrinkage_weight,
        "n_cases": int(values.size),
        "degenerate": result.degenerate,
    }
    if config.figures:
        from . import plots

        outputs["figure_shrinkage"] = plots.save_shrinkage_plot(
            out_dir / "shrinkage.png", labels, values, result.estimates, result.center
        )
    return outputs


def _cmd_fdr(config: AnalysisConfig, out_dir: Path) -> dict:
    options = config.options
    zv = read_zvector(_existing_path(options, "zfile"))
    null = _resolve_null(options, zv)
    report = bh_threshold(zv, float(options.get("q", 0.1)), null, options.get("side", "right"))

    report_path = out_dir / "report.json"
    write_json(report_path, report.to_dict())
    outputs = {
        "report": str(report_path),
        "threshold": report.threshold,
        "n_discoveries": report.n_discoveries,
        "fdr_at_threshold": report.fdr_at_threshold,
    }
    outputs.update(_report_outputs(report, zv, out_dir))
    if config.figures:
        from . import plots

        outputs["figure_histogram"] = plots.save_z_histogram(
            out_dir / "z_histogram.png",
            zv,
            nulls=[(f"{null.kind} null", null)],
            threshold=report.threshold,
        )
        outputs["figure_curve"] = plots.save_fdr_curve(out_dir / "fdr_curve.png", report)
    return outputs


def _cmd_null(config: AnalysisConfig, out_dir: Path) -> dict:
    options = config.options
    zv = read_zvector(_existing_path(options, "zfile"))
    fit = fit_empirical_null(zv, _central_config(options))
    fit_path = out_dir / "null_fit.json"
    write_json(fit_path, fit.to_dict())
    outputs = {"null_fit": str(fit_path)}
    outputs.update(fit.to_dict())
    if config.figures:
        from . import plots

        outputs["figure_histogram"] = plots.save_z_histogram(
            out_dir / "empirical_null.png",
            zv,
            nulls=[
                ("theoretical null", NullModel.theoretical(p0=1.0)),
                ("empirical null", fit.to_null_model()),
            ],
        )
    return outputs


def _cmd_effects(config: AnalysisConfig, out_dir: Path) -> dict:
    options = config.options
    zv = read_zvector(_existing_path(options, "zfile"))
    report = effect_size_report(
        zv,
        df=int(options.get("df", 7)),
        bins=int(options.get("bins", 90)),
        top_k=int(options.get("top_k", 10)),
    )
    table_path = out_dir / "effects.tsv"
    write_table(table_path, ["label", "z", "mu_hat"], report.rows())
    top_path = out_dir / "top_k.json"
    write_json(
        top_path,
        {
            "top_k": report.top_k,
            "cases": [
                {"rank": rank + 1, "label": label, "z": z, "mu_hat": mu}
                for rank, (label, z, mu) in enumerate(report.top_rows())
            ],
        },
    )
    outputs = {
        "effects_table": str(table_path),
        "top_k": str(top_path),
        "fit_deviance": report.fit.fit_deviance,
        "density_integral": report.fit.integral(),
    }
    if config.figures:
        from . import plots

        outputs["figure_effects"] = plots.save_effect_size_curve(
            out_dir / "effect_size.png",
            report.fit,
            report.z,
            report.mu_hat,
            report.ranking[: report.top_k],
        )
        outputs["figure_density"] = plots.save_density_fit(
            out_dir / "marginal_density.png", report.fit, report.z
        )
    return outputs


def _read_strata_file(path: Path, zv) -> Stratification:
    mapping: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataError(f"{path}: line {lineno}: expected 2 tab-separated columns")
        mapping[fields[0].strip()] = fields[1].strip()
    missing = [zv.label_of(i) for i in range(len(zv)) if zv.label_of(i) not in mapping]
    if missing:
        raise DataError(f"strata file lacks case(s): {', '.join(missing[:5])}")
    return Stratification.from_labels([mapping[zv.label_of(i)] for i in range(len(zv))])


def _cmd_strata(config: AnalysisConfig, out_dir: Path) -> dict:
    options = config.options
    zv = read_zvector(_existing_path(options, "zfile"))
    if options.get("split_at") is not None:
        strat = Stratification.split_at(zv, options["split_at"])
    elif options.get("strata_file"):
        strat = _read_strata_file(_existing_path(options, "strata_file"), zv)
    else:
        raise DataError("strata requires --split-at or --strata-file")

    null = _resolve_null(options, zv)
    q = float(options.get("q", 0.1))
    side = options.get("side", "right")
    result = stratified_fdr(
        zv,
        strat,
        q,
        null,
        side,
        per_stratum_empirical=bool(options.get("per_stratum_null")),
        central=_central_config(options),
    )

    payload = {
        "pooled": result.pooled.to_dict(include_curve=False),
        "strata": {
            name: report.to_dict(include_curve=False)
            for name, report in result.per_stratum.items()
        },
    }
    outputs: dict = {
        "pooled_threshold": result.pooled.threshold,
        "pooled_discoveries": result.pooled.n_discoveries,
        "stratum_discoveries": {
            name: report.n_discoveries for name, report in result.per_stratum.items()
        },
    }
    outputs.update(_report_outputs(result.pooled, zv, out_dir, prefix="pooled_"))

    trend = None
    if options.get("window") is not None:
        detrended = running_median_detrend(zv, int(options["window"]))
        trend = detrended.trend
        adjusted_path = out_dir / "adjusted_zvalues.tsv"
        write_zvector(adjusted_path, detrended.adjusted)
        adjusted_report = bh_threshold(detrended.adjusted, q, null, side)
        payload["detrended_pooled"] = adjusted_report.to_dict(include_curve=False)
        outputs["adjusted_zvector"] = str(adjusted_path)
        outputs["detrended_discoveries"] = adjusted_report.n_discoveries

    report_path = out_dir / "strata_report.json"
    write_json(report_path, payload)
    outputs["report"] = str(report_path)

    if config.figures:
        from . import plots

        outputs["figure_histograms"] = plots.save_stratum_histograms(
            out_dir / "strata_histograms.png", zv, strat
        )
        if zv.covariate is not None:
            outputs["figure_trend"] = plots.save_covariate_trend(
                out_dir / "covariate_trend.png", zv, trend
            )
    return outputs


def _cmd_simulate(config: AnalysisConfig, out_dir: Path) -> dict:
    options = config.options
    scenario = _require(options, "scenario")
    seed = int(options.get("seed", 1))
    reps = int(options.get("reps", 1000))

    if scenario == "dominance":
        n = int(options.get("n", 18))
        cfg = SimConfig(
            seed=seed,
            replications=reps,
            n_cases=n,
            normal_model=_default_normal_model(),
            keep_traces=True,
        )
        result = certify_dominance(cfg)
        figure_values, figure_name, reference = (
            result.traces["estimator_error"] / result.traces["identity_error"],
            "per-replication error ratio",
            1.0,
        )
    elif scenario == "fdr-control":
        n = int(options.get("n", 1000))
        p0 = float(options.get("p0", 1.0))
        alt = None if p0 >= 1.0 else GaussianMixture.single(3.0, 1.0)
        cfg = SimConfig(
            seed=seed,
            replications=reps,
            n_cases=n,
            two_groups=TwoGroupsModel(p0=p0, alt=alt),
            q=float(options.get("q", 0.1)),
            keep_traces=True,
        )
        result = certify_fdr_control(cfg)
        figure_values, figure_name, reference = (
            result.traces["fdp"],
            "false discovery proportion",
            cfg.q,
        )
    elif scenario == "tweedie":
        n = int(options.get("n", 50000))
        cfg = SimConfig(
            seed=seed,
            replications=reps,
            n_cases=n,
            prior=GaussianMixture.single(0.0, 1.0),
            keep_traces=True,
        )
        result = certify_tweedie(cfg)
        figure_values, figure_name, reference = (
            result.traces["max_dev_closed_form"],
            "max deviation from closed form",
            None,
        )
    else:
        raise DataError(f"unknown scenario {scenario!r}")

    result_path = out_dir / "result.json"
    write_json(result_path, {"scenario": scenario, **result.to_dict()})
    outputs = {"result": str(result_path), **result.metrics}
    if config.figures:
        from . import plots

        outputs["figure_metrics"] = plots.save_metric_histogram(
            out_dir / "replication_metrics.png",
            np.asarray(figure_values),
            figure_name,
            reference,
        )
    return outputs


def _default_normal_model() -> NormalNormalModel:
    return NormalNormalModel(prior_mean=0.0, prior_var=1.0, sampling_var=1.0)


_HANDLERS = {
    "zvals": _cmd_zvals,
    "js": _cmd_js,
    "fdr": _cmd_fdr,
    "null": _cmd_null,
    "effects": _cmd_effects,
    "strata": _cmd_strata,
    "simulate": _cmd_simulate,
}


def run(config: AnalysisConfig) -> RunSummary:
    """Execute one configured analysis; files land in the output directory."""
    if config.subcommand not in _HANDLERS:
        raise DataError(f"unknown subcommand {config.subcommand!r}")
    config.out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        outputs = _HANDLERS[config.subcommand](config, config.out_dir)
    collected = [
        f"{type(w.message).__name__}: {w.message}"
        for w in caught
        if isinstance(w.message, ToolkitWarning)
    ]
    summary = RunSummary(
        version=__version__,
        subcommand=config.subcommand,
        config=dict(config.options),
        elapsed_seconds=time.perf_counter() - started,
        outputs=outputs,
        warnings=collected,
    )
    write_json(config.out_dir / "summary.json", summary.to_dict())
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ebtools",
        description="Large-scale simultaneous inference toolkit",
    )
    parser.add_argument("--version", action="version", version=f"ebtools {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--out", required=True, help="output directory for this run")
        p.add_argument(
            "--no-figures",
            dest="figures",
            action="store_false",
            help="skip PNG figure rendering",
        )

    def null_flags(p: argparse.ArgumentParser):
        p.add_argument("--null", choices=["theoretical", "empirical"], default="theoretical")
        p.add_argument("--p0", type=float, default=None,
                       help="null proportion; defaults to 1.0 (theoretical) or the fitted value")
        p.add_argument("--null-fit", dest="null_fit", default=None,
                       help="JSON file from the null subcommand")
        central_flags(p)

    def central_flags(p: argparse.ArgumentParser):
        p.add_argument("--lower-q", dest="lower_q", type=float, default=0.25)
        p.add_argument("--upper-q", dest="upper_q", type=float, default=0.75)

    p = sub.add_parser("zvals", help="two-sample t statistics mapped to z-values")
    p.add_argument("--matrix", required=True, help="tab-separated expression matrix")
    p.add_argument("--groups", required=True, help="two-column subject/group file")
    p.add_argument("--treatment", default=None, help="label of the treatment group")
    common(p)

    p = sub.add_parser("js", help="James-Stein shrinkage of a value column")
    p.add_argument("--values", required=True, help="one-column (optionally labeled) value file")
    p.add_argument("--sigma0-sq", dest="sigma0_sq", type=float, required=True,
                   help="known sampling variance of each value")
    common(p)

    p = sub.add_parser("fdr", help="tail-area Fdr threshold scan")
    p.add_argument("--zfile", required=True, help="tab-separated (label, z[, covariate]) file")
    p.add_argument("--q", type=float, default=0.1)
    p.add_argument("--side", choices=["right", "left"], default="right")
    null_flags(p)
    common(p)

    p = sub.add_parser("null", help="fit an empirical null from central z-values")
    p.add_argument("--zfile", required=True)
    central_flags(p)
    common(p)

    p = sub.add_parser("effects", help="effect-size estimates from the marginal density")
    p.add_argument("--zfile", required=True)
    p.add_argument("--df", type=int, default=7)
    p.add_argument("--bins", type=int, default=90)
    p.add_argument("--top-k", dest="top_k", type=int, default=10)
    common(p)

    p = sub.add_parser("strata", help="stratified Fdr runs with optional detrending")
    p.add_argument("--zfile", required=True)
    p.add_argument("--split-at", dest="split_at", type=float, action="append", default=None,
                   help="covariate threshold; repeatable")
    p.add_argument("--strata-file", dest="strata_file", default=None,
                   help="two-column (case label, stratum) file")
    p.add_argument("--q", type=float, default=0.1)
    p.add_argument("--side", choices=["right", "left"], default="right")
    p.add_argument("--window", type=int, default=None,
                   help="odd running-median window; adds a detrended pooled analysis")
    p.add_argument("--per-stratum-null", dest="per_stratum_null", action="store_true",
                   help="fit an empirical null inside each stratum")
    null_flags(p)
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo certification scenarios")
    p.add_argument("--scenario", choices=["dominance", "fdr-control", "tweedie"], required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--q", type=float, default=0.1)
    p.add_argument("--p0", type=float, default=1.0)
    common(p)

    return parser


def config_from_namespace(ns: argparse.Namespace) -> AnalysisConfig:
    options = {
        k: v
        for k, v in vars(ns).items()
        if k not in ("subcommand", "out", "figures") and v is not None
    }
    return AnalysisConfig(
        subcommand=ns.subcommand,
        out_dir=Path(ns.out),
        options=options,
        figures=ns.figures,
    )


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    ns = parser.parse_args(argv)
    config = config_from_namespace(ns)
    try:
        summary = run(config)
    except ToolkitError as exc:
        error = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(error), file=sys.stderr)
        return 1
    print(f"wrote {config.out_dir / 'summary.json'}")
    for key, value in summary.outputs.items():
        if not key.startswith("figure"):
            print(f"  {key}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
