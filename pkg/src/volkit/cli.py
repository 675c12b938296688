"""Command-line front end: ingest -> diagnose -> fit/select -> exports.

Subcommands: ingest, diagnose, fit, select, simulate, qq, density.
Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as scipy_stats

from . import artifacts
from .diagnostics import TestReport, adf_test, anderson_darling, arch_lm, jarque_bera, ljung_box
from .distributions import Family, InnovationSpec, pdf as innovation_pdf, quantile
from .errors import AllStartsFailedError, VolkitError
from .estimation import FitConfig, fit, select_model
from .garch import GarchParams, Model, filter_variance, simulate_path
from .ingest import ReturnSeries, log_returns, parse_price_csv


@dataclass
class RunConfig:
    """Resolved command configuration shared across subcommands."""

    input_path: str | None = None
    date_col: str = "date"
    price_col: str = "close"
    date_format: str = "%Y-%m-%d"
    date_from: dt.date | None = None
    date_to: dt.date | None = None
    model: Model | None = None
    family: Family | None = None
    lags_lb: int = 10
    lags_lm: int = 12
    adf_max_lag: int | None = None
    alpha: float = 0.05
    demean: bool = False
    seed: int = 0
    starts: int = 5
    sigma2_init: float | None = None
    out_dir: Path = Path(".")

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if self.date_from and self.date_to and self.date_from >= self.date_to:
            raise ValueError("--from must be earlier than --to")

    def fit_config(self) -> FitConfig:
        return FitConfig(
            sigma2_init=self.sigma2_init,
            demean=self.demean,
            starts=self.starts,
            seed=self.seed,
        )


def _load_returns(cfg: RunConfig) -> ReturnSeries:
    if not cfg.input_path:
        raise ValueError("--input is required")
    prices = parse_price_csv(
        cfg.input_path,
        date_col=cfg.date_col,
        price_col=cfg.price_col,
        date_format=cfg.date_format,
    )
    if cfg.date_from or cfg.date_to:
        prices = prices.restrict(cfg.date_from, cfg.date_to)
    return log_returns(prices)


def cmd_ingest(cfg: RunConfig) -> int:
    returns = _load_returns(cfg)
    artifacts.write_returns_csv(cfg.out_dir / "returns.csv", returns)
    if returns.stats is not None:
        artifacts.write_stats_json(cfg.out_dir / "stats.json", returns.stats)
    print(f"wrote {len(returns)} returns to {cfg.out_dir / 'returns.csv'}")
    return 0


def cmd_diagnose(cfg: RunConfig) -> int:
    returns = _load_returns(cfg)
    x = returns.values - returns.values.mean() if cfg.demean else returns.values
    reports: list[TestReport] = [
        jarque_bera(x, cfg.alpha),
        anderson_darling(x, cfg.alpha),
        ljung_box(x**2, cfg.lags_lb, cfg.alpha),
        arch_lm(x, cfg.lags_lm, cfg.alpha),
        adf_test(x, cfg.adf_max_lag, cfg.alpha),
    ]
    out = cfg.out_dir / "diagnostics.json"
    artifacts.write_diagnostics(out, reports)
    for r in reports:
        verdict = "reject" if r.reject_null else "fail-to-reject"
        print(f"{r.name}: statistic={r.statistic:.6g} p={r.p_value_display} ({verdict})")
    return 0


def _fit_one(cfg: RunConfig) -> tuple:
    if cfg.model is None or cfg.family is None:
        raise ValueError("--model and --dist are required")
    returns = _load_returns(cfg)
    result = fit(cfg.model, cfg.family, returns, cfg.fit_config())
    return returns, result


def cmd_fit(cfg: RunConfig) -> int:
    returns, result = _fit_one(cfg)
    tag = f"{result.params.model.value}_{result.params.innovation.family.value}"
    artifact_path = cfg.out_dir / f"fit_{tag}.json"
    artifacts.write_fit_artifact(artifact_path, result)
    x = returns.values - result.mean_offset
    path = filter_variance(result.params, x, result.sigma2_init)
    artifacts.write_variance_csv(cfg.out_dir / f"volatility_{tag}.csv", returns.dates, path.sigma2)
    print(
        f"{tag}: logL={result.log_likelihood:.6g} aic={result.aic:.6g} "
        f"bic={result.bic:.6g} converged={result.converged}"
    )
    return 0


def cmd_select(cfg: RunConfig) -> int:
    returns = _load_returns(cfg)
    report = select_model(returns, cfg.fit_config())
    artifacts.write_selection_report(cfg.out_dir / "selection.json", report)
    for label, idx in (
        ("aic", report.best_by_aic),
        ("bic", report.best_by_bic),
        ("loglik", report.best_by_loglik),
    ):
        cell = report.grid[idx]
        print(f"best_by_{label}: {cell.model.value}-{cell.family.value}")
    failures = [c for c in report.grid if c.fit is None]
    for cell in failures:
        print(f"failed: {cell.model.value}-{cell.family.value}: {cell.error}", file=sys.stderr)
    return 0


def cmd_simulate(cfg: RunConfig, args: argparse.Namespace) -> int:
    if cfg.model is None or cfg.family is None:
        raise ValueError("--model and --dist are required")
    spec = InnovationSpec(cfg.family, args.shape, args.skew)
    if cfg.model is Model.IGARCH:
        params = GarchParams.igarch(args.omega, args.beta, spec)
    else:
        params = GarchParams(cfg.model, args.omega, args.alpha, args.beta, spec, args.leverage)
    sigma2_init = cfg.sigma2_init
    if sigma2_init is None:
        if params.persistence < 1.0:
            sigma2_init = args.omega / (1.0 - params.persistence)
        else:
            sigma2_init = args.omega * 50.0 if args.omega > 0 else 1.0
    x, s2 = simulate_path(params, args.n, sigma2_init, cfg.seed)
    start = dt.date(2014, 1, 1)
    dates = [start + dt.timedelta(days=i) for i in range(args.n)]
    closes = 100.0 * np.exp(np.cumsum(x))
    artifacts.write_simulation_csv(cfg.out_dir / "simulated.csv", dates, closes, x, s2)
    print(f"wrote {args.n} simulated observations to {cfg.out_dir / 'simulated.csv'}")
    return 0


def _standardized_residuals_from_artifact(cfg: RunConfig, artifact_path: str):
    result = artifacts.load_fit_artifact(artifact_path)
    returns = _load_returns(cfg)
    x = returns.values - result.mean_offset
    path = filter_variance(result.params, x, result.sigma2_init)
    return result, x / path.sigma


def cmd_qq(cfg: RunConfig, artifact_path: str) -> int:
    result, resid = _standardized_residuals_from_artifact(cfg, artifact_path)
    empirical = np.sort(resid)
    n = empirical.size
    probs = (np.arange(1, n + 1) - 0.5) / n
    theoretical = quantile(result.params.innovation, probs)
    tag = f"{result.params.model.value}_{result.params.innovation.family.value}"
    out = cfg.out_dir / f"qq_{tag}.csv"
    artifacts.write_qq_csv(out, theoretical, empirical)
    print(f"wrote {n} quantile pairs to {out}")
    return 0


def cmd_density(cfg: RunConfig, artifact_path: str, kde_bw: float | None) -> int:
    result, resid = _standardized_residuals_from_artifact(cfg, artifact_path)
    z = np.round(np.arange(-1000, 1001) * 0.01, 2)
    model_pdf = innovation_pdf(result.params.innovation, z)
    kde = scipy_stats.gaussian_kde(resid, bw_method=kde_bw if kde_bw else "silverman")
    kernel_pdf = kde(z)
    tag = f"{result.params.model.value}_{result.params.innovation.family.value}"
    out = cfg.out_dir / f"density_{tag}.csv"
    artifacts.write_density_csv(out, z, model_pdf, kernel_pdf)
    print(f"wrote density grid to {out}")
    return 0


# --- argument parsing ---------------------------------------------------------------

def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="close-price CSV with a header row")
    p.add_argument("--date-col", default="date")
    p.add_argument("--price-col", default="close")
    p.add_argument("--date-format", default="%Y-%m-%d")
    p.add_argument("--from", dest="date_from", type=dt.date.fromisoformat, default=None)
    p.add_argument("--to", dest="date_to", type=dt.date.fromisoformat, default=None)


def _add_out_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, choices=[m.value for m in Model])
    p.add_argument("--dist", required=True, choices=[f.value for f in Family])


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=5)
    p.add_argument("--demean", action="store_true")
    p.add_argument("--sigma2-init", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volkit",
        description="GARCH volatility toolkit for daily close-price series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse prices and emit log returns + stats")
    _add_input_flags(p)
    _add_out_flag(p)

    p = sub.add_parser("diagnose", help="normality / ARCH-effect / unit-root tests")
    _add_input_flags(p)
    _add_out_flag(p)
    p.add_argument("--lags-lb", type=int, default=10)
    p.add_argument("--lags-lm", type=int, default=12)
    p.add_argument("--adf-max-lag", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--demean", action="store_true")

    p = sub.add_parser("fit", help="fit one model/distribution cell")
    _add_input_flags(p)
    _add_out_flag(p)
    _add_model_flags(p)
    _add_fit_flags(p)

    p = sub.add_parser("select", help="fit the 3x3 grid and pick the best model")
    _add_input_flags(p)
    _add_out_flag(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=5)
    p.add_argument("--demean", action="store_true")
    p.add_argument("--sigma2-init", type=float, default=None)

    p = sub.add_parser("simulate", help="simulate a return/variance path")
    _add_out_flag(p)
    _add_model_flags(p)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--alpha", dest="alpha_coef", type=float, default=0.0)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--leverage", type=float, default=0.0, help="threshold coefficient")
    p.add_argument("--shape", type=float, required=True)
    p.add_argument("--skew", type=float, default=0.0)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma2-init", type=float, default=None)

    p = sub.add_parser("qq", help="QQ pairs of standardized residuals vs fitted law")
    _add_input_flags(p)
    _add_out_flag(p)
    p.add_argument("--artifact", required=True, help="fit JSON produced by `volkit fit`")

    p = sub.add_parser("density", help="fitted density and residual KDE on a grid")
    _add_input_flags(p)
    _add_out_flag(p)
    p.add_argument("--artifact", required=True)
    p.add_argument("--kde-bw", type=float, default=None, help="KDE bandwidth factor")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(out_dir=Path(getattr(args, "out", ".")))
    for name in (
        "date_col",
        "price_col",
        "date_format",
        "date_from",
        "date_to",
        "lags_lb",
        "lags_lm",
        "adf_max_lag",
        "alpha",
        "demean",
        "seed",
        "starts",
        "sigma2_init",
    ):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "input"):
        cfg.input_path = args.input
    if getattr(args, "model", None):
        cfg.model = Model(args.model)
    if getattr(args, "dist", None):
        cfg.family = Family(args.dist)
    cfg.__post_init__()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "ingest":
            return cmd_ingest(cfg)
        if args.command == "diagnose":
            return cmd_diagnose(cfg)
        if args.command == "fit":
            return cmd_fit(cfg)
        if args.command == "select":
            return cmd_select(cfg)
        if args.command == "simulate":
            # the simulate subcommand reuses --alpha for the ARCH coefficient
            ns = argparse.Namespace(
                shape=args.shape,
                skew=args.skew,
                omega=args.omega,
                alpha=args.alpha_coef,
                beta=args.beta,
                leverage=args.leverage,
                n=args.n,
            )
            return cmd_simulate(cfg, ns)
        if args.command == "qq":
            return cmd_qq(cfg, args.artifact)
        if args.command == "density":
            return cmd_density(cfg, args.artifact, args.kde_bw)
        parser.error(f"unknown command {args.command!r}")
    except VolkitError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        if isinstance(exc, AllStartsFailedError) and getattr(exc, "trace", None):
            json.dump(exc.trace, sys.stderr, indent=2, default=repr)
            print(file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
