"""Flat-file artifact formats: fit/selection JSON and plot-ready CSV exports.

All writers are atomic (write to a temp file in the target directory, then
rename) and deterministic: identical inputs produce byte-identical files.
Floats in CSV files carry 10 significant digits; JSON floats use the shortest
round-trip representation.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .diagnostics import TestReport
from .distributions import Family, InnovationSpec
from .errors import MissingArtifactError
from .estimation import FitResult, SelectionReport, GridCell
from .garch import GarchParams, Model
from .ingest import ReturnSeries


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


# --- fit artifacts ---------------------------------------------------------------

def fit_result_dict(result: FitResult) -> dict:
    params = result.params
    values = {"omega": params.omega, "alpha": params.alpha, "beta": params.beta}
    if params.model is Model.TGARCH:
        values["lambda"] = params.lam
    values["shape"] = params.innovation.shape
    if params.innovation.family is Family.NIG:
        values["skew"] = params.innovation.skew
    return {
        "model": params.model.value,
        "distribution": params.innovation.family.value,
        "params": values,
        "std_errors": result.std_errors,
        "log_likelihood": result.log_likelihood,
        "aic": result.aic,
        "bic": result.bic,
        "n_obs": result.n_obs,
        "k_params": result.k_params,
        "converged": result.converged,
        "seed": result.seed,
        "demeaned": result.demeaned,
        "mean_offset": result.mean_offset,
        "sigma2_init": result.sigma2_init,
    }


def fit_result_from_dict(payload: dict) -> FitResult:
    model = Model(payload["model"])
    family = Family(payload["distribution"])
    values = payload["params"]
    spec = InnovationSpec(family, values["shape"], values.get("skew", 0.0))
    params = GarchParams(
        model,
        values["omega"],
        values["alpha"],
        values["beta"],
        spec,
        values.get("lambda", 0.0),
    )
    return FitResult(
        params=params,
        std_errors=payload["std_errors"],
        log_likelihood=payload["log_likelihood"],
        aic=payload["aic"],
        bic=payload["bic"],
        n_obs=payload["n_obs"],
        k_params=payload["k_params"],
        converged=payload["converged"],
        optimizer_trace=[],
        seed=payload["seed"],
        demeaned=payload["demeaned"],
        mean_offset=payload["mean_offset"],
        sigma2_init=payload["sigma2_init"],
    )


def write_fit_artifact(path: str | Path, result: FitResult) -> None:
    atomic_write_text(path, _dump_json(fit_result_dict(result)))


def load_fit_artifact(path: str | Path) -> FitResult:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"no fit artifact at {path}")
    return fit_result_from_dict(json.loads(path.read_text(encoding="utf-8")))


def selection_report_dict(report: SelectionReport) -> dict:
    cells = []
    for cell in report.grid:
        entry: dict = {"model": cell.model.value, "distribution": cell.family.value}
        if cell.fit is not None:
            entry["fit"] = fit_result_dict(cell.fit)
        else:
            entry["fit"] = None
            entry["error"] = cell.error
        cells.append(entry)
    return {
        "grid": cells,
        "best_by_aic": report.best_by_aic,
        "best_by_bic": report.best_by_bic,
        "best_by_loglik": report.best_by_loglik,
    }


def write_selection_report(path: str | Path, report: SelectionReport) -> None:
    atomic_write_text(path, _dump_json(selection_report_dict(report)))


def load_selection_report(path: str | Path) -> SelectionReport:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"no selection report at {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    grid = []
    for entry in payload["grid"]:
        fit = fit_result_from_dict(entry["fit"]) if entry.get("fit") else None
        grid.append(
            GridCell(
                Model(entry["model"]),
                Family(entry["distribution"]),
                fit,
                entry.get("error"),
            )
        )
    return SelectionReport(
        grid, payload["best_by_aic"], payload["best_by_bic"], payload["best_by_loglik"]
    )


# --- diagnostics -----------------------------------------------------------------

def test_report_dict(report: TestReport) -> dict:
    return {
        "name": report.name,
        "statistic": report.statistic,
        "df": report.df_or_lag,
        "p_value": report.p_value,
        "p_display": report.p_value_display,
        "alpha": report.alpha,
        "reject_null": report.reject_null,
    }


def write_diagnostics(path: str | Path, reports: Sequence[TestReport]) -> None:
    atomic_write_text(path, _dump_json([test_report_dict(r) for r in reports]))


def load_diagnostics(path: str | Path) -> list[dict]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


# --- CSV exports -----------------------------------------------------------------

def _write_csv(path: str | Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_returns_csv(path: str | Path, returns: ReturnSeries) -> None:
    _write_csv(
        path,
        ["date", "log_return"],
        ((d.isoformat(), _fmt(v)) for d, v in zip(returns.dates, returns.values)),
    )


def read_returns_csv(path: str | Path) -> ReturnSeries:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        dates, values = [], []
        for record in reader:
            dates.append(dt.date.fromisoformat(record["date"]))
            values.append(float(record["log_return"]))
    return ReturnSeries(dates, np.asarray(values))


def write_variance_csv(path: str | Path, dates: Sequence[dt.date], sigma2: np.ndarray) -> None:
    sigma = np.sqrt(sigma2)
    _write_csv(
        path,
        ["date", "sigma2", "sigma"],
        (
            (d.isoformat(), _fmt(s2), _fmt(s))
            for d, s2, s in zip(dates, sigma2, sigma)
        ),
    )


def read_variance_csv(path: str | Path) -> tuple[list[dt.date], np.ndarray, np.ndarray]:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        dates, s2, s = [], [], []
        for record in reader:
            dates.append(dt.date.fromisoformat(record["date"]))
            s2.append(float(record["sigma2"]))
            s.append(float(record["sigma"]))
    return dates, np.asarray(s2), np.asarray(s)


def write_qq_csv(path: str | Path, theoretical: np.ndarray, empirical: np.ndarray) -> None:
    _write_csv(
        path,
        ["theoretical", "empirical"],
        ((_fmt(t), _fmt(e)) for t, e in zip(theoretical, empirical)),
    )


def read_qq_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        theo, emp = [], []
        for record in reader:
            theo.append(float(record["theoretical"]))
            emp.append(float(record["empirical"]))
    return np.asarray(theo), np.asarray(emp)


def write_density_csv(
    path: str | Path, z: np.ndarray, model_pdf: np.ndarray, kernel_pdf: np.ndarray
) -> None:
    _write_csv(
        path,
        ["z", "model_pdf", "kernel_pdf"],
        (
            (_fmt(a), _fmt(b), _fmt(c))
            for a, b, c in zip(z, model_pdf, kernel_pdf)
        ),
    )


def read_density_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        z, mp, kp = [], [], []
        for record in reader:
            z.append(float(record["z"]))
            mp.append(float(record["model_pdf"]))
            kp.append(float(record["kernel_pdf"]))
    return np.asarray(z), np.asarray(mp), np.asarray(kp)


def write_simulation_csv(
    path: str | Path,
    dates: Sequence[dt.date],
    closes: np.ndarray,
    log_ret: np.ndarray,
    sigma2: np.ndarray,
) -> None:
    sigma = np.sqrt(sigma2)
    _write_csv(
        path,
        ["date", "close", "log_return", "sigma2", "sigma"],
        (
            (d.isoformat(), _fmt(c), _fmt(r), _fmt(s2), _fmt(s))
            for d, c, r, s2, s in zip(dates, closes, log_ret, sigma2, sigma)
        ),
    )


def write_stats_json(path: str | Path, stats) -> None:
    atomic_write_text(
        path,
        _dump_json(
            {
                "n": stats.n,
                "minimum": stats.minimum,
                "maximum": stats.maximum,
                "mean": stats.mean,
                "std_dev": stats.std_dev,
                "skewness": stats.skewness,
                "excess_kurtosis": stats.excess_kurtosis,
            }
        ),
    )
