"""Constrained maximum likelihood via unconstrained reparameterization.

The feasible region of every model/distribution pair is mapped onto R^k by a
smooth bijection (log for the variance intercept, a stick-breaking logistic
map onto the persistence simplex, log / shifted-log / scaled-tanh for the
innovation shape and skew).  Optimization runs derivative-free simplex first
and polishes with quasi-Newton using central-difference gradients, from five
starts (one moment matched, four jittered).  Standard errors come from the
inverse negative Hessian at the optimum mapped through the transform
Jacobian (delta method); a sandwich estimator is available behind a flag.

AIC and BIC are reported per observation:

    aic = (-2 logL + 2k) / n        bic = (-2 logL + k ln n) / n
"""

from __future__ import annotations

import dataclasses
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy.special import expit, logit

from .distributions import Family, InnovationSpec, log_pdf
from .errors import (
    AllFitsFailedError,
    AllStartsFailedError,
    InfeasibleParamsError,
    InvalidCountsError,
    InvalidShapeError,
    NonFiniteLikelihoodError,
    NonPositiveVarianceError,
    SeriesTooShortError,
    ShortSeriesWarning,
)
from .garch import GarchParams, Model, _p_negative, _values, filter_variance
from .ingest import descriptive_stats

_EXP_CLIP = 700.0
_LOGISTIC_CLIP = 36.0
_TANH_CLIP = 18.0

_DYNAMIC_NAMES = {
    Model.SGARCH: ["omega", "alpha", "beta"],
    Model.IGARCH: ["omega", "beta"],
    Model.TGARCH: ["omega", "alpha", "beta", "lambda"],
}


def param_names(model: Model, family: Family) -> list[str]:
    """Names of the free parameters, in unconstrained-vector order."""
    names = list(_DYNAMIC_NAMES[model]) + ["shape"]
    if family is Family.NIG:
        names.append("skew")
    return names


def free_param_count(model: Model, family: Family) -> int:
    return len(param_names(model, family))


# --- parameter transform ---------------------------------------------------------

def _softmax3(u1: float, u2: float) -> np.ndarray:
    logits = np.array([u1, u2, 0.0])
    e = np.exp(logits - logits.max())
    return e / e.sum()


def to_unconstrained(params: GarchParams) -> np.ndarray:
    """Map feasible interior parameters to the unconstrained vector."""
    model, family = params.model, params.innovation.family
    try:
        coords = [math.log(params.omega)]
        if model is Model.SGARCH:
            s = params.alpha + params.beta
            coords += [float(logit(s)), float(logit(params.alpha / s))]
        elif model is Model.IGARCH:
            coords += [float(logit(params.beta))]
        else:
            p = _p_negative(params.innovation)
            v = np.array(
                [
                    params.alpha * (1.0 - p),
                    (params.alpha + params.lam) * p,
                    params.beta,
                ]
            )
            s = v.sum()
            coords += [float(logit(s)), math.log(v[0] / v[2]), math.log(v[1] / v[2])]
        if family is Family.STUDENT_T:
            coords.append(math.log(params.innovation.shape - 2.0))
        elif family is Family.GED:
            coords.append(math.log(params.innovation.shape))
        else:
            coords.append(math.log(params.innovation.shape))
            coords.append(math.atanh(params.innovation.skew / params.innovation.shape))
    except (ValueError, ZeroDivisionError) as exc:
        raise InfeasibleParamsError(
            f"parameters on or outside the transform domain: {exc}"
        ) from exc
    u = np.asarray(coords, dtype=float)
    if not np.all(np.isfinite(u)):
        raise InfeasibleParamsError("parameters lie on the feasible boundary")
    return u


def _decode_innovation(family: Family, u_tail: np.ndarray) -> InnovationSpec:
    if family is Family.STUDENT_T:
        return InnovationSpec(family, 2.0 + math.exp(min(u_tail[0], _EXP_CLIP)))
    if family is Family.GED:
        return InnovationSpec(family, math.exp(np.clip(u_tail[0], -_EXP_CLIP, _EXP_CLIP)))
    shape = math.exp(np.clip(u_tail[0], -_EXP_CLIP, _EXP_CLIP))
    skew = shape * math.tanh(np.clip(u_tail[1], -_TANH_CLIP, _TANH_CLIP))
    return InnovationSpec(family, shape, skew)


def from_unconstrained(model: Model, family: Family, u: np.ndarray) -> GarchParams:
    """Inverse of :func:`to_unconstrained`; total inverse maps R^k into the interior."""
    u = np.asarray(u, dtype=float)
    k = free_param_count(model, family)
    if u.shape != (k,):
        raise InfeasibleParamsError(f"expected a vector of length {k}, got {u.shape}")
    if not np.all(np.isfinite(u)):
        raise InfeasibleParamsError("unconstrained coordinates must be finite")
    n_shape = 2 if family is Family.NIG else 1
    innovation = _decode_innovation(family, u[-n_shape:])
    omega = math.exp(np.clip(u[0], -_EXP_CLIP, _EXP_CLIP))
    if model is Model.SGARCH:
        s = float(expit(np.clip(u[1], -_LOGISTIC_CLIP, _LOGISTIC_CLIP)))
        share = float(expit(np.clip(u[2], -_LOGISTIC_CLIP, _LOGISTIC_CLIP)))
        return GarchParams(model, omega, s * share, s * (1.0 - share), innovation)
    if model is Model.IGARCH:
        beta = float(expit(np.clip(u[1], -_LOGISTIC_CLIP, _LOGISTIC_CLIP)))
        return GarchParams(model, omega, 1.0 - beta, beta, innovation)
    p = _p_negative(innovation)
    s = float(expit(np.clip(u[1], -_LOGISTIC_CLIP, _LOGISTIC_CLIP)))
    v = s * _softmax3(u[2], u[3])
    alpha = v[0] / (1.0 - p)
    lam = v[1] / p - alpha
    return GarchParams(model, omega, alpha, v[2], innovation, lam)


def params_to_vector(params: GarchParams) -> np.ndarray:
    """Reported free parameters in the order of :func:`param_names`."""
    model, spec = params.model, params.innovation
    vec = {
        Model.SGARCH: [params.omega, params.alpha, params.beta],
        Model.IGARCH: [params.omega, params.beta],
        Model.TGARCH: [params.omega, params.alpha, params.beta, params.lam],
    }[model] + [spec.shape]
    if spec.family is Family.NIG:
        vec.append(spec.skew)
    return np.asarray(vec, dtype=float)


# --- information criteria ---------------------------------------------------------

def information_criteria(log_likelihood: float, k: int, n: int) -> tuple[float, float]:
    """Per-observation AIC and BIC."""
    if not (isinstance(k, (int, np.integer)) and isinstance(n, (int, np.integer))):
        raise InvalidCountsError("k and n must be integers")
    if not n > k >= 1:
        raise InvalidCountsError(f"need n > k >= 1, got n={n}, k={k}")
    aic = (-2.0 * log_likelihood + 2.0 * k) / n
    bic = (-2.0 * log_likelihood + k * math.log(n)) / n
    return aic, bic


# --- fitting ----------------------------------------------------------------------

@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings; defaults match the documented fitting recipe."""

    sigma2_init: float | None = None
    demean: bool = False
    starts: int = 5
    seed: int = 0
    simplex_maxiter: int = 800
    polish_maxiter: int = 300
    gradient_tol: float = 1e-5
    std_errors: str = "hessian"  # "hessian" | "sandwich" | "none"


@dataclass(eq=False)
class FitResult:
    """A fitted model: estimates, uncertainty, criteria, and optimizer metadata."""

    params: GarchParams
    std_errors: dict[str, float] | None
    log_likelihood: float
    aic: float
    bic: float
    n_obs: int
    k_params: int
    converged: bool
    optimizer_trace: list[dict] = field(default_factory=list)
    seed: int = 0
    demeaned: bool = False
    mean_offset: float = 0.0
    sigma2_init: float = 1.0

    @property
    def model(self) -> Model:
        return self.params.model

    @property
    def family(self) -> Family:
        return self.params.innovation.family


def _neg_loglik(model: Model, family: Family, x: np.ndarray, sigma2_init: float):
    """Objective over the unconstrained space; infeasible points map to +inf."""

    def objective(u: np.ndarray) -> float:
        try:
            params = from_unconstrained(model, family, u)
            path = filter_variance(params, x, sigma2_init)
            z = x / np.sqrt(path.sigma2)
            ll = float(np.sum(log_pdf(params.innovation, z) - 0.5 * np.log(path.sigma2)))
        except (
            InfeasibleParamsError,
            InvalidShapeError,
            NonPositiveVarianceError,
            NonFiniteLikelihoodError,
            OverflowError,
        ):
            return np.inf
        return -ll if math.isfinite(ll) else np.inf

    return objective


def _ged_excess_kurtosis(v: float) -> float:
    return math.exp(
        special.gammaln(5.0 / v) + special.gammaln(1.0 / v) - 2.0 * special.gammaln(3.0 / v)
    ) - 3.0


def _shape_from_kurtosis(family: Family, excess: float) -> tuple[float, float]:
    """Moment-matched (shape, skew) start; falls back on flat-tailed samples."""
    if family is Family.STUDENT_T:
        if excess > 0.3:
            return min(max(4.0 + 6.0 / excess, 4.2), 30.0), 0.0
        return 5.0, 0.0
    if family is Family.GED:
        if excess > 0.05:
            try:
                v = optimize.brentq(
                    lambda t: _ged_excess_kurtosis(t) - excess, 0.4, 10.0
                )
                return min(max(v, 0.5), 4.0), 0.0
            except ValueError:
                pass
        return 1.5, 0.0
    if excess > 0.05:
        return min(max(math.sqrt(3.0 / excess), 0.2), 10.0), 0.0
    return 1.0, 0.0


def moment_matched_start(model: Model, family: Family, x: np.ndarray) -> GarchParams:
    """Starting parameters: conservative dynamics, kurtosis-implied shape."""
    var = float(np.var(x, ddof=1))
    excess = descriptive_stats(x).excess_kurtosis
    shape, skew = _shape_from_kurtosis(family, excess)
    spec = InnovationSpec(family, shape, skew)
    omega = 0.05 * var
    if model is Model.SGARCH:
        return GarchParams(model, omega, 0.1, 0.8, spec)
    if model is Model.IGARCH:
        return GarchParams.igarch(omega, 0.8, spec)
    return GarchParams(model, omega, 0.1, 0.8, spec, 0.05)


def _central_gradient(f, u: np.ndarray, rel: float = 6e-6) -> np.ndarray:
    h = rel * np.maximum(1.0, np.abs(u))
    grad = np.empty_like(u)
    for i in range(u.size):
        e = np.zeros_like(u)
        e[i] = h[i]
        grad[i] = (f(u + e) - f(u - e)) / (2.0 * h[i])
    return grad


def _central_hessian(f, u: np.ndarray, rel: float = 1.5e-4) -> np.ndarray:
    k = u.size
    h = rel * np.maximum(1.0, np.abs(u))
    hess = np.empty((k, k))
    f0 = f(u)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        hess[i, i] = (f(u + ei) - 2.0 * f0 + f(u - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            hess[i, j] = (
                f(u + ei + ej) - f(u + ei - ej) - f(u - ei + ej) + f(u - ei - ej)
            ) / (4.0 * h[i] * h[j])
            hess[j, i] = hess[i, j]
    return hess


def _transform_jacobian(model: Model, family: Family, u: np.ndarray) -> np.ndarray:
    def theta(v: np.ndarray) -> np.ndarray:
        return params_to_vector(from_unconstrained(model, family, v))

    k = u.size
    jac = np.empty((k, k))
    for i in range(k):
        h = 6e-6 * max(1.0, abs(u[i]))
        e = np.zeros(k)
        e[i] = h
        jac[:, i] = (theta(u + e) - theta(u - e)) / (2.0 * h)
    return jac


def _per_observation_scores(
    model: Model, family: Family, x: np.ndarray, sigma2_init: float, u: np.ndarray
) -> np.ndarray:
    def ll_vector(v: np.ndarray) -> np.ndarray:
        params = from_unconstrained(model, family, v)
        path = filter_variance(params, x, sigma2_init)
        z = x / np.sqrt(path.sigma2)
        return log_pdf(params.innovation, z) - 0.5 * np.log(path.sigma2)

    k = u.size
    scores = np.empty((x.size, k))
    for i in range(k):
        h = 6e-6 * max(1.0, abs(u[i]))
        e = np.zeros(k)
        e[i] = h
        scores[:, i] = (ll_vector(u + e) - ll_vector(u - e)) / (2.0 * h)
    return scores


def _standard_errors(
    model: Model,
    family: Family,
    x: np.ndarray,
    sigma2_init: float,
    u: np.ndarray,
    objective,
    method: str,
    trace: dict,
) -> dict[str, float] | None:
    names = param_names(model, family)

    def loglik(v: np.ndarray) -> float:
        return -objective(v)

    # the cross-difference formula fills (i, j) and (j, i) together, so the
    # estimate is symmetric by construction
    info = -_central_hessian(loglik, u)
    try:
        np.linalg.cholesky(info)
        cov_u = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        trace["hessian_not_pd"] = True
        return None
    if method == "sandwich":
        scores = _per_observation_scores(model, family, x, sigma2_init, u)
        cov_u = cov_u @ (scores.T @ scores) @ cov_u
    jac = _transform_jacobian(model, family, u)
    cov_theta = jac @ cov_u @ jac.T
    variances = np.diag(cov_theta)
    if np.any(variances < 0.0):
        trace["hessian_not_pd"] = True
        return None
    return {name: float(math.sqrt(v)) for name, v in zip(names, variances)}


def _quiet_minimize(objective, u, **kwargs):
    # probing the infeasible region returns +inf, which makes scipy's
    # finite differencing warn about inf-inf; that is expected and handled
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", category=RuntimeWarning)
        return optimize.minimize(objective, u, **kwargs)


def _precision_polish(objective, u: np.ndarray, f: float, config: FitConfig):
    """Drive the gradient infinity-norm below the convergence threshold.

    Quasi-Newton restarts squeeze out the line-search precision limit; if the
    target is still missed, damped Newton steps on the central-difference
    Hessian finish the job.
    """
    grad = _central_gradient(objective, u)
    grad_norm = float(np.max(np.abs(grad)))
    for _ in range(3):
        if grad_norm < config.gradient_tol:
            return u, f, grad_norm
        res = _quiet_minimize(
            objective,
            u,
            method="BFGS",
            jac="3-point",
            options={"gtol": 1e-9, "maxiter": config.polish_maxiter},
        )
        if float(res.fun) <= f:
            u, f = res.x, float(res.fun)
        grad = _central_gradient(objective, u)
        grad_norm = float(np.max(np.abs(grad)))
    # Near the optimum the attainable objective decrease drops below the
    # floating-point noise of the likelihood sum, so Newton steps are judged
    # by the measured gradient instead of the objective value alone.
    noise = 64.0 * np.finfo(float).eps * max(1.0, abs(f))
    for _ in range(6):
        if grad_norm < config.gradient_tol:
            break
        hess = _central_hessian(objective, u)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        moved = False
        for scale in (1.0, 0.5, 0.25, 0.0625):
            cand = u - scale * step
            f_cand = float(objective(cand))
            if not math.isfinite(f_cand) or f_cand > f + noise:
                continue
            g_cand = _central_gradient(objective, cand)
            gn_cand = float(np.max(np.abs(g_cand)))
            if gn_cand < grad_norm:
                u, f = cand, min(f, f_cand)
                grad, grad_norm = g_cand, gn_cand
                moved = True
                break
        if not moved:
            break
    return u, f, grad_norm


def fit(model: Model, family: Family, returns, config: FitConfig | None = None) -> FitResult:
    """Maximum-likelihood fit of one model/distribution cell.

    Multi-start: the moment-matched start plus jittered copies (uniform +-50%
    multiplicative noise in unconstrained space).  Each start runs
    Nelder-Mead then BFGS with central-difference gradients; convergence is
    declared when the gradient infinity-norm at the best optimum falls below
    ``config.gradient_tol``.
    """
    config = config or FitConfig()
    x = _values(returns).copy()
    n = x.size
    if n < 100:
        raise SeriesTooShortError(f"need at least 100 observations to fit, got {n}")
    if n < 500:
        warnings.warn(f"fitting on only {n} observations", ShortSeriesWarning, stacklevel=2)
    mean_offset = float(np.mean(x)) if config.demean else 0.0
    x -= mean_offset
    sigma2_init = config.sigma2_init
    if sigma2_init is None:
        sigma2_init = float(np.var(x, ddof=1))
    objective = _neg_loglik(model, family, x, sigma2_init)

    try:
        u0 = to_unconstrained(moment_matched_start(model, family, x))
    except (InfeasibleParamsError, InvalidShapeError) as exc:
        err = AllStartsFailedError(f"cannot build a feasible starting point: {exc}")
        err.trace = []
        raise err from exc
    rng = np.random.default_rng(config.seed)
    starts = [u0]
    for _ in range(max(0, config.starts - 1)):
        starts.append(u0 * (1.0 + rng.uniform(-0.5, 0.5, size=u0.size)))

    trace: list[dict] = []
    best_u, best_f = None, np.inf
    for idx, u_start in enumerate(starts):
        rec: dict = {"start": idx}
        try:
            res_nm = _quiet_minimize(
                objective,
                u_start,
                method="Nelder-Mead",
                options={
                    "maxiter": config.simplex_maxiter,
                    "xatol": 1e-8,
                    "fatol": 1e-10,
                    "adaptive": True,
                },
            )
            u_cur, f_cur = res_nm.x, float(res_nm.fun)
            rec["simplex_iters"] = int(res_nm.nit)
            res_bfgs = _quiet_minimize(
                objective,
                u_cur,
                method="BFGS",
                jac="3-point",
                options={"gtol": 1e-8, "maxiter": config.polish_maxiter},
            )
            if float(res_bfgs.fun) <= f_cur:
                u_cur, f_cur = res_bfgs.x, float(res_bfgs.fun)
            rec["polish_iters"] = int(res_bfgs.nit)
            rec["neg_loglik"] = f_cur
            rec["ok"] = math.isfinite(f_cur)
        except Exception as exc:  # noqa: BLE001 - per-start failures are recorded
            rec["ok"] = False
            rec["error"] = repr(exc)
            trace.append(rec)
            continue
        trace.append(rec)
        if rec["ok"] and f_cur < best_f:
            best_u, best_f = u_cur, f_cur

    f_start = objective(u0)
    if best_u is None or not math.isfinite(best_f):
        err = AllStartsFailedError(
            f"no start produced a finite likelihood for {model.value}-{family.value}"
        )
        err.trace = trace
        raise err
    if f_start < best_f:
        # never return a point worse than the moment-matched start
        best_u, best_f = u0, float(f_start)

    best_u, best_f, grad_norm = _precision_polish(objective, best_u, best_f, config)
    converged = grad_norm < config.gradient_tol
    fit_trace = {"best_grad_inf_norm": grad_norm, "starts": trace}

    params = from_unconstrained(model, family, best_u)
    loglik = -best_f
    k = free_param_count(model, family)
    aic, bic = information_criteria(loglik, k, n)
    std_errors = None
    if config.std_errors in ("hessian", "sandwich"):
        std_errors = _standard_errors(
            model, family, x, sigma2_init, best_u, objective, config.std_errors, fit_trace
        )
    return FitResult(
        params=params,
        std_errors=std_errors,
        log_likelihood=loglik,
        aic=aic,
        bic=bic,
        n_obs=n,
        k_params=k,
        converged=converged,
        optimizer_trace=[fit_trace],
        seed=config.seed,
        demeaned=config.demean,
        mean_offset=mean_offset,
        sigma2_init=sigma2_init,
    )


# --- model selection ---------------------------------------------------------------

GRID = [
    (model, family)
    for model in (Model.SGARCH, Model.IGARCH, Model.TGARCH)
    for family in (Family.STUDENT_T, Family.GED, Family.NIG)
]


@dataclass(eq=False)
class GridCell:
    model: Model
    family: Family
    fit: FitResult | None
    error: str | None = None


@dataclass(eq=False)
class SelectionReport:
    """All grid fits plus the winning indices under each criterion."""

    grid: list[GridCell]
    best_by_aic: int
    best_by_bic: int
    best_by_loglik: int

    def cell(self, model: Model, family: Family) -> GridCell:
        for c in self.grid:
            if c.model is model and c.family is family:
                return c
        raise KeyError((model, family))


def _fit_cell(args) -> tuple[int, FitResult | None, str | None]:
    idx, model, family, values, config = args
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ShortSeriesWarning)
            result = fit(model, family, values, config)
        return idx, result, None
    except Exception as exc:  # noqa: BLE001 - recorded per cell
        return idx, None, repr(exc)


def _grid_workers() -> int:
    cap = os.environ.get("VOLKIT_THREADS", "")
    try:
        cap_val = int(cap) if cap else (os.cpu_count() or 1)
    except ValueError:
        cap_val = 1
    return max(1, min(cap_val, len(GRID)))


def select_model(returns, config: FitConfig | None = None) -> SelectionReport:
    """Fit the full 3x3 grid and pick winners by AIC, BIC, and log likelihood.

    Cell failures are recorded without aborting the grid; VOLKIT_THREADS caps
    how many cells run in parallel worker processes.
    """
    config = config or FitConfig()
    values = _values(returns)
    jobs = [
        (i, model, family, values, dataclasses.replace(config, seed=config.seed + i))
        for i, (model, family) in enumerate(GRID)
    ]
    results: list[tuple[FitResult | None, str | None]] = [(None, None)] * len(GRID)
    workers = _grid_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, fit_result, err in pool.map(_fit_cell, jobs):
                results[idx] = (fit_result, err)
    else:
        for job in jobs:
            idx, fit_result, err = _fit_cell(job)
            results[idx] = (fit_result, err)

    grid = [
        GridCell(model, family, results[i][0], results[i][1])
        for i, (model, family) in enumerate(GRID)
    ]
    fitted = [(i, c.fit) for i, c in enumerate(grid) if c.fit is not None]
    if not fitted:
        details = "; ".join(f"{c.model.value}-{c.family.value}: {c.error}" for c in grid)
        raise AllFitsFailedError(f"all grid cells failed ({details})")

    best_by_aic = min(fitted, key=lambda t: (t[1].aic, t[1].bic, t[1].k_params))[0]
    best_by_bic = min(fitted, key=lambda t: (t[1].bic, t[1].aic, t[1].k_params))[0]
    best_by_loglik = max(fitted, key=lambda t: (t[1].log_likelihood, -t[1].k_params))[0]
    return SelectionReport(grid, best_by_aic, best_by_bic, best_by_loglik)
