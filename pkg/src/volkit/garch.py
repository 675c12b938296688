"""Conditional-variance recursions and likelihood assembly for GARCH(1,1) models.

Three variants share one state equation:

* standard:   s2_t = omega + alpha x_{t-1}^2 + beta s2_{t-1}
* integrated: s2_t = omega + beta s2_{t-1} + (1 - beta) x_{t-1}^2
* threshold:  s2_t = omega + (alpha + lam 1[x_{t-1} < 0]) x_{t-1}^2 + beta s2_{t-1}

x = 0 counts as good news (indicator 0).  The total log likelihood is the
standardized-residual form sum_t [log f(x_t / s_t) - log(s2_t)/2], which is
algebraically identical to the per-family expressions and avoids triplicated
density code.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal

from .distributions import InnovationSpec, log_pdf, prob_below_zero, sample
from .errors import (
    InfeasibleParamsError,
    NonFiniteLikelihoodError,
    NonPositiveVarianceError,
)
from .ingest import ReturnSeries


class Model(enum.Enum):
    """Variance-equation variants; values match the CLI --model options."""

    SGARCH = "sgarch"
    IGARCH = "igarch"
    TGARCH = "tgarch"


@lru_cache(maxsize=4096)
def _p_negative(spec: InnovationSpec) -> float:
    return prob_below_zero(spec)


@dataclass(frozen=True)
class GarchParams:
    """Feasible GARCH(1,1) parameter vector with its innovation law.

    ``lam`` is the threshold (leverage) coefficient and is only meaningful
    for the TGARCH model.
    """

    model: Model
    omega: float
    alpha: float
    beta: float
    innovation: InnovationSpec
    lam: float = 0.0

    def __post_init__(self):
        vals = (self.omega, self.alpha, self.beta, self.lam)
        if not all(math.isfinite(v) for v in vals):
            raise InfeasibleParamsError("parameters must be finite")
        if self.beta < 0.0:
            raise InfeasibleParamsError(f"beta must be >= 0, got {self.beta}")
        if self.model is Model.SGARCH:
            if self.omega <= 0.0:
                raise InfeasibleParamsError(f"omega must be > 0, got {self.omega}")
            if self.alpha < 0.0:
                raise InfeasibleParamsError(f"alpha must be >= 0, got {self.alpha}")
            if self.lam != 0.0:
                raise InfeasibleParamsError("lam applies to the threshold model only")
            if self.alpha + self.beta >= 1.0:
                raise InfeasibleParamsError(
                    f"alpha + beta must be < 1, got {self.alpha + self.beta}"
                )
        elif self.model is Model.IGARCH:
            if self.omega < 0.0:
                raise InfeasibleParamsError(f"omega must be >= 0, got {self.omega}")
            if not 0.0 < self.beta < 1.0:
                raise InfeasibleParamsError(f"beta must be in (0, 1), got {self.beta}")
            if abs(self.alpha - (1.0 - self.beta)) > 1e-12:
                raise InfeasibleParamsError("integrated model requires alpha = 1 - beta")
            if self.lam != 0.0:
                raise InfeasibleParamsError("lam applies to the threshold model only")
        elif self.model is Model.TGARCH:
            if self.omega <= 0.0:
                raise InfeasibleParamsError(f"omega must be > 0, got {self.omega}")
            if self.alpha < 0.0:
                raise InfeasibleParamsError(f"alpha must be >= 0, got {self.alpha}")
            if self.alpha + self.lam < 0.0:
                raise InfeasibleParamsError("bad-news coefficient alpha + lam must be >= 0")
            if self.persistence >= 1.0:
                raise InfeasibleParamsError(
                    f"persistence must be < 1, got {self.persistence}"
                )
        else:  # pragma: no cover - enum is closed
            raise InfeasibleParamsError(f"unknown model {self.model!r}")

    @classmethod
    def igarch(cls, omega: float, beta: float, innovation: InnovationSpec) -> "GarchParams":
        """Integrated model from its two free coefficients (alpha derived)."""
        return cls(Model.IGARCH, omega, 1.0 - beta, beta, innovation)

    @property
    def persistence(self) -> float:
        """Expected coefficient on lagged variance-plus-shock; < 1 off the unit root."""
        if self.model is Model.IGARCH:
            return 1.0
        if self.model is Model.TGARCH:
            return self.alpha + self.beta + self.lam * _p_negative(self.innovation)
        return self.alpha + self.beta


@dataclass(eq=False)
class VariancePath:
    """Fitted conditional variances aligned to the return observations."""

    sigma2: np.ndarray
    sigma2_init: float

    def __post_init__(self):
        self.sigma2 = np.asarray(self.sigma2, dtype=float)
        if self.sigma2.size == 0:
            raise NonPositiveVarianceError("empty variance path")
        if not np.all(np.isfinite(self.sigma2)) or np.any(self.sigma2 <= 0.0):
            raise NonPositiveVarianceError("variance path must be positive and finite")

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.sigma2)


def _values(returns) -> np.ndarray:
    if isinstance(returns, ReturnSeries):
        return returns.values
    return np.asarray(returns, dtype=float)


def variance_step(params: GarchParams, sigma2_prev: float, x_prev: float) -> float:
    """One step of the variance recursion given the previous state and shock."""
    if not sigma2_prev > 0.0:
        raise NonPositiveVarianceError(f"sigma2_prev must be > 0, got {sigma2_prev}")
    if params.model is Model.SGARCH:
        nxt = params.omega + params.alpha * x_prev**2 + params.beta * sigma2_prev
    elif params.model is Model.IGARCH:
        nxt = params.omega + params.beta * sigma2_prev + (1.0 - params.beta) * x_prev**2
    else:
        nxt = params.omega + params.alpha * x_prev**2 + params.beta * sigma2_prev
        if x_prev < 0.0:
            nxt += params.lam * x_prev**2
    if not nxt > 0.0:
        raise NonPositiveVarianceError(f"recursion produced sigma2 = {nxt}")
    return nxt


def filter_variance(params: GarchParams, returns, sigma2_init: float) -> VariancePath:
    """Run the variance recursion over a return path, seeded with sigma2_init.

    Implemented as a linear IIR filter on the shock sequence; equivalent to
    iterating :func:`variance_step`.
    """
    x = _values(returns)
    if not (math.isfinite(sigma2_init) and sigma2_init > 0.0):
        raise NonPositiveVarianceError(f"sigma2_init must be > 0, got {sigma2_init}")
    n = x.size
    if n == 0:
        raise NonPositiveVarianceError("empty return series")
    if params.model is Model.SGARCH:
        coef = np.full(n - 1, params.alpha)
    elif params.model is Model.IGARCH:
        coef = np.full(n - 1, 1.0 - params.beta)
    else:
        coef = params.alpha + params.lam * (x[:-1] < 0.0)
    drive = np.empty(n)
    drive[0] = sigma2_init
    drive[1:] = params.omega + coef * x[:-1] ** 2
    sigma2 = signal.lfilter([1.0], [1.0, -params.beta], drive)
    if not np.all(np.isfinite(sigma2)) or np.any(sigma2 <= 0.0):
        raise NonPositiveVarianceError("recursion produced a non-positive variance")
    return VariancePath(sigma2, sigma2_init)


def standardized_residuals(params: GarchParams, returns, sigma2_init: float) -> np.ndarray:
    """z_t = x_t / sigma_t under the fitted parameters."""
    x = _values(returns)
    path = filter_variance(params, x, sigma2_init)
    return x / path.sigma


def log_likelihood(params: GarchParams, returns, sigma2_init: float) -> float:
    """Total log likelihood of the return path under params."""
    x = _values(returns)
    path = filter_variance(params, x, sigma2_init)
    z = x / path.sigma
    ll = float(np.sum(log_pdf(params.innovation, z) - 0.5 * np.log(path.sigma2)))
    if not math.isfinite(ll):
        raise NonFiniteLikelihoodError(f"log likelihood is {ll}")
    return ll


def simulate_path(
    params: GarchParams, n: int, sigma2_init: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate (returns, sigma2) of length n; deterministic per seed."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not (math.isfinite(sigma2_init) and sigma2_init > 0.0):
        raise NonPositiveVarianceError(f"sigma2_init must be > 0, got {sigma2_init}")
    eps = sample(params.innovation, n, seed)
    x = np.empty(n)
    s2 = np.empty(n)
    omega, alpha, beta, lam = params.omega, params.alpha, params.beta, params.lam
    igarch = params.model is Model.IGARCH
    tgarch = params.model is Model.TGARCH
    s2[0] = sigma2_init
    x[0] = math.sqrt(s2[0]) * eps[0]
    for t in range(1, n):
        xp = x[t - 1]
        if igarch:
            nxt = omega + beta * s2[t - 1] + (1.0 - beta) * xp * xp
        elif tgarch:
            coef = alpha + (lam if xp < 0.0 else 0.0)
            nxt = omega + coef * xp * xp + beta * s2[t - 1]
        else:
            nxt = omega + alpha * xp * xp + beta * s2[t - 1]
        s2[t] = nxt
        x[t] = math.sqrt(nxt) * eps[t]
    if not np.all(np.isfinite(s2)) or np.any(s2 <= 0.0):
        raise NonPositiveVarianceError("simulation produced a non-positive variance")
    return x, s2
