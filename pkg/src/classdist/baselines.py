"""One-parameter comparison distributions and their fitters.

Four methods are provided: Zipf with a free exponent, Zipf with exponent 1,
a geometric (exponential) law, and the legacy model that sums the class
weights from two classes upward without excluding any class.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateInput, InvalidParameter
from .fitting import EmpiricalDistribution, FitConfig, _grid_steps, error_metric
from .model import tail_steps

__all__ = [
    "Method",
    "BaselineConfig",
    "BaselineFit",
    "zipf_distribution",
    "exponential_distribution",
    "legacy_probabilities",
    "fit_baseline",
]


class Method(str, enum.Enum):
    ZIPF = "zipf"
    ZIPF_S1 = "zipf_s1"
    EXPONENTIAL = "exponential"
    LEGACY = "legacy"


@dataclass(frozen=True)
class BaselineConfig:
    """Parameter grids for the baseline fitters.

    Attributes:
        zipf_s_min, zipf_s_max, zipf_s_step: Linear grid of Zipf exponents.
        exp_a_min, exp_a_max, exp_a_points: Log-spaced grid of decay rates.
        legacy: z-grid used for the legacy model (n0_max only sizes the
            shared tail cache).
        local_refine: Polish the best grid point with a bounded 1-D
            minimiser inside its neighbouring grid cells.
    """

    zipf_s_min: float = 0.05
    zipf_s_max: float = 5.0
    zipf_s_step: float = 0.005
    exp_a_min: float = 0.001
    exp_a_max: float = 10.0
    exp_a_points: int = 2000
    legacy: FitConfig = FitConfig()
    local_refine: bool = True

    def __post_init__(self):
        if not 0 < self.zipf_s_min < self.zipf_s_max:
            raise InvalidParameter("need 0 < zipf_s_min < zipf_s_max")
        if not self.zipf_s_step > 0:
            raise InvalidParameter("zipf_s_step must be positive")
        if not 0 < self.exp_a_min < self.exp_a_max:
            raise InvalidParameter("need 0 < exp_a_min < exp_a_max")
        if int(self.exp_a_points) != self.exp_a_points or self.exp_a_points < 2:
            raise InvalidParameter("exp_a_points must be an integer >= 2")

    def zipf_grid(self) -> np.ndarray:
        inv = 1.0 / self.zipf_s_step
        k0 = round(self.zipf_s_min * inv)
        k1 = math.floor(self.zipf_s_max * inv + 1e-6)
        return np.arange(k0, k1 + 1, dtype=np.float64) / inv

    def exp_grid(self) -> np.ndarray:
        return np.geomspace(self.exp_a_min, self.exp_a_max, self.exp_a_points)

    def to_dict(self) -> dict:
        return {
            "zipf_s_min": self.zipf_s_min,
            "zipf_s_max": self.zipf_s_max,
            "zipf_s_step": self.zipf_s_step,
            "exp_a_min": self.exp_a_min,
            "exp_a_max": self.exp_a_max,
            "exp_a_points": self.exp_a_points,
            "legacy": self.legacy.to_dict(),
            "local_refine": self.local_refine,
        }


@dataclass(frozen=True, eq=False)
class BaselineFit:
    """Best fit of one baseline method.

    ``parameter`` is the Zipf exponent s, the decay rate a, or gamma for the
    legacy model; it is ``None`` for Zipf with s = 1.
    """

    method: Method
    parameter: Optional[float]
    error: float
    fitted: np.ndarray

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "parameter": self.parameter,
            "error": self.error,
            "fitted": self.fitted.tolist(),
        }


def _check_m(m) -> int:
    if int(m) != m or m < 1:
        raise InvalidParameter(f"m must be a positive integer, got {m!r}")
    return int(m)


def _zipf_rows(s: np.ndarray, m: int) -> np.ndarray:
    logn = np.log(np.arange(1, m + 1, dtype=np.float64))
    w = np.exp(-np.multiply.outer(s, logn))
    return w / w.sum(axis=-1, keepdims=True)


def _exp_rows(a: np.ndarray, m: int) -> np.ndarray:
    # weights relative to the first class, so large a cannot underflow it
    w = np.exp(-np.multiply.outer(a, np.arange(m, dtype=np.float64)))
    return w / w.sum(axis=-1, keepdims=True)


def _legacy_rows(rho: np.ndarray, m: int) -> np.ndarray:
    """Rows ``(C_2, C_2, C_3, ..., C_m)`` normalised, from steps ``rho[:, j-1] = C_{j+1}/C_j``."""
    nz = rho.shape[0]
    q = np.ones((nz, m))
    if m > 2:
        q[:, 2:] = np.cumprod(rho[:, 1 : m - 1], axis=1)
    return q / q.sum(axis=1, keepdims=True)


def zipf_distribution(s: float, m: int) -> np.ndarray:
    """Zipf law ``n**-s`` normalised over ranks 1..m."""
    s = float(s)
    if not (s > 0 and math.isfinite(s)):
        raise InvalidParameter(f"s must be positive, got {s!r}")
    return _zipf_rows(np.array(s), _check_m(m))


def exponential_distribution(a: float, m: int) -> np.ndarray:
    """Geometric weights ``exp(-a n)`` normalised over ranks 1..m."""
    a = float(a)
    if not (a > 0 and math.isfinite(a)):
        raise InvalidParameter(f"a must be positive, got {a!r}")
    return _exp_rows(np.array(a), _check_m(m))


def legacy_probabilities(gamma: float, m: int) -> np.ndarray:
    """Legacy model: ``P_n`` proportional to ``sum_{k>=max(n,2)} e^{-gamma k}/k**2``."""
    gamma = float(gamma)
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InvalidParameter(f"gamma must be positive, got {gamma!r}")
    m = _check_m(m)
    if m == 1:
        return np.ones(1)
    rho = tail_steps(np.array([math.exp(-gamma)]), m + 1)
    return _legacy_rows(rho, m)[0]


@lru_cache(maxsize=1)
def _default_config() -> BaselineConfig:
    return BaselineConfig()


def _polish(values, make, lo, hi, x0, err0):
    """Bounded 1-D minimisation of the squared error; keeps x0 unless strictly better."""
    res = minimize_scalar(
        lambda x: float(np.sum((values - make(x)) ** 2)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12 * max(1.0, abs(x0))},
    )
    if res.success:
        err = error_metric(values, make(res.x))
        if err < err0:
            return float(res.x), float(err)
    return x0, err0


def fit_baseline(D: EmpiricalDistribution, method, cfg: Optional[BaselineConfig] = None) -> BaselineFit:
    """Least-squares fit of a baseline method to ``D``.

    The single parameter is chosen by exhaustive grid search (first minimum
    wins), optionally polished by a bounded minimiser between the two
    neighbouring grid points.  Zipf with s = 1 has nothing to fit.
    """
    method = Method(method)
    cfg = cfg or _default_config()
    values = D.values
    m = D.m

    if method is Method.ZIPF_S1:
        fitted = zipf_distribution(1.0, m)
        return BaselineFit(method, None, float(error_metric(values, fitted)), fitted)
    if m < 2:
        raise DegenerateInput("fitting needs at least two classes")

    if method is Method.ZIPF:
        grid = cfg.zipf_grid()
        rows = _zipf_rows(grid, m)
        make = lambda s: _zipf_rows(np.array(s), m)  # noqa: E731
    elif method is Method.EXPONENTIAL:
        grid = cfg.exp_grid()
        rows = _exp_rows(grid, m)
        make = lambda a: _exp_rows(np.array(a), m)  # noqa: E731
    else:
        lc = cfg.legacy
        grid = lc.grid()
        rho = _grid_steps(lc.z_min, lc.z_max, lc.z_step, m + lc.n0_max)
        rows = _legacy_rows(rho, m)
        make = lambda z: _legacy_rows(tail_steps(np.array([z]), m + 1), m)[0]  # noqa: E731

    errs = error_metric(values, rows)
    i = int(np.argmin(errs))
    x, err = float(grid[i]), float(errs[i])
    if cfg.local_refine:
        lo = float(grid[max(i - 1, 0)])
        hi = float(grid[min(i + 1, grid.size - 1)])
        x, err = _polish(values, make, lo, hi, x, err)

    fitted = np.asarray(make(x), dtype=np.float64).reshape(m)
    fitted.setflags(write=False)
    err = float(error_metric(values, fitted))
    if method is Method.LEGACY:
        return BaselineFit(method, -math.log(x), err, fitted)
    return BaselineFit(method, x, err, fitted)
