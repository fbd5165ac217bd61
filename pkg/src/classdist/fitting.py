"""Preprocessing, the error functional and the two-parameter grid fit."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import (
    DegenerateInput,
    EmptyInput,
    InvalidParameter,
    LengthMismatch,
    NegativeValue,
    ZeroTotal,
)
from .model import ModelParams, TailTable, build_tail_table, class_probabilities, tail_steps

__all__ = [
    "EmpiricalDistribution",
    "FitConfig",
    "FitResult",
    "preprocess",
    "error_metric",
    "select_n0",
    "optimal_n0_for_z",
    "fit",
]

log = logging.getLogger(__name__)

Metric = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Relative class frequencies sorted in non-increasing order.

    Attributes:
        values: Frequencies ``D_1 >= D_2 >= ... >= D_m`` summing to 1.
        total_elements: Size of the underlying base set, when known.
        labels: Class labels aligned with ``values``.
    """

    values: np.ndarray
    total_elements: Optional[int] = None
    labels: Optional[tuple] = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise EmptyInput("distribution needs at least one class")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise NegativeValue("frequencies must be finite and non-negative")
        if np.any(np.diff(v) > 0):
            raise InvalidParameter("frequencies must be sorted in non-increasing order")
        if abs(math.fsum(v) - 1.0) > 1e-12:
            raise InvalidParameter(f"frequencies sum to {math.fsum(v)!r}, expected 1")
        if self.labels is not None and len(self.labels) != v.size:
            raise LengthMismatch("labels and values differ in length")
        if self.total_elements is not None and int(self.total_elements) < 1:
            raise InvalidParameter("total_elements must be a positive integer")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return int(self.values.size)


def preprocess(counts: Sequence[float], total_elements: Optional[int] = None,
               labels: Optional[Sequence[str]] = None) -> EmpiricalDistribution:
    """Sort raw counts in descending order and normalise them to sum 1.

    The sort is stable, so equal counts keep their input order (and labels).
    """
    x = np.asarray(counts, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptyInput("no counts given")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise NegativeValue("counts must be finite and non-negative")
    total = math.fsum(x)
    if total <= 0:
        raise ZeroTotal("counts sum to zero")
    order = np.argsort(-x, kind="stable")
    values = x[order] / total
    sorted_labels = None
    if labels is not None:
        if len(labels) != x.size:
            raise LengthMismatch("labels and counts differ in length")
        sorted_labels = tuple(labels[i] for i in order)
    return EmpiricalDistribution(values, total_elements, sorted_labels)


def error_metric(D, P) -> float | np.ndarray:
    """Euclidean distance ``sqrt(sum (D_n - P_n)**2)`` between two distributions.

    ``P`` may carry leading batch dimensions; the result then has that shape.
    """
    d = D.values if isinstance(D, EmpiricalDistribution) else np.asarray(D, dtype=np.float64)
    p = P.values if isinstance(P, EmpiricalDistribution) else np.asarray(P, dtype=np.float64)
    if d.shape[-1] != p.shape[-1]:
        raise LengthMismatch(f"distributions have {d.shape[-1]} and {p.shape[-1]} classes")
    out = np.sqrt(np.sum((d - p) ** 2, axis=-1))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class FitConfig:
    """Search configuration.

    The base grid over ``z = exp(-gamma)`` runs from ``z_min`` to ``z_max`` in
    steps of ``z_step``.  Each refinement round re-grids ``refine_halfwidth``
    steps either side of the incumbent with the step multiplied by
    ``refine_shrink``.
    """

    z_min: float = 0.0005
    z_max: float = 0.9995
    z_step: float = 0.0005
    n0_max: int = 200
    accuracy_n0: float = 1e-4
    refine_rounds: int = 2
    refine_shrink: float = 0.02
    refine_halfwidth: int = 20

    def __post_init__(self):
        if not 0 < self.z_min < self.z_max < 1:
            raise InvalidParameter("need 0 < z_min < z_max < 1")
        if not self.z_step > 0:
            raise InvalidParameter("z_step must be positive")
        if int(self.n0_max) != self.n0_max or self.n0_max < 1:
            raise InvalidParameter("n0_max must be a positive integer")
        if not self.accuracy_n0 > 0:
            raise InvalidParameter("accuracy_n0 must be positive")
        if int(self.refine_rounds) != self.refine_rounds or self.refine_rounds < 0:
            raise InvalidParameter("refine_rounds must be a non-negative integer")
        if not 0 < self.refine_shrink < 1:
            raise InvalidParameter("refine_shrink must lie in (0, 1)")
        if int(self.refine_halfwidth) != self.refine_halfwidth or self.refine_halfwidth < 1:
            raise InvalidParameter("refine_halfwidth must be a positive integer")

    def grid(self) -> np.ndarray:
        return _base_grid(self.z_min, self.z_max, self.z_step)

    def to_dict(self) -> dict:
        return asdict(self)


@lru_cache(maxsize=16)
def _base_grid(z_min: float, z_max: float, z_step: float) -> np.ndarray:
    inv = 1.0 / z_step
    if abs(inv - round(inv)) < 1e-9 and abs(z_min * inv - round(z_min * inv)) < 1e-6:
        # integer multiples of 1/inv, so that e.g. 0.8 is hit exactly
        k0 = round(z_min * inv)
        k1 = math.floor(z_max * inv + 1e-6)
        zs = np.arange(k0, k1 + 1, dtype=np.float64) / round(inv)
    else:
        n = math.floor((z_max - z_min) / z_step + 1e-9)
        zs = z_min + z_step * np.arange(n + 1, dtype=np.float64)
    zs.setflags(write=False)
    return zs


@lru_cache(maxsize=8)
def _grid_steps(z_min: float, z_max: float, z_step: float, kmax: int) -> np.ndarray:
    rho = tail_steps(_base_grid(z_min, z_max, z_step), kmax)
    rho.setflags(write=False)
    return rho


def select_n0(errors: Sequence[float], accuracy: float) -> tuple[int, float]:
    """Optimal n0 from an error sequence ``errors[n0 - 1]``, n0 = 1, 2, ...

    Returns the largest n0 at or below the (first) global minimum for which
    ``|Error(n0-1) - Error(n0)| > accuracy``, or 1 if no such n0 exists,
    together with the error at that n0.
    """
    e = np.asarray(errors, dtype=np.float64)
    if e.size == 0:
        raise EmptyInput("empty error sequence")
    best = int(np.argmin(e))
    for k in range(best, 0, -1):
        if abs(e[k - 1] - e[k]) > accuracy:
            return k + 1, float(e[k])
    return 1, float(e[0])


def _n0_errors(D: EmpiricalDistribution, table: TailTable, n0_max: int, metric: Optional[Metric]):
    P = np.stack([table.probabilities(n0, D.m) for n0 in range(1, n0_max + 1)])
    return (metric or error_metric)(D.values, P)


def optimal_n0_for_z(D: EmpiricalDistribution, z: float, cfg: FitConfig = FitConfig(),
                     table: Optional[TailTable] = None) -> tuple[int, float]:
    """Optimal n0 and its error at a fixed z, scanning n0 = 1..cfg.n0_max."""
    if not 0 < z < 1:
        raise InvalidParameter(f"z must lie in (0, 1), got {z!r}")
    if table is None:
        table = build_tail_table(-math.log(z), D.m + cfg.n0_max)
    return select_n0(_n0_errors(D, table, cfg.n0_max, None), cfg.accuracy_n0)


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of :func:`fit`.

    ``error_vs_z`` holds ``(z, error at the selected n0)`` for the base grid;
    ``error_vs_n0`` holds ``(n0, error)`` at the optimal z.
    """

    source: EmpiricalDistribution
    params: ModelParams
    error: float
    fitted: np.ndarray
    error_vs_z: np.ndarray
    error_vs_n0: np.ndarray
    config: FitConfig = field(default_factory=FitConfig)

    def to_dict(self) -> dict:
        return {
            "n0": self.params.n0,
            "gamma": self.params.gamma,
            "z": self.params.z,
            "nbar": self.params.nbar,
            "error": self.error,
            "m": self.source.m,
            "source": self.source.values.tolist(),
            "fitted": self.fitted.tolist(),
            "config": self.config.to_dict(),
        }


def _grid_errors(values: np.ndarray, rho: np.ndarray, n0_max: int,
                 metric: Optional[Metric]) -> np.ndarray:
    if metric is None:
        return _kernels.grid_errors(values, rho, n0_max)
    m = values.size
    E = np.empty((rho.shape[0], n0_max))
    for iz in range(rho.shape[0]):
        windows = np.lib.stride_tricks.sliding_window_view(rho[iz], m - 1)[:n0_max]
        q = np.concatenate((np.ones((n0_max, 1)), np.cumprod(windows, axis=1)), axis=1)
        E[iz] = metric(values, q / q.sum(axis=1, keepdims=True))
    return E


def fit(D: EmpiricalDistribution, cfg: FitConfig = FitConfig(),
        metric: Optional[Metric] = None) -> FitResult:
    """Fit ``(n0, z)`` by exhaustive search over the z-grid.

    For every grid z all n0 in ``1..cfg.n0_max`` are scored from one shared
    tail table and the optimal n0 is selected; the z with the smallest error
    wins (ties go to the smaller z).  Optional refinement rounds repeat the
    search on a finer grid around the incumbent and only ever accept a
    strictly smaller error.

    ``metric(D, P)`` may replace the Euclidean error; it must accept a batch
    of candidate rows ``P`` of shape ``(k, m)``.
    """
    values = D.values
    m = D.m
    if m < 2:
        raise DegenerateInput("fitting needs at least two classes")
    kmax = m + cfg.n0_max
    zs = cfg.grid()
    rho = _grid_steps(cfg.z_min, cfg.z_max, cfg.z_step, kmax)
    E = _grid_errors(values, rho, cfg.n0_max, metric)
    n0s, errs = _kernels.select_n0_rows(E, cfg.accuracy_n0)
    ib = int(np.argmin(errs))
    best_z, best_n0, best_err, best_row = float(zs[ib]), int(n0s[ib]), float(errs[ib]), E[ib]
    curve_z = np.column_stack((zs, errs))

    step = cfg.z_step
    offsets = np.arange(-cfg.refine_halfwidth, cfg.refine_halfwidth + 1, dtype=np.float64)
    for _ in range(cfg.refine_rounds):
        step *= cfg.refine_shrink
        local = best_z + step * offsets
        local = local[(local > 0) & (local < 1)]
        E_loc = _grid_errors(values, tail_steps(local, kmax), cfg.n0_max, metric)
        n0_loc, err_loc = _kernels.select_n0_rows(E_loc, cfg.accuracy_n0)
        il = int(np.argmin(err_loc))
        if err_loc[il] < best_err:
            best_z, best_n0, best_err, best_row = (
                float(local[il]), int(n0_loc[il]), float(err_loc[il]), E_loc[il])

    if int(np.argmin(best_row)) == cfg.n0_max - 1:
        log.warning("error minimum at n0_max=%d; consider a larger n0 range", cfg.n0_max)

    params = ModelParams.from_z(best_n0, best_z)
    fitted = class_probabilities(params, m)
    fitted.setflags(write=False)
    curve_n0 = np.column_stack((np.arange(1, cfg.n0_max + 1), best_row))
    return FitResult(
        source=D,
        params=params,
        error=float((metric or error_metric)(values, fitted)),
        fitted=fitted,
        error_vs_z=curve_z,
        error_vs_n0=curve_n0,
        config=cfg,
    )
