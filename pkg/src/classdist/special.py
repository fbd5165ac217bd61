"""Lerch transcendent and the closed forms built on it.

The Lerch transcendent

    Phi(z, s, a) = sum_{n>=0} z**n / (n + a)**s

is summed directly.  The remaining functions (``tau``, ``partition_z``,
``alpha``) eliminate the infinite series where that is numerically safe and
fall back to the series where the closed form would cancel catastrophically.

Accuracy degrades for z extremely close to 1 (z > 0.9995): the number of
terms needed grows like 1/(1 - z), so a call may hit ``max_terms`` and raise
``NoConvergence`` instead of returning a result.
"""

from __future__ import annotations

import math
import numbers
import sys
from dataclasses import dataclass

import numpy as np

from .errors import DivergentSeries, InvalidParameter, NoConvergence, NumericalUnderflow

__all__ = [
    "SeriesConfig",
    "DEFAULT_SERIES",
    "lerch_phi",
    "lerch_phi_precise",
    "tau",
    "partition_z",
    "alpha",
]

# relative target for internal (model-side) Lerch evaluations
PRECISE_RTOL = 1e-15

# closed forms lose log10(_MAX_CANCELLATION) digits at most before falling back
_MAX_CANCELLATION = 1e4

_FIRST_CHUNK = 64
_MAX_CHUNK = 1 << 16


@dataclass(frozen=True)
class SeriesConfig:
    """Stopping rule for the Lerch series.

    Attributes:
        accuracy: Absolute tolerance.  Summation stops once the last added
            term and the geometric bound on the remaining tail are both
            below it.
        max_terms: Hard cap on the number of terms.
    """

    accuracy: float = 1e-8
    max_terms: int = 10_000_000

    def __post_init__(self):
        if not (self.accuracy > 0 and math.isfinite(self.accuracy)):
            raise InvalidParameter(f"accuracy must be positive, got {self.accuracy!r}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise InvalidParameter(f"max_terms must be a positive integer, got {self.max_terms!r}")


DEFAULT_SERIES = SeriesConfig()


def _check_n0(n0) -> int:
    if isinstance(n0, bool) or not isinstance(n0, numbers.Integral):
        raise InvalidParameter(f"n0 must be an integer, got {n0!r}")
    if n0 < 1:
        raise InvalidParameter(f"n0 must be >= 1, got {n0}")
    return int(n0)


def _check_gamma(gamma) -> float:
    gamma = float(gamma)
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InvalidParameter(f"gamma must be a positive finite real, got {gamma!r}")
    return gamma


def lerch_phi(z: float, s: float, a: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Sum the Lerch series ``sum z**n / (n + a)**s`` for 0 <= z < 1.

    Terms are strictly decreasing, so after term ``t_N`` the remainder is at
    most ``t_N * z / (1 - z)``.  Summation stops at the first N where both
    ``t_N`` and that bound are <= ``cfg.accuracy``; the absolute truncation
    error is therefore below the accuracy.

    Raises:
        DivergentSeries: z outside [0, 1).
        InvalidParameter: a <= 0 or s <= 0.
        NoConvergence: more than ``cfg.max_terms`` terms required.
    """
    z, s, a = float(z), float(s), float(a)
    if not (0.0 <= z < 1.0):
        raise DivergentSeries(f"Lerch series diverges for z={z!r}; need 0 <= z < 1")
    if not (a > 0 and math.isfinite(a)):
        raise InvalidParameter(f"a must be positive, got {a!r}")
    if not (s > 0 and math.isfinite(s)):
        raise InvalidParameter(f"s must be positive, got {s!r}")

    tail_factor = max(1.0, z / (1.0 - z))
    partial = []
    start = 0
    chunk = _FIRST_CHUNK
    while start < cfg.max_terms:
        stop = min(start + chunk, cfg.max_terms)
        n = np.arange(start, stop, dtype=np.float64)
        terms = np.power(z, n) / np.power(n + a, s)
        done = np.flatnonzero(terms * tail_factor <= cfg.accuracy)
        if done.size:
            partial.append(terms[: done[0] + 1])
            return math.fsum(np.concatenate(partial))
        partial.append(terms)
        start = stop
        chunk = min(chunk * 2, _MAX_CHUNK)
    raise NoConvergence(
        f"Lerch series Phi({z}, {s}, {a}) not converged after {cfg.max_terms} terms"
    )


def lerch_phi_precise(z: float, s: float, a: float, max_terms: int = 10_000_000) -> float:
    """Lerch series summed to ~1e-15 relative accuracy (tolerance scaled by the first term)."""
    acc = PRECISE_RTOL * float(a) ** (-float(s))
    return lerch_phi(z, s, a, SeriesConfig(accuracy=acc, max_terms=max_terms))


def _log1m_exp(gamma: float) -> float:
    """ln(1 - e^{-gamma}) without loss for small or large gamma."""
    if gamma > math.log(2.0):
        return math.log1p(-math.exp(-gamma))
    return math.log(-math.expm1(-gamma))


def _closed_form_safe(n0: int, gamma: float) -> bool:
    """Whether the finite closed forms for tau and Z keep enough digits.

    The bracket in tau is a difference of O(|ln(1-z)|) quantities whose
    result is about z**(n0-1) / n0; the ratio estimates digits lost.
    """
    if n0 == 1:
        return True
    z = math.exp(-gamma)
    log_scale = math.log(-_log1m_exp(gamma) / z) + math.log(n0) + gamma * (n0 - 1)
    return log_scale < math.log(_MAX_CANCELLATION)


def tau(n0: int, gamma: float) -> float:
    """Finite rearrangement of ``Phi(exp(-gamma), 1, n0)``.

    Computes ``-e^{gamma(n0-1)} (e^gamma ln(1-e^{-gamma}) + sum_{k<=n0-2} e^{-k gamma}/(k+1))``.
    Where that difference would cancel badly (large ``gamma * n0``), the series
    itself is summed instead; both routes give the same value.
    """
    n0 = _check_n0(n0)
    gamma = _check_gamma(gamma)
    if _closed_form_safe(n0, gamma):
        log_1mz = _log1m_exp(gamma)
        head = math.fsum(math.exp(-k * gamma) / (k + 1) for k in range(n0 - 1))
        return -math.exp(gamma * (n0 - 1)) * math.fsum((math.exp(gamma) * log_1mz, head))
    return lerch_phi_precise(math.exp(-gamma), 1.0, n0)


def partition_z(n0: int, gamma: float) -> float:
    """Normalisation ``Z = sum_{N>=n0} e^{-gamma N} / N``.

    Evaluated as ``-ln(1 - e^{-gamma}) - sum_{k=1}^{n0-1} e^{-gamma k}/k`` when
    the subtraction is benign, else as ``e^{-gamma n0} * tau(n0, gamma)``.
    """
    n0 = _check_n0(n0)
    gamma = _check_gamma(gamma)
    if _closed_form_safe(n0, gamma):
        log_1mz = _log1m_exp(gamma)
        head = [math.exp(-gamma * k) / k for k in range(1, n0)]
        return math.fsum([-log_1mz] + [-h for h in head])
    return math.exp(-gamma * n0) * tau(n0, gamma)


def alpha(n0: int, gamma: float, z_part: float) -> float:
    """Renormalisation factor after excluding the first ``n0 - 1`` classes.

    ``alpha = 1 - (n0 - 1) e^{-gamma n0} Phi(e^{-gamma}, 2, n0) / Z`` where
    ``z_part`` is ``partition_z(n0, gamma)``.

    Raises:
        NumericalUnderflow: ``z_part`` is subnormal (roughly gamma * n0 > 708)
            or the result is not positive, i.e. ``z_part`` is inconsistent
            with (n0, gamma).
    """
    n0 = _check_n0(n0)
    gamma = _check_gamma(gamma)
    z_part = float(z_part)
    if not (z_part > 0 and math.isfinite(z_part)):
        raise InvalidParameter(f"partition value must be positive, got {z_part!r}")
    if n0 == 1:
        return 1.0
    if z_part < sys.float_info.min:
        raise NumericalUnderflow(f"partition value {z_part!r} is subnormal; precision lost")
    phi2 = lerch_phi_precise(math.exp(-gamma), 2.0, n0)
    result = 1.0 - (n0 - 1) * math.exp(-gamma * n0) * phi2 / z_part
    if not result > 0:
        raise NumericalUnderflow(f"alpha={result!r} for n0={n0}, gamma={gamma}, Z={z_part}")
    return result


def alpha_from_tau(n0: int, gamma: float, tau_value: float) -> float:
    """``alpha`` using ``tau`` in place of ``Z``; avoids underflow of ``e^{-gamma n0}``."""
    if n0 == 1:
        return 1.0
    phi2 = lerch_phi_precise(math.exp(-gamma), 2.0, n0)
    result = 1.0 - (n0 - 1) * phi2 / tau_value
    if not result > 0:
        raise NumericalUnderflow(f"alpha={result!r} for n0={n0}, gamma={gamma}")
    return result
