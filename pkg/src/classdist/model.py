"""Class-weight model and class probabilities.

With ``z = exp(-gamma)`` the weight of an N-class partition is
``W_N = z**N / (N Z)`` for ``N >= n0`` and the probability of the n-th most
frequent class (after dropping the first ``n0 - 1``) is proportional to the
tail sum ``C_j = sum_{k>=j} z**k / k**2`` at ``j = n + n0 - 1``.

Everything here works with quantities scaled by the leading power of z so
that nothing underflows for small z or large n0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateCase, InvalidParameter
from .special import _check_gamma, _check_n0, alpha_from_tau, lerch_phi_precise, tau

__all__ = [
    "ModelParams",
    "TailTable",
    "class_weight",
    "nbar_from_gamma",
    "gamma_from_nbar",
    "class_probabilities",
    "class_probabilities_absolute",
    "build_tail_table",
]

GAMMA_BRACKET = (1e-9, 50.0)


def nbar_from_gamma(n0: int, gamma: float) -> float:
    """Average number of classes ``1 / ((1 - e^{-gamma}) tau(n0, gamma))``."""
    n0 = _check_n0(n0)
    gamma = _check_gamma(gamma)
    return 1.0 / (-math.expm1(-gamma) * tau(n0, gamma))


def gamma_from_nbar(n0: int, nbar: float) -> float:
    """Invert :func:`nbar_from_gamma` at fixed ``n0``.

    The map gamma -> nbar is strictly decreasing from +inf to n0, so a
    bracketing search on ``GAMMA_BRACKET`` cannot miss the root.

    Raises:
        DegenerateCase: ``nbar == n0`` (gamma would be infinite), or nbar is
            so close to n0 that it cannot be told apart in double precision.
        InvalidParameter: ``nbar < n0`` or nbar beyond the bracket's reach.
    """
    n0 = _check_n0(n0)
    nbar = float(nbar)
    if not math.isfinite(nbar):
        raise InvalidParameter(f"nbar must be finite, got {nbar!r}")
    if nbar < n0:
        raise InvalidParameter(f"nbar={nbar} must exceed n0={n0}")
    if nbar == n0:
        raise DegenerateCase(f"nbar == n0 == {n0}: gamma diverges")

    lo, hi = GAMMA_BRACKET

    def excess(g: float) -> float:
        return nbar_from_gamma(n0, g) - nbar

    f_hi = excess(hi)
    if f_hi >= 0:
        raise DegenerateCase(f"nbar={nbar!r} indistinguishable from n0={n0}")
    if excess(lo) <= 0:
        raise InvalidParameter(f"nbar={nbar!r} too large; gamma below {lo}")
    return brentq(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class ModelParams:
    """Model parameters ``(n0, gamma)``; ``z`` and ``nbar`` are derived."""

    n0: int
    gamma: float
    z: float = field(init=False)
    nbar: float = field(init=False)

    def __post_init__(self):
        n0 = _check_n0(self.n0)
        gamma = _check_gamma(self.gamma)
        object.__setattr__(self, "n0", n0)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "z", math.exp(-gamma))
        object.__setattr__(self, "nbar", nbar_from_gamma(n0, gamma))

    @classmethod
    def from_z(cls, n0: int, z: float) -> "ModelParams":
        z = float(z)
        if not 0.0 < z < 1.0:
            raise InvalidParameter(f"z must lie in (0, 1), got {z!r}")
        params = cls(n0, -math.log(z))
        # keep the caller's z bit-exact rather than exp(log(z))
        object.__setattr__(params, "z", z)
        return params

    @classmethod
    def from_nbar(cls, n0: int, nbar: float) -> "ModelParams":
        return cls(n0, gamma_from_nbar(n0, nbar))


def class_weight(N: int, params: ModelParams) -> float:
    """Probability ``W_N`` that a partition has N classes (0 below n0)."""
    if N < params.n0:
        return 0.0
    gamma = params.gamma
    return math.exp(-gamma * (N - params.n0)) / (N * tau(params.n0, gamma))


def class_probabilities(params: ModelParams, m: int) -> np.ndarray:
    """Normalised probabilities of the first ``m`` classes.

    The unnormalised value of class n is the finite sum of ``z**k / k**2``
    over ``k = n+n0-1 .. m+n0-2`` plus one shared Lerch tail
    ``z**(m+n0-1) Phi(z, 2, m+n0-1)``; the vector is then rescaled to sum to 1.
    """
    if m < 1:
        raise InvalidParameter(f"m must be >= 1, got {m}")
    n0, z = params.n0, params.z
    # every term below is divided by z**n0
    k = np.arange(n0, m + n0 - 1, dtype=np.float64)
    head = np.power(z, k - n0) / (k * k)
    tail = z ** (m - 1) * lerch_phi_precise(z, 2.0, m + n0 - 1)
    terms = np.append(head, tail)
    unnormalised = np.cumsum(terms[::-1])[::-1]
    return unnormalised / math.fsum(unnormalised)


def class_probabilities_absolute(params: ModelParams, n: int) -> float:
    """Absolute probability of class ``n`` without truncating to m classes.

    ``e^{-gamma(n+n0-1)} Phi(e^{-gamma}, 2, n+n0-1) / (alpha Z)``, evaluated
    with ``tau`` in place of ``Z`` so the powers of z cancel analytically.
    """
    if n < 1:
        raise InvalidParameter(f"class index must be >= 1, got {n}")
    n0, gamma, z = params.n0, params.gamma, params.z
    t = tau(n0, gamma)
    a = alpha_from_tau(n0, gamma, t)
    return z ** (n - 1) * lerch_phi_precise(z, 2.0, n + n0 - 1) / (a * t)


@lru_cache(maxsize=65536)
def _phi2_anchor(z: float, kmax: int) -> float:
    return lerch_phi_precise(z, 2.0, kmax)


def tail_ratios(zs: np.ndarray, kmax: int) -> np.ndarray:
    """Scaled tails ``R[:, j-1] = C_j / (z**j / j**2)`` for ``j = 1..kmax``.

    Obtained from one Lerch anchor at ``kmax`` per z and the backward
    recursion ``R_j = 1 + z (j/(j+1))**2 R_{j+1}``; all entries are O(1).
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
    R = np.empty((zs.size, kmax))
    R[:, kmax - 1] = [kmax * kmax * _phi2_anchor(float(z), kmax) for z in zs]
    for j in range(kmax - 1, 0, -1):
        R[:, j - 1] = 1.0 + zs * (j / (j + 1)) ** 2 * R[:, j]
    return R


def tail_steps(zs: np.ndarray, kmax: int) -> np.ndarray:
    """Consecutive tail ratios ``rho[:, j-1] = C_{j+1} / C_j`` for ``j = 1..kmax-1``."""
    zs = np.atleast_1d(np.asarray(zs, dtype=np.float64))
    R = tail_ratios(zs, kmax)
    j = np.arange(1, kmax, dtype=np.float64)
    return zs[:, None] * (j / (j + 1)) ** 2 * R[:, 1:] / R[:, :-1]


@dataclass(frozen=True, eq=False)
class TailTable:
    """Tail sums of ``z**k / k**2`` for one gamma, shared by every n0.

    ``ratios[j-1]`` holds ``C_j / (z**j / j**2)``; ``phi_tail`` is the Lerch
    anchor ``Phi(z, 2, kmax)``.  Class probabilities for any n0 with
    ``n0 + m - 1 <= kmax`` are read off in O(m).
    """

    gamma: float
    kmax: int
    ratios: np.ndarray
    phi_tail: float

    @property
    def z(self) -> float:
        return math.exp(-self.gamma)

    @property
    def cum(self) -> np.ndarray:
        """Unscaled tails ``C_1 .. C_kmax`` (may underflow for small z)."""
        j = np.arange(1, self.kmax + 1, dtype=np.float64)
        return np.power(self.z, j) / (j * j) * self.ratios

    def steps(self) -> np.ndarray:
        j = np.arange(1, self.kmax, dtype=np.float64)
        return self.z * (j / (j + 1)) ** 2 * self.ratios[1:] / self.ratios[:-1]

    def probabilities(self, n0: int, m: int) -> np.ndarray:
        if n0 < 1 or m < 1:
            raise InvalidParameter(f"need n0 >= 1 and m >= 1, got n0={n0}, m={m}")
        if n0 + m - 1 > self.kmax:
            raise InvalidParameter(f"table kmax={self.kmax} too small for n0={n0}, m={m}")
        rho = self.steps()[n0 - 1 : n0 + m - 2]
        q = np.concatenate(([1.0], np.cumprod(rho)))
        return q / math.fsum(q)


def build_tail_table(gamma: float, kmax: int) -> TailTable:
    gamma = _check_gamma(gamma)
    if int(kmax) != kmax or kmax < 2:
        raise InvalidParameter(f"kmax must be an integer >= 2, got {kmax!r}")
    kmax = int(kmax)
    z = math.exp(-gamma)
    R = tail_ratios(np.array([z]), kmax)[0]
    R.setflags(write=False)
    return TailTable(gamma=gamma, kmax=kmax, ratios=R, phi_tail=_phi2_anchor(z, kmax))
