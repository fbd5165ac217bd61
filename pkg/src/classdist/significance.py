"""Monte Carlo p-value of a fit error under the fitted distribution."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidParameter, LengthMismatch, MissingElementCount
from .fitting import EmpiricalDistribution, error_metric

__all__ = ["SignificanceReport", "sample_empirical", "p_value", "trial_rng"]

DEFAULT_TRIALS = 10_000


@dataclass(frozen=True)
class SignificanceReport:
    """Outcome of :func:`p_value`; ``p_value == exceed_count / trials``."""

    observed_error: float
    trials: int
    exceed_count: int
    p_value: float
    seed: int
    m_elements: int

    def to_dict(self) -> dict:
        return asdict(self)


def _check_probabilities(P) -> np.ndarray:
    p = np.asarray(P, dtype=np.float64).ravel()
    if p.size == 0:
        raise InvalidParameter("probability vector is empty")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidParameter("probabilities must be finite and non-negative")
    if abs(math.fsum(p) - 1.0) > 1e-9:
        raise InvalidParameter(f"probabilities sum to {math.fsum(p)!r}, expected 1")
    return p / math.fsum(p)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, keyed by ``(seed, trial)``.

    Results therefore do not depend on the order in which trials run.
    """
    return np.random.default_rng([seed, trial])


def sample_empirical(P, m_elements: int, rng: np.random.Generator) -> EmpiricalDistribution:
    """Assign ``m_elements`` elements to classes drawn from ``P``.

    Returns the relative class sizes sorted in non-increasing order, so a
    class that happens to overtake its predecessor swaps rank with it.
    """
    p = _check_probabilities(P)
    if int(m_elements) != m_elements or m_elements < 1:
        raise InvalidParameter(f"m_elements must be a positive integer, got {m_elements!r}")
    counts = rng.multinomial(int(m_elements), p)
    values = np.sort(counts)[::-1] / float(m_elements)
    return EmpiricalDistribution(values, int(m_elements))


def p_value(D: EmpiricalDistribution, P, trials: int = DEFAULT_TRIALS,
            seed: int = 0) -> SignificanceReport:
    """Fraction of samples from ``P`` whose error is at least the observed one.

    Each trial draws ``D.total_elements`` elements from ``P`` and scores the
    sorted sample against ``P`` itself; parameters are not refitted.

    Raises:
        MissingElementCount: ``D.total_elements`` is unknown.
        LengthMismatch: ``P`` and ``D`` have different numbers of classes.
    """
    if D.total_elements is None:
        raise MissingElementCount("the number of elements is required for a p-value")
    p = _check_probabilities(P)
    if p.size != D.m:
        raise LengthMismatch(f"model has {p.size} classes, data has {D.m}")
    if int(trials) != trials or trials < 1:
        raise InvalidParameter(f"trials must be a positive integer, got {trials!r}")
    if int(seed) != seed or seed < 0:
        raise InvalidParameter(f"seed must be a non-negative integer, got {seed!r}")
    trials, seed = int(trials), int(seed)
    n = int(D.total_elements)

    observed = float(error_metric(D.values, p))
    errors = np.empty(trials)
    for t in range(trials):
        counts = trial_rng(seed, t).multinomial(n, p)
        errors[t] = error_metric(np.sort(counts)[::-1] / float(n), p)
    exceed = int(np.count_nonzero(errors >= observed))
    return SignificanceReport(
        observed_error=observed,
        trials=trials,
        exceed_count=exceed,
        p_value=exceed / trials,
        seed=seed,
        m_elements=n,
    )
