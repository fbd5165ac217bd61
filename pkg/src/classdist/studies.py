"""Evaluation studies: random-data ensembles, method comparison, correlations."""

from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .baselines import BaselineConfig, Method, fit_baseline
from .errors import ClassDistError, InvalidParameter, LengthMismatch, ZeroVariance
from .fitting import EmpiricalDistribution, FitConfig, fit, preprocess
from .significance import p_value

__all__ = [
    "Dataset",
    "StudyRow",
    "ComparisonResult",
    "RandomStudyRow",
    "RandomStudyResult",
    "RANDOM_STUDY_CONFIG",
    "random_data_study",
    "pearson_correlation",
    "comparison_table",
    "correlation_table",
]

# the random study fits thousands of samples; the base grid alone suffices
RANDOM_STUDY_CONFIG = FitConfig(refine_rounds=0)

PERCENTILES = (10, 25, 75, 90)

ERROR_COLUMNS = ("error_main", "error_zipf", "error_exp", "error_zipf_s1", "error_legacy")


@dataclass(frozen=True, eq=False)
class Dataset:
    """A named empirical distribution.

    ``exclude_from_summary`` keeps a row in the table but out of the corpus
    averages, medians and correlations (e.g. a variant of another dataset).
    """

    name: str
    distribution: EmpiricalDistribution
    exclude_from_summary: bool = False
    description: str = ""


@dataclass(frozen=True)
class StudyRow:
    dataset: str
    m: int
    n0: int
    error_main: float
    error_zipf: float
    error_exp: float
    error_zipf_s1: float
    error_legacy: float
    p_value: Optional[float] = None
    excluded: bool = False

    def __post_init__(self):
        for name in ERROR_COLUMNS:
            if not getattr(self, name) >= 0:
                raise InvalidParameter(f"{name} must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ComparisonResult:
    """Per-dataset rows, per-method average/median, and datasets that failed."""

    rows: tuple
    summary: dict
    failures: tuple = ()
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "summary": self.summary,
            "failures": [{"dataset": d, "error": e} for d, e in self.failures],
            "config": self.config,
        }


@dataclass(frozen=True)
class RandomStudyRow:
    m: int
    ensembles: int
    mean: float
    median: float
    minimum: float
    maximum: float
    percentiles: dict

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RandomStudyResult:
    """Per-count statistics; ``errors`` holds raw errors only when requested."""

    rows: tuple
    config: dict
    errors: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows], "config": self.config}


def _sample_rng(seed: int, m: int, ensemble: int) -> np.random.Generator:
    return np.random.default_rng([seed, m, ensemble])


def random_data_study(class_counts: Sequence[int] = range(3, 51), ensembles: int = 500,
                      elements_per_sample: Optional[int] = None, seed: int = 0,
                      cfg: FitConfig = RANDOM_STUDY_CONFIG,
                      keep_errors: bool = False) -> RandomStudyResult:
    """Fit ensembles of random distributions and summarise the errors per class count.

    Each sample consists of m independent uniform [0, 1) weights.  If
    ``elements_per_sample`` is given the weights instead act as class
    probabilities from which that many elements are drawn, and the resulting
    counts are fitted.  Every sample has its own generator keyed by
    ``(seed, m, ensemble)``, so results do not depend on evaluation order.

    Raises:
        InvalidParameter: a class count below 2, non-positive ensembles or
            elements, or a negative seed.
    """
    counts = [int(m) for m in class_counts]
    if not counts or any(m < 2 for m in counts):
        raise InvalidParameter("class counts must all be >= 2")
    if int(ensembles) != ensembles or ensembles < 1:
        raise InvalidParameter("ensembles must be a positive integer")
    if elements_per_sample is not None and (int(elements_per_sample) != elements_per_sample
                                            or elements_per_sample < 1):
        raise InvalidParameter("elements_per_sample must be a positive integer")
    if int(seed) != seed or seed < 0:
        raise InvalidParameter("seed must be a non-negative integer")

    rows = []
    all_errors = {}
    for m in counts:
        errs = np.empty(int(ensembles))
        for e in range(int(ensembles)):
            rng = _sample_rng(int(seed), m, e)
            w = rng.uniform(size=m)
            if elements_per_sample is not None:
                w = rng.multinomial(int(elements_per_sample), w / w.sum())
                w = w[w > 0]
                if w.size < 2:
                    errs[e] = 0.0
                    continue
            errs[e] = fit(preprocess(w), cfg).error
        pct = np.percentile(errs, PERCENTILES)
        rows.append(RandomStudyRow(
            m=m,
            ensembles=int(ensembles),
            mean=float(errs.mean()),
            median=float(np.median(errs)),
            minimum=float(errs.min()),
            maximum=float(errs.max()),
            percentiles={f"p{q}": float(v) for q, v in zip(PERCENTILES, pct)},
        ))
        if keep_errors:
            all_errors[m] = errs
    config = {
        "class_counts": counts,
        "ensembles": int(ensembles),
        "elements_per_sample": elements_per_sample,
        "seed": int(seed),
        "fit": cfg.to_dict(),
    }
    return RandomStudyResult(tuple(rows), config, all_errors)


def pearson_correlation(x, y) -> float:
    """Sample Pearson correlation coefficient.

    Raises:
        LengthMismatch: different lengths or fewer than two points.
        ZeroVariance: either input is constant.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size or x.size < 2:
        raise LengthMismatch(f"need two equally long vectors of length >= 2, got {x.size}, {y.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("correlation undefined for a constant vector")
    r = math.fsum(dx * dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def summarise(rows: Sequence[StudyRow]) -> dict:
    """Average and median per method over the rows not marked excluded."""
    used = [r for r in rows if not r.excluded]
    out = {"count": len(used)}
    for col in ERROR_COLUMNS:
        vals = [getattr(r, col) for r in used]
        out[col] = {
            "average": math.fsum(vals) / len(vals) if vals else None,
            "median": statistics.median(vals) if vals else None,
        }
    return out


def comparison_row(ds: Dataset, fit_cfg: FitConfig = FitConfig(),
                   baseline_cfg: Optional[BaselineConfig] = None,
                   trials: int = 0, seed: int = 0) -> StudyRow:
    D = ds.distribution
    main = fit(D, fit_cfg)
    errs = {m: fit_baseline(D, m, baseline_cfg).error for m in Method}
    p = None
    if trials and D.total_elements is not None:
        p = p_value(D, main.fitted, trials, seed).p_value
    return StudyRow(
        dataset=ds.name,
        m=D.m,
        n0=main.params.n0,
        error_main=main.error,
        error_zipf=errs[Method.ZIPF],
        error_exp=errs[Method.EXPONENTIAL],
        error_zipf_s1=errs[Method.ZIPF_S1],
        error_legacy=errs[Method.LEGACY],
        p_value=p,
        excluded=ds.exclude_from_summary,
    )


def comparison_table(datasets: Sequence[Dataset], fit_cfg: FitConfig = FitConfig(),
                     baseline_cfg: Optional[BaselineConfig] = None,
                     trials: int = 0, seed: int = 0) -> ComparisonResult:
    """Fit the main model and every baseline to each dataset.

    A dataset whose fit raises is recorded in ``failures`` and skipped; the
    others are unaffected.  p-values are computed only when ``trials > 0``
    and the dataset knows its number of elements.
    """
    if not datasets:
        raise InvalidParameter("need at least one dataset")
    rows, failures = [], []
    for ds in datasets:
        try:
            rows.append(comparison_row(ds, fit_cfg, baseline_cfg, trials, seed))
        except ClassDistError as exc:
            failures.append((ds.name, f"{type(exc).__name__}: {exc}"))
    config = {
        "fit": fit_cfg.to_dict(),
        "baselines": (baseline_cfg or BaselineConfig()).to_dict(),
        "trials": int(trials),
        "seed": int(seed),
    }
    return ComparisonResult(tuple(rows), summarise(rows), tuple(failures), config)


def correlation_table(rows: Sequence[StudyRow]) -> dict:
    """Pairwise Pearson coefficients of m, n0 and every error column.

    Excluded rows are ignored; undefined coefficients are ``None``.
    """
    used = [r for r in rows if not r.excluded]
    names = ("m", "n0") + ERROR_COLUMNS
    cols = {n: [float(getattr(r, n)) for r in used] for n in names}
    table = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            try:
                table[f"{a}|{b}"] = pearson_correlation(cols[a], cols[b])
            except (LengthMismatch, ZeroVariance):
                table[f"{a}|{b}"] = None
    return table
