"""Command-line interface: ``classdist {fit,compare,pvalue,random-study}``.

Exit codes: 0 ok, 2 parse or usage error, 3 degenerate input, 4 missing
element count, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import BaselineConfig, Method, fit_baseline
from .errors import (
    ClassDistError,
    DegenerateInput,
    InvalidParameter,
    LengthMismatch,
    MissingElementCount,
    NegativeValue,
    ParseError,
)
from .fitting import FitConfig, fit
from .io import read_dataset, read_directory
from .significance import DEFAULT_TRIALS, p_value
from .studies import (
    RANDOM_STUDY_CONFIG,
    ERROR_COLUMNS,
    comparison_table,
    correlation_table,
    random_data_study,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DEGENERATE = 3
EXIT_MISSING_METADATA = 4
EXIT_NUMERIC = 5

log = logging.getLogger("classdist")


def _g(x) -> str:
    """Six significant digits for text reports."""
    if x is None:
        return "-"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.6g}"


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _config_lines(d: dict, prefix: str = "") -> list:
    lines = []
    for k, v in d.items():
        if isinstance(v, dict):
            lines += _config_lines(v, f"{prefix}{k}.")
        else:
            lines.append(f"  {prefix}{k} = {v!r}")
    return lines


def _fit_config(args, default: FitConfig = FitConfig()) -> FitConfig:
    return FitConfig(
        z_min=default.z_min if args.z_min is None else args.z_min,
        z_max=default.z_max if args.z_max is None else args.z_max,
        z_step=default.z_step if args.z_step is None else args.z_step,
        n0_max=default.n0_max if args.n0_max is None else args.n0_max,
        accuracy_n0=default.accuracy_n0 if args.accuracy_n0 is None else args.accuracy_n0,
        refine_rounds=default.refine_rounds if args.refine_rounds is None else args.refine_rounds,
    )


def _write_curve(path: Path, header, rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for a, b in rows:
            w.writerow([repr(a), repr(b)])


def cmd_fit(args) -> int:
    cfg = _fit_config(args)
    ds = read_dataset(args.input)
    res = fit(ds.distribution, cfg)
    D = ds.distribution
    labels = D.labels or tuple(str(i + 1) for i in range(D.m))

    curves = {}
    if args.emit_curves:
        out = Path(args.emit_curves)
        out.mkdir(parents=True, exist_ok=True)
        z_path = out / f"{ds.name}_error_vs_z.csv"
        n0_path = out / f"{ds.name}_error_vs_n0.csv"
        _write_curve(z_path, ("z", "error"), [(float(a), float(b)) for a, b in res.error_vs_z])
        _write_curve(n0_path, ("n0", "error"), [(int(a), float(b)) for a, b in res.error_vs_n0])
        curves = {"error_vs_z": str(z_path), "error_vs_n0": str(n0_path)}

    if args.json:
        report = {"dataset": ds.name, **res.to_dict(), "labels": list(labels)}
        if curves:
            report["curves"] = curves
        _emit_json(report)
        return EXIT_OK

    p = res.params
    lines = [
        f"dataset: {ds.name}",
        f"classes (m): {D.m}",
        f"n0: {p.n0}",
        f"gamma: {_g(p.gamma)}",
        f"z: {_g(p.z)}",
        f"nbar: {_g(p.nbar)}",
        f"error: {_g(res.error)}",
        "config:",
        *_config_lines(cfg.to_dict()),
        "",
        "rank,label,observed,fitted",
    ]
    for i, (lab, d, q) in enumerate(zip(labels, D.values, res.fitted), start=1):
        lines.append(f"{i},{lab},{_g(d)},{_g(q)}")
    for k, v in curves.items():
        lines.append(f"curve {k}: {v}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _compare_single(args, cfg: FitConfig) -> int:
    ds = read_dataset(args.input)
    D = ds.distribution
    main = fit(D, cfg)
    bases = [fit_baseline(D, m) for m in Method]
    report = {
        "dataset": ds.name,
        "m": D.m,
        "main": {"n0": main.params.n0, "z": main.params.z, "gamma": main.params.gamma,
                 "nbar": main.params.nbar, "error": main.error},
        "baselines": [{k: v for k, v in b.to_dict().items() if k != "fitted"} for b in bases],
        "config": {"fit": cfg.to_dict(), "baselines": BaselineConfig().to_dict()},
    }
    if args.trials and D.total_elements is not None:
        report["p_value"] = p_value(D, main.fitted, args.trials, args.seed).to_dict()
    if args.json:
        _emit_json(report)
        return EXIT_OK
    lines = [f"dataset: {ds.name}", f"classes (m): {D.m}", "",
             f"{'method':<12} {'parameter':>12} {'error':>12}",
             f"{'main':<12} {'n0=' + str(main.params.n0) + ' z=' + _g(main.params.z):>12} "
             f"{_g(main.error):>12}"]
    for b in bases:
        lines.append(f"{b.method.value:<12} {_g(b.parameter):>12} {_g(b.error):>12}")
    if "p_value" in report:
        lines.append(f"p-value (main): {_g(report['p_value']['p_value'])}")
    lines += ["", "config:", *_config_lines(report["config"])]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _compare_dir(args, cfg: FitConfig) -> int:
    datasets, read_failures = read_directory(args.dir)
    if not datasets:
        raise ParseError(f"{args.dir}: no readable dataset files")
    res = comparison_table(datasets, cfg, trials=args.trials, seed=args.seed)
    corr = correlation_table(res.rows)
    failures = list(read_failures) + list(res.failures)
    if args.json:
        out = res.to_dict()
        out["failures"] = [{"dataset": d, "error": e} for d, e in failures]
        out["correlations"] = corr
        _emit_json(out)
        return EXIT_OK
    head = ["dataset", "m", "n0", "main", "zipf", "exp", "zipf_s1", "legacy", "p"]
    lines = [",".join(head)]
    for r in res.rows:
        name = r.dataset + (" (excluded)" if r.excluded else "")
        vals = [r.m, r.n0] + [getattr(r, c) for c in ERROR_COLUMNS] + [r.p_value]
        lines.append(",".join([name] + [_g(v) for v in vals]))
    lines += ["", f"summary over {res.summary['count']} datasets:",
              "statistic,main,zipf,exp,zipf_s1,legacy"]
    for stat in ("average", "median"):
        lines.append(",".join([stat] + [_g(res.summary[c][stat]) for c in ERROR_COLUMNS]))
    lines += ["", "pearson correlations:"]
    lines += [f"  {k} = {_g(v)}" for k, v in corr.items()]
    if failures:
        lines += ["", "failed datasets:"] + [f"  {d}: {e}" for d, e in failures]
    lines += ["", "config:", *_config_lines(res.config)]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _fit_config(args)
    if (args.input is None) == (args.dir is None):
        raise InvalidParameter("give either an input file or --dir")
    if args.dir is not None:
        return _compare_dir(args, cfg)
    return _compare_single(args, cfg)


def cmd_pvalue(args) -> int:
    cfg = _fit_config(args)
    ds = read_dataset(args.input)
    D = ds.distribution
    if D.total_elements is None:
        raise MissingElementCount(f"{ds.name}: no '# elements=<n>' metadata line")
    res = fit(D, cfg)
    rep = p_value(D, res.fitted, args.trials, args.seed)
    if args.json:
        _emit_json({"dataset": ds.name, **rep.to_dict(), "n0": res.params.n0,
                    "z": res.params.z, "config": cfg.to_dict()})
        return EXIT_OK
    lines = [
        f"dataset: {ds.name}",
        f"elements: {rep.m_elements}",
        f"n0: {res.params.n0}",
        f"z: {_g(res.params.z)}",
        f"observed error: {_g(rep.observed_error)}",
        f"trials: {rep.trials}",
        f"exceed count: {rep.exceed_count}",
        f"p-value: {_g(rep.p_value)}",
        f"seed: {rep.seed}",
        "config:",
        *_config_lines(cfg.to_dict()),
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_random_study(args) -> int:
    cfg = _fit_config(args, RANDOM_STUDY_CONFIG)
    if args.class_min > args.class_max:
        raise InvalidParameter("--class-min exceeds --class-max")
    res = random_data_study(range(args.class_min, args.class_max + 1), args.ensembles,
                            args.elements, args.seed, cfg)
    if args.json:
        _emit_json(res.to_dict())
        return EXIT_OK
    lines = ["m,mean,median,p10,p25,p75,p90,min,max"]
    for r in res.rows:
        pc = r.percentiles
        vals = [r.mean, r.median, pc["p10"], pc["p25"], pc["p75"], pc["p90"], r.minimum, r.maximum]
        lines.append(",".join([str(r.m)] + [_g(v) for v in vals]))
    lines += ["", "config:", *_config_lines(res.config)]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("fit configuration (defaults shown in reports)")
    g.add_argument("--z-min", type=float)
    g.add_argument("--z-max", type=float)
    g.add_argument("--z-step", type=float)
    g.add_argument("--n0-max", type=int)
    g.add_argument("--accuracy-n0", type=float)
    g.add_argument("--refine-rounds", type=int)
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="classdist",
        description="Fit class-frequency distributions and compare them with baseline laws.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit (n0, z) to one dataset")
    p.add_argument("input", help="dataset CSV (header label,count)")
    p.add_argument("--emit-curves", metavar="DIR", help="write error-vs-z and error-vs-n0 CSVs")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="main fit against the baseline laws")
    p.add_argument("input", nargs="?", help="dataset CSV")
    p.add_argument("--dir", help="compare every CSV in this directory")
    p.add_argument("--trials", type=int, default=0,
                   help="Monte Carlo trials for p-values (0 = skip; default 0)")
    p.add_argument("--seed", type=int, default=0)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pvalue", help="Monte Carlo p-value of the fit error")
    p.add_argument("input", help="dataset CSV with '# elements=<n>' metadata")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_pvalue)

    p = sub.add_parser("random-study", help="fit ensembles of uniform random data")
    p.add_argument("--class-min", type=int, default=3)
    p.add_argument("--class-max", type=int, default=50)
    p.add_argument("--ensembles", type=int, default=500)
    p.add_argument("--elements", type=int, default=None,
                   help="draw this many elements per sample instead of using the weights")
    p.add_argument("--seed", type=int, default=0)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_random_study)
    return parser


def _exit_code(exc: ClassDistError) -> int:
    if isinstance(exc, MissingElementCount):
        return EXIT_MISSING_METADATA
    if isinstance(exc, (ParseError, NegativeValue, LengthMismatch, InvalidParameter)):
        return EXIT_PARSE
    if isinstance(exc, DegenerateInput):
        return EXIT_DEGENERATE
    return EXIT_NUMERIC


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ClassDistError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return _exit_code(exc)
    except (OSError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_PARSE if isinstance(exc, OSError) else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
