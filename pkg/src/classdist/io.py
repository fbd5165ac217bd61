"""Reading dataset CSV files.

Format: UTF-8, comma separated, a required ``label,count`` header, one class
per row.  Lines starting with ``#`` are comments; ``# key=value`` comments
carry metadata.  Recognised keys:

    elements   number of elements in the base set (needed for p-values)
    summary    ``exclude`` keeps the dataset out of corpus statistics
    description, source, note   free text, echoed in reports
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Union

from .errors import ClassDistError, ParseError
from .fitting import preprocess
from .studies import Dataset

__all__ = ["read_dataset", "read_directory", "parse_dataset"]

HEADER = ("label", "count")


def _metadata(line: str, lineno: int, meta: dict) -> None:
    body = line.lstrip("#").strip()
    if "=" not in body:
        return
    key, value = (part.strip() for part in body.split("=", 1))
    if not key or " " in key:
        return
    if key == "elements":
        try:
            n = int(value)
        except ValueError:
            raise ParseError(f"line {lineno}: elements must be an integer, got {value!r}") from None
        if n < 1:
            raise ParseError(f"line {lineno}: elements must be positive, got {n}")
        meta[key] = n
    else:
        meta[key] = value


def parse_dataset(text: str, name: str) -> Dataset:
    """Parse dataset text; ``name`` identifies it in messages and reports."""
    meta: dict = {}
    labels, counts = [], []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            _metadata(line, lineno, meta)
            continue
        fields = next(csv.reader([line]))
        if not header_seen:
            if tuple(f.strip().lower() for f in fields) != HEADER:
                raise ParseError(f"{name}: line {lineno}: expected header 'label,count', got {line!r}")
            header_seen = True
            continue
        if len(fields) != 2:
            raise ParseError(f"{name}: line {lineno}: expected 2 fields, got {len(fields)}")
        try:
            value = float(fields[1])
        except ValueError:
            raise ParseError(f"{name}: line {lineno}: count {fields[1]!r} is not a number") from None
        if not math.isfinite(value) or value < 0:
            raise ParseError(f"{name}: line {lineno}: count must be finite and non-negative")
        labels.append(fields[0].strip())
        counts.append(value)
    if not header_seen:
        raise ParseError(f"{name}: missing header 'label,count'")
    if not counts:
        raise ParseError(f"{name}: no data rows")
    D = preprocess(counts, meta.get("elements"), labels)
    return Dataset(
        name=name,
        distribution=D,
        exclude_from_summary=meta.get("summary", "").lower() == "exclude",
        description=meta.get("description", ""),
    )


def read_dataset(path: Union[str, Path]) -> Dataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: cannot read ({exc})") from None
    return parse_dataset(text, path.stem)


def read_directory(path: Union[str, Path]) -> tuple[list, list]:
    """Load every ``*.csv`` in ``path`` in name order.

    Returns ``(datasets, failures)`` where failures pairs a file name with
    its error message; one bad file does not stop the others.
    """
    path = Path(path)
    if not path.is_dir():
        raise ParseError(f"{path}: not a directory")
    datasets, failures = [], []
    for f in sorted(path.glob("*.csv")):
        try:
            datasets.append(read_dataset(f))
        except ClassDistError as exc:
            failures.append((f.stem, f"{type(exc).__name__}: {exc}"))
    return datasets, failures
