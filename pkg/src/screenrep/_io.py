"""Small file helpers shared by the report writers and the CLI."""

from __future__ import annotations

import csv
import hashlib
import math
from pathlib import Path
from typing import Iterable, Sequence


def fmt(value, digits: int = 6) -> str:
    """Locale-independent fixed-point formatting; None and NaN become ''."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return ""
    text = f"{value:.{digits}f}"
    # avoid "-0.000000" so reruns on different platforms agree
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
