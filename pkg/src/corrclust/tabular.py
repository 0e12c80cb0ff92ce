"""Small helpers for the comma-separated formats used throughout.

All floating-point values are written with 17 significant digits so that
emitted files round-trip exactly through ``float()`` and repeated runs are
byte-identical.  Lines starting with ``#`` are treated as comments by every
reader in this package.
"""

from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path

from .errors import ValidationError


def fmt(x: float) -> str:
    """Format a float with 17 significant digits (lossless round-trip)."""
    return f"{float(x):.17g}"


def parse_date(text: str, where: str = "") -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ValidationError(f"{where}invalid ISO-8601 date {text!r}") from None


def read_rows(path: str | Path) -> tuple[list[str], list[list[str]], list[str]]:
    """Read a CSV file, returning (header, data rows, comment lines).

    Raises ValidationError with a line number on structural problems.
    """
    path = Path(path)
    comments: list[str] = []
    header: list[str] | None = None
    rows: list[list[str]] = []
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(csv.reader(fh), start=1):
            if raw and raw[0].startswith("#"):
                comments.append(",".join(raw))
                continue
            if not raw:
                continue
            if header is None:
                header = raw
                continue
            if len(raw) != len(header):
                raise ValidationError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(raw)}"
                )
            rows.append(raw)
    if header is None:
        raise ValidationError(f"{path}: empty file")
    return header, rows, comments


def write_rows(
    path: str | Path,
    header: list[str],
    rows: list[list[str]],
    comments: list[str] | None = None,
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in comments or []:
            fh.write(line if line.startswith("#") else "# " + line)
            fh.write("\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
