"""CSV emission with a provenance comment line."""

from __future__ import annotations

import csv
import io
import math
import sys

from . import __version__


def fmt(v) -> str:
    if v is None:
        return ""
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def render_csv(columns, rows, config_hash: str, comments=()) -> str:
    buf = io.StringIO()
    buf.write(f"# cavqc {__version__} config={config_hash}\n")
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def emit(text: str, output=None, stream=None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        (stream if stream is not None else sys.stdout).write(text)
