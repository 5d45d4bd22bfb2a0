"""CSV readers and the deterministic result writer.

Every file written here starts with ``# config-hash: <sha256>`` followed by a
header row. Readers skip ``#`` comment lines.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from .seqspace import EntropyProfile, MonotoneSeq


def config_hash(config):
    """SHA-256 of the canonical JSON form of a flat config mapping."""
    blob = json.dumps({k: _plain(v) for k, v in config.items()}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _plain(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def fmt(v):
    """Round-trip text for a cell; floats use the shortest exact repr."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v.value if hasattr(v, "value") else v)


def render(header, rows, config):
    """The full CSV text for ``rows`` under ``header``."""
    buf = io.StringIO()
    buf.write(f"# config-hash: {config_hash(config)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path, header, rows, config):
    text = render(header, rows, config)
    if path is None or str(path) == "-":
        return text
    Path(path).write_text(text)
    return text


def _rows(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    return list(csv.reader(lines))


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def _numeric(path, min_cols=1):
    rows = _rows(path)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ValueError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")
    if width < min_cols:
        raise ValueError(f"{path}: expected at least {min_cols} columns")
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from None
    return header, data


def read_points(path):
    """Rows of coordinates (header ``x1,...,xd`` optional); shape ``(m, d)``."""
    _, data = _numeric(path)
    return data


def read_table(path):
    """Square distance table; an optional header row is skipped."""
    _, data = _numeric(path)
    if data.shape[0] != data.shape[1]:
        raise ValueError(f"{path}: distance table must be square, got {data.shape}")
    return data


def read_sequence(path):
    """``value`` or ``n,value`` columns; ``n`` must run ``1, 2, ...``."""
    return MonotoneSeq(read_values(path))


def read_values(path):
    """The value column of a sequence file, in file order."""
    header, data = _numeric(path)
    if data.shape[1] == 1:
        vals = data[:, 0]
    elif data.shape[1] == 2:
        n = data[:, 0]
        if not np.array_equal(n, np.arange(1, n.size + 1)):
            raise ValueError(f"{path}: column n must be 1, 2, ..., {n.size}")
        vals = data[:, 1]
    else:
        raise ValueError(f"{path}: expected columns value or n,value")
    return vals


def read_profile(path):
    """``epsilon,count`` breakpoints."""
    _, data = _numeric(path)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected columns epsilon,count")
    return EntropyProfile([(float(e), int(c)) for e, c in data])
