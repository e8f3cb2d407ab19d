"""File formats: interval CSV, radius PMF CSV, tables, JSON summaries, binary tensors.

Binary tensor layout (little-endian): ``uint32`` rank, ``uint64`` dims, then
``float64`` pairs ``(real, imag)`` in C order.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import struct
from pathlib import Path

import numpy as np

from .bsvr_process import ObservedIntervalSet
from .errors import InvalidParameterError
from .mpc_model import RadiusPmf


def _header_line(meta: dict | None) -> str:
    if not meta:
        return ""
    return "# " + ",".join(f"{k}={v}" for k, v in meta.items()) + "\n"


def _parse_header(line: str) -> dict:
    out = {}
    for part in line.lstrip("#").strip().split(","):
        if "=" in part:
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def write_intervals(path, observed: ObservedIntervalSet, meta: dict | None = None) -> None:
    """CSV with a ``# x1=..,x2=..,delta0=..`` line and ``a,b`` rows."""
    head = {"x1": repr(observed.x1), "x2": repr(observed.x2), "delta0": repr(observed.delta0)}
    head.update(meta or {})
    with open(path, "w", newline="") as fh:
        fh.write(_header_line(head))
        w = csv.writer(fh)
        w.writerow(["a", "b"])
        for a, b in zip(observed.a, observed.b):
            w.writerow([repr(float(a)), repr(float(b))])


def read_intervals(path, x1=None, x2=None, delta0=None) -> ObservedIntervalSet:
    """Read an interval CSV; window values may come from the header or arguments."""
    text = Path(path).read_text()
    meta = {}
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            meta.update(_parse_header(line))
            continue
        rows.append(line)
    reader = csv.reader(rows)
    data = []
    for row in reader:
        if row and row[0].strip() == "a":
            continue
        if len(row) < 2:
            raise InvalidParameterError(f"bad interval row {row!r}")
        data.append((float(row[0]), float(row[1])))
    arr = np.array(data, dtype=float).reshape(-1, 2)

    def pick(name, given):
        if given is not None:
            return float(given)
        if name in meta:
            return float(meta[name])
        raise InvalidParameterError(f"{name} missing from header and arguments")

    d0 = pick("delta0", delta0) if (delta0 is not None or "delta0" in meta) else 0.0
    return ObservedIntervalSet(arr[:, 0], arr[:, 1], pick("x1", x1), pick("x2", x2), d0)


def write_table(path, columns: list[str], rows, meta: dict | None = None) -> None:
    """CSV table with an optional ``#`` metadata line; floats written with ``repr``."""
    with open(path, "w", newline="") as fh:
        fh.write(_header_line(meta))
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def table_text(columns, rows, meta: dict | None = None) -> str:
    buf = _io.StringIO()
    buf.write(_header_line(meta))
    w = csv.writer(buf)
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_pmf(path, pmf: RadiusPmf, meta: dict | None = None) -> None:
    write_table(path, ["radius", "weight", "cumulative"],
                zip(pmf.radii, pmf.weights, np.cumsum(pmf.weights)), meta)


def read_pmf(path) -> RadiusPmf:
    # skip metadata comments and the column header
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2:
        raise InvalidParameterError("empty PMF file")
    arr = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    return RadiusPmf(arr[:, 0], arr[:, 1])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj))


def write_tensor(path, h) -> None:
    """Binary complex tensor: rank, dims, interleaved float64 real/imag."""
    h = np.ascontiguousarray(np.asarray(h, dtype=np.complex128))
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", h.ndim))
        fh.write(struct.pack(f"<{h.ndim}Q", *h.shape))
        fh.write(h.view(np.float64).astype("<f8", copy=False).tobytes())


def read_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise InvalidParameterError("truncated tensor file")
    (ndim,) = struct.unpack_from("<I", raw, 0)
    dims = struct.unpack_from(f"<{ndim}Q", raw, 4)
    off = 4 + 8 * ndim
    count = int(np.prod(dims)) * 2
    if len(raw) - off != 8 * count:
        raise InvalidParameterError("tensor payload size does not match its header")
    flat = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
    return flat.view(np.complex128).reshape(dims).copy()


__all__ = [
    "dumps_json",
    "read_intervals",
    "read_pmf",
    "read_tensor",
    "table_text",
    "write_intervals",
    "write_json",
    "write_pmf",
    "write_table",
    "write_tensor",
]
