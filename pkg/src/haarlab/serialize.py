"""Byte-stable serialization: canonical JSON, CSV tables, raw matrix binary.

The JSON writer exists because replayability is a contract: floats print
with 17 significant digits (round-trip exact for doubles), keys keep
insertion order, and there is no whitespace variance, so equal data means
equal bytes.  Complex numbers serialize as [re, im] pairs throughout.

The binary matrix format is two little-endian uint64 dimensions followed by
row-major little-endian float64 (re, im) pairs; round-trips are bit-exact.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

import numpy as np

from .densities import DensityPoint

__all__ = [
    "format_float",
    "canonical_json",
    "matrix_to_dict",
    "matrix_from_dict",
    "matrices_to_binary",
    "matrices_from_binary",
    "spectrum_csv",
    "density_csv",
    "moments_csv",
    "reports_csv",
]


def format_float(x: float) -> str:
    """A float as a 17-significant-digit JSON number token."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("cannot serialize non-finite numbers")
    return format(x, ".17g")


def canonical_json(obj) -> str:
    """Serialize to deterministic JSON: fixed float format, insertion-order keys."""
    pieces: list[str] = []
    _emit(obj, pieces)
    return "".join(pieces)


def _emit(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, (complex, np.complexfloating)):
        out.append(f"[{format_float(obj.real)},{format_float(obj.imag)}]")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError("JSON object keys must be strings")
            if i:
                out.append(",")
            out.append(json.dumps(k, ensure_ascii=True))
            out.append(":")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def matrix_to_dict(u) -> dict:
    """Matrix as {rows, cols, entries: [[re, im], ...]} with row-major entries."""
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2:
        raise ValueError("expected a 2-d array")
    entries = [[float(z.real), float(z.imag)] for z in u.ravel(order="C")]
    return {"rows": int(u.shape[0]), "cols": int(u.shape[1]), "entries": entries}


def matrix_from_dict(d: dict):
    rows, cols = int(d["rows"]), int(d["cols"])
    entries = d["entries"]
    if len(entries) != rows * cols:
        raise ValueError("entry count does not match dimensions")
    flat = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    return flat.reshape(rows, cols)


def matrices_to_binary(matrices: Iterable) -> bytes:
    """Concatenated binary records: uint64 rows, uint64 cols, float64 pairs.

    Everything little-endian, entries row-major.  Bit-exact by construction:
    the payload is the IEEE bytes of the entries themselves.
    """
    chunks = []
    for u in matrices:
        u = np.ascontiguousarray(np.asarray(u, dtype=np.complex128))
        if u.ndim != 2:
            raise ValueError("expected 2-d arrays")
        chunks.append(np.array(u.shape, dtype="<u8").tobytes())
        chunks.append(u.astype("<c16", copy=False).tobytes())
    return b"".join(chunks)


def matrices_from_binary(buf: bytes) -> list:
    out = []
    offset = 0
    while offset < len(buf):
        if offset + 16 > len(buf):
            raise ValueError("truncated header")
        rows, cols = np.frombuffer(buf, dtype="<u8", count=2, offset=offset)
        offset += 16
        count = int(rows) * int(cols)
        end = offset + 16 * count
        if end > len(buf):
            raise ValueError("truncated payload")
        flat = np.frombuffer(buf, dtype="<c16", count=count, offset=offset)
        out.append(flat.astype(np.complex128).reshape(int(rows), int(cols)))
        offset = end
    return out


def spectrum_csv(spectrum) -> str:
    """Spectrum as CSV with columns index,re,im,angle."""
    lines = ["index,re,im,angle"]
    for i, (v, a) in enumerate(zip(spectrum.values, spectrum.angles)):
        lines.append(
            f"{i},{format_float(v.real)},{format_float(v.imag)},{format_float(a)}"
        )
    return "\n".join(lines) + "\n"


def density_csv(points: Sequence[DensityPoint]) -> str:
    """Density evaluations as CSV: point coordinates, value, measure.

    All rows must have the same arity; columns are z1_re,z1_im,...,value,
    measure, plus log_value at the end.
    """
    if not points:
        raise ValueError("no density points")
    arity = len(points[0].points)
    if any(len(p.points) != arity for p in points):
        raise ValueError("mixed point arities")
    cols = [f"z{i+1}_{part}" for i in range(arity) for part in ("re", "im")]
    lines = [",".join(cols + ["value", "measure", "log_value"])]
    for p in points:
        coords = []
        for z in p.points:
            coords += [format_float(z.real), format_float(z.imag)]
        log_field = format_float(p.log_value) if math.isfinite(p.log_value) else "-inf"
        lines.append(",".join(coords + [format_float(p.value), p.measure.value, log_field]))
    return "\n".join(lines) + "\n"


def moments_csv(rows: Sequence[tuple]) -> str:
    """Formula table as CSV with columns n,k,l,value,kind; blanks where unused."""
    lines = ["n,k,l,value,kind"]
    for n, k, l, value, kind in rows:
        lines.append(
            ",".join(
                [
                    "" if n is None else str(int(n)),
                    "" if k is None else str(int(k)),
                    "" if l is None else str(int(l)),
                    format_float(value),
                    str(kind),
                ]
            )
        )
    return "\n".join(lines) + "\n"


_REPORT_COLUMNS = (
    "statistic",
    "n",
    "N",
    "estimate_re",
    "estimate_im",
    "std_error",
    "se_re",
    "se_im",
    "reference_re",
    "reference_im",
    "reference_kind",
    "z_score",
)


def _csv_field(text: str) -> str:
    """Quote a free-text CSV field when it holds a comma, quote, or newline."""
    if any(c in text for c in ',"\r\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _re_im(v) -> tuple:
    if isinstance(v, complex):
        return (v.real, v.imag)
    return (v[0], v[1])


def reports_csv(report_dicts: Sequence[dict]) -> str:
    """EstimateReport rows as CSV in the fixed documented column order.

    Accepts estimate/reference either as complex numbers (as_dict output)
    or as [re, im] pairs (wire format).
    """
    lines = [",".join(_REPORT_COLUMNS)]
    for d in report_dicts:
        est, ref = _re_im(d["estimate"]), _re_im(d["reference"])
        row = [
            _csv_field(str(d["statistic"])),
            str(int(d["n"])),
            str(int(d["N"])),
            format_float(est[0]),
            format_float(est[1]),
            format_float(d["std_error"]),
            format_float(d["se_re"]),
            format_float(d["se_im"]),
            format_float(ref[0]),
            format_float(ref[1]),
            str(d["reference_kind"]),
            format_float(d["z_score"]),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
