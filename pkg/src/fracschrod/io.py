"""Deterministic artifact writers: CSV, JSON and raw binaries.

Floats are written with 17 significant digits, CSV uses LF line endings
and JSON keys are sorted. Every file is written to a temporary sibling and
renamed into place.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

FLOAT_FORMAT = "{:.17g}"


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return FLOAT_FORMAT.format(v)
    if v is None:
        return ""
    return str(v)


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Iterable[Mapping | Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        vals = [row[k] for k in header] if isinstance(row, Mapping) else list(row)
        w.writerow([format_value(v) for v in vals])
    return buf.getvalue()


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Mapping | Sequence]) -> None:
    atomic_write_bytes(path, csv_text(header, rows).encode("utf-8"))


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isfinite(obj):
            return _Float17(obj)
        return "inf" if obj > 0 else "-inf" if obj < 0 else "nan"
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):   # numpy scalars
        return _jsonable(obj.item())
    return obj


class _Float17(float):
    def __repr__(self) -> str:
        return FLOAT_FORMAT.format(float(self))


class _Encoder(json.JSONEncoder):
    def iterencode(self, o, _one_shot=False):
        # route floats through their 17-digit repr
        return json.encoder._make_iterencode(
            {} if self.check_circular else None, self.default, json.encoder.py_encode_basestring_ascii
            if self.ensure_ascii else json.encoder.py_encode_basestring, self.indent,
            lambda f: repr(f) if isinstance(f, _Float17) else float.__repr__(f),
            self.key_separator, self.item_separator, self.sort_keys, self.skipkeys, _one_shot)(o, 0)


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), cls=_Encoder, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str | os.PathLike, obj) -> None:
    atomic_write_bytes(path, json_text(obj).encode("utf-8"))
