"""CSV/JSON serialization with atomic writes and metadata sidecars."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

from unitri import __version__
from unitri.montecarlo import COLUMNS, SampleBatch
from unitri.triangles import ModelKind

FLOAT_FMT = "%.17g"
INT_COLUMNS = {"branch", "folded"}


def atomic_write(path: str, data: str) -> None:
    """Write ``data`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(path: str) -> str:
    return path + ".meta.json"


def format_meta(command: str, seed, config: dict) -> str:
    meta = {"command": command, "version": __version__, "seed": seed, "config": config}
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"


def _fmt(name: str, value) -> str:
    if name in INT_COLUMNS:
        return str(int(value))
    return FLOAT_FMT % float(value)


def format_table(names: Sequence[str], columns: Sequence[np.ndarray], fmt: str = "csv") -> str:
    """Render equal-length columns as CSV (header + rows) or a JSON array of objects."""
    n = len(columns[0]) if columns else 0
    if fmt == "csv":
        out = io.StringIO()
        out.write(",".join(names) + "\n")
        if n:
            mat = np.column_stack([np.asarray(c, dtype=np.float64) for c in columns])
            row_fmt = ",".join("%d" if nm in INT_COLUMNS else FLOAT_FMT for nm in names)
            np.savetxt(out, mat, fmt=row_fmt.split(","), delimiter=",", newline="\n")
        return out.getvalue()
    if fmt == "json":
        # floats are written as 17-digit JSON numbers
        parts = []
        for i in range(n):
            fields = ", ".join(f'"{nm}": {_fmt(nm, col[i])}' for nm, col in zip(names, columns))
            parts.append("  {" + fields + "}")
        return "[\n" + ",\n".join(parts) + ("\n" if parts else "") + "]\n"
    raise ValueError(f"format must be csv or json, got {fmt!r}")


def format_records(names: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> str:
    """Render heterogeneous rows (strings allowed) as CSV or JSON."""
    rows = list(rows)
    if fmt == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(names)
        for r in rows:
            w.writerow([FLOAT_FMT % v if isinstance(v, float) else v for v in r])
        return out.getvalue()
    if fmt == "json":
        parts = []
        for r in rows:
            fields = []
            for nm, v in zip(names, r):
                sv = FLOAT_FMT % v if isinstance(v, float) else json.dumps(v)
                fields.append(f'"{nm}": {sv}')
            parts.append("  {" + ", ".join(fields) + "}")
        return "[\n" + ",\n".join(parts) + ("\n" if parts else "") + "]\n"
    raise ValueError(f"format must be csv or json, got {fmt!r}")


def batch_to_text(batch: SampleBatch, fmt: str = "csv") -> str:
    return format_table(batch.names, [batch.columns[n] for n in batch.names], fmt)


def batch_meta(batch: SampleBatch) -> dict:
    return {
        "model": batch.model.value,
        "n": batch.count,
        "accepted": batch.accepted,
        "sigma": batch.sigma,
    }


def write_batch(batch: SampleBatch, path: str, fmt: str = "csv", config: dict | None = None) -> None:
    atomic_write(path, batch_to_text(batch, fmt))
    cfg = {**batch_meta(batch), "format": fmt, **(config or {})}
    atomic_write(sidecar_path(path), format_meta("sample", batch.seed, cfg))


def _parse_columns(text: str, fmt: str) -> dict:
    if fmt == "csv":
        lines = text.splitlines()
        names = lines[0].split(",")
        raw = [ln.split(",") for ln in lines[1:] if ln]
        cols = {nm: [r[i] for r in raw] for i, nm in enumerate(names)}
    else:
        recs = json.loads(text)
        names = list(recs[0].keys()) if recs else []
        cols = {nm: [r[nm] for r in recs] for nm in names}
    out = {}
    for nm, vals in cols.items():
        if nm == "branch":
            out[nm] = np.array([int(v) for v in vals], dtype=np.int8)
        elif nm == "folded":
            out[nm] = np.array([int(v) for v in vals], dtype=bool)
        else:
            out[nm] = np.array([float(v) for v in vals], dtype=np.float64)
    return out


def read_batch(path: str) -> SampleBatch:
    """Inverse of :func:`write_batch`."""
    with open(sidecar_path(path)) as fh:
        meta = json.load(fh)
    cfg = meta["config"]
    with open(path, newline="") as fh:
        text = fh.read()
    model = ModelKind(cfg["model"])
    columns = _parse_columns(text, cfg.get("format", "csv"))
    for nm in COLUMNS[model]:
        columns.setdefault(nm, np.empty(0))
    return SampleBatch(model, meta["seed"], cfg["n"], columns, cfg["accepted"], cfg.get("sigma", 1.0))
