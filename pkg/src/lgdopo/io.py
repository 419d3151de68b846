"""File writers shared by the command-line front-end (CSV, binary PGM, JSON)."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def write_csv(path, rows, columns=None) -> Path:
    """Write an iterable of dicts (or sequences with ``columns``) as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    with open(path, "w", newline="") as fh:
        if rows and isinstance(rows[0], dict):
            cols = columns or list(rows[0])
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _fmt(v) for k, v in r.items()})
        else:
            w = csv.writer(fh, lineterminator="\n")
            if columns:
                w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def to_gray8(values) -> np.ndarray:
    """Linear map of non-negative data onto 0..255 (max -> 255)."""
    v = np.asarray(values, dtype=float)
    top = np.max(v) if v.size else 0.0
    if top <= 0:
        return np.zeros(v.shape, dtype=np.uint8)
    return np.clip(np.rint(255.0 * v / top), 0, 255).astype(np.uint8)


def write_pgm(path, values) -> Path:
    """8-bit binary PGM ("P5", width height 255, row-major bytes)."""
    img = to_gray8(values)
    if img.ndim != 2:
        raise ValueError("PGM needs a 2-D array")
    h, w = img.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = (int(x) for x in fields[1:])
    pixels = np.frombuffer(data[pos + 1:pos + 1 + w * h], dtype=np.uint8)
    return pixels.reshape(h, w)


def profile_rows(x, y, values):
    for xi, yi, v in zip(np.ravel(x), np.ravel(y), np.ravel(values)):
        yield {"x": float(xi), "y": float(yi), "value": float(v)}


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
