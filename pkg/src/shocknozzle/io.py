"""Result tables: CSV with a commented metadata header plus a JSON sidecar.

Numbers are written with 17 significant digits, which reloads float64 values
bit for bit.
"""

import json
import os

import numpy as np

from .errors import TableParseError

FMT = "%.17g"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        return json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise TableParseError(f"{path}: not UTF-8 at byte {exc.start}", path, exc.start) from None
    except json.JSONDecodeError as exc:
        offset = len(raw.decode("utf-8")[: exc.pos].encode("utf-8"))
        raise TableParseError(f"{path}: invalid JSON at byte {offset}: {exc.msg}", path, offset) from None


def write_table(path, columns, meta=None):
    """Write equal-length 1D columns; ``meta`` goes to the header and the sidecar."""
    names = list(columns)
    data = [np.asarray(columns[k], dtype=float).ravel() for k in names]
    n = {d.size for d in data}
    if len(n) > 1:
        raise ValueError(f"columns have different lengths: {sorted(n)}")
    meta = dict(meta or {})
    meta.setdefault("columns", names)
    with open(path, "w", encoding="utf-8") as fh:
        for key, val in meta.items():
            fh.write(f"# {key}: {json.dumps(_jsonable(val))}\n")
        fh.write(",".join(names) + "\n")
        if data:
            np.savetxt(fh, np.column_stack(data), fmt=FMT, delimiter=",")
    write_json(str(path) + ".json", meta)


def read_table(path):
    """Return (columns, meta); malformed content raises TableParseError with a byte offset."""
    with open(path, "rb") as fh:
        raw = fh.read()
    meta, names, rows = {}, None, []
    offset = 0
    for line in raw.splitlines(keepends=True):
        text = line.decode("utf-8", errors="replace").rstrip("\r\n")
        if text.startswith("#"):
            key, sep, val = text[1:].partition(":")
            if not sep:
                raise TableParseError(f"{path}: bad header line at byte {offset}", path, offset)
            try:
                meta[key.strip()] = json.loads(val)
            except json.JSONDecodeError:
                raise TableParseError(f"{path}: bad header value at byte {offset}", path, offset) from None
        elif names is None:
            names = [t.strip() for t in text.split(",")]
        elif text.strip():
            cells = text.split(",")
            if len(cells) != len(names):
                raise TableParseError(
                    f"{path}: expected {len(names)} fields, got {len(cells)} at byte {offset}", path, offset
                )
            row = []
            pos = offset
            for cell in cells:
                try:
                    row.append(float(cell))
                except ValueError:
                    raise TableParseError(f"{path}: bad number {cell!r} at byte {pos}", path, pos) from None
                pos += len(cell.encode("utf-8")) + 1
            rows.append(row)
        offset += len(line)
    if names is None:
        raise TableParseError(f"{path}: missing column header", path, offset)
    arr = np.array(rows, dtype=float).reshape(-1, len(names))
    return {k: arr[:, i] for i, k in enumerate(names)}, meta


def field_columns(grid, fields):
    """Flatten node fields (N1, N2) into columns with y1, y2 coordinates."""
    Y1, Y2 = grid.mesh()
    cols = {"y1": Y1.ravel(), "y2": Y2.ravel()}
    for k, v in fields.items():
        cols[k] = np.asarray(v, dtype=float).ravel()
    return cols


def grid_meta(grid):
    return {"N1": grid.N1, "N2": grid.N2, "Ls": grid.Ls, "L1": grid.L1, "layout": "row-major [y1 index, y2 index]"}


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
