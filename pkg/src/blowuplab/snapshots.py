"""Field snapshots and contour node lists.

Field snapshot: ASCII header lines ``key = value`` (format version, model,
grid descriptor, t, columns, shape, byte order ``little``), a blank line,
then each column's float64 values, little-endian, row-major, in column order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .diagnostics import fmt

FORMAT_VERSION = 1


def write_snapshot(path, model: str, grid: str, t: float, fields: dict[str, np.ndarray]) -> None:
    names = list(fields)
    arrays = [np.ascontiguousarray(fields[k], dtype="<f8") for k in names]
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays):
        raise ValueError("all snapshot columns must share one shape")
    header = [
        f"format = blowuplab-snapshot {FORMAT_VERSION}",
        f"model = {model}",
        f"grid = {grid}",
        f"t = {fmt(t)}",
        f"columns = {' '.join(names)}",
        f"shape = {' '.join(str(s) for s in shape)}",
        "byteorder = little",
        "",
        "",
    ]
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write("\n".join(header).encode("ascii"))
            for a in arrays:
                fh.write(a.tobytes(order="C"))
    except OSError as e:
        raise OSError(f"cannot write snapshot {path}: {e}") from e


def read_snapshot(path) -> tuple[dict, dict[str, np.ndarray]]:
    """``(header, fields)`` with fields bit-identical to what was written."""
    data = Path(path).read_bytes()
    end = data.find(b"\n\n")
    if end < 0:
        raise ValueError(f"{path}: no header terminator")
    header = {}
    for line in data[:end].decode("ascii").splitlines():
        k, _, v = line.partition(" = ")
        header[k] = v
    if header.get("byteorder") != "little" or not header.get("format", "").startswith("blowuplab-snapshot"):
        raise ValueError(f"{path}: not a little-endian blowuplab snapshot")
    header["t"] = float(header["t"])
    shape = tuple(int(s) for s in header["shape"].split())
    names = header["columns"].split()
    flat = np.frombuffer(data[end + 2:], dtype="<f8")
    size = int(np.prod(shape))
    if flat.size != size * len(names):
        raise ValueError(f"{path}: expected {size * len(names)} values, found {flat.size}")
    fields = {k: flat[i * size:(i + 1) * size].reshape(shape).astype(float) for i, k in enumerate(names)}
    return header, fields


def write_contour_csv(path, nodes: np.ndarray, t: float, alpha: float, weight: float) -> None:
    """Contour nodes as ``x1,x2`` rows after a ``# t=..., alpha=..., weight=...`` header."""
    lines = [f"# t={fmt(t)}, alpha={fmt(alpha)}, weight={fmt(weight)}", "x1,x2"]
    lines += [f"{fmt(a)},{fmt(b)}" for a, b in nodes]
    Path(path).write_text("\n".join(lines) + "\n")


def read_contour_csv(path) -> tuple[dict, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    meta = {}
    for item in lines[0].lstrip("# ").split(", "):
        k, _, v = item.partition("=")
        meta[k] = float(v)
    nodes = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:] if ln])
    return meta, nodes
