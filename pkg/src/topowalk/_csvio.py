"""Shared CSV block format.

Each block is a comment header followed by ``axis1,axis2,value,gapless``
rows; numbers use 17 significant digits so the text round-trips exactly.
"""

from __future__ import annotations

import math

import numpy as np

FORMAT_TAG = "topowalk v1"
COLUMNS = "axis1,axis2,value,gapless"


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def header(**fields) -> str:
    parts = [FORMAT_TAG] + [f"{k}={v}" for k, v in fields.items()]
    return "# " + ", ".join(parts)


def block_lines(head: str, axis1, axis2, values, gapless) -> list:
    lines = [head, COLUMNS]
    for a1, a2, v, g in zip(axis1, axis2, values, gapless):
        lines.append(f"{fmt(a1)},{fmt(a2)},{fmt(v)},{int(bool(g))}")
    return lines


def write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_blocks(path) -> list:
    """Parse a file into ``[(fields, array of shape (rows, 4))]``."""
    blocks = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                items = [p.strip() for p in body.split(",")]
                if items[0] != FORMAT_TAG:
                    raise ValueError(f"unknown format tag {items[0]!r}")
                fields = dict(p.split("=", 1) for p in items[1:])
                blocks.append((fields, []))
            elif line == COLUMNS:
                continue
            else:
                if not blocks:
                    raise ValueError("data row before header")
                blocks[-1][1].append([float(v) for v in line.split(",")])
    return [(f, np.array(rows, dtype=float).reshape(-1, 4)) for f, rows in blocks]
