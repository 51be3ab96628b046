"""File emitters for sweep results: report table, embeddings, scatter SVGs and hit curves."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from html import escape
from pathlib import Path

import numpy as np

from .metrics import Embedding

# tab10
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
CANVAS = 1000.0
MARGIN = 0.05


@dataclass
class ReportRow:
    method: str
    params: dict
    silhouette: float | None
    seconds: float | None
    seed: int
    error: str | None = None
    hit_curve: list[float] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.error is None


def _fmt_param(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def emit_report_csv(rows, path) -> Path:
    """Write ``method,<params...>,silhouette,seconds,seed,error``, one line per row.

    Parameter columns are the union of row parameter names in first-seen order.
    Scores use four decimals; a failed cell leaves ``silhouette`` empty.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no report rows to write")
    params: list[str] = []
    for row in rows:
        params += [p for p in row.params if p not in params]
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", *params, "silhouette", "seconds", "seed", "error"])
        for row in rows:
            w.writerow([
                row.method,
                *(_fmt_param(row.params.get(p)) for p in params),
                "" if row.silhouette is None else f"{row.silhouette:.4f}",
                "" if row.seconds is None else f"{row.seconds:.3f}",
                row.seed,
                row.error or "",
            ])
    return path


def emit_embedding_csv(emb: Embedding, path) -> Path:
    """Write ``index,x,y,...,label`` with coordinates at 9 significant digits."""
    axes = ["x", "y", "z"][: emb.dim] if emb.dim <= 3 else [f"x{j}" for j in range(emb.dim)]
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", *axes, "label"])
        for i, (row, code) in enumerate(zip(emb.coords, emb.labels)):
            w.writerow([i, *(f"{v:.9g}" for v in row), emb.label_name(int(code))])
    return path


def read_embedding_csv(path) -> Embedding:
    from .dataset import encode_labels

    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        records = list(reader)
    dim = len(header) - 2
    coords = np.array([[float(v) for v in r[1 : 1 + dim]] for r in records]).reshape(len(records), dim)
    labels, names = encode_labels([r[-1] for r in records])
    return Embedding(coords, labels, names)


def canvas_coords(coords) -> np.ndarray:
    """Map 2-D coordinates into the SVG canvas with a uniform scale and 5% margin.

    The y axis is flipped so larger values are drawn higher. A zero range
    on both axes puts every point at the canvas center.
    """
    coords = np.asarray(coords, dtype=np.float64)
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    span = float(np.max(hi - lo))
    mid = (lo + hi) / 2
    if span == 0.0:
        return np.full_like(coords, CANVAS / 2)
    scale = CANVAS * (1 - 2 * MARGIN) / span
    x = CANVAS / 2 + (coords[:, 0] - mid[0]) * scale
    y = CANVAS / 2 - (coords[:, 1] - mid[1]) * scale
    return np.column_stack([x, y])


def _style(code: int) -> tuple[str, float]:
    # labels past the palette reuse colors with an outline that widens per cycle
    return PALETTE[code % len(PALETTE)], float(code // len(PALETTE))


def emit_svg_scatter(emb: Embedding, path, *, radius: float = 4.0, title: str | None = None) -> Path:
    if emb.dim != 2:
        raise ValueError(f"scatter plots need a 2-D embedding, got {emb.dim}-D")
    xy = canvas_coords(emb.coords)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {CANVAS:g} {CANVAS:g}" '
        f'width="{CANVAS:g}" height="{CANVAS:g}">',
        f'<rect x="0" y="0" width="{CANVAS:g}" height="{CANVAS:g}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    out.append('<g class="points">')
    for (x, y), code in zip(xy, emb.labels):
        color, ring = _style(int(code))
        stroke = f' stroke="black" stroke-width="{ring:g}"' if ring else ""
        out.append(
            f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{radius:g}" fill="{color}" '
            f'fill-opacity="0.8" data-label="{int(code)}"{stroke}/>'
        )
    out.append("</g>")

    codes = sorted(set(int(c) for c in emb.labels))
    out.append('<g class="legend" font-family="sans-serif" font-size="14">')
    out.append(
        f'<rect x="8" y="8" width="220" height="{14 + 20 * len(codes)}" '
        'fill="white" fill-opacity="0.85" stroke="#999"/>'
    )
    for row, code in enumerate(codes):
        color, ring = _style(code)
        y = 26 + 20 * row
        stroke = f' stroke="black" stroke-width="{ring:g}"' if ring else ""
        note = f" (outline {ring:g})" if ring else ""
        out.append(f'<circle cx="22" cy="{y - 5}" r="6" fill="{color}"{stroke}/>')
        out.append(f'<text x="34" y="{y}">{escape(emb.label_name(code))}{note}</text>')
    out.append("</g>")
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def emit_hit_curve_csv(curves: dict, path) -> Path:
    """Write ``k,<name1>,<name2>,...`` for curves that all cover ``k = 1 .. k_max``."""
    if not curves:
        raise ValueError("no hit curves to write")
    lengths = {name: len(c) for name, c in curves.items()}
    if len(set(lengths.values())) != 1:
        raise ValueError(f"hit curves cover different k ranges: {lengths}")
    k_max = next(iter(lengths.values()))
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", *curves])
        for k in range(k_max):
            w.writerow([k + 1, *(f"{float(c[k]):.6f}" for c in curves.values())])
    return path


def svg_circle_positions(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back ``(xy, labels)`` of the point circles of an emitted scatter."""
    import xml.etree.ElementTree as ET

    ns = {"svg": "http://www.w3.org/2000/svg"}
    root = ET.parse(path).getroot()
    pts = root.findall("svg:g[@class='points']/svg:circle", ns)
    xy = np.array([[float(c.get("cx")), float(c.get("cy"))] for c in pts]).reshape(-1, 2)
    labels = np.array([int(c.get("data-label")) for c in pts], dtype=np.int64)
    return xy, labels


__all__ = [
    "PALETTE",
    "ReportRow",
    "canvas_coords",
    "emit_embedding_csv",
    "emit_hit_curve_csv",
    "emit_report_csv",
    "emit_svg_scatter",
    "read_embedding_csv",
    "svg_circle_positions",
]
