"""Raster and vector output: boolean bitmaps, binary PGM, minimal SVG."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StripTooSmall

__all__ = [
    "Bitmap",
    "blank_bitmap",
    "points_to_bitmap",
    "mark_points",
    "dilate",
    "to_pgm_bytes",
    "write_pgm",
    "svg_polyline",
    "svg_loglog",
]


@dataclass(frozen=True)
class Bitmap:
    """A boolean pixel grid over [x0, x1] x [y0, y1]; row 0 is the top (y1)."""

    pixels: np.ndarray
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=bool).copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)
        if px.ndim != 2:
            raise ValueError("pixels must be a 2-d array")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("bitmap bounds must have positive extent")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def count(self) -> int:
        return int(np.count_nonzero(self.pixels))


def blank_bitmap(width: int, height: int, x0: float, x1: float, y0: float, y1: float) -> Bitmap:
    return Bitmap(np.zeros((height, width), dtype=bool), x0, x1, y0, y1)


def _pixel_indices(bmp: Bitmap, xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(ys < bmp.y0) or np.any(ys > bmp.y1):
        raise StripTooSmall(
            f"points reach y in [{ys.min()}, {ys.max()}], raster strip is [{bmp.y0}, {bmp.y1}]"
        )
    if np.any(xs < bmp.x0) or np.any(xs > bmp.x1):
        raise StripTooSmall("points fall outside the raster x-range")
    col = np.floor((xs - bmp.x0) / (bmp.x1 - bmp.x0) * bmp.width).astype(np.int64)
    row = np.floor((bmp.y1 - ys) / (bmp.y1 - bmp.y0) * bmp.height).astype(np.int64)
    np.clip(col, 0, bmp.width - 1, out=col)
    np.clip(row, 0, bmp.height - 1, out=row)
    return row, col


def mark_points(bmp: Bitmap, xs, ys) -> Bitmap:
    """New bitmap with the pixels containing the given points also set."""
    row, col = _pixel_indices(bmp, xs, ys)
    px = np.array(bmp.pixels)
    px[row, col] = True
    return Bitmap(px, bmp.x0, bmp.x1, bmp.y0, bmp.y1)


def points_to_bitmap(xs, ys, width, height, x0, x1, y0, y1) -> Bitmap:
    return mark_points(blank_bitmap(width, height, x0, x1, y0, y1), xs, ys)


def dilate(bmp: Bitmap, radius: int = 1) -> Bitmap:
    """Morphological dilation with a (2r+1)^2 square structuring element."""
    px = np.array(bmp.pixels)
    out = np.array(px)
    for dr in range(-radius, radius + 1):
        for dc in range(-radius, radius + 1):
            if dr == 0 and dc == 0:
                continue
            shifted = np.zeros_like(px)
            rs = slice(max(dr, 0), px.shape[0] + min(dr, 0))
            rd = slice(max(-dr, 0), px.shape[0] + min(-dr, 0))
            cs = slice(max(dc, 0), px.shape[1] + min(dc, 0))
            cd = slice(max(-dc, 0), px.shape[1] + min(-dc, 0))
            shifted[rd, cd] = px[rs, cs]
            out |= shifted
    return Bitmap(out, bmp.x0, bmp.x1, bmp.y0, bmp.y1)


def to_pgm_bytes(bmp: Bitmap) -> bytes:
    """Binary PGM (P5), 255 = background, 0 = set pixel, top row first."""
    header = f"P5\n{bmp.width} {bmp.height}\n255\n".encode("ascii")
    body = np.where(bmp.pixels, 0, 255).astype(np.uint8).tobytes()
    return header + body


def write_pgm(path, bmp: Bitmap):
    with open(path, "wb") as fh:
        fh.write(to_pgm_bytes(bmp))


def _fmt(v: float) -> str:
    return f"{v:.6f}".rstrip("0").rstrip(".")


def svg_polyline(xs, ys, width: int = 800, height: int = 600, margin: int = 20) -> str:
    """Plain-XML SVG with one polyline through the samples, y up."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    sx = (width - 2 * margin) / (x1 - x0)
    sy = (height - 2 * margin) / (y1 - y0)
    px = margin + (xs - x0) * sx
    py = height - margin - (ys - y0) * sy
    pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1"/>\n'
        "</svg>\n"
    )


def svg_loglog(rs, counts, base: int, slope: float = None, width: int = 640, height: int = 480) -> str:
    """Log-log plot of box counts against resolution depth, with axes.

    x-axis is r*log(base) (log of inverse box size), y-axis log of the count;
    an optional fitted line of the given slope is drawn through the last point.
    """
    rs = np.asarray(rs, dtype=float)
    counts = np.asarray(counts, dtype=float)
    lx = rs * np.log(base)
    ly = np.log(counts)
    m = 50
    x0, x1 = float(lx.min()), float(lx.max())
    y0, y1 = float(ly.min()), float(ly.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    sx = (width - 2 * m) / (x1 - x0)
    sy = (height - 2 * m) / (y1 - y0)

    def tx(v):
        return m + (v - x0) * sx

    def ty(v):
        return height - m - (v - y0) * sy

    pts = " ".join(f"{_fmt(tx(a))},{_fmt(ty(b))}" for a, b in zip(lx, ly))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 10}" font-size="12">log(1/box size)</text>',
        f'<text x="6" y="{height // 2}" font-size="12" transform="rotate(-90 12 {height // 2})">log(count)</text>',
        f'<polyline points="{pts}" fill="none" stroke="blue" stroke-width="1"/>',
    ]
    for a, b in zip(lx, ly):
        parts.append(f'<circle cx="{_fmt(tx(a))}" cy="{_fmt(ty(b))}" r="3" fill="blue"/>')
    if slope is not None:
        ya = ly[-1] - slope * (lx[-1] - lx[0])
        parts.append(
            f'<line x1="{_fmt(tx(lx[0]))}" y1="{_fmt(ty(ya))}" '
            f'x2="{_fmt(tx(lx[-1]))}" y2="{_fmt(ty(ly[-1]))}" '
            'stroke="red" stroke-dasharray="4 3"/>'
        )
        parts.append(f'<text x="{width - 200}" y="{m}" font-size="12">slope {slope:.5f}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
