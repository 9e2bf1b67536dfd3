"""CSV ingestion and export, and a small dependency-free SVG plotter.

CSV container format
--------------------
A plain comma-separated file is a single unnamed matrix. A file may instead
hold several named matrices, each introduced by a ``# name: <identifier>``
line, with blocks separated by blank lines::

    # name: ratings
    1,2,2
    1,1,2

    # name: interest_rates
    0.5,1.25,1.5
    0.25,0.5,1.0

Other lines starting with ``#`` are comments.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NameNotFound, ParseError, WriteError
from .model import EntropyTrajectory

_NAME_RE = re.compile(r"^#\s*name\s*:\s*(\S+)\s*$")


def fmt_float(x: float) -> str:
    """17 significant digits: exact round trip, stable across runs."""
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".17g")


# ---------------------------------------------------------------- reading


@dataclass(frozen=True)
class DatasetFile:
    path: Path
    matrix_name: str | None = None
    transpose: bool = False


def parse_blocks(text: str, source: str = "<string>") -> dict[str | None, NDArray[np.float64]]:
    """Split CSV container text into ``{name: matrix}`` (``None`` for an unnamed matrix)."""
    blocks: dict[str | None, list[list[float]]] = {}
    current: str | None = None
    started = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = _NAME_RE.match(line)
        if m:
            current = m.group(1)
            if current in blocks:
                raise ParseError(f"{source}:{lineno}: duplicate matrix name {current!r}")
            blocks[current] = []
            started = True
            continue
        if not line or line.startswith("#"):
            continue
        if current is None and not started:
            blocks.setdefault(None, [])
        row = next(csv.reader([line]))
        try:
            values = [float(cell) for cell in row]
        except ValueError:
            raise ParseError(f"{source}:{lineno}: non-numeric cell in {line!r}") from None
        target = blocks[current]
        if target and len(values) != len(target[0]):
            raise ParseError(
                f"{source}:{lineno}: ragged row ({len(values)} cells, expected {len(target[0])})"
            )
        target.append(values)
    if None in blocks and len(blocks) > 1:
        raise ParseError(f"{source}: unnamed rows appear before the first '# name:' header")
    out = {}
    for name, rows in blocks.items():
        if not rows:
            raise ParseError(f"{source}: matrix {name!r} is empty")
        out[name] = np.array(rows, dtype=np.float64)
    if not out:
        raise ParseError(f"{source}: no data")
    return out


def load_matrix(
    path: str | Path | DatasetFile, name: str | None = None, transpose: bool = False
) -> NDArray[np.float64]:
    """Read one matrix from a CSV container file.

    A file without name headers holds a single matrix, returned whatever
    ``name`` is requested. Otherwise ``name`` selects the block; it may be
    omitted only when the file holds exactly one block.
    """
    if isinstance(path, DatasetFile):
        path, name, transpose = path.path, path.matrix_name, path.transpose
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    blocks = parse_blocks(text, str(path))
    if None in blocks:
        mat = blocks[None]
    elif name is None:
        if len(blocks) != 1:
            raise NameNotFound(f"{path} holds several matrices {sorted(blocks)}; pick one by name")
        mat = next(iter(blocks.values()))
    elif name in blocks:
        mat = blocks[name]
    else:
        raise NameNotFound(f"matrix {name!r} not found in {path} (available: {sorted(blocks)})")
    return mat.T.copy() if transpose else mat


# ---------------------------------------------------------------- writing


def _write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc.strerror or exc}") from None


def format_matrix(mat: ArrayLike) -> str:
    a = np.asarray(mat)
    return "".join(",".join(fmt_float(v) for v in row) + "\n" for row in np.atleast_2d(a))


def write_matrices(path: str | Path, matrices: Mapping[str | None, ArrayLike]) -> None:
    """Write one or more matrices in the container format."""
    if None in matrices:
        if len(matrices) > 1:
            raise ValueError("an unnamed matrix must be the only one in the file")
        _write_text(path, format_matrix(matrices[None]))
        return
    parts = [f"# name: {name}\n" + format_matrix(mat) for name, mat in matrices.items()]
    _write_text(path, "\n".join(parts))


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, float) else str(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


def write_entropy_csv(traj: EntropyTrajectory, path: str | Path) -> None:
    rows = [(h, float(m), float(s)) for h, (m, s) in enumerate(zip(traj.mean, traj.sigma), 1)]
    write_csv(path, ("h", "mean", "sigma"), rows)


def read_entropy_csv(path: str | Path, n_replications: int = 1) -> EntropyTrajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["h", "mean", "sigma"]:
            raise ParseError(f"{path}: unexpected header {header}")
        rows = [(float(r[1]), float(r[2])) for r in reader if r]
    mean, sigma = zip(*rows) if rows else ((), ())
    return EntropyTrajectory(np.array(mean), np.array(sigma), n_replications)


def write_profile_csv(profile: Mapping[int, float], path: str | Path) -> None:
    write_csv(path, ("position", "loglik"), sorted(profile.items()))


def write_histogram_csv(rows: Iterable[tuple[float, float, int]], path: str | Path) -> None:
    write_csv(path, ("bin_left", "bin_right", "count"), rows)


# ---------------------------------------------------------------- SVG

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=40, bottom=55)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


@dataclass(frozen=True)
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]


@dataclass(frozen=True)
class Band:
    x: Sequence[float]
    lower: Sequence[float]
    upper: Sequence[float]
    label: str = ""


def nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _num(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".") if x != 0 else "0"


def _tick_label(x: float) -> str:
    return f"{x:.6g}"


class _Frame:
    def __init__(self, xs, ys):
        self.x0, self.x1 = min(xs), max(xs)
        self.y0, self.y1 = min(ys), max(ys)
        if self.x1 == self.x0:
            self.x0, self.x1 = self.x0 - 0.5, self.x1 + 0.5
        if self.y1 == self.y0:
            pad = abs(self.y0) * 0.1 or 1.0
            self.y0, self.y1 = self.y0 - pad, self.y1 + pad
        self.xt = nice_ticks(self.x0, self.x1)
        self.yt = nice_ticks(self.y0, self.y1)
        self.y0 = min(self.y0, self.yt[0])
        self.y1 = max(self.y1, self.yt[-1])
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(self, x):
        return MARGIN["left"] + (x - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y):
        return MARGIN["top"] + (1 - (y - self.y0) / (self.y1 - self.y0)) * self.ph

    def pts(self, xs, ys):
        return " ".join(f"{_num(self.px(x))},{_num(self.py(y))}" for x, y in zip(xs, ys))


def _axes(f: _Frame, title: str, xlabel: str, ylabel: str) -> list[str]:
    L, T = MARGIN["left"], MARGIN["top"]
    out = [
        f'<rect x="{L}" y="{T}" width="{f.pw}" height="{f.ph}" fill="none" stroke="#444"/>',
        f'<text x="{WIDTH / 2:g}" y="{T - 15}" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<text x="{WIDTH / 2:g}" y="{HEIGHT - 12}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
        f'<text x="16" y="{T + f.ph / 2:g}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {T + f.ph / 2:g})">{escape(ylabel)}</text>',
    ]
    for t in f.xt:
        if f.x0 <= t <= f.x1:
            x = _num(f.px(t))
            out.append(f'<line x1="{x}" y1="{T + f.ph}" x2="{x}" y2="{T + f.ph + 5}" stroke="#444"/>')
            out.append(
                f'<text x="{x}" y="{T + f.ph + 18}" text-anchor="middle" font-size="11">{_tick_label(t)}</text>'
            )
    for t in f.yt:
        if f.y0 <= t <= f.y1:
            y = _num(f.py(t))
            out.append(f'<line x1="{L - 5}" y1="{y}" x2="{L}" y2="{y}" stroke="#444"/>')
            out.append(f'<line x1="{L}" y1="{y}" x2="{L + f.pw}" y2="{y}" stroke="#ddd"/>')
            out.append(
                f'<text x="{L - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
                f'font-size="11">{_tick_label(t)}</text>'
            )
    return out


def _legend(entries: list[tuple[str, str, bool]]) -> list[str]:
    x = MARGIN["left"] + 10
    y = MARGIN["top"] + 14
    out = []
    for label, color, filled in entries:
        if filled:
            out.append(f'<rect x="{x}" y="{y - 6}" width="18" height="10" fill="{color}" fill-opacity="0.25"/>')
        else:
            out.append(f'<line x1="{x}" y1="{y}" x2="{x + 18}" y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x + 24}" y="{y + 4}" font-size="12">{escape(label)}</text>')
        y += 16
    return out


def _document(body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">\n'
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def svg_line_plot(
    series: Sequence[Series],
    band: Band | None = None,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> str:
    """SVG text for one or more polylines with an optional filled band."""
    if not series or any(len(s.x) == 0 for s in series):
        raise ValueError("need at least one non-empty series")
    xs = [float(v) for s in series for v in s.x]
    ys = [float(v) for s in series for v in s.y]
    if band is not None:
        xs += [float(v) for v in band.x]
        ys += [float(v) for v in band.lower] + [float(v) for v in band.upper]
    f = _Frame(xs, ys)
    body = _axes(f, title, xlabel, ylabel)
    legend = []
    if band is not None:
        color = PALETTE[0]
        pts = f.pts(band.x, band.upper) + " " + f.pts(list(band.x)[::-1], list(band.lower)[::-1])
        body.append(f'<polygon points="{pts}" fill="{color}" fill-opacity="0.25" stroke="none"/>')
        if band.label:
            legend.append((band.label, color, True))
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        body.append(
            f'<polyline points="{f.pts(s.x, s.y)}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        legend.append((s.label, color, False))
    return _document(body + _legend(legend))


def svg_histogram(
    rows: Sequence[tuple[float, float, int]], title: str = "", xlabel: str = "", ylabel: str = "count"
) -> str:
    if not rows:
        raise ValueError("empty histogram")
    f = _Frame([r[0] for r in rows] + [r[1] for r in rows], [0.0] + [float(r[2]) for r in rows])
    body = _axes(f, title, xlabel, ylabel)
    for left, right, count in rows:
        if count <= 0:
            continue
        x, x2 = f.px(left), f.px(right)
        y, y0 = f.py(count), f.py(0.0)
        body.append(
            f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(x2 - x)}" height="{_num(y0 - y)}" '
            f'fill="{PALETTE[0]}" fill-opacity="0.7" stroke="white"/>'
        )
    return _document(body)


def render_svg(
    series: Sequence[Series],
    path: str | Path,
    band: Band | None = None,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> None:
    _write_text(path, svg_line_plot(series, band, title, xlabel, ylabel))


def render_entropy_svg(traj: EntropyTrajectory, path: str | Path, title: str = "Expected Theil entropy") -> None:
    h = list(range(1, traj.horizon + 1))
    band = Band(h, traj.mean - traj.sigma, traj.mean + traj.sigma, label="mean ± sigma")
    render_svg([Series("mean", h, traj.mean)], path, band, title, "step h", "Theil entropy")


def render_histogram_svg(rows, path: str | Path, title: str = "", xlabel: str = "attribute") -> None:
    _write_text(path, svg_histogram(rows, title, xlabel))
