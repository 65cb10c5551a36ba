"""Point-pattern data model, windows, grids, simulators and CSV I/O.

A point pattern is a finite set of (x, y) locations in a rectangular
window, optionally carrying a class label.  Simulators are pure
functions of (parameters, seed): the generator is ``numpy``'s PCG64,
seeded per pattern, so identical seeds give identical patterns within
one build of this package.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, ValidationError

__all__ = [
    "Window",
    "PointPattern",
    "Grid",
    "LabeledPatternSet",
    "UNIT_WINDOW",
    "make_grid",
    "simulate_hppp",
    "simulate_pcpp",
    "load_patterns",
    "save_patterns",
]


@dataclass(frozen=True)
class Window:
    """Rectangular observation window [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValidationError(
                f"degenerate window: [{self.xmin}, {self.xmax}] x "
                f"[{self.ymin}, {self.ymax}]"
            )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the closed window."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (
            (pts[:, 0] >= self.xmin)
            & (pts[:, 0] <= self.xmax)
            & (pts[:, 1] >= self.ymin)
            & (pts[:, 1] <= self.ymax)
        )


UNIT_WINDOW = Window(0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class PointPattern:
    """An ordered finite set of points in a window, optionally labeled."""

    points: np.ndarray
    window: Window
    label: str | None = None
    id: str | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if pts.size and not np.isfinite(pts).all():
            raise ValidationError("non-finite point coordinates")
        if pts.size and not self.window.contains(pts).all():
            bad = np.flatnonzero(~self.window.contains(pts))[0]
            raise ValidationError(
                f"point {tuple(pts[bad])} outside window (pattern {self.id!r})"
            )

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class Grid:
    """Regular anchor lattice over a window, row-major order.

    Anchors are the full lattice {xmin + i*h} x {ymin + j*h} clipped to
    the window, ordered with y varying slowest and x fastest.
    """

    anchors: np.ndarray
    h: float
    window: Window

    @property
    def n_anchors(self) -> int:
        return self.anchors.shape[0]


def _axis_count(length: float, h: float) -> int:
    # floor(length/h) + 1, guarded against 1/0.02 = 49.999... style
    # floating-point shortfalls.
    return int(math.floor(length / h + 1e-9)) + 1


def make_grid(window: Window, h: float) -> Grid:
    """Build the anchor lattice with step ``h`` over ``window``.

    Both endpoints of each axis are included, so h=0.02 on the unit
    window gives 51 x 51 = 2601 anchors.
    """
    if h <= 0:
        raise ValidationError(f"grid step must be positive, got {h}")
    if h > min(window.width, window.height):
        raise ValidationError(
            f"grid step {h} exceeds window side "
            f"{min(window.width, window.height)}"
        )
    nx = _axis_count(window.width, h)
    ny = _axis_count(window.height, h)
    xs = np.minimum(window.xmin + h * np.arange(nx), window.xmax)
    ys = np.minimum(window.ymin + h * np.arange(ny), window.ymax)
    gx, gy = np.meshgrid(xs, ys)  # rows of constant y, x fastest
    anchors = np.column_stack([gx.ravel(), gy.ravel()])
    return Grid(anchors=anchors, h=float(h), window=window)


def simulate_hppp(
    intensity: float,
    window: Window,
    seed: int,
    label: str | None = None,
    id: str | None = None,
) -> PointPattern:
    """Homogeneous Poisson point process with the given intensity.

    The point count is Poisson(intensity * area) and points are i.i.d.
    uniform in the window.
    """
    if intensity < 0:
        raise ValidationError(f"intensity must be >= 0, got {intensity}")
    rng = np.random.default_rng(seed)
    n = rng.poisson(intensity * window.area)
    pts = np.column_stack(
        [
            rng.uniform(window.xmin, window.xmax, n),
            rng.uniform(window.ymin, window.ymax, n),
        ]
    )
    return PointPattern(points=pts, window=window, label=label, id=id)


def simulate_pcpp(
    parent_intensity: float,
    cluster_size: int,
    radius: float,
    window: Window,
    seed: int,
    label: str | None = None,
    id: str | None = None,
) -> PointPattern:
    """Poisson cluster process: Poisson parents, fixed-size disc clusters.

    Parents follow a homogeneous Poisson process inside the window; each
    parent gets exactly ``cluster_size`` offspring i.i.d. uniform in the
    closed disc of the given radius around it.  Offspring falling
    outside the window are discarded (clipping), so the realized edge
    intensity is slightly below parent_intensity * cluster_size.
    """
    if parent_intensity < 0:
        raise ValidationError(f"parent intensity must be >= 0, got {parent_intensity}")
    if cluster_size < 0:
        raise ValidationError(f"cluster size must be >= 0, got {cluster_size}")
    if radius <= 0:
        raise ValidationError(f"cluster radius must be > 0, got {radius}")
    rng = np.random.default_rng(seed)
    n_parents = rng.poisson(parent_intensity * window.area)
    parents = np.column_stack(
        [
            rng.uniform(window.xmin, window.xmax, n_parents),
            rng.uniform(window.ymin, window.ymax, n_parents),
        ]
    )
    m = n_parents * cluster_size
    # uniform in the disc: radius ~ R*sqrt(U), angle uniform
    rr = radius * np.sqrt(rng.uniform(size=m))
    theta = rng.uniform(0.0, 2.0 * np.pi, m)
    offsets = np.column_stack([rr * np.cos(theta), rr * np.sin(theta)])
    pts = np.repeat(parents, cluster_size, axis=0) + offsets
    pts = pts[window.contains(pts)] if m else pts.reshape(0, 2)
    return PointPattern(points=pts, window=window, label=label, id=id)


@dataclass(frozen=True)
class LabeledPatternSet:
    """A collection of patterns sharing one window.

    Labels may be missing (prediction inputs); test and classification
    code requires at least two distinct labels and checks this itself.
    """

    patterns: list[PointPattern] = field(default_factory=list)

    def __post_init__(self):
        windows = {p.window for p in self.patterns}
        if len(windows) > 1:
            raise ValidationError("patterns have inconsistent windows")
        ids = [p.id for p in self.patterns if p.id is not None]
        if len(ids) != len(set(ids)):
            raise ValidationError("duplicate pattern ids")

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    @property
    def window(self) -> Window:
        if not self.patterns:
            raise ValidationError("empty pattern set has no window")
        return self.patterns[0].window

    @property
    def labels(self) -> list[str | None]:
        return [p.label for p in self.patterns]

    def group_sizes(self) -> dict[str, int]:
        sizes: dict[str, int] = {}
        for p in self.patterns:
            if p.label is not None:
                sizes[p.label] = sizes.get(p.label, 0) + 1
        return sizes


_WINDOW_HEADER = "#window"


def save_patterns(pattern_set: LabeledPatternSet, path: str | os.PathLike) -> None:
    """Write a pattern set as CSV.

    Format: first line ``#window,xmin,xmax,ymin,ymax``, then one row
    ``pattern_id,label,x,y`` per point.  Patterns with no points still
    appear, as a row with empty coordinate fields, so empty patterns
    round-trip.
    """
    w = pattern_set.window
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([_WINDOW_HEADER, repr(w.xmin), repr(w.xmax), repr(w.ymin), repr(w.ymax)])
        for i, p in enumerate(pattern_set):
            pid = p.id if p.id is not None else f"p{i:03d}"
            label = p.label if p.label is not None else ""
            if len(p) == 0:
                writer.writerow([pid, label, "", ""])
            for x, y in p.points:
                writer.writerow([pid, label, repr(float(x)), repr(float(y))])
    os.replace(tmp, path)


def load_patterns(path: str | os.PathLike) -> LabeledPatternSet:
    """Read a pattern-set CSV written by :func:`save_patterns`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != _WINDOW_HEADER or len(rows[0]) != 5:
        raise DataFormatError(f"{path}: missing '#window,xmin,xmax,ymin,ymax' header")
    try:
        window = Window(*(float(v) for v in rows[0][1:]))
    except ValueError as exc:
        raise DataFormatError(f"{path}: bad window header: {exc}") from exc

    order: list[str] = []
    points: dict[str, list[tuple[float, float]]] = {}
    labels: dict[str, str | None] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 4:
            raise DataFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
        pid, label, xs, ys = row
        label_or_none = label if label else None
        if pid not in points:
            order.append(pid)
            points[pid] = []
            labels[pid] = label_or_none
        elif labels[pid] != label_or_none:
            raise DataFormatError(f"{path}:{lineno}: inconsistent label for pattern {pid!r}")
        if xs == "" and ys == "":
            continue  # empty-pattern marker row
        try:
            x, y = float(xs), float(ys)
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: bad coordinates: {exc}") from exc
        if not window.contains(np.array([[x, y]]))[0]:
            raise DataFormatError(
                f"{path}:{lineno}: point ({x}, {y}) outside declared window"
            )
        points[pid].append((x, y))

    patterns = [
        PointPattern(
            points=np.array(points[pid], dtype=float).reshape(-1, 2),
            window=window,
            label=labels[pid],
            id=pid,
        )
        for pid in order
    ]
    return LabeledPatternSet(patterns=patterns)
