"""Uniform nodal grids on a square (cube) or disk (ball) and nodal functions.

Nodes are the lattice points of the bounding box [-a, a]^N (a = side/2 or
the radius) with ``resolution`` points per axis. A node is interior when its
distance to the boundary is at least h/2; every other lattice point carries
the value 0, which is how the zero-exterior condition enters.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, ResolutionTooLow, ValidationError


class Shape(enum.Enum):
    SQUARE = "square"
    DISK = "disk"


def _ball_volume(N, R):
    return math.pi ** (N / 2) / math.gamma(N / 2 + 1) * R**N


@dataclass(frozen=True, eq=False)
class Grid:
    shape: Shape
    size: float  # side for SQUARE, radius for DISK
    resolution: int
    N: int
    h: float
    half_width: float
    index: np.ndarray  # (M, N) lattice indices in [0, resolution)
    nodes: np.ndarray  # (M, N) coordinates
    d: np.ndarray  # distance to the boundary
    R: np.ndarray  # largest distance to the boundary
    key: tuple = field(repr=False)

    @property
    def M(self) -> int:
        return len(self.nodes)

    @property
    def cell_volume(self) -> float:
        return self.h**self.N

    @property
    def volume(self) -> float:
        """|Omega| of the continuous domain."""
        if self.shape is Shape.SQUARE:
            return self.size**self.N
        return _ball_volume(self.N, self.size)

    @property
    def discrete_volume(self) -> float:
        """Measure carried by the interior cells, M h^N."""
        return self.M * self.cell_volume

    def node_id(self) -> dict:
        """Lattice index tuple -> row number."""
        return {tuple(ix): i for i, ix in enumerate(self.index.tolist())}

    def check_same(self, other: "Grid"):
        if self.key != other.key:
            raise GridMismatch(f"grid {self.key} does not match {other.key}")

    def __eq__(self, other):
        return isinstance(other, Grid) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


def make_domain(shape, size: float, resolution: int, N: int = 2) -> Grid:
    """Grid for Square(side=size) or Disk(radius=size) centred at the origin."""
    shape = Shape(shape) if not isinstance(shape, Shape) else shape
    if resolution < 4:
        raise ResolutionTooLow(f"resolution {resolution} < 4")
    if N not in (2, 3):
        raise ValidationError("N must be 2 or 3")
    if not size > 0:
        raise ValidationError("domain size must be positive")
    a = size / 2 if shape is Shape.SQUARE else size
    h = 2 * a / (resolution - 1)
    axis = -a + h * np.arange(resolution)
    # lexicographic order: first coordinate slowest
    idx = np.array(list(itertools.product(range(resolution), repeat=N)), dtype=np.int64)
    x = axis[idx]
    if shape is Shape.SQUARE:
        d = np.min(a - np.abs(x), axis=1)
        R = np.linalg.norm(a + np.abs(x), axis=1)
    else:
        rad = np.linalg.norm(x, axis=1)
        d = a - rad
        R = a + rad
    keep = (d >= h / 2 * (1 - 1e-12)) & (d > 0)
    idx, x, d, R = idx[keep], x[keep], d[keep], R[keep]
    for arr in (idx, x, d, R):
        arr.setflags(write=False)
    g = Grid(
        shape=shape,
        size=float(size),
        resolution=int(resolution),
        N=N,
        h=h,
        half_width=a,
        index=idx,
        nodes=x,
        d=d,
        R=R,
        key=(shape.value, float(size), int(resolution), N),
    )
    return g


def square(side: float, resolution: int, N: int = 2) -> Grid:
    return make_domain(Shape.SQUARE, side, resolution, N)


def disk(radius: float, resolution: int, N: int = 2) -> Grid:
    return make_domain(Shape.DISK, radius, resolution, N)


@dataclass(frozen=True, eq=False)
class NodalFunction:
    """Values at the interior nodes; zero everywhere else by construction."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.M,):
            raise GridMismatch(f"expected {self.grid.M} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: Grid) -> "NodalFunction":
        return cls(grid, np.zeros(grid.M))

    @classmethod
    def from_callable(cls, grid: Grid, f) -> "NodalFunction":
        return cls(grid, np.asarray(f(grid.nodes), dtype=float))

    def with_values(self, values) -> "NodalFunction":
        return NodalFunction(self.grid, values)

    def __neg__(self):
        return self.with_values(-self.values)

    def __add__(self, other: "NodalFunction"):
        self.grid.check_same(other.grid)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "NodalFunction"):
        self.grid.check_same(other.grid)
        return self.with_values(self.values - other.values)

    def __mul__(self, c: float):
        return self.with_values(c * self.values)

    __rmul__ = __mul__

    def to_csv(self, path=None) -> str:
        """x, y[, z], value per interior node, 17 significant digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "z"][: self.grid.N] + ["value"])
        for xi, vi in zip(self.grid.nodes, self.values):
            w.writerow([f"{c:.16e}" for c in xi] + [f"{vi:.16e}"])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def lq_norm(u: NodalFunction, q: float) -> float:
    """(sum |u_i|^q h^N)^{1/q}."""
    if not q >= 1:
        raise ValidationError("q must be >= 1")
    v = np.abs(u.values)
    m = v.max(initial=0.0)
    if m == 0:
        return 0.0
    # scale out the max to avoid overflow for large q
    return m * float(np.sum((v / m) ** q) * u.grid.cell_volume) ** (1 / q)
