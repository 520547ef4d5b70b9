"""Stiffness matrix of the nonlocal form on a nodal grid.

With u piecewise constant on the cells of the interior nodes and zero
outside, the form splits into a pair part over Omega x Omega and an
exterior part 2 int u^2 w with w(x) = int_{Omega^c} K(x - y) dy:

    u^T A u = sum_{i != j} Kbar_ij (u_i - u_j)^2 h^{2N} + 2 sum_i w_i u_i^2 h^N
              + self-cell correction.

Kbar_ij is the cell-pair average of K: the midpoint value K(|x_i - x_j|) for
pairs farther apart than delta = delta_factor * h, a tensor Gauss rule of
order ``near_order`` per coordinate for closer pairs. Since Kbar only
depends on the lattice offset, the fast path tabulates it once per offset.
"""

from __future__ import annotations

import dataclasses
import functools
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse
from filelock import FileLock

from . import __version__
from .errors import (
    CacheFingerprintMismatch,
    GridMismatch,
    GridTooLarge,
    NonIntegrableKernel,
    NonMonotoneKernel,
    UnsupportedDimension,
    ValidationError,
)
from .grid import Grid, NodalFunction, Shape
from .kernels import Kernel, check_levy_integrability, check_monotone, second_moment, tail

DENSE_ORACLE_MAX = 400


@dataclass(frozen=True)
class AssemblyConfig:
    delta_factor: float = 2.0  # near/far split radius in units of h
    near_order: int = 4  # Gauss points per coordinate and cell
    self_correction: bool = True
    angular_points: int = 48  # Gauss points per smooth arc of the exterior weight

    def __post_init__(self):
        if not self.delta_factor >= 0:
            raise ValidationError("delta_factor must be >= 0")
        if not 1 <= self.near_order <= 20:
            raise ValidationError("near_order must lie in [1, 20]")
        if self.angular_points < 4:
            raise ValidationError("angular_points must be >= 4")


@dataclass(frozen=True, eq=False)
class ExteriorWeight:
    grid: Grid
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class StiffnessMatrix:
    grid: Grid
    spec: Kernel
    config: AssemblyConfig
    matrix: np.ndarray
    fingerprint: str

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    def cholesky(self):
        """Cached lower Cholesky factor (scipy cho_factor form)."""
        cf = self.__dict__.get("_cho")
        if cf is None:
            cf = scipy.linalg.cho_factor(self.matrix, lower=True)
            object.__setattr__(self, "_cho", cf)
        return cf

    def solve(self, b: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self.cholesky(), b)


def fingerprint(grid: Grid, spec: Kernel, cfg: AssemblyConfig) -> str:
    """sha256 of the canonical JSON description of an assembly."""
    doc = {
        "grid": list(grid.key),
        "kernel": spec.to_config(),
        "config": dataclasses.asdict(cfg),
        "version": __version__,
    }
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _check_inputs(grid: Grid, spec: Kernel):
    if grid.N != 2 or spec.N != 2:
        raise UnsupportedDimension("assembly is implemented for N = 2 only")
    rep = check_levy_integrability(spec)
    if not rep.passed:
        raise NonIntegrableKernel(f"{spec.label()}: {rep.detail}")
    mono = check_monotone(spec)
    if not mono.passed:
        raise NonMonotoneKernel(f"{spec.label()} increases at {mono.first_violation}")


# ---------------------------------------------------------------------------
# exterior weight
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def _gauss(n, a, b):
    x, w = _leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _ray_distance(shape: Shape, a: float, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    if shape is Shape.DISK:
        xe = e @ x
        return -xe + np.sqrt(xe**2 + a * a - x @ x)
    with np.errstate(divide="ignore"):
        t = np.where(e > 0, (a - x) / e, np.where(e < 0, (-a - x) / e, np.inf))
    return t.min(axis=-1)


def _angular_cuts(shape: Shape, a: float, x: np.ndarray) -> np.ndarray:
    cuts = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi, 2 * math.pi]
    if shape is Shape.SQUARE:
        for cx, cy in ((a, a), (-a, a), (-a, -a), (a, -a)):
            cuts.append(math.atan2(cy - x[1], cx - x[0]) % (2 * math.pi))
    return np.unique(np.array(cuts))


def _ray_average(spec: Kernel, shape: Shape, a: float, x: np.ndarray, n: int) -> float:
    """(1 / 2 pi) int_0^{2 pi} T(rho(theta)) d theta = int_{|y| outside D} K(x - y) dy.

    rho(theta) is the distance from x to the boundary of the convex set D
    (square of half-width a, or disk of radius a) along direction theta.
    """
    cuts = _angular_cuts(shape, a, x)
    th, wt = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo > 1e-14:
            t, w = _gauss(n, lo, hi)
            th.append(t)
            wt.append(w)
    th = np.concatenate(th)
    wt = np.concatenate(wt)
    return float(wt @ tail(spec, _ray_distance(shape, a, x, th))) / (2 * math.pi)


def exterior_weight(grid: Grid, spec: Kernel, cfg: AssemblyConfig | None = None) -> ExteriorWeight:
    """w(x_i) = int_{Omega^c} K(x_i - y) dy for every interior node."""
    cfg = cfg or AssemblyConfig()
    if grid.N != 2:
        raise UnsupportedDimension("exterior weight is implemented for N = 2 only")
    vals = []
    for x, d, R in zip(grid.nodes, grid.d, grid.R):
        v = _ray_average(spec, grid.shape, grid.half_width, x, cfg.angular_points)
        # the sandwich T(R) <= w <= T(d) holds pointwise in theta
        vals.append(min(max(v, tail(spec, R)), tail(spec, d)))
    vals = np.array(vals)
    vals.setflags(write=False)
    return ExteriorWeight(grid, vals)


def _cell_union_half_width(grid: Grid) -> float:
    """Half-width (square) or radius (disk) of the region covered by interior cells.

    For the square this is exact: the cells tile [-a + h/2, a - h/2]^2. The
    staircase union of the disk is replaced by the disk of equal area.
    """
    if grid.shape is Shape.SQUARE:
        return grid.half_width - grid.h / 2
    return min(grid.half_width, math.sqrt(grid.M * grid.cell_volume / math.pi))


def strip_weight(grid: Grid, spec: Kernel, w: ExteriorWeight, cfg: AssemblyConfig) -> np.ndarray:
    """int over the part of Omega not covered by interior cells of K(x_i - y) dy.

    u vanishes there, so these pairs of Omega x Omega act like exterior pairs.
    """
    a = _cell_union_half_width(grid)
    out = np.array(
        [_ray_average(spec, grid.shape, a, x, cfg.angular_points) for x in grid.nodes]
    )
    return np.maximum(out - w.values, 0.0)


# ---------------------------------------------------------------------------
# cell-pair averages
# ---------------------------------------------------------------------------


def _difference_rule(order: int):
    """Nodes/weights for xi - eta with xi, eta Gauss points on [-1/2, 1/2] (unit cell)."""
    g, w = _gauss(order, -0.5, 0.5)
    diff = (g[:, None] - g[None, :]).ravel()
    wt = (w[:, None] * w[None, :]).ravel()
    return diff, wt


def _near_average(spec: Kernel, offset, h: float, order: int) -> float:
    """(1/h^4) int_{cell} int_{cell + h offset} K(|x - y|) dx dy by tensor Gauss."""
    diff, wt = _difference_rule(order)
    dx = h * (offset[0] + diff)
    dy = h * (offset[1] + diff)
    r = np.hypot(dx[:, None], dy[None, :])
    return float(wt @ spec.profile(r) @ wt)


def _is_near(off, delta_over_h: float) -> bool:
    return math.hypot(off[0], off[1]) <= delta_over_h * (1 + 1e-12)


def _offset_table(spec: Kernel, grid: Grid, cfg: AssemblyConfig) -> np.ndarray:
    """Kbar for every lattice offset in [-(n-1), n-1]^2, exactly even in the offset."""
    n = grid.resolution
    h = grid.h
    o = np.arange(-(n - 1), n)
    ox, oy = np.meshgrid(o, o, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):  # zero offset, overwritten below
        table = spec.profile(h * np.hypot(ox, oy))
    table[n - 1, n - 1] = 0.0
    reach = int(math.floor(cfg.delta_factor))
    cache = {}
    for a in range(-reach, reach + 1):
        for b in range(-reach, reach + 1):
            if (a, b) == (0, 0) or not _is_near((a, b), cfg.delta_factor):
                continue
            key = tuple(sorted((abs(a), abs(b))))
            if key not in cache:
                cache[key] = _near_average(spec, key, h, cfg.near_order)
            if abs(a) < n and abs(b) < n:
                table[a + n - 1, b + n - 1] = cache[key]
    return table


def _gradient_operator(grid: Grid) -> list[np.ndarray]:
    """Central differences per axis, exterior neighbours read as zero."""
    ids = grid.node_id()
    M = grid.M
    ops = []
    for k in range(grid.N):
        G = np.zeros((M, M))
        for i, ix in enumerate(grid.index.tolist()):
            for sgn in (1, -1):
                nb = list(ix)
                nb[k] += sgn
                j = ids.get(tuple(nb))
                if j is not None:
                    G[i, j] += sgn / (2 * grid.h)
        ops.append(G)
    return ops


def _self_correction(grid: Grid, spec: Kernel) -> np.ndarray:
    """c sum_k G_k^T G_k with c = m(h/2)/N * h^N: approximates the same-cell pairs."""
    c = second_moment(spec, grid.h / 2) / grid.N * grid.cell_volume
    out = np.zeros((grid.M, grid.M))
    for G in _gradient_operator(grid):
        out += G.T @ G
    return c * out


def _finish(grid, spec, cfg, A):
    A = 0.5 * (A + A.T)
    A.setflags(write=False)
    return StiffnessMatrix(grid, spec, cfg, A, fingerprint(grid, spec, cfg))


def assemble_stiffness(grid: Grid, spec: Kernel, cfg: AssemblyConfig | None = None) -> StiffnessMatrix:
    """Vectorized assembly through the per-offset table of cell averages."""
    cfg = cfg or AssemblyConfig()
    _check_inputs(grid, spec)
    n = grid.resolution
    h4 = grid.cell_volume**2
    table = _offset_table(spec, grid, cfg)
    ix = grid.index.astype(np.intp)
    di = ix[:, 0][:, None] - ix[:, 0][None, :] + (n - 1)
    dj = ix[:, 1][:, None] - ix[:, 1][None, :] + (n - 1)
    A = -2.0 * h4 * table[di, dj]
    del di, dj
    np.fill_diagonal(A, 0.0)
    diag = -A.sum(axis=1)
    ext = exterior_weight(grid, spec, cfg)
    w = ext.values + strip_weight(grid, spec, ext, cfg)
    A[np.diag_indices_from(A)] = diag + 2.0 * w * grid.cell_volume
    if cfg.self_correction:
        A += _self_correction(grid, spec)
    return _finish(grid, spec, cfg, A)


def assemble_dense_oracle(grid: Grid, spec: Kernel, cfg: AssemblyConfig | None = None) -> StiffnessMatrix:
    """Literal double loop over node pairs; reference for :func:`assemble_stiffness`."""
    cfg = cfg or AssemblyConfig()
    if grid.M > DENSE_ORACLE_MAX:
        raise GridTooLarge(f"dense oracle limited to {DENSE_ORACLE_MAX} nodes, grid has {grid.M}")
    _check_inputs(grid, spec)
    M = grid.M
    h = grid.h
    vol = grid.cell_volume
    A = np.zeros((M, M))
    for i in range(M):
        for j in range(M):
            if i == j:
                continue
            off = grid.index[i] - grid.index[j]
            if _is_near(off, cfg.delta_factor):
                kbar = _near_average(spec, tuple(sorted(np.abs(off).tolist())), h, cfg.near_order)
            else:
                kbar = float(spec.profile(np.linalg.norm(grid.nodes[i] - grid.nodes[j])))
            A[i, j] = -2.0 * kbar * vol * vol
            A[i, i] += 2.0 * kbar * vol * vol
    ext = exterior_weight(grid, spec, cfg)
    w = ext.values + strip_weight(grid, spec, ext, cfg)
    for i in range(M):
        A[i, i] += 2.0 * w[i] * vol
    if cfg.self_correction:
        A += _self_correction(grid, spec)
    return _finish(grid, spec, cfg, A)


def apply_form(A: StiffnessMatrix, u: NodalFunction, v: NodalFunction) -> float:
    """u^T A v."""
    A.grid.check_same(u.grid)
    A.grid.check_same(v.grid)
    return float(u.values @ A.matrix @ v.values)


def energy_norm_sq(A: StiffnessMatrix, u: NodalFunction) -> float:
    return apply_form(A, u, u)


# ---------------------------------------------------------------------------
# Matrix Market cache
# ---------------------------------------------------------------------------


def _mm_text(A: StiffnessMatrix, checksum: str) -> str:
    buf = io.BytesIO()
    scipy.io.mmwrite(
        buf,
        scipy.sparse.coo_matrix(np.asarray(A.matrix)),
        comment=f" fingerprint: {A.fingerprint}\n checksum: {checksum}",
        field="real",
        precision=17,
        symmetry="symmetric",
    )
    return buf.getvalue().decode()


def _split_header(text: str):
    lines = text.splitlines(keepends=True)
    k = 0
    while k < len(lines) and lines[k].startswith("%"):
        k += 1
    return lines[:k], "".join(lines[k:])


def _header_field(header, name):
    for line in header:
        body = line.lstrip("%").strip()
        if body.startswith(name + ":"):
            return body.split(":", 1)[1].strip()
    return None


def write_matrix_market(path, A: StiffnessMatrix):
    """Symmetric Matrix Market file; comment lines carry the fingerprint and a
    sha256 checksum of the data section."""
    _, body = _split_header(_mm_text(A, ""))
    text = _mm_text(A, hashlib.sha256(body.encode()).hexdigest())
    tmp = Path(f"{path}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def read_fingerprint(path) -> str | None:
    header, _ = _split_header(Path(path).read_text())
    return _header_field(header, "fingerprint")


def read_matrix_market(path, grid: Grid, spec: Kernel, cfg: AssemblyConfig) -> StiffnessMatrix:
    """Load a cached matrix, refusing it unless fingerprint and checksum both match."""
    fp = fingerprint(grid, spec, cfg)
    text = Path(path).read_text()
    header, body = _split_header(text)
    got = _header_field(header, "fingerprint")
    if got != fp:
        raise CacheFingerprintMismatch(f"{path}: fingerprint {got} does not match {fp}")
    if _header_field(header, "checksum") != hashlib.sha256(body.encode()).hexdigest():
        raise CacheFingerprintMismatch(f"{path}: data checksum mismatch (corrupted cache file)")
    mat = scipy.io.mmread(io.StringIO(text))
    mat = np.asarray(mat.todense() if hasattr(mat, "todense") else mat, dtype=float)
    if mat.shape != (grid.M, grid.M):
        raise GridMismatch(f"{path}: matrix shape {mat.shape} does not fit grid with {grid.M} nodes")
    mat.setflags(write=False)
    return StiffnessMatrix(grid, spec, cfg, mat, fp)


def assemble_cached(grid: Grid, spec: Kernel, cfg: AssemblyConfig | None = None, cache_dir=None):
    """Assemble, or load a previous assembly with an equal fingerprint from ``cache_dir``.

    Returns (matrix, hit). A file whose fingerprint line disagrees with its
    name is rejected with CacheFingerprintMismatch rather than silently reused.
    """
    cfg = cfg or AssemblyConfig()
    if cache_dir is None:
        return assemble_stiffness(grid, spec, cfg), False
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    fp = fingerprint(grid, spec, cfg)
    path = cache_dir / f"{fp}.mtx"
    with FileLock(str(path) + ".lock"):
        if path.exists():
            return read_matrix_market(path, grid, spec, cfg), True
        A = assemble_stiffness(grid, spec, cfg)
        write_matrix_market(path, A)
        return A, False
