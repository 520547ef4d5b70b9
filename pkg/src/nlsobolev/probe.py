"""Embedding constants, cube-projection compactness check, concentration trend.

Everything reported here is a finite-dimensional quantity at a given
resolution. Refinement trends are recorded, never promoted to statements
about the continuum.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .assembly import AssemblyConfig, StiffnessMatrix, assemble_stiffness, fingerprint
from .errors import NonConvergence, RhoNotMultipleOfH, ValidationError
from .grid import Grid, NodalFunction, lq_norm, make_domain
from .kernels import Kernel, eval_kernel
from .solver import SolveConfig, constrained_descent

log = logging.getLogger(__name__)

RAYLEIGH_CFG = SolveConfig(p=3.0, grad_tol=1e-10, max_iters=2000)


def rayleigh_lambda_q(
    A: StiffnessMatrix, grid: Grid, q: float, restarts: int = 5, seed: int = 0, cfg: SolveConfig | None = None
) -> float:
    """lambda_q = min u^T A u over ||u||_q = 1.

    One descent from the distance-to-boundary bump plus ``restarts`` from
    random nonnegative starts (seeds seed, seed+1, ...; logged). The smallest value is
    returned; for q > 2 it is an upper bound on the discrete infimum.
    """
    return rayleigh_details(A, grid, q, restarts, seed, cfg)[0]


def rayleigh_details(A, grid, q, restarts=5, seed=0, cfg=None):
    """(lambda_q, minimiser, per-start values)."""
    if not q >= 1:
        raise ValidationError("q must be >= 1")
    A.grid.check_same(grid)
    cfg = cfg or RAYLEIGH_CFG
    starts = [("bump", grid.d.copy())]
    for k in range(restarts):
        rng = np.random.default_rng(seed + k)
        # |N(0, 1)|: A has nonpositive off-diagonals, so |w| never raises the
        # quotient and sign-changing starts only linger near nodal saddles
        starts.append((f"seed={seed + k}", np.abs(rng.standard_normal(grid.M))))
    best = None
    values = []
    for tag, w0 in starts:
        res = constrained_descent(A, grid, q, w0, cfg)
        log.info("rayleigh q=%g start %s: lambda=%.12g residual=%.3g", q, tag, res.lam, res.residual)
        values.append((tag, res.lam, res.residual))
        if res.converged and (best is None or res.lam < best.lam):
            best = res
    if best is None:
        raise NonConvergence(f"no start converged for q = {q}", partial=values)
    return best.lam, NodalFunction(grid, best.w), values


@dataclass
class EmbeddingReport:
    q_values: list
    resolutions: list
    lam: dict  # (q, resolution) -> lambda_q
    kernel_fingerprint: str
    volumes: dict  # resolution -> discrete |Omega|
    trends: dict = field(default_factory=dict)  # q -> "stable" | "growing" | "decreasing" | "varying"

    def C(self, q, res) -> float:
        return self.lam[(q, res)] ** -0.5

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "resolution", "lambda_q", "C_q", "trend"])
        for q in self.q_values:
            for r in self.resolutions:
                w.writerow([f"{q:.16e}", r, f"{self.lam[(q, r)]:.16e}", f"{self.C(q, r):.16e}", self.trends.get(q, "")])
        return buf.getvalue()

    def plot_data(self) -> str:
        """Two columns q, C_q at the finest resolution."""
        r = self.resolutions[-1]
        return "".join(f"{q:.16e} {self.C(q, r):.16e}\n" for q in self.q_values)


STABLE_SPREAD = 0.05


def _trend(cs):
    cs = np.asarray(cs)
    if cs.max() / cs.min() - 1 <= STABLE_SPREAD:
        return "stable"
    if np.all(np.diff(cs) > 0):
        return "growing"
    if np.all(np.diff(cs) < 0):
        return "decreasing"
    return "varying"


def embedding_sweep(
    spec: Kernel,
    domain: tuple,
    resolutions,
    q_list,
    cfg: AssemblyConfig | None = None,
    seed: int = 0,
    assembler=assemble_stiffness,
) -> EmbeddingReport:
    """lambda_q and C_q = lambda_q^{-1/2} on every (q, resolution) cell.

    ``domain`` is (shape, size). ``assembler`` lets callers plug in a cache.
    """
    resolutions = list(resolutions)
    if sorted(resolutions) != resolutions:
        raise ValidationError("resolutions must be increasing")
    q_list = list(q_list)
    shape, size = domain
    lam, vols = {}, {}
    fp = ""
    for res in resolutions:
        grid = make_domain(shape, size, res)
        A = assembler(grid, spec, cfg or AssemblyConfig())
        fp = fingerprint(grid, spec, cfg or AssemblyConfig()) if not fp else fp
        vols[res] = grid.discrete_volume
        for q in q_list:
            lam[(q, res)] = rayleigh_lambda_q(A, grid, q, seed=seed)
    rep = EmbeddingReport(q_list, resolutions, lam, fp, vols)
    for q in q_list:
        rep.trends[q] = _trend([rep.C(q, r) for r in resolutions])
    return rep


# ---------------------------------------------------------------------------
# compactness
# ---------------------------------------------------------------------------


@dataclass
class CompactnessDiag:
    rho: float
    eta: float  # largest lhs / bound ratio observed
    lhs: list  # ||f - P f||^2_{L^2}
    bound: list  # ||f||^2_{X0} / (rho^N K(2 rho))
    passed: list

    @property
    def slack(self) -> list:
        return [b / l if l > 0 else math.inf for l, b in zip(self.lhs, self.bound)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample", "lhs", "bound", "slack", "pass"])
        for i, (l, b, s, p) in enumerate(zip(self.lhs, self.bound, self.slack, self.passed)):
            w.writerow([i, f"{l:.16e}", f"{b:.16e}", f"{s:.16e}", int(p)])
        return buf.getvalue()


def _cube_size(grid: Grid, rho: float) -> int:
    m = rho / grid.h
    k = int(round(m))
    if k < 1 or abs(m - k) > 1e-9 * max(1.0, m):
        raise RhoNotMultipleOfH(f"rho = {rho} is not a positive multiple of h = {grid.h}")
    return k


def lattice_field(u: NodalFunction) -> np.ndarray:
    """u on the full lattice (shape (resolution,)*N), zero at non-interior nodes."""
    grid = u.grid
    full = np.zeros((grid.resolution,) * grid.N)
    full[tuple(grid.index.T)] = u.values
    return full


def cube_average(field: np.ndarray, m: int) -> np.ndarray:
    """Replace every block of m^N lattice cells by its average.

    Blocks are anchored at lattice index 0; a last block that would stick out
    of the lattice is clipped to it. Exterior lattice zeros are part of the
    averages. Constant blocks are returned unchanged (fsum(n c) / n need not
    round back to c), so applying the map twice changes nothing.
    """
    n = field.shape[0]
    N = field.ndim
    nb = -(-n // m)
    out = np.empty_like(field, dtype=float)
    for blk in np.ndindex(*(nb,) * N):
        sl = tuple(slice(b * m, min((b + 1) * m, n)) for b in blk)
        vals = field[sl].ravel()
        out[sl] = vals[0] if np.all(vals == vals[0]) else math.fsum(vals) / vals.size
    return out


def cube_projection(u: NodalFunction, m: int) -> np.ndarray:
    """P f on the full lattice; exterior nodes carry 0 and enter the averages."""
    return cube_average(lattice_field(u), m)


def project(u: NodalFunction, m: int) -> NodalFunction:
    """P f restricted to the interior nodes."""
    full = cube_projection(u, m)
    return u.with_values(full[tuple(u.grid.index.T)])


def compactness_diagnostic(A: StiffnessMatrix, grid: Grid, spec: Kernel, rho: float, test_fns) -> CompactnessDiag:
    """Check ||f - P f||^2_{L^2} <= ||f||^2_{X0} / (rho^N K(2 rho)) for each f."""
    A.grid.check_same(grid)
    m = _cube_size(grid, rho)
    k2 = float(eval_kernel(spec, 2 * rho))
    lhs, bound, passed = [], [], []
    for f in test_fns:
        grid.check_same(f.grid)
        diff = f.values - project(f, m).values
        l = float(np.sum(diff * diff) * grid.cell_volume)
        b = float(f.values @ A.matrix @ f.values) / (rho**grid.N * k2)
        lhs.append(l)
        bound.append(b)
        passed.append(l <= b)
    eta = max((l / b for l, b in zip(lhs, bound) if b > 0), default=0.0)
    return CompactnessDiag(rho, eta, lhs, bound, passed)


def smooth_bump(grid: Grid, center, width: float) -> NodalFunction:
    """exp(-1 / (1 - |x - c|^2 / w^2)) inside the ball, 0 outside."""
    r2 = np.sum((grid.nodes - np.asarray(center)) ** 2, axis=1) / width**2
    vals = np.zeros(grid.M)
    inside = r2 < 1
    vals[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return NodalFunction(grid, vals)


def random_bumps(grid: Grid, count: int, seed: int = 0) -> list[NodalFunction]:
    """Smooth bumps with random centre, width and amplitude, supported in Omega."""
    rng = np.random.default_rng(seed)
    out = []
    a = grid.half_width
    for k in range(count):
        width = rng.uniform(0.15, 0.45) * a
        c = rng.uniform(-(a - width), a - width, size=grid.N) if grid.shape.value == "square" else _disk_center(rng, a - width, grid.N)
        amp = rng.uniform(0.5, 2.0)
        log.info("bump %d: seed=%d centre=%s width=%.6g amp=%.6g", k, seed, c, width, amp)
        out.append(amp * smooth_bump(grid, c, width))
    return out


def _disk_center(rng, radius, N):
    while True:
        c = rng.uniform(-radius, radius, size=N)
        if np.linalg.norm(c) <= radius:
            return c


# ---------------------------------------------------------------------------
# concentration
# ---------------------------------------------------------------------------


@dataclass
class ConcentrationTable:
    q: float
    widths: list
    ratios: list  # ||u||_q / sqrt(u^T A u)
    trend: str

    def plot_data(self) -> str:
        return "".join(f"{w:.16e} {r:.16e}\n" for w, r in zip(self.widths, self.ratios))


def concentration_probe(A_builder, spec: Kernel, q: float, scales) -> ConcentrationTable:
    """||u_w||_q / ||u_w||_{X0} for centred bumps of shrinking width w.

    ``A_builder(spec)`` returns the stiffness matrix to use (its grid fixes
    the resolution). The trend is reported as "increasing", "decreasing" or
    "mixed" in the order of ``scales``.
    """
    A = A_builder(spec)
    grid = A.grid
    ratios = []
    for w in scales:
        u = smooth_bump(grid, np.zeros(grid.N), w)
        if not np.any(u.values):
            raise ValidationError(f"bump of width {w} misses every interior node")
        ratios.append(lq_norm(u, q) / math.sqrt(float(u.values @ A.matrix @ u.values)))
    d = np.diff(ratios)
    trend = "increasing" if np.all(d > 0) else "decreasing" if np.all(d < 0) else "mixed"
    return ConcentrationTable(q, list(scales), ratios, trend)
