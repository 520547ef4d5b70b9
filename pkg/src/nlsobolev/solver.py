"""Discrete weak solutions of a(u, phi) = int f(x, u) phi.

The energy is J(u) = 1/2 u^T A u - h^N sum_i F(x_i, u_i) (lumped nonlinear
term, matching the rectangle rule of :func:`lq_norm`). Two solvers:

* Nehari: minimise u^T A u on the L^p unit sphere by normalised
  A-preconditioned descent, then rescale the minimiser onto the Nehari set.
  Pure power nonlinearities only.
* Mountain pass: descend the peak of J along the ray through the current
  direction (peak selection), so the maximum of J along the path 0 -> e is
  nonincreasing by construction.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .assembly import StiffnessMatrix
from .errors import NonConvergence, PathCollapse, TrivialCollapse, ValidationError
from .grid import Grid, NodalFunction, lq_norm

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# nonlinearity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonlinearitySpec:
    """f(x, t) and its primitive F(x, t) = int_0^t f(x, tau) d tau, vectorized in t."""

    f: Callable
    F: Callable
    a1: float | None = None
    a2: float | None = None
    q: float | None = None  # growth |f| <= a1 + a2 |t|^{q-1}
    mu: float | None = None
    r: float | None = None  # mu F <= t f for |t| >= r
    power: float | None = None  # set for f = |t|^{p-2} t
    name: str = "custom"


def pure_power(p: float) -> NonlinearitySpec:
    if not p > 2:
        raise ValidationError("p must be > 2")
    return NonlinearitySpec(
        f=lambda x, t: np.abs(t) ** (p - 2) * t,
        F=lambda x, t: np.abs(t) ** p / p,
        a1=0.0,
        a2=1.0,
        q=p,
        mu=p,
        r=0.0,
        power=p,
        name=f"pure_power(p={p:g})",
    )


@dataclass(frozen=True)
class ARReport:
    passed: bool
    checked: int
    first_violation: tuple | None = None  # (x, t, mu F, t f)


def ar_condition_check(nl: NonlinearitySpec, x, t, mu: float, r: float) -> ARReport:
    """Check 0 < mu F(x, t) <= t f(x, t) on every sample with |t| >= r."""
    if not mu > 2:
        raise ValidationError("mu must be > 2")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) < r):
        raise ValidationError(f"samples must satisfy |t| >= r = {r}")
    muF = mu * np.asarray(nl.F(x, t), dtype=float)
    tf = t * np.asarray(nl.f(x, t), dtype=float)
    # equality cases are exact identities up to rounding
    bad = ~((muF > 0) & (muF <= tf + 1e-12 * np.abs(tf)))
    if np.any(bad):
        i = int(np.argmax(bad))
        xi = x[i] if x.ndim else x
        return ARReport(False, t.size, (xi, float(t.flat[i]), float(muF.flat[i]), float(tf.flat[i])))
    return ARReport(True, t.size)


# ---------------------------------------------------------------------------
# functional
# ---------------------------------------------------------------------------


def _vals(A: StiffnessMatrix, u: NodalFunction) -> np.ndarray:
    A.grid.check_same(u.grid)
    return u.values


def _G(grid: Grid, v: np.ndarray, p: float) -> np.ndarray:
    return grid.cell_volume * np.abs(v) ** (p - 2) * v


def functional_J(A: StiffnessMatrix, u: NodalFunction, p: float) -> float:
    """1/2 u^T A u - (1/p) ||u||_p^p."""
    if not p > 2:
        raise ValidationError("p must be > 2")
    v = _vals(A, u)
    return 0.5 * float(v @ A.matrix @ v) - lq_norm(u, p) ** p / p


def grad_J(A: StiffnessMatrix, u: NodalFunction, p: float) -> NodalFunction:
    """A u - G(u), G(u)_i = h^N |u_i|^{p-2} u_i."""
    if not p > 2:
        raise ValidationError("p must be > 2")
    v = _vals(A, u)
    return u.with_values(A.matrix @ v - _G(u.grid, v, p))


def _J_nl(A, grid, nl, v):
    return 0.5 * float(v @ A.matrix @ v) - grid.cell_volume * float(np.sum(nl.F(grid.nodes, v)))


def _grad_nl(A, grid, nl, v):
    return A.matrix @ v - grid.cell_volume * nl.f(grid.nodes, v)


def _relative_residual(g: np.ndarray, Gu: np.ndarray) -> float:
    ng = float(np.linalg.norm(g))
    nG = float(np.linalg.norm(Gu))
    if nG == 0:
        return 0.0 if ng == 0 else math.inf
    return ng / nG


def residual(A: StiffnessMatrix, u: NodalFunction, p: float) -> float:
    """||grad J(u)|| / ||G(u)||."""
    v = _vals(A, u)
    return _relative_residual(A.matrix @ v - _G(u.grid, v, p), _G(u.grid, v, p))


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolveConfig:
    p: float = 3.0
    method: str = "nehari"  # "nehari" | "mountain_pass"
    grad_tol: float = 1e-8
    max_iters: int = 500
    path_points: int = 21
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    step0: float = 1.0
    max_backtracks: int = 40
    allow_supercritical: bool = False  # probes only

    def __post_init__(self):
        if not self.p > 2:
            raise ValidationError("p must be > 2")
        if self.method not in ("nehari", "mountain_pass"):
            raise ValidationError(f"unknown method {self.method!r}")
        if not self.grad_tol > 0 or self.max_iters < 1:
            raise ValidationError("grad_tol must be > 0 and max_iters >= 1")
        if self.path_points < 3:
            raise ValidationError("path_points must be >= 3")
        if not (0 < self.armijo_c < 1 and 0 < self.backtrack < 1 and self.step0 > 0):
            raise ValidationError("invalid Armijo parameters")


@dataclass(frozen=True, eq=False)
class Solution:
    u: NodalFunction
    energy: float
    residual: float
    nehari_gap: float
    iterations: int
    method: str
    p: float
    history: list = field(default_factory=list, repr=False)
    path_maxima: list = field(default_factory=list, repr=False)
    diagnostics: dict = field(default_factory=dict)

    SUMMARY_HEADER = ("method", "p", "kernel_fingerprint", "energy", "residual", "nehari_gap", "iterations")

    def summary_row(self, kernel_fingerprint: str) -> list[str]:
        return [
            self.method,
            f"{self.p:.16e}",
            kernel_fingerprint,
            f"{self.energy:.16e}",
            f"{self.residual:.16e}",
            f"{self.nehari_gap:.16e}",
            str(self.iterations),
        ]

    def sign_pattern(self) -> str:
        v = self.u.values
        if np.all(v >= 0):
            return "nonnegative"
        if np.all(v <= 0):
            return "nonpositive"
        return "sign-changing"


def _check_p(A: StiffnessMatrix, cfg: SolveConfig):
    if cfg.allow_supercritical:
        return
    from .exponent import Supercritical, estimate_s0, two_star

    rep = estimate_s0(A.spec)
    ts = two_star(rep.s0_hi, A.spec.N) if rep.s0_hi > 0 else None
    if ts is None or isinstance(ts, Supercritical):
        raise ValidationError(f"no finite critical exponent for {A.spec.label()}")
    # the s0 bracket carries a 1e-9 roundoff pad; p = 2* itself must not slip through
    if cfg.p >= ts * (1 - 1e-8):
        raise ValidationError(f"p = {cfg.p} is not below 2*(s0) = {ts:.6g}")


def default_initial(grid: Grid) -> NodalFunction:
    """Distance-to-boundary bump, positive at every interior node."""
    return NodalFunction(grid, grid.d.copy())


def _orient(v: np.ndarray) -> np.ndarray:
    return -v if v.sum() < 0 else v


def _finish(A, grid, p, v, iterations, method, history, path_maxima=None, diagnostics=None):
    v = _orient(v)
    u = NodalFunction(grid, v)
    Gu = _G(grid, v, p)
    Au = A.matrix @ v
    norm_p = float(np.sum(np.abs(v) ** p) * grid.cell_volume)
    return Solution(
        u=u,
        energy=functional_J(A, u, p),
        residual=_relative_residual(Au - Gu, Gu),
        nehari_gap=abs(float(v @ Au) - norm_p) / norm_p,
        iterations=iterations,
        method=method,
        p=p,
        history=history,
        path_maxima=path_maxima or [],
        diagnostics=diagnostics or {},
    )


# ---------------------------------------------------------------------------
# Nehari
# ---------------------------------------------------------------------------


def _Gq(grid: Grid, v: np.ndarray, q: float) -> np.ndarray:
    """h^N |v|^{q-2} v, written so that q in [1, 2) is safe at v = 0."""
    return grid.cell_volume * np.sign(v) * np.abs(v) ** (q - 1)


def _normalize_q(grid, v, q):
    n = float(np.sum(np.abs(v) ** q) * grid.cell_volume) ** (1 / q)
    if not n > 1e-12:
        raise TrivialCollapse(f"iterate L^{q:g} norm {n:.3g} below 1e-12")
    return v / n


@dataclass
class DescentResult:
    w: np.ndarray  # ||w||_q = 1
    lam: float  # w^T A w
    residual: float
    iterations: int
    converged: bool
    trace: list  # (w, lam) per iteration


def _round_slack(value: float) -> float:
    """Rounding allowance for Armijo tests on function values.

    Close to a critical point the predicted decrease drops below the
    rounding error of the value itself; without this slack the line search
    stalls with residuals near sqrt(eps).
    """
    return 16 * np.finfo(float).eps * abs(value)


def constrained_descent(
    A: StiffnessMatrix, grid: Grid, q: float, w0: np.ndarray, cfg: SolveConfig, keep_trace: bool = False
) -> DescentResult:
    """Minimise w^T A w on ||w||_q = 1.

    Each step moves along z = w - lam A^{-1} G_q(w), the A-metric gradient
    of the Rayleigh quotient, and renormalises in L^q. The trial step tau
    starts at ``step0`` (tau = 1 is the nonlinear inverse iteration) and is
    halved until R(w_new) <= R(w) - c tau ||z||_A^2.
    """
    w = _normalize_q(grid, np.asarray(w0, dtype=float), q)
    lam = float(w @ A.matrix @ w)
    trace = []
    res = math.inf
    for it in range(cfg.max_iters + 1):
        Gw = _Gq(grid, w, q)
        res = _relative_residual(A.matrix @ w - lam * Gw, lam * Gw)
        if keep_trace:
            trace.append((w, lam))
        if res <= cfg.grad_tol or it == cfg.max_iters:
            break
        z = w - lam * A.solve(Gw)
        zAz = float(z @ A.matrix @ z)
        tau = cfg.step0
        for _ in range(cfg.max_backtracks):
            cand = _normalize_q(grid, w - tau * z, q)
            lam_c = float(cand @ A.matrix @ cand)
            if lam_c <= lam - cfg.armijo_c * tau * zAz + _round_slack(lam):
                break
            tau *= cfg.backtrack
        else:
            log.debug("descent: line search stalled at iteration %d (res %.3g)", it, res)
            return DescentResult(w, lam, res, it, False, trace)
        w, lam = cand, lam_c
    return DescentResult(w, lam, res, it, res <= cfg.grad_tol, trace)


def nehari_ground_state(
    A: StiffnessMatrix, grid: Grid, p: float | None = None, cfg: SolveConfig | None = None, u0: NodalFunction | None = None
) -> Solution:
    """Minimise u^T A u on ||u||_p = 1 and rescale the minimiser w by lam^{1/(p-2)}.

    The rescaled u = lam^{1/(p-2)} w satisfies A u = G(u) whenever w is a
    constrained critical point, so it lies on the Nehari set.
    """
    cfg = cfg or SolveConfig()
    p = cfg.p if p is None else p
    if cfg.p != p:
        cfg = SolveConfig(**{**cfg.__dict__, "p": p})
    A.grid.check_same(grid)
    _check_p(A, cfg)
    u0 = u0 or default_initial(grid)
    A.grid.check_same(u0.grid)
    d = constrained_descent(A, grid, p, u0.values, cfg, keep_trace=True)
    history = [NodalFunction(grid, lam ** (1 / (p - 2)) * w) for w, lam in d.trace]
    sol = _finish(A, grid, p, d.lam ** (1 / (p - 2)) * d.w, d.iterations, "nehari", history)
    if d.converged:
        return sol
    raise NonConvergence(f"residual {d.residual:.3g} > {cfg.grad_tol} after {d.iterations} iterations", partial=sol)


# ---------------------------------------------------------------------------
# mountain pass
# ---------------------------------------------------------------------------


def find_e(A: StiffnessMatrix, grid: Grid, p: float, u0: NodalFunction, nl: NonlinearitySpec | None = None):
    """Double t from 1 until J(t u0) <= 0; returns (t0 u0, t0)."""
    A.grid.check_same(u0.grid)
    v = np.asarray(u0.values, dtype=float)
    if not np.any(v):
        raise ValidationError("u0 must be nonzero")
    nl = nl or pure_power(p)
    t = 1.0
    while _J_nl(A, grid, nl, t * v) > 0:
        t *= 2.0
        if not math.isfinite(t):
            raise NonConvergence("J(t u0) stays positive")
    return u0.with_values(t * v), t


def _ray_peak(A, grid, nl, v, t_hint=None):
    """(t*, J(t* v)) maximising J along the ray through v."""
    if nl.power is not None:
        p = nl.power
        a = float(v @ A.matrix @ v)
        b = float(np.sum(np.abs(v) ** p) * grid.cell_volume)
        t = (a / b) ** (1 / (p - 2))
        return t, _J_nl(A, grid, nl, t * v)
    t_hi = t_hint or 1.0
    while _J_nl(A, grid, nl, t_hi * v) > 0:
        t_hi *= 2.0
    r = minimize_scalar(lambda t: -_J_nl(A, grid, nl, t * v), bounds=(0.0, t_hi), method="bounded", options={"xatol": 1e-12 * t_hi})
    return float(r.x), -float(r.fun)


def mountain_pass_solve(
    A: StiffnessMatrix,
    grid: Grid,
    p: float | None = None,
    cfg: SolveConfig | None = None,
    u0: NodalFunction | None = None,
    nl: NonlinearitySpec | None = None,
    beta: float | None = None,
) -> Solution:
    """Mountain-pass critical point by peak-selection descent.

    The path is the polygon 0 -> peak -> e_v with e_v on the ray of the
    current direction and J(e_v) <= 0; its maximum is the ray peak
    J(p(v)). Each sweep computes z = A^{-1} grad J(p(v)) and accepts
    v <- p(v) - tau z when the new ray peak satisfies the Armijo decrease
    J(p(v_new)) <= J(p(v)) - c tau <grad J, z>, so the path maximum never
    increases. ``beta`` (default: :func:`estimate_rho_beta`) is the level
    below which the path is declared collapsed.
    """
    cfg = cfg or SolveConfig(method="mountain_pass")
    p = cfg.p if p is None else p
    A.grid.check_same(grid)
    nl = nl or pure_power(p)
    if nl.power is not None:
        _check_p(A, SolveConfig(**{**cfg.__dict__, "p": nl.power}))
    u0 = u0 or default_initial(grid)
    e, t0 = find_e(A, grid, p, u0, nl)
    if beta is None and nl.power is not None:
        beta = estimate_rho_beta(A, grid, nl.power)[1]
    v = np.asarray(u0.values, dtype=float)
    v = v / math.sqrt(float(v @ A.matrix @ v))
    t, peak = _ray_peak(A, grid, nl, v)
    maxima = [peak]
    history = []
    for it in range(1, cfg.max_iters + 1):
        u = t * v
        g = _grad_nl(A, grid, nl, u)
        Gu = grid.cell_volume * nl.f(grid.nodes, u)
        res = _relative_residual(g, Gu)
        history.append(NodalFunction(grid, u.copy()))
        if res <= cfg.grad_tol:
            break
        z = A.solve(g)
        slope = float(g @ z)
        tau = cfg.step0
        for _ in range(cfg.max_backtracks):
            cand = u - tau * z
            cand = cand / math.sqrt(float(cand @ A.matrix @ cand))
            t_c, peak_c = _ray_peak(A, grid, nl, cand, t)
            # the cap at peak keeps the recorded path maxima exactly nonincreasing
            if peak_c <= min(peak, peak - cfg.armijo_c * tau * slope + _round_slack(peak)):
                break
            tau *= cfg.backtrack
        else:
            raise NonConvergence(
                f"mountain pass line search stalled with residual {res:.3g}",
                partial=_finish(A, grid, nl.power or p, u, it, "mountain_pass", history, maxima),
            )
        v, t, peak = cand, t_c, peak_c
        maxima.append(peak)
        if beta is not None and peak < beta:
            raise PathCollapse(f"path maximum {peak:.6g} fell below beta = {beta:.6g}")
    else:
        sol = _finish(A, grid, nl.power or p, t * v, cfg.max_iters, "mountain_pass", history, maxima)
        raise NonConvergence(f"residual {res:.3g} > {cfg.grad_tol} after {cfg.max_iters} sweeps", partial=sol)
    diag = {"t0": t0, "e_norm": math.sqrt(float(e.values @ A.matrix @ e.values)), "beta": beta}
    if nl.power is None:
        sol = _finish(A, grid, p, t * v, it - 1, "mountain_pass", history, maxima, diag)
        # general nonlinearity: report J and residual for that nonlinearity
        val = _orient(t * v)
        g = _grad_nl(A, grid, nl, val)
        return Solution(
            u=sol.u,
            energy=_J_nl(A, grid, nl, val),
            residual=_relative_residual(g, grid.cell_volume * nl.f(grid.nodes, val)),
            nehari_gap=abs(float(val @ A.matrix @ val - grid.cell_volume * val @ nl.f(grid.nodes, val)))
            / abs(float(grid.cell_volume * val @ nl.f(grid.nodes, val))),
            iterations=it - 1,
            method="mountain_pass",
            p=p,
            history=history,
            path_maxima=maxima,
            diagnostics=diag,
        )
    return _finish(A, grid, nl.power, t * v, it - 1, "mountain_pass", history, maxima, diag)


def solve(A: StiffnessMatrix, grid: Grid, cfg: SolveConfig, u0: NodalFunction | None = None) -> Solution:
    if cfg.method == "nehari":
        return nehari_ground_state(A, grid, cfg.p, cfg, u0)
    return mountain_pass_solve(A, grid, cfg.p, cfg, u0)


# ---------------------------------------------------------------------------
# mountain-pass geometry and Palais-Smale monitor
# ---------------------------------------------------------------------------


def estimate_rho_beta(A: StiffnessMatrix, grid: Grid, p: float) -> tuple[float, float]:
    """rho = (2 C_p^p)^{-1/(p-2)}, beta = rho^2 / 4 with C_p = lambda_p^{-1/2}."""
    from .probe import rayleigh_lambda_q

    lam = rayleigh_lambda_q(A, grid, p)
    Cp = lam**-0.5
    rho = (2 * Cp**p) ** (-1 / (p - 2))
    return rho, rho * rho / 4


@dataclass(frozen=True)
class PSRow:
    J: float
    residual: float  # ||grad J|| / ||G(u)||
    dual_residual: float  # sqrt(g^T A^{-1} g), the X0-dual norm of J'(u)
    norm: float  # sqrt(u^T A u)
    bound_ok: bool


def ps_sequence_monitor(iterates, A: StiffnessMatrix, p: float, slack: float = 1e-8) -> list[PSRow]:
    """Per iterate: J, residual, ||u||_{X0}, and (p/2 - 1)||u||^2 <= p J + ||J'(u)||_* ||u|| + slack."""
    rows = []
    for u in iterates:
        v = _vals(A, u)
        if not np.any(v):
            rows.append(PSRow(0.0, 0.0, 0.0, 0.0, True))
            continue
        Au = A.matrix @ v
        Gu = _G(u.grid, v, p)
        g = Au - Gu
        nrm = math.sqrt(float(v @ Au))
        dual = math.sqrt(max(float(g @ A.solve(g)), 0.0))
        J = functional_J(A, u, p)
        lhs = (p / 2 - 1) * nrm * nrm
        rhs = p * J + dual * nrm
        ok = lhs <= rhs + slack * max(1.0, abs(lhs))
        rows.append(PSRow(J, _relative_residual(g, Gu), dual, nrm, ok))
    return rows


def solution_csv(sol: Solution) -> str:
    return sol.u.to_csv()


def summary_csv(sol: Solution, kernel_fingerprint: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(Solution.SUMMARY_HEADER)
    w.writerow(sol.summary_row(kernel_fingerprint))
    return buf.getvalue()
