"""Critical order s0, the l_inf class and the critical exponent.

Everything here works from tail tables T(r) on log-spaced radii in
[r_min, r_max] (estimate_s0, estimate_l_infinity) or from the profile K(r)
directly (bracket_from_asymptotics, find_blowup_radii).

The s0 bracket is obtained in two regimes. If the tail derivative
r|T'(r)| is fitted by c r^{-2s} (log 1/r)^gamma to within ``RV_RESIDUAL`` in
log units over the two smallest decades, the tail is treated as regularly
varying and the bracket is the fitted index widened by the fit residual.
Otherwise the tail oscillates and the bracket is the range of secant
exponents log(T(r)/T(r_max)) / (2 log(r_max/r)) over the smallest decade.
Raw local slopes are always stored on the report.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarse, Inconclusive, NotFound, ValidationError
from .kernels import R_FLOOR, Kernel, eval_kernel, tail

RV_RESIDUAL = 0.02
L_INF_FACTOR = 4.0


class Supercritical(enum.Enum):
    """2 s0 >= N: the critical exponent is undefined."""

    FLAG = "Supercritical"

    def __str__(self):
        return self.value


SUPERCRITICAL = Supercritical.FLAG


@dataclass(frozen=True)
class LInfClass:
    kind: str  # "Zero" | "FinitePositive" | "Infinite" | "Inconclusive"
    value_lo: float | None = None
    value_hi: float | None = None

    def __str__(self):
        if self.kind == "FinitePositive":
            return f"FinitePositive({self.value_lo:.6g},{self.value_hi:.6g})"
        return self.kind


@dataclass(frozen=True)
class Window:
    r_min: float
    points: int
    s0_lo: float
    s0_hi: float
    regime: str  # "regular" | "oscillatory"
    fit_residual: float


@dataclass
class ExponentReport:
    spec: Kernel
    s0_lo: float
    s0_hi: float
    r_min: float
    r_max: float
    points: int
    regime: str
    r_grid: np.ndarray
    slopes: np.ndarray  # dlog T / dlog r
    windows: list[Window] = field(default_factory=list)
    l_inf_class: LInfClass | None = None
    two_star: float | Supercritical | None = None

    CSV_HEADER = ("family", "params", "s0_lo", "s0_hi", "l_inf_class", "two_star", "r_min", "points")

    def csv_row(self) -> list[str]:
        params = ";".join(f"{k}={v}" for k, v in self.spec.params().items())
        ts = self.two_star
        ts = "" if ts is None else (str(ts) if isinstance(ts, Supercritical) else f"{ts:.16e}")
        return [
            self.spec.family,
            params,
            f"{self.s0_lo:.16e}",
            f"{self.s0_hi:.16e}",
            "" if self.l_inf_class is None else str(self.l_inf_class),
            ts,
            f"{self.r_min:.16e}",
            str(self.points),
        ]


def _clamp(x):
    return min(max(float(x), 0.0), 1.0)


def _window(spec: Kernel, r_min: float, r_max: float, points: int):
    r = np.geomspace(r_max, r_min, points)
    L = -np.log(r)
    lt = np.log(tail(spec, r))
    two_s = np.gradient(lt, L)  # -dlog T/dlog r

    # regular variation test on log(r |T'(r)|) = log T + log(2 s_loc)
    fit_mask = r <= 100 * r_min
    resid = math.inf
    s_fit = math.nan
    sens = math.inf
    if fit_mask.sum() >= 4 and np.all(two_s[fit_mask] > 0):
        x = L[fit_mask]
        y = lt[fit_mask] + np.log(two_s[fit_mask])
        A = np.column_stack([np.ones_like(x), 2 * x, np.log1p(x)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = float(np.max(np.abs(A @ coef - y)))
        s_fit = float(coef[1])
        # worst-case change of the slope coefficient under a sup-norm data error of 1
        sens = float(np.abs(np.linalg.pinv(A)[1]).sum())

    dec = r <= 10 * r_min * (1 + 1e-12)
    if resid <= RV_RESIDUAL:
        err = resid * sens + 1e-9  # roundoff floor
        lo, hi, regime = s_fit - err, s_fit + err, "regular"
    else:
        sec = (lt[dec] - lt[0]) / (2 * (L[dec] - L[0]))
        lo, hi, regime = float(sec.min()), float(sec.max()), "oscillatory"
    win = Window(r_min, points, _clamp(lo), _clamp(hi), regime, resid)
    return win, r, -two_s


def estimate_s0(spec: Kernel, r_min: float = 1e-6, r_max: float = 1.0, points: int = 241) -> ExponentReport:
    """Bracket [s0_lo, s0_hi] for the critical order of ``spec``."""
    if not (0 < r_min < r_max <= 1):
        raise ValidationError("need 0 < r_min < r_max <= 1")
    if r_min < R_FLOOR:
        raise ValidationError(f"r_min below the floating-point floor {R_FLOOR}")
    if points < 16:
        raise ValidationError("points must be >= 16")
    if 10 * r_min > r_max:
        raise ValidationError("the sweep must span at least one decade")

    win, r, slopes = _window(spec, r_min, r_max, points)
    windows = [win]
    if win.s0_hi - win.s0_lo > 0.5:
        r2 = max(r_min / 2, R_FLOOR)
        win2, r, slopes = _window(spec, r2, r_max, 2 * points)
        windows.append(win2)
        if win2.s0_hi - win2.s0_lo > 0.5 and win2.s0_hi - win2.s0_lo >= win.s0_hi - win.s0_lo:
            raise GridTooCoarse(f"s0 bracket did not shrink under refinement: {windows}")
        win = win2
    return ExponentReport(
        spec=spec,
        s0_lo=win.s0_lo,
        s0_hi=win.s0_hi,
        r_min=win.r_min,
        r_max=r_max,
        points=win.points,
        regime=win.regime,
        r_grid=r,
        slopes=slopes,
        windows=windows,
    )


def estimate_l_infinity(spec: Kernel, s0: float, r_min: float = 1e-6) -> LInfClass:
    """Classify liminf_{r->0} r^{2 s0} T(r).

    g(r) = r^{2 s0} T(r) is sampled on dyadic radii from 1 down to r_min and
    reduced to per-decade minima. A total change of the minima by the factor
    ``L_INF_FACTOR`` with a consistent direction decides Zero or Infinite; a
    smaller total change is FinitePositive with the min/max of g over the
    last decade. A direction that flips between decades is Inconclusive.
    """
    if not (0 < s0 <= 1):
        raise ValidationError("s0 must lie in (0, 1]")
    if not (R_FLOOR <= r_min < 1e-2):
        raise ValidationError("r_min must lie in [1e-8, 1e-2)")
    n = int(math.floor(math.log2(1 / r_min)))
    r = 2.0 ** -np.arange(0, n + 1)
    g = r ** (2 * s0) * tail(spec, r)
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise Inconclusive("g(r) not finite and positive on the sweep", data=(r, g))
    decade = np.floor(np.log10(1 / r) + 1e-12).astype(int)
    mins = np.array([g[decade == d].min() for d in np.unique(decade)])
    ratio = mins[-1] / mins[0]
    steps = np.diff(np.log(mins))
    tol = 0.05
    data = {"radii": r, "g": g, "decade_minima": mins}
    if ratio <= 1 / L_INF_FACTOR:
        if np.all(steps <= tol):
            return LInfClass("Zero")
        raise Inconclusive("running minimum decays overall but rises between decades", data=data)
    if ratio >= L_INF_FACTOR:
        if np.all(steps >= -tol):
            return LInfClass("Infinite")
        raise Inconclusive("running minimum grows overall but falls between decades", data=data)
    last = g[decade == decade[-1]]
    if decade[-1] > 0:
        last = g[decade >= decade[-1] - 1][-max(len(last), 4):]
    return LInfClass("FinitePositive", float(last.min()), float(last.max()))


def two_star(s0: float, N: int) -> float | Supercritical:
    """2N / (N - 2 s0), or SUPERCRITICAL when 2 s0 >= N."""
    if not (0 < s0 <= 1):
        raise ValidationError("s0 must lie in (0, 1]")
    if N < 2:
        raise ValidationError("N must be >= 2")
    if 2 * s0 >= N:
        return SUPERCRITICAL
    return 2 * N / (N - 2 * s0)


def full_report(spec: Kernel, r_min: float = 1e-6, r_max: float = 1.0, points: int = 241) -> ExponentReport:
    """estimate_s0 plus the l_inf class and 2*(s0_hi)."""
    rep = estimate_s0(spec, r_min, r_max, points)
    if rep.s0_hi > 0:
        try:
            rep.l_inf_class = estimate_l_infinity(spec, rep.s0_hi, max(r_min, R_FLOOR))
        except Inconclusive:
            rep.l_inf_class = LInfClass("Inconclusive")
        rep.two_star = two_star(rep.s0_hi, spec.N)
    return rep


def _psi(spec: Kernel, r):
    """log(K(r) r^N)."""
    return np.log(eval_kernel(spec, r)) + spec.N * np.log(r)


def bracket_from_asymptotics(spec: Kernel, r_min: float = 1e-6, step: float = 0.0025) -> tuple[float, float]:
    """(s1, s2) from the behaviour of K(r) r^{N+2s} as r -> 0.

    s1 is the largest grid value of s whose running minimum of K r^{N+2s}
    stays bounded below, s2 the smallest with a bounded running maximum.
    Log corrections (powers of log 1/r) are removed first by a least-squares
    fit when the profile admits one, since they are invisible to any finite
    sweep and would otherwise bias both ends.
    """
    if not (R_FLOOR <= r_min < 1e-2):
        raise ValidationError("r_min must lie in [1e-8, 1e-2)")
    r = np.geomspace(1.0, r_min, 60 * int(round(math.log10(1 / r_min))) + 1)
    L = -np.log(r)
    psi = _psi(spec, r)
    if not np.all(np.isfinite(psi)):
        raise Inconclusive("profile not finite on the sweep", data=(r, psi))

    near = r <= 100 * r_min
    x = L[near]
    A = np.column_stack([np.ones_like(x), 2 * x, np.log1p(x)])
    coef, *_ = np.linalg.lstsq(A, psi[near], rcond=None)
    if np.max(np.abs(A @ coef - psi[near])) <= RV_RESIDUAL:
        psi = psi - coef[2] * np.log1p(L)

    grid = np.arange(0.0, 1.0 + step / 2, step)
    window = r <= 100 * r_min
    span = L[window][-1] - L[window][0]
    tol = step  # allowed drift of log(K r^{N+2s}) per unit log(1/r)
    lo_ok, hi_ok = [], []
    for s in grid:
        phi = psi - 2 * s * L
        run_min = np.minimum.accumulate(phi)
        run_max = np.maximum.accumulate(phi)
        w = np.nonzero(window)[0]
        drop = (run_min[w[0]] - run_min[w[-1]]) / span
        rise = (run_max[w[-1]] - run_max[w[0]]) / span
        lo_ok.append(drop <= tol)
        hi_ok.append(rise <= tol)
    lo_ok = np.array(lo_ok)
    hi_ok = np.array(hi_ok)
    if not lo_ok.any() or not hi_ok.any():
        raise Inconclusive("no s on the grid with a bounded envelope", data=(r, psi))
    s1 = float(grid[np.nonzero(lo_ok)[0].max()])
    s2 = float(grid[np.nonzero(hi_ok)[0].min()])
    return s1, s2


def find_blowup_radii(spec: Kernel, s: float, count: int, r_start: float = 0.5) -> list[float]:
    """Radii r_1 > r_2 > ... with r_k^{N+2s} K(r_k) increasing and > k * (value at r_1).

    Greedy scan downward over a fine log grid (plus the kernel breakpoints)
    to the floor 1e-8. Raises NotFound carrying the partial list when fewer
    than ``count`` radii exist.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    if not (0 <= s < 1):
        raise ValidationError("s must lie in [0, 1)")
    r = np.geomspace(r_start, R_FLOOR, 2000)
    bp = spec.breakpoints()
    bp = bp[(bp > R_FLOOR) & (bp < r_start)]
    r = np.unique(np.concatenate([r, bp, bp * (1 + 1e-9)]))[::-1]
    val = eval_kernel(spec, r) * r ** (spec.N + 2 * s)
    found = [float(r[0])]
    v0 = val[0]
    last = v0
    for ri, vi in zip(r[1:], val[1:]):
        k = len(found) + 1
        if vi > last and vi > k * v0:
            found.append(float(ri))
            last = vi
            if len(found) == count:
                return found
    raise NotFound(f"only {len(found)} of {count} radii above r = {R_FLOOR}", found=found)
