"""Radial kernel families and their tail / moment integrals.

Every kernel is a radial profile ``K(r)``, ``r = |x|``, so ``K(x) = K(-x)``
holds by construction. Integrals over shells are reduced to one dimension::

    tail(r)          = |S^{N-1}| * int_r^inf  K(t) t^(N-1) dt
    second_moment(d) = |S^{N-1}| * int_0^d    K(t) t^(N+1) dt

All families except the log-corrected one are piecewise power laws, for
which these integrals are evaluated in closed form piece by piece. The
log-corrected family is integrated in the variable ``t = -log r`` with a
composite Gauss-Legendre rule that carries its own error check.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .errors import (
    DivergentTail,
    LacunaryOverflow,
    NonMonotoneKernel,
    NonPositiveRadius,
    OutOfTabulatedRange,
    QuadratureNonConvergence,
    ValidationError,
)

R_FLOOR = 1e-8
R_FAR = 1e3


def sphere_measure(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1} in R^N."""
    return 2.0 * math.pi ** (N / 2) / gamma(N / 2)


def _power_integral(coef, e, a, b):
    """int_a^b coef * t^e dt, vectorized over ``a``; ``b`` scalar (may be inf), ``a`` may hold 0."""
    a = np.asarray(a, dtype=float)
    k = e + 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if math.isinf(b):
            if k >= 0:
                return np.full(a.shape, np.inf)
            return coef * a**k / (-k)
        if k > 0:
            # b^k - a^k, fine also for a == 0
            return coef * (b**k - a**k) / k
        if k == 0:
            return np.where(a > 0, coef * np.log(b / a), np.inf)
        out = coef * a**k * np.expm1(k * np.log(b / a)) / k
        return np.where(a > 0, out, np.inf)


@dataclass(frozen=True, kw_only=True)
class Kernel:
    """Base class of radial kernels. ``scale`` multiplies the whole profile."""

    N: int = 2
    scale: float = 1.0

    family = "abstract"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValidationError(f"dimension N must be an integer >= 2, got {self.N}")
        if not self.scale > 0:
            raise ValidationError("kernel scale must be positive")

    # subclasses provide _shape and _radial_integral (both without ``scale``)
    def _shape(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _radial_integral(self, power: float, a: np.ndarray, b: float) -> np.ndarray:
        raise NotImplementedError

    def breakpoints(self) -> np.ndarray:
        """Radii where the profile or its derivative jumps."""
        return np.array([1.0])

    def profile(self, r):
        """Profile value, with the internal extrapolation rules (no range checks)."""
        return self.scale * self._shape(np.asarray(r, dtype=float))

    def radial_integral(self, power, a, b=math.inf):
        """``scale * int_a^b K(t) t^power dt``; vectorized over ``a``."""
        return self.scale * self._radial_integral(power, np.asarray(a, dtype=float), float(b))

    def scaled(self, c: float) -> "Kernel":
        return dataclasses.replace(self, scale=self.scale * c)

    def params(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            if f.name in ("N", "scale") or not f.compare:
                continue
            out[f.name] = getattr(self, f.name)
        return out

    def to_config(self) -> dict:
        """Flat, JSON-friendly description (round-trips through :func:`kernel_from_config`)."""
        cfg = {"family": self.family, "N": self.N, "scale": self.scale}
        for k, v in self.params().items():
            if k == "samples":
                cfg[k] = [[float(x), float(y)] for x, y in v]
            elif k == "terms":
                cfg[k] = [[float(c), kern.to_config()] for c, kern in v]
            else:
                cfg[k] = float(v)
        return cfg

    def label(self) -> str:
        parts = []
        for k, v in self.params().items():
            if k in ("samples", "terms"):
                parts.append(f"{k}={len(v)}")
            else:
                parts.append(f"{k}={v:g}")
        if self.scale != 1.0:
            parts.append(f"scale={self.scale:g}")
        return f"{self.family}({', '.join(parts)}; N={self.N})"


class _PiecewisePower(Kernel):
    """Mixin for profiles of the form coef_k * r^expo_k on [lo_k, hi_k)."""

    def _pieces(self):
        """Return arrays (lo, hi, coef, expo) sorted by ascending ``lo``; lo[0] == 0, hi[-1] == inf."""
        raise NotImplementedError

    def _shape(self, r):
        lo, hi, coef, expo = self._pieces()
        r = np.asarray(r, dtype=float)
        idx = np.clip(np.searchsorted(lo, r, side="right") - 1, 0, len(lo) - 1)
        with np.errstate(over="ignore"):
            return coef[idx] * r ** expo[idx]

    def _radial_integral(self, power, a, b):
        lo, hi, coef, expo = self._pieces()
        a = np.asarray(a, dtype=float)
        if math.isinf(b):
            return self._suffix_integral(power, a)
        total = np.zeros(a.shape)
        for k in range(len(lo)):
            left = np.maximum(a, lo[k])
            right = min(b, hi[k])
            active = left < right
            if not np.any(active):
                continue
            piece = _power_integral(coef[k], expo[k] + power, np.where(active, left, right), right)
            total = total + np.where(active, piece, 0.0)
        return total

    def _suffix_integral(self, power, a):
        lo, hi, coef, expo = self._pieces()
        full = np.array(
            [
                float(_power_integral(coef[k], expo[k] + power, np.array(lo[k]), hi[k]))
                if lo[k] > 0 or expo[k] + power > -1
                else math.inf
                for k in range(len(lo))
            ]
        )
        # suffix[k] = sum of full pieces strictly above piece k
        suffix = np.concatenate([np.cumsum(full[::-1])[::-1][1:], [0.0]])
        idx = np.clip(np.searchsorted(lo, a, side="right") - 1, 0, len(lo) - 1)
        out = np.empty(a.shape)
        for k in np.unique(idx):
            sel = idx == k
            out[sel] = _power_integral(coef[k], expo[k] + power, a[sel], hi[k]) + suffix[k]
        return out


@dataclass(frozen=True, kw_only=True)
class Fractional(_PiecewisePower):
    """K(r) = r^-(N+2s)."""

    s: float
    family = "fractional"

    def __post_init__(self):
        super().__post_init__()
        if not self.s > 0:
            raise ValidationError("fractional order s must be positive")

    def breakpoints(self):
        return np.array([1.0])

    def _pieces(self):
        return (np.array([0.0]), np.array([math.inf]), np.array([1.0]), np.array([-(self.N + 2 * self.s)]))


@dataclass(frozen=True, kw_only=True)
class Lacunary(_PiecewisePower):
    """Piecewise-constant kernel with super-geometric breakpoints a_n = a0^(b^n), b = (N+2s)/N.

    ``K = a_n^-(N+2s)`` on ``[a_{n+1}, a_n)`` (n >= 1), ``r^-N`` on ``[a_1, 1)``
    and ``r^-(N+2s)`` on ``[1, inf)``.
    """

    s: float
    a0: float
    family = "lacunary"

    def __post_init__(self):
        super().__post_init__()
        if not 0 < self.s < 1:
            raise ValidationError("lacunary order s must lie in (0, 1)")
        if not 0 < self.a0 < 1:
            raise ValidationError("lacunary seed a0 must lie in (0, 1)")

    @property
    def b(self) -> float:
        return (self.N + 2 * self.s) / self.N

    def a(self, n: int) -> float:
        return self.a0 ** (self.b**n)

    def breakpoints(self):
        lo = self._pieces()[0]
        return lo[1:]

    def _pieces(self):
        return _lacunary_pieces(self.N, self.s, self.a0)


@lru_cache(maxsize=64)
def _lacunary_pieces(N, s, a0):
    b = (N + 2 * s) / N
    a = lambda n: a0 ** (b**n)  # noqa: E731
    e = -(N + 2 * s)
    # stop where a_n^-(N+2s) would approach overflow; far below any radius we evaluate
    floor = 10.0 ** (-300.0 / (N + 2 * s))
    lo, coef, expo = [1.0, a(1)], [1.0, 1.0], [e, -float(N)]
    n = 1
    while a(n + 1) > floor:
        lo.append(a(n + 1))
        coef.append(a(n) ** e)
        expo.append(0.0)
        n += 1
    # bottom piece [0, a_{n}): keeps the plateau pattern going
    lo.append(0.0)
    coef.append(a(n) ** e)
    expo.append(0.0)
    lo = np.array(lo[::-1])
    hi = np.concatenate([lo[1:], [math.inf]])
    return lo, hi, np.array(coef[::-1]), np.array(expo[::-1])


@dataclass(frozen=True, kw_only=True)
class TabulatedRadial(_PiecewisePower):
    """Profile given by (radius, value) samples, interpolated log-log linearly.

    Outside the sample range the end segments' power laws are continued;
    those extrapolations are used only inside integrals. ``eval_kernel``
    refuses radii outside the table.
    """

    samples: tuple
    check: bool = field(default=True, compare=False)
    family = "tabulated"

    def __post_init__(self):
        super().__post_init__()
        samples = tuple((float(r), float(v)) for r, v in self.samples)
        object.__setattr__(self, "samples", samples)
        if len(samples) < 2:
            raise ValidationError("tabulated kernel needs at least two samples")
        r = np.array([p[0] for p in samples])
        v = np.array([p[1] for p in samples])
        if np.any(r <= 0):
            raise NonPositiveRadius("tabulated radii must be strictly positive")
        if np.any(np.diff(r) <= 0):
            raise ValidationError("tabulated radii must be strictly ascending")
        if np.any(v <= 0):
            raise ValidationError("tabulated kernel values must be strictly positive")
        if self.check and np.any(np.diff(v) > 0):
            raise NonMonotoneKernel("tabulated profile increases somewhere")

    @property
    def radii(self):
        return np.array([p[0] for p in self.samples])

    @property
    def values(self):
        return np.array([p[1] for p in self.samples])

    def breakpoints(self):
        return self.radii

    def _pieces(self):
        return _tabulated_pieces(self.samples)


@lru_cache(maxsize=64)
def _tabulated_pieces(samples):
    r = np.array([p[0] for p in samples])
    v = np.array([p[1] for p in samples])
    k = np.diff(np.log(v)) / np.diff(np.log(r))
    expo = np.concatenate([[k[0]], k, [k[-1]]])
    anchor_r = np.concatenate([[r[0]], r[:-1], [r[-1]]])
    anchor_v = np.concatenate([[v[0]], v[:-1], [v[-1]]])
    coef = anchor_v * anchor_r ** (-expo)
    lo = np.concatenate([[0.0], r])
    hi = np.concatenate([r, [math.inf]])
    return lo, hi, coef, expo


# composite Gauss-Legendre, panel width in t = -log r
_PANEL = 0.25
_GL_HI = np.polynomial.legendre.leggauss(20)
_GL_LO = np.polynomial.legendre.leggauss(12)


def _gauss_0_to(g, T):
    """int_0^T g(t) dt for a vector of T >= 0, with an embedded accuracy check."""
    T = np.asarray(T, dtype=float)
    tmax = float(np.max(T)) if T.size else 0.0
    npanel = int(math.ceil(tmax / _PANEL)) + 1
    edges = np.arange(npanel + 1) * _PANEL

    def panel_sums(rule, lo, hi):
        x, w = rule
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pts = mid[..., None] + half[..., None] * x
        return half * np.sum(w * g(pts), axis=-1)

    out = []
    for rule in (_GL_HI, _GL_LO):
        cum = np.concatenate([[0.0], np.cumsum(panel_sums(rule, edges[:-1], edges[1:]))])
        j = np.minimum((T / _PANEL).astype(int), npanel - 1)
        out.append(cum[j] + panel_sums(rule, edges[j], T))
    hi, lo = out
    scale = np.maximum(np.abs(hi), 1e-300)
    if np.any(np.abs(hi - lo) > 1e-9 * scale):
        raise QuadratureNonConvergence("log-corrected integral failed its embedded error check")
    return hi


@dataclass(frozen=True, kw_only=True)
class LogCorrected(Kernel):
    """K(r) = r^-(N+2 s0) * [(-log r)_+ + 1]^sigma."""

    s0: float
    sigma: float
    family = "log_corrected"

    def __post_init__(self):
        super().__post_init__()
        if not self.s0 > 0:
            raise ValidationError("s0 must be positive")

    def _shape(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            t = np.maximum(-np.log(r), 0.0)
        return r ** (-(self.N + 2 * self.s0)) * (1.0 + t) ** self.sigma

    def _radial_integral(self, power, a, b):
        a = np.asarray(a, dtype=float)
        e = power - self.N - 2 * self.s0
        out = np.zeros(a.shape)
        # part above 1: pure power law
        if b > 1:
            lo = np.maximum(a, 1.0)
            out = out + np.where(lo < b, _power_integral(1.0, e, lo, b), 0.0)
        # part below 1: t = -log r, integrand exp(-(e+1) t) (1+t)^sigma
        if np.any(a < 1):
            beta = -(e + 1.0)
            sig = self.sigma

            def g(t):
                return np.exp(beta * t) * (1.0 + t) ** sig

            t_top = -math.log(b) if b < 1 else 0.0
            below = a < min(b, 1.0)
            inner = np.zeros(a.shape)
            pos = below & (a > 0)
            if np.any(pos):
                ta = -np.log(a[pos])
                inner[pos] = _gauss_0_to(g, ta) - _gauss_0_to(g, np.array([t_top]))[0]
            zero = below & (a <= 0)
            if np.any(zero):
                inner[zero] = _improper_t_integral(beta, sig, t_top)
            out = out + inner
        return out

    def breakpoints(self):
        return np.array([1.0])


def _improper_t_integral(beta, sigma, t0):
    """int_{t0}^inf exp(beta t)(1+t)^sigma dt."""
    if beta > 0 or (beta == 0 and sigma >= -1):
        return math.inf
    if beta == 0:
        return (1 + t0) ** (sigma + 1) / (-sigma - 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                lambda t: math.exp(beta * t) * (1 + t) ** sigma, t0, math.inf, epsabs=0, epsrel=1e-12, limit=200
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureNonConvergence(str(exc)) from exc
    if err > 1e-9 * abs(val):
        raise QuadratureNonConvergence(f"improper integral error estimate {err:g} too large")
    return val


@dataclass(frozen=True, kw_only=True)
class KernelSum(Kernel):
    """Linear combination sum_i c_i K_i with positive coefficients."""

    terms: tuple
    family = "sum"

    def __post_init__(self):
        super().__post_init__()
        terms = tuple((float(c), k) for c, k in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValidationError("kernel sum needs at least one term")
        for c, k in terms:
            if not c > 0:
                raise ValidationError("kernel sum coefficients must be positive")
            if k.N != self.N:
                raise ValidationError("all summands must share the dimension")

    def _shape(self, r):
        return sum(c * k.profile(r) for c, k in self.terms)

    def _radial_integral(self, power, a, b):
        return sum(c * k.radial_integral(power, a, b) for c, k in self.terms)

    def breakpoints(self):
        return np.unique(np.concatenate([k.breakpoints() for _, k in self.terms]))


FAMILIES = {
    "fractional": Fractional,
    "log_corrected": LogCorrected,
    "lacunary": Lacunary,
    "tabulated": TabulatedRadial,
    "sum": KernelSum,
}


def kernel_from_config(cfg: dict) -> Kernel:
    """Inverse of :meth:`Kernel.to_config`."""
    cfg = dict(cfg)
    try:
        cls = FAMILIES[cfg.pop("family")]
    except KeyError as exc:
        raise ValidationError(f"unknown or missing kernel family: {exc}") from None
    if "terms" in cfg:
        cfg["terms"] = tuple((float(c), kernel_from_config(k)) for c, k in cfg["terms"])
    if "samples" in cfg:
        cfg["samples"] = tuple((float(r), float(v)) for r, v in cfg["samples"])
    for key in ("s", "s0", "sigma", "a0", "scale"):
        if key in cfg:
            cfg[key] = float(cfg[key])
    if "N" in cfg:
        cfg["N"] = int(cfg["N"])
    return cls(**cfg)


def read_tabulated(path, N: int = 2, check: bool = True) -> TabulatedRadial:
    """Two-column whitespace-separated (radius, value) text, radii ascending."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise ValidationError(f"{path}: expected two columns, got {data.shape[1]}")
    return TabulatedRadial(samples=tuple(map(tuple, data)), N=N, check=check)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def eval_kernel(spec: Kernel, r):
    """Radial profile value(s) at radius ``r`` (scalar or array)."""
    arr = np.asarray(r, dtype=float)
    if np.any(~(arr > 0)):
        raise NonPositiveRadius(f"kernel evaluated at non-positive radius {r}")
    if isinstance(spec, TabulatedRadial):
        rr = spec.radii
        if np.any(arr < rr[0]) or np.any(arr > rr[-1]):
            raise OutOfTabulatedRange(f"radius outside tabulated range [{rr[0]:g}, {rr[-1]:g}]")
    out = spec.profile(arr)
    return float(out) if np.ndim(r) == 0 else out


@dataclass(frozen=True)
class IntegrabilityReport:
    passed: bool
    value: float  # estimate of int min(|x|^2,1) K dx (inf when failed)
    near_value: float
    far_value: float
    divergent_piece: str | None = None  # "near_origin" | "far_field"
    detail: str = ""


def _partial_near(spec: Kernel, eps):
    return spec.radial_integral(spec.N + 1, eps, 1.0)


@lru_cache(maxsize=256)
def check_levy_integrability(spec: Kernel) -> IntegrabilityReport:
    """Check int min(|x|^2, 1) K(x) dx < inf on its near and far pieces.

    Near piece: inner cutoffs eps_k = 2^-k are halved down to the radius
    floor. Convergence is accepted once three successive halvings each
    change the partial integral by less than 1%, or, at the floor, when the
    increments are still shrinking geometrically (ratio <= 0.95) so that the
    remainder is summable. Otherwise the near-origin piece is declared
    divergent.
    """
    sig = sphere_measure(spec.N)
    far = float(spec.radial_integral(spec.N - 1, np.array(1.0)))
    if not math.isfinite(far):
        return IntegrabilityReport(False, math.inf, math.nan, math.inf, "far_field", "tail beyond r=1 diverges")

    kmax = int(math.floor(-math.log2(R_FLOOR)))
    eps = 2.0 ** -np.arange(1, kmax + 1)
    partial = _partial_near(spec, eps)
    if not np.all(np.isfinite(partial)):
        return IntegrabilityReport(False, math.inf, math.inf, sig * far, "near_origin", "non-finite partial integral")
    inc = np.diff(partial)
    rel = inc / np.maximum(partial[1:], 1e-300)
    small = rel < 0.01
    for k in range(2, len(rel)):
        if small[k - 2] and small[k - 1] and small[k]:
            ratio = inc[k] / inc[k - 1] if inc[k - 1] > 0 else 0.0
            tail_est = inc[k] * ratio / (1 - ratio) if ratio < 1 else 0.0
            near = partial[k + 1] + tail_est
            return IntegrabilityReport(True, sig * (near + far), sig * near, sig * far, None, f"converged at eps=2^-{k + 2}")
    ratios = inc[-3:] / inc[-4:-1]
    if np.all(ratios <= 0.95):
        rho = float(ratios[-1])
        near = partial[-1] + inc[-1] * rho / (1 - rho)
        return IntegrabilityReport(True, sig * (near + far), sig * near, sig * far, None, "geometric remainder at floor")
    return IntegrabilityReport(
        False,
        math.inf,
        math.inf,
        sig * far,
        "near_origin",
        f"partial integral still growing at eps={eps[-1]:.2e} (last relative increments {rel[-3:].round(4).tolist()})",
    )


def _require_integrable(spec: Kernel):
    rep = check_levy_integrability(spec)
    if not rep.passed:
        raise DivergentTail(f"{spec.label()} fails the Levy integrability condition ({rep.divergent_piece})")
    return rep


def tail(spec: Kernel, r):
    """T(r) = int_{|y|>r} K(y) dy, vectorized over ``r``."""
    arr = np.asarray(r, dtype=float)
    if np.any(~(arr > 0)):
        raise NonPositiveRadius("tail radius must be positive")
    _require_integrable(spec)
    out = sphere_measure(spec.N) * spec.radial_integral(spec.N - 1, arr)
    return float(out) if np.ndim(r) == 0 else out


def second_moment(spec: Kernel, delta: float) -> float:
    """m(delta) = int_{|z|<delta} |z|^2 K(z) dz."""
    if not delta > 0:
        raise NonPositiveRadius("moment radius must be positive")
    _require_integrable(spec)
    val = float(spec.radial_integral(spec.N + 1, np.array(0.0), delta))
    if not math.isfinite(val):
        raise QuadratureNonConvergence("second moment is not finite")
    return sphere_measure(spec.N) * val


@dataclass(frozen=True)
class TailTable:
    radii: np.ndarray  # decreasing
    values: np.ndarray
    method: str  # "closed-form" | "quadrature"


def tail_table(spec: Kernel, r_min: float, r_max: float, points: int) -> TailTable:
    radii = np.geomspace(r_max, r_min, points)
    method = "quadrature" if _uses_quadrature(spec) else "closed-form"
    return TailTable(radii, tail(spec, radii), method)


def _uses_quadrature(spec):
    if isinstance(spec, KernelSum):
        return any(_uses_quadrature(k) for _, k in spec.terms)
    return isinstance(spec, LogCorrected)


@dataclass(frozen=True)
class MonotoneReport:
    passed: bool
    first_violation: tuple | None = None  # (r1, K(r1), r2, K(r2)) with r1 < r2, K(r1) < K(r2)


def _sample_radii(spec: Kernel, sample_count: int) -> np.ndarray:
    if isinstance(spec, TabulatedRadial):
        lo, hi = spec.radii[0], spec.radii[-1]
    else:
        lo, hi = R_FLOOR, R_FAR
    r = np.geomspace(lo, hi, sample_count)
    bp = spec.breakpoints()
    bp = bp[(bp >= lo) & (bp <= hi)]
    left = bp * (1 - 1e-9)
    extra = np.concatenate([bp, left[left >= lo]])
    return np.unique(np.concatenate([r, extra]))


def check_monotone(spec: Kernel, sample_count: int = 512) -> MonotoneReport:
    """Profile nonincreasing on a log grid that includes all breakpoints."""
    if sample_count < 2:
        raise ValidationError("sample_count must be >= 2")
    r = _sample_radii(spec, sample_count)
    k = spec.profile(r)
    bad = np.nonzero(np.diff(k) > 1e-12 * np.abs(k[:-1]))[0]
    if bad.size:
        i = int(bad[0])
        return MonotoneReport(False, (float(r[i]), float(k[i]), float(r[i + 1]), float(k[i + 1])))
    return MonotoneReport(True)


def lacunary_sequence(spec: Lacunary, n_max: int) -> list[float]:
    """a_1, ..., a_{n_max}."""
    if not isinstance(spec, Lacunary):
        raise ValidationError("lacunary_sequence needs a Lacunary kernel")
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    out = []
    for n in range(1, n_max + 1):
        an = spec.a(n)
        if not an >= np.finfo(float).tiny:
            raise LacunaryOverflow(f"a_{n} underflows double precision", largest_valid=n - 1)
        out.append(an)
    return out


def dominant_far_exponent(spec: Kernel) -> float:
    """alpha with K(r) ~ r^-(N+alpha) at large r (the far-field decay used for tails)."""
    if isinstance(spec, KernelSum):
        return min(dominant_far_exponent(k) for _, k in spec.terms)
    if isinstance(spec, LogCorrected):
        return 2 * spec.s0
    if isinstance(spec, _PiecewisePower):
        return -spec._pieces()[3][-1] - spec.N
    raise ValidationError(f"no far-field law for {spec.family}")


__all__ = [
    "Kernel",
    "Fractional",
    "LogCorrected",
    "Lacunary",
    "TabulatedRadial",
    "KernelSum",
    "sphere_measure",
    "eval_kernel",
    "tail",
    "tail_table",
    "TailTable",
    "second_moment",
    "check_levy_integrability",
    "IntegrabilityReport",
    "check_monotone",
    "MonotoneReport",
    "lacunary_sequence",
    "kernel_from_config",
    "read_tabulated",
    "R_FLOOR",
]
