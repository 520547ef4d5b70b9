import math

import numpy as np
import pytest
from scipy.integrate import quad

from nlsobolev.assembly import (
    AssemblyConfig,
    apply_form,
    assemble_cached,
    assemble_dense_oracle,
    assemble_stiffness,
    energy_norm_sq,
    exterior_weight,
    read_fingerprint,
    read_matrix_market,
    strip_weight,
    write_matrix_market,
)
from nlsobolev.errors import (
    CacheFingerprintMismatch,
    GridMismatch,
    GridTooLarge,
    NonIntegrableKernel,
    UnsupportedDimension,
)
from nlsobolev.grid import NodalFunction, disk, square
from nlsobolev.kernels import Fractional, KernelSum, Lacunary, LogCorrected, TabulatedRadial, tail

KERNELS = [Fractional(s=0.5), LogCorrected(s0=0.5, sigma=1), Lacunary(s=0.25, a0=0.5)]


def _outside_disk_intervals(lo, hi, center, r, y1):
    """Sub-intervals of [lo, hi] in y2 where |(y1, y2) - center| > r."""
    dx = y1 - center[0]
    if abs(dx) >= r:
        return [(lo, hi)]
    half = math.sqrt(r * r - dx * dx)
    out = []
    if lo < center[1] - half:
        out.append((lo, min(hi, center[1] - half)))
    if hi > center[1] + half:
        out.append((max(lo, center[1] + half), hi))
    return out


def rect_integral(k, x, rect, exclude):
    """int over rect minus B_exclude(x) of K(x - y) dy by nested adaptive quadrature."""
    x0, x1, y0, y1 = rect

    def inner(y1_):
        total = 0.0
        for a, b in _outside_disk_intervals(y0, y1, x, exclude, y1_):
            total += dblquad_inner(k, x, y1_, a, b)
        return total

    def dblquad_inner(k, x, y1_, a, b):
        return quad(lambda y2: float(k.profile(math.hypot(y1_ - x[0], y2 - x[1]))), a, b, epsabs=1e-13, epsrel=1e-11, limit=200)[0]

    pts = [p for p in (x[0] - exclude, x[0] + exclude) if x0 < p < x1]
    return quad(inner, x0, x1, points=pts or None, epsabs=1e-12, epsrel=1e-10, limit=200)[0]


def exterior_oracle(k, x, a):
    """w(x) = T(d) - int_{Omega minus B_d(x)} K for the square [-a, a]^2."""
    d = min(a - abs(x[0]), a - abs(x[1]))
    return tail(k, d) - rect_integral(k, x, (-a, a, -a, a), d)


class TestExteriorWeight:
    def test_center_sandwich(self):
        k = Fractional(s=0.5)
        g = square(1.0, 5)
        w = exterior_weight(g, k).values[4]
        assert 2 * math.pi / math.sqrt(0.5) <= w <= 4 * math.pi
        assert 8.886 <= w <= 12.567

    # the lacunary profile jumps on circles, which nested adaptive quadrature cannot resolve
    @pytest.mark.parametrize("k", KERNELS[:2], ids=lambda k: k.label())
    @pytest.mark.parametrize("node", [0, 4, 7])
    def test_against_cartesian_oracle(self, k, node):
        g = square(1.0, 5)
        w = exterior_weight(g, k).values[node]
        assert w == pytest.approx(exterior_oracle(k, g.nodes[node], 0.5), rel=1e-7)

    @pytest.mark.parametrize("k", KERNELS, ids=lambda k: k.label())
    def test_sandwich_everywhere(self, k):
        for g in (square(1.0, 17), disk(0.5, 17)):
            w = exterior_weight(g, k).values
            assert np.all(tail(k, g.R) <= w) and np.all(w <= tail(k, g.d))

    def test_disk_center(self):
        k = Fractional(s=0.5)
        for radius in (0.5, 1.3):
            g = disk(radius, 9)
            c = int(np.argmin(np.linalg.norm(g.nodes, axis=1)))
            assert np.allclose(g.nodes[c], 0.0)
            assert exterior_weight(g, k).values[c] == pytest.approx(tail(k, radius), rel=1e-13)

    def test_blows_up_toward_boundary(self):
        g = square(1.0, 33)
        w = exterior_weight(g, Fractional(s=0.5)).values
        line = np.where(np.abs(g.nodes[:, 1]) < 1e-12)[0]
        line = line[g.nodes[line, 0] >= 0]
        order = np.argsort(g.d[line])[::-1]  # from the centre outward
        assert np.all(np.diff(w[line][order]) > 0)

    def test_strip_against_oracle(self):
        k = Fractional(s=0.5)
        g = square(1.0, 9)
        ext = exterior_weight(g, k)
        st = strip_weight(g, k, ext, AssemblyConfig())
        a, b = 0.5, 0.5 - g.h / 2
        for i in (0, 10, 24):
            x = g.nodes[i]
            rects = [(-a, a, b, a), (-a, a, -a, -b), (-a, -b, -b, b), (b, a, -b, b)]
            oracle = sum(rect_integral(k, x, r, 0.0) for r in rects)
            assert st[i] == pytest.approx(oracle, rel=1e-6)


def _small_grids():
    return [square(1.0, 5), square(1.0, 7), disk(0.5, 7)]


class TestOracleEquivalence:
    @pytest.mark.parametrize("k", KERNELS, ids=lambda k: k.label())
    @pytest.mark.parametrize("gi", range(3))
    def test_match(self, k, gi):
        g = _small_grids()[gi]
        A = assemble_stiffness(g, k).matrix
        B = assemble_dense_oracle(g, k).matrix
        assert np.max(np.abs(A - B) / np.maximum(np.abs(B), 1e-300)) <= 1e-10
        assert np.array_equal(A, A.T) and np.array_equal(B, B.T)
        assert np.linalg.eigvalsh(A)[0] > 0

    def test_guard(self):
        with pytest.raises(GridTooLarge):
            assemble_dense_oracle(square(1.0, 23), Fractional(s=0.5))

    def test_constant_kernel_by_hand(self):
        # K = c on [0, 3] then steep decay: every pair in Square(1) sees c
        c = 2.5
        k = TabulatedRadial(samples=((1e-9, c), (3.0, c), (30.0, c * 1e-4)))
        g = square(1.0, 5)
        A = assemble_dense_oracle(g, k, AssemblyConfig(self_correction=False)).matrix
        off = A[~np.eye(g.M, dtype=bool)]
        assert np.allclose(off, -2 * c * g.h**4, rtol=1e-13, atol=0)
        w = exterior_weight(g, k).values + strip_weight(g, k, exterior_weight(g, k), AssemblyConfig())
        assert np.allclose(np.diag(A), 2 * c * g.h**4 * (g.M - 1) + 2 * w * g.h**2, rtol=1e-13)


class TestStiffness:
    def test_four_node_diagonal(self):
        # resolution 4 gives 2x2 interior nodes
        k = Fractional(s=0.5)
        g = square(1.0, 4)
        assert g.M == 4
        A = assemble_stiffness(g, k)
        no_corr = assemble_stiffness(g, k, AssemblyConfig(self_correction=False)).matrix
        assert np.all(np.diag(A.matrix) > 0)
        ext = exterior_weight(g, k)
        w = ext.values + strip_weight(g, k, ext, AssemblyConfig())
        assert np.allclose(no_corr.sum(axis=1), 2 * w * g.h**2, rtol=1e-12)

    def test_zero(self, A17, grid17):
        assert energy_norm_sq(A17, NodalFunction.zeros(grid17)) == 0.0

    def test_symmetric_and_pd(self, A17):
        M = A17.matrix
        assert np.array_equal(M, M.T)
        assert np.linalg.eigvalsh(M)[0] > 0

    def test_read_only(self, A17):
        with pytest.raises(ValueError):
            A17.matrix[0, 0] = 1.0

    def test_apply_form(self, A17, grid17, rng):
        u = NodalFunction(grid17, rng.standard_normal(grid17.M))
        v = NodalFunction(grid17, rng.standard_normal(grid17.M))
        assert apply_form(A17, u, v) == apply_form(A17, v, u) or math.isclose(
            apply_form(A17, u, v), apply_form(A17, v, u), rel_tol=1e-14
        )
        assert apply_form(A17, u, u) > 0
        with pytest.raises(GridMismatch):
            apply_form(A17, u, NodalFunction.zeros(square(1.0, 9)))

    def test_apply_form_symmetric_exact(self, A17, grid17, rng):
        # A is exactly symmetric, so u^T A v and v^T A u agree to rounding of the dot products
        u, v = rng.standard_normal((2, grid17.M))
        a = apply_form(A17, NodalFunction(grid17, u), NodalFunction(grid17, v))
        b = apply_form(A17, NodalFunction(grid17, v), NodalFunction(grid17, u))
        assert a == pytest.approx(b, rel=1e-13)

    def test_scaling(self, grid17, A17, rng):
        A2 = assemble_stiffness(grid17, Fractional(s=0.5, scale=2.0))
        u = NodalFunction(grid17, rng.standard_normal(grid17.M))
        assert apply_form(A2, u, u) == pytest.approx(2 * apply_form(A17, u, u), rel=1e-13)
        assert np.allclose(A2.matrix, 2 * A17.matrix, rtol=1e-13, atol=0)

    def test_linearity(self):
        g = square(1.0, 9)
        k1, k2 = Fractional(s=0.3), Lacunary(s=0.25, a0=0.5)
        ks = KernelSum(terms=((0.7, k1), (1.9, k2)))
        lhs = assemble_stiffness(g, ks).matrix
        rhs = 0.7 * assemble_stiffness(g, k1).matrix + 1.9 * assemble_stiffness(g, k2).matrix
        assert np.allclose(lhs, rhs, rtol=1e-11, atol=1e-11 * np.abs(rhs).max())

    def test_monotone_in_kernel(self, rng):
        g = square(1.0, 9)
        k1 = Fractional(s=0.4)
        k2 = KernelSum(terms=((1.0, k1), (0.5, LogCorrected(s0=0.3, sigma=-1))))
        A1, A2 = assemble_stiffness(g, k1).matrix, assemble_stiffness(g, k2).matrix
        assert np.linalg.eigvalsh(A2 - A1)[0] >= -1e-10 * np.abs(A2).max()
        for _ in range(20):
            u = rng.standard_normal(g.M)
            assert u @ A1 @ u <= u @ A2 @ u

    def test_domain_monotone_lambda2(self):
        k = Fractional(s=0.5)
        small, big = square(1.0, 9), square(2.0, 17)
        assert small.h == big.h
        lam_s = np.linalg.eigvalsh(assemble_stiffness(small, k).matrix)[0] / small.cell_volume
        lam_b = np.linalg.eigvalsh(assemble_stiffness(big, k).matrix)[0] / big.cell_volume
        assert lam_s >= lam_b > 0

    def test_rejects(self):
        with pytest.raises(UnsupportedDimension):
            assemble_stiffness(square(1.0, 5, N=3), Fractional(s=0.5, N=3))
        with pytest.raises(NonIntegrableKernel):
            assemble_stiffness(square(1.0, 5), Fractional(s=1.0))


class TestCache:
    def test_round_trip(self, tmp_path):
        g, k = square(1.0, 9), Lacunary(s=0.25, a0=0.5)
        A = assemble_stiffness(g, k)
        p = tmp_path / "a.mtx"
        write_matrix_market(p, A)
        head = p.read_text().splitlines()[0]
        assert head.startswith("%%MatrixMarket matrix coordinate real symmetric")
        assert read_fingerprint(p) == A.fingerprint
        B = read_matrix_market(p, g, k, AssemblyConfig())
        assert np.array_equal(A.matrix, B.matrix)

    def test_cached(self, tmp_path):
        g, k = square(1.0, 9), Fractional(s=0.5)
        A, hit = assemble_cached(g, k, cache_dir=tmp_path)
        assert not hit
        B, hit = assemble_cached(g, k, cache_dir=tmp_path)
        assert hit and np.array_equal(A.matrix, B.matrix)
        C, hit = assemble_cached(g, k, AssemblyConfig(near_order=3), cache_dir=tmp_path)
        assert not hit and C.fingerprint != A.fingerprint

    def test_corruption_detected(self, tmp_path):
        g, k = square(1.0, 9), Fractional(s=0.5)
        A, _ = assemble_cached(g, k, cache_dir=tmp_path)
        p = tmp_path / f"{A.fingerprint}.mtx"
        lines = p.read_text().splitlines(keepends=True)
        last = lines[-1].split()
        last[-1] = repr(float(last[-1]) * (1 + 1e-9))
        lines[-1] = " ".join(last) + "\n"
        p.write_text("".join(lines))
        with pytest.raises(CacheFingerprintMismatch):
            assemble_cached(g, k, cache_dir=tmp_path)

    def test_wrong_fingerprint(self, tmp_path):
        g = square(1.0, 9)
        A = assemble_stiffness(g, Fractional(s=0.5))
        p = tmp_path / "x.mtx"
        write_matrix_market(p, A)
        with pytest.raises(CacheFingerprintMismatch):
            read_matrix_market(p, g, Fractional(s=0.4), AssemblyConfig())

    def test_fingerprint_sensitivity(self):
        g = square(1.0, 5)
        a = assemble_stiffness(g, Fractional(s=0.5)).fingerprint
        assert a == assemble_stiffness(square(1.0, 5), Fractional(s=0.5)).fingerprint
        assert a != assemble_stiffness(square(1.0, 6), Fractional(s=0.5)).fingerprint
        assert a != assemble_stiffness(g, Fractional(s=0.5, scale=1.5)).fingerprint


@pytest.mark.parametrize("k", KERNELS, ids=lambda k: k.label())
def test_z_matrix(k):
    # nonpositive off-diagonals: |u| never has a larger form than u
    for g in (square(1.0, 17), disk(0.5, 17)):
        A = assemble_stiffness(g, k).matrix
        off = A[~np.eye(g.M, dtype=bool)]
        assert off.max() <= 0
        u = np.random.default_rng(5).standard_normal(g.M)
        assert np.abs(u) @ A @ np.abs(u) <= u @ A @ u
