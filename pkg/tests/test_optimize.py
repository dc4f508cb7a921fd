import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from schwarzlat.functionals import gradient_norm, lp_norm, sobolev_energy
from schwarzlat.lattice import SparseFunction, neighbors, random_function
from schwarzlat.optimize import (
    TruncatedDomain,
    dnls_energy,
    dnls_lower_bound,
    euler_lagrange_residual,
    fit_omega,
    grid_gradient_energy,
    grid_laplacian,
    grid_p_laplacian,
    minimize_dnls,
    minimize_nonnormalized,
    minimize_sobolev_extremal,
    negative_tent,
    tent_profile,
)
from schwarzlat import optimize
from schwarzlat.rearrange import is_schwarz_symmetric, schwarz_rearrange

from conftest import sparse_functions

uK = optimize.test_function_uK


def sparse_laplacian(u, x):
    return sum(u(y) - u(x) for y in neighbors(x))


class TestGrid:
    def test_roundtrip(self, rng):
        dom = TruncatedDomain(2, 4)
        u = random_function(rng, 2, 20, 4)
        assert dom.to_sparse(dom.to_array(u)) == u
        with pytest.raises(ValueError):
            dom.to_array(SparseFunction({(5, 0): 1.0}))
        with pytest.raises(ValueError):
            TruncatedDomain(0, 3)

    @given(sparse_functions(dims=(1, 2, 3), radius=3), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
    def test_operators_match_sparse(self, u, p):
        dom = TruncatedDomain(u.dim, 4)
        a = dom.to_array(u)
        assert grid_gradient_energy(a, p) == pytest.approx(sobolev_energy(u, p), rel=1e-12, abs=1e-12)
        lap = grid_laplacian(a)
        for x in list(u)[:5]:
            assert lap[tuple(c + 4 for c in x)] == pytest.approx(sparse_laplacian(u, x), abs=1e-12)
        assert np.allclose(grid_p_laplacian(a, 2.0), lap)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_p_laplacian_is_gradient(self, p):
        rng = np.random.default_rng(1)
        a = rng.random((5, 5, 5))
        g = -p * grid_p_laplacian(a, p)
        for idx in [(0, 0, 0), (2, 2, 2), (4, 1, 3)]:
            e = np.zeros_like(a)
            e[idx] = 1e-6
            fd = (grid_gradient_energy(a + e, p) - grid_gradient_energy(a - e, p)) / 2e-6
            assert fd == pytest.approx(g[idx], rel=1e-5)

    def test_p1_sign_convention(self):
        a = np.zeros((3, 3, 3))
        a[1, 1, 1] = 1.0
        a[1, 1, 2] = 1.0  # equal neighbours: sign(0) = 0 for the shared edge
        out = grid_p_laplacian(a, 1.0)
        assert out[1, 1, 1] == -5.0 and out[1, 1, 2] == -5.0


class TestEnergies:
    def test_examples(self):
        assert dnls_energy(SparseFunction({}, dim=2), 1.0) == 0
        assert dnls_energy(SparseFunction({(0, 0): 1.0}), 1.0) == 1.75
        with pytest.raises(ValueError):
            dnls_energy(SparseFunction({(0, 0): 1.0}), 0.0)

    def test_F_hook(self):
        u = SparseFunction({(0, 0): 2.0, (1, 0): 1.0})
        F = lambda r, t: t / (1 + r)  # noqa: E731
        assert dnls_energy(u, 1.0, F) == pytest.approx(0.5 * sobolev_energy(u, 2) - (2.0 + 0.5))

    @given(sparse_functions(dims=(2, 3)), st.sampled_from([0.3, 0.6, 0.9]))
    def test_rearrangement_lowers_energy(self, u, sigma):
        e, es = dnls_energy(u, sigma), dnls_energy(schwarz_rearrange(u), sigma)
        assert es <= e + 1e-9 * max(1.0, abs(e))

    @given(sparse_functions(dims=(2, 3)), st.sampled_from([0.3, 0.9]))
    def test_lower_bound(self, u, sigma):
        assert dnls_lower_bound(u, sigma) <= dnls_energy(u, sigma) + 1e-12


class TestTent:
    @pytest.mark.parametrize("K", [5, 10, 20])
    def test_normalized(self, K):
        assert lp_norm(uK(K, 2.0, 2), 2) == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("K,d", [(1, 2), (4, 2), (9, 2), (5, 3), (3, 4)])
    def test_shell_sums_match_lattice(self, K, d):
        u = uK(K, 1.5, d)
        prof = tent_profile(K, 1.5, 0.7, d)
        assert prof.gradient_sq == pytest.approx(sobolev_energy(u, 2), rel=1e-12)
        assert prof.power_sum == pytest.approx(sum(v ** 3.4 for v in u.values()), rel=1e-12)
        assert prof.energy == pytest.approx(dnls_energy(u, 0.7), rel=1e-10)

    def test_trends(self):
        Ks = [5, 10, 20, 40]
        grad = [tent_profile(K, 2.0, 0.9, 2).gradient_sq * K ** 2 for K in Ks]
        power = [tent_profile(K, 2.0, 0.9, 2).power_sum * K ** 1.8 for K in Ks]
        # frozen from the shell sums: K^2 ||grad u_K||^2 rises to 48, K^(d sigma) ||u_K||^q stays near 16
        assert max(grad) < 48.0 and min(power) > 16.0

    def test_negativity_certificate(self):
        prof = negative_tent(2.0, 0.9, 2)
        assert prof is not None and prof.K == 8192 and prof.energy < 0
        assert tent_profile(4096, 2.0, 0.9, 2).energy > 0

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            uK(0, 1.0, 2)
        with pytest.raises(ValueError):
            uK(3, 0.0, 2)


@pytest.fixture(scope="module")
def dnls_run():
    dom = TruncatedDomain(2, 8)
    u, value, trace = minimize_dnls(2.0, 0.9, dom, tol=1e-8)
    return dom, u, value, trace


class TestDNLS:
    @pytest.fixture
    def run(self, dnls_run):
        return dnls_run

    def test_constraint_and_symmetry(self, run):
        dom, u, value, trace = run
        assert lp_norm(u, 2) == pytest.approx(2.0, abs=1e-12)
        assert is_schwarz_symmetric(u)
        assert dom.contains(u)
        assert schwarz_rearrange(u) == u

    def test_trace(self, run):
        dom, u, value, trace = run
        assert trace.converged
        assert trace.monotone_across_rearrangements()
        assert trace.rearrangement_steps[0] == 0 and len(trace.rearrangement_steps) >= 2
        assert value == pytest.approx(dnls_energy(u, 0.9), rel=1e-10)
        floor = -2.0 ** 3.8 / 3.8
        assert all(e >= floor for e in trace.energies)

    def test_euler_lagrange(self, run):
        dom, u, value, trace = run
        omega = fit_omega(u, 0.9, dom)
        assert euler_lagrange_residual(u, omega, 0.9, dom) < 1e-8
        assert euler_lagrange_residual(u, omega + 0.01, 0.9, dom) > 1e-3

    def test_preconditions(self):
        dom = TruncatedDomain(2, 3)
        with pytest.raises(ValueError):
            minimize_dnls(2.0, 1.0, dom)
        with pytest.raises(ValueError):
            minimize_dnls(-1.0, 0.5, dom)

    def test_residual_examples(self, rng):
        assert euler_lagrange_residual(SparseFunction({}, dim=2), 1.0, 1.0) == 0.0
        assert euler_lagrange_residual(random_function(rng, 2, 10, 3), 0.5, 1.0) > 0
        # the residual outside the support is counted without a domain
        spike = SparseFunction({(0, 0): 1.0})
        assert euler_lagrange_residual(spike, -3.0, 0.0) == pytest.approx(2.0)


class TestWave:
    def test_properties(self):
        dom = TruncatedDomain(2, 6)
        values = []
        for omega in (0.5, 1.0, 2.0):
            u, value, trace = minimize_nonnormalized(omega, 0.9, dom, tol=1e-8)
            assert lp_norm(u, 3.8) == pytest.approx(1.0, abs=1e-12)
            assert is_schwarz_symmetric(u) and trace.converged
            star = schwarz_rearrange(u)
            assert sobolev_energy(star, 2) + omega * lp_norm(star, 2) ** 2 >= value - 1e-8
            values.append(value)
        assert values == sorted(values)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            minimize_nonnormalized(0.0, 0.5, TruncatedDomain(2, 3))


class TestSobolev:
    def test_small_run(self):
        dom = TruncatedDomain(3, 4)
        u, value, trace = minimize_sobolev_extremal(2.0, 7.0, dom, tol=1e-7)
        assert trace.converged and is_schwarz_symmetric(u)
        assert lp_norm(u, 7) == pytest.approx(1.0, abs=1e-12)
        assert value == pytest.approx(gradient_norm(u, 2), rel=1e-12)
        assert gradient_norm(schwarz_rearrange(u), 2) >= value - 1e-9

    def test_p1_runs(self):
        dom = TruncatedDomain(3, 2)
        u, value, trace = minimize_sobolev_extremal(1.0, 2.0, dom, iters=300)
        assert lp_norm(u, 2) == pytest.approx(1.0, abs=1e-12)
        assert is_schwarz_symmetric(u)
        assert trace.monotone_across_rearrangements()

    def test_empirical_sobolev_constant(self):
        rng = np.random.default_rng(2)
        sample = [uK(K, 1.0, 3) for K in (1, 2, 4, 8)]
        sample += [random_function(rng, 3, int(rng.integers(1, 60)), 3) for _ in range(50)]
        u, _, _ = minimize_sobolev_extremal(2.0, 7.0, TruncatedDomain(3, 4))
        sample.append(u)
        ratios = [lp_norm(w, 6) / gradient_norm(w, 2) for w in sample]
        C = max(ratios)
        assert 0 < C < 1

    def test_preconditions(self):
        with pytest.raises(ValueError):
            minimize_sobolev_extremal(2.0, 7.0, TruncatedDomain(2, 3))
        with pytest.raises(ValueError):
            minimize_sobolev_extremal(2.0, 6.0, TruncatedDomain(3, 3))
        with pytest.raises(ValueError):
            minimize_sobolev_extremal(3.0, 9.0, TruncatedDomain(3, 3))
