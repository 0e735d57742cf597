"""Backend equivalence: the compiled kernels and the pure-numpy fallback
must agree to roundoff on identical inputs."""

import numpy as np
import pytest
from scipy.linalg import solve_banded

from nsfslab._core import backend, kernels, kernels_py

try:
    from nsfslab._core import _kernels as kernels_cy
except ImportError:
    kernels_cy = None

BACKENDS = [kernels_py] + ([kernels_cy] if kernels_cy is not None else [])


def random_tridiag(n, seed):
    rng = np.random.default_rng(seed)
    dl = rng.uniform(-1, 1, n)
    du = rng.uniform(-1, 1, n)
    di = np.abs(dl) + np.abs(du) + rng.uniform(1, 2, n)  # diagonally dominant
    rhs = rng.uniform(-3, 3, n)
    return dl, di, du, rhs


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.BACKEND)
class TestBackend:
    def test_thomas_against_lapack(self, mod):
        for n, seed in ((3, 0), (17, 1), (129, 2)):
            dl, di, du, rhs = random_tridiag(n, seed)
            ab = np.zeros((3, n))
            ab[0, 1:] = du[:-1]
            ab[1] = di
            ab[2, :-1] = dl[1:]
            expected = solve_banded((1, 1), ab, rhs)
            got = mod.thomas(dl, di, du, rhs)
            np.testing.assert_allclose(got, expected, rtol=1e-11, atol=1e-13)

    def test_neg_part_closed_form(self, mod):
        z = np.linspace(-0.5, 0.5, 101)
        n = 10
        expected = np.where(z < -0.1, z,
                            np.where(z > 0.1, 0.0, -(1 - n * z) ** 2 / (4 * n)))
        np.testing.assert_allclose(np.asarray(mod.neg_part_smooth(z, n)).ravel(),
                                   expected, atol=1e-15)

    def test_powerlaw_against_generic_formula(self, mod):
        rng = np.random.default_rng(3)
        rho = rng.uniform(0.2, 4.0, 50)
        theta = rng.uniform(0.2, 4.0, 50)
        c, q, a, s0 = 1.3, 0.8, 0.4, 0.2
        z = rho / theta**1.5
        P = c * z + q * z ** (5 / 3)
        p_exp = theta**2.5 * P + (a / 3) * theta**4
        e_exp = 1.5 * theta**2.5 / rho * P + a * theta**4 / rho
        s_exp = -c * np.log(z) + s0 + (4 * a / 3) * theta**3 / rho
        p, e, s = mod.powerlaw_pes(rho, theta, c, q, a, s0)
        np.testing.assert_allclose(p, p_exp, rtol=1e-12)
        np.testing.assert_allclose(e, e_exp, rtol=1e-12)
        np.testing.assert_allclose(s, s_exp, rtol=1e-12, atol=1e-12)

    def test_theta_from_heat_round_trip(self, mod):
        rng = np.random.default_rng(4)
        rho = rng.uniform(0.2, 4.0, 60)
        theta = rng.uniform(0.2, 4.0, 60)
        c, q, a, delta = 1.0, 1.0, 0.7, 1e-3
        _, e, _ = mod.powerlaw_pes(rho, theta, c, q, a, 0.0)
        w = rho * (e + delta * theta)
        back = mod.theta_from_heat(rho, w, delta, c, q, a)
        np.testing.assert_allclose(back, theta, rtol=1e-12)

    def test_theta_from_heat_unattainable(self, mod):
        out = mod.theta_from_heat(np.array([1.0]), np.array([0.1]),
                                  0.0, 1.0, 1.0, 0.0)
        assert np.isnan(np.atleast_1d(out)).all()


@pytest.mark.skipif(kernels_cy is None, reason="compiled kernels unavailable")
class TestCrossBackend:
    def test_identical_results(self):
        rng = np.random.default_rng(5)
        rho = rng.uniform(0.2, 4.0, 80)
        theta = rng.uniform(0.2, 4.0, 80)
        for args in ((rho, theta, 1.0, 1.0, 0.0, 0.0),
                     (rho, theta, 2.0, 0.5, 1.5, -0.3)):
            for a, b in zip(kernels_py.powerlaw_pes(*args),
                            kernels_cy.powerlaw_pes(*args)):
                np.testing.assert_allclose(a, b, rtol=1e-13)
        dl, di, du, rhs = random_tridiag(65, 6)
        np.testing.assert_allclose(kernels_py.thomas(dl, di, du, rhs),
                                   kernels_cy.thomas(dl, di, du, rhs),
                                   rtol=1e-11)

    def test_active_backend_name(self):
        assert backend() in ("cython", "python")
        assert kernels.BACKEND == backend()
