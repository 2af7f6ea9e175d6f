import numpy as np
import pytest

import costap as cs

from helpers import random_complex, random_psd


def capon_oracle(r_u, g, kappa):
    """Constrained minimizer by variable elimination: w = w0 + B t with
    B an orthonormal basis of the constraint tangent space, solved by
    dense normal equations (no inverse-covariance formula involved)."""
    ng2 = float(np.real(g.conj() @ g))
    w0 = kappa * g / ng2
    q, _ = np.linalg.qr(g.reshape(-1, 1), mode="complete")
    basis = q[:, 1:]
    rhs = -(basis.conj().T @ (r_u @ w0))
    t = np.linalg.solve(basis.conj().T @ r_u @ basis, rhs)
    return w0 + basis @ t


class TestMvdrUpdate:
    def test_identity_covariance_basis_steering(self):
        n = 5
        g_map = np.eye(n)
        s = np.zeros(n, dtype=complex)
        s[0] = 1.0
        w = cs.mvdr_update(np.eye(n), g_map, s, 1.0)
        np.testing.assert_allclose(w, s, atol=1e-14)

    def test_identity_covariance_general(self):
        rng = np.random.default_rng(0)
        n = 6
        s = random_complex(rng, n)
        w = cs.mvdr_update(np.eye(n), np.eye(n), s, 2.0)
        np.testing.assert_allclose(w, 2.0 * s / np.linalg.norm(s) ** 2, atol=1e-13)

    def test_matches_elimination_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            n = 8
            r_u = random_psd(rng, n, eig_lo=0.3, eig_hi=3.0)
            s = random_complex(rng, n)
            w = cs.mvdr_update(r_u, np.eye(n), s, 1.0)
            expected = capon_oracle(r_u, s, 1.0)
            assert np.max(np.abs(w - expected)) <= 1e-9 * np.max(np.abs(expected))

    def test_capon_residual(self, small_bundle, small_cfg):
        rng = np.random.default_rng(2)
        for _ in range(10):
            s = random_complex(rng, small_cfg.N)
            r_u = cs.total_cov(small_bundle, s)
            w = cs.mvdr_update(r_u, small_bundle.target_map, s, small_cfg.kappa)
            resid = abs(w.conj() @ (small_bundle.target_map @ s) - small_cfg.kappa)
            assert resid <= 1e-10 * abs(small_cfg.kappa)

    def test_optimality_against_feasible_perturbations(self):
        rng = np.random.default_rng(3)
        n = 8
        r_u = random_psd(rng, n, eig_lo=0.2, eig_hi=2.0)
        g = random_complex(rng, n)
        w = cs.mvdr_update(r_u, np.eye(n), g, 1.0)
        base = np.real(w.conj() @ (r_u @ w))
        for _ in range(20):
            d = random_complex(rng, n)
            d -= g * (g.conj() @ d) / np.real(g.conj() @ g)  # keep w^H g fixed
            wp = w + d
            assert np.real(wp.conj() @ (r_u @ wp)) >= base - 1e-12

    def test_homogeneity_in_kappa(self):
        rng = np.random.default_rng(4)
        n = 6
        r_u = random_psd(rng, n, eig_lo=0.5, eig_hi=2.0)
        g = random_complex(rng, n)
        w1 = cs.mvdr_update(r_u, np.eye(n), g, 1.0)
        w2 = cs.mvdr_update(r_u, np.eye(n), g, 2.0)
        np.testing.assert_array_equal(w2, 2.0 * w1)

    def test_zero_steering(self):
        with pytest.raises(cs.ZeroSteering):
            cs.mvdr_update(np.eye(3), np.eye(3), np.zeros(3, dtype=complex), 1.0)

    def test_singular_covariance(self):
        g = np.array([1.0, 1.0, 0.0], dtype=complex)
        singular = np.zeros((3, 3), dtype=complex)
        with pytest.raises(cs.SingularCovariance):
            cs.mvdr_update(singular, np.eye(3), g, 1.0)
