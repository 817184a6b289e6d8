import math

import numpy as np
import pytest

from noncolbm import haar, linalg, verify
from noncolbm.rng import substream


class TestHaarUnitary:
    def test_unitarity(self):
        u = haar.haar_unitary(4, substream(60), size=50)
        prods = np.einsum("sij,skj->sik", u, np.conj(u))
        eye = np.broadcast_to(np.eye(4), prods.shape)
        assert np.abs(prods - eye).max() < 1e-10

    def test_single_matrix_shape(self):
        u = haar.haar_unitary(3, substream(61))
        assert u.shape == (3, 3)

    def test_n1_phase_uniform(self):
        u = haar.haar_unitary(1, substream(62), size=20_000)
        phases = np.angle(u[:, 0, 0])
        r = verify.ks_one_sample(phases,
                                 lambda v: (v + math.pi) / (2 * math.pi))
        assert r.p_value > 0.01

    def test_first_entry_second_moment(self):
        # E |u_11|^2 = 1/n for Haar measure
        n, m = 3, 40_000
        u = haar.haar_unitary(n, substream(63), size=m)
        v = np.abs(u[:, 0, 0]) ** 2
        assert abs(v.mean() - 1.0 / n) <= 3 * v.std() / math.sqrt(m)

    def test_trace_mean_zero(self):
        m = 40_000
        u = haar.haar_unitary(2, substream(64), size=m)
        tr = np.einsum("sii->s", u)
        assert abs(tr.mean()) <= 4 / math.sqrt(m)


class TestGaussianGroupIntegral:
    def test_closed_form_symmetric_in_arguments(self):
        x, y = [0.0, 1.0], [-0.5, 2.0]
        assert haar.hc_closed_form(x, y, 0.8) == pytest.approx(
            haar.hc_closed_form(y, x, 0.8), rel=1e-12)

    def test_closed_form_scaling(self):
        x, y, s = np.array([0.0, 1.3]), np.array([-0.4, 0.9]), 0.7
        assert haar.hc_closed_form(x, y, s) == pytest.approx(
            haar.hc_closed_form(x / s, y / s, 1.0), rel=1e-12)

    def test_coincident_arguments_value_one_limit(self):
        # as sigma grows the average tends to 1
        v = haar.hc_closed_form([0.0, 1.0], [0.0, 1.0], 50.0)
        assert v == pytest.approx(1.0, abs=1e-3)

    def test_n1_exact(self):
        est = haar.hc_monte_carlo([0.3], [1.1], 0.9, 100, substream(65))
        assert est.se == 0.0
        assert est.mean == pytest.approx(
            math.exp(-(0.8 ** 2) / (2 * 0.81)), rel=1e-12)

    def test_mc_matches_closed_form_n2(self):
        x, y, s = [0.0, 1.0], [-0.5, 0.5], 1.0
        est = haar.hc_monte_carlo(x, y, s, 40_000, substream(66))
        rhs = haar.hc_closed_form(x, y, s)
        assert abs(est.mean - rhs) <= 3 * est.se

    def test_mc_matches_closed_form_n3(self):
        x = [-1.0, 0.0, 1.0]
        y = [-0.8, 0.2, 1.5]
        est = haar.hc_monte_carlo(x, y, 1.2, 40_000, substream(67))
        rhs = haar.hc_closed_form(x, y, 1.2)
        assert abs(est.mean - rhs) <= 3 * est.se

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            haar.hc_monte_carlo([0.0, 1.0], [0.0], 1.0, 10, substream(68))


class TestConvolution:
    def test_scales(self):
        s2, a = haar.interpolation_scales(2.0, 0.5)
        assert s2 == pytest.approx(0.5 * 1.5 / 2.0)
        assert a == pytest.approx(2.0 / 0.25)

    def test_scales_rejects_endpoints(self):
        for t in (0.0, 2.0, 3.0):
            with pytest.raises(ValueError):
                haar.interpolation_scales(2.0, t)

    def test_n1_exact_heat_kernel(self):
        # sum of the bridge and endpoint variances is t, so the scalar
        # convolution density is the heat kernel at time t
        T, t, h = 2.0, 0.7, 0.4
        target = linalg.heat_kernel(t, 0.0, h)
        quad = haar.convolution_quadrature(1, T, t, np.array([[h]]))
        assert quad == pytest.approx(target, rel=1e-6)
        mc = haar.convolution_mc(1, T, t, np.array([[h]]), 40_000,
                                 substream(69))
        assert abs(mc.mean - target) <= 3 * mc.se

    def test_mc_matches_quadrature_scalar_multiple_of_identity(self):
        T, t = 1.0, 0.4
        for c in (0.0, 0.5):
            h = c * np.eye(2)
            quad = haar.convolution_quadrature(2, T, t, h)
            mc = haar.convolution_mc(2, T, t, h, 60_000, substream(70))
            assert abs(mc.mean - quad) <= 3 * max(mc.se, 1e-12)

    def test_mode_at_zero(self):
        T, t = 1.0, 0.5
        at0 = haar.convolution_quadrature(2, T, t, np.zeros((2, 2)))
        away = haar.convolution_quadrature(2, T, t, 0.8 * np.eye(2))
        assert at0 > away

    def test_interpolation_identity(self):
        T, t = 1.0, 0.5
        y = np.array([-0.5, 0.7])
        est, target = haar.interpolation_identity_check(
            2, T, t, y, haar_samples=200, rng=substream(71))
        assert abs(est.mean - target) <= 4 * est.se
