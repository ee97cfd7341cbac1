import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from netconsensus import kernel


def random_mixtures():
    """Strategy for valid mixtures: a few atoms plus an optional density."""
    return st.tuples(
        st.floats(0.25, 2.0),                              # tau
        st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(0.05, 1.0)),
                 min_size=0, max_size=3),                  # (position frac, mass)
        st.lists(st.floats(0.0, 1.0), min_size=0, max_size=4),
    ).map(lambda t: _build_mixture(*t))


def _build_mixture(tau, atom_specs, density):
    atoms = [(-frac * tau, mass) for frac, mass in atom_specs]
    density = [v if v > 1e-6 else 0.0 for v in density]
    mass = sum(m for _, m in atoms) + sum(density) * tau / max(len(density), 1)
    if mass < 1e-6:
        atoms = [(-tau, 1.0)]
    return kernel.kernel_mixture(atoms, density, tau=tau, renormalize=True)


class TestConstructors:
    def test_discrete_zero_tau(self):
        k = kernel.kernel_discrete(0.0)
        assert k.atoms == ((0.0, 1.0),)
        assert kernel.mean_delay(k) == 0.0

    def test_discrete_negative_rejected(self):
        with pytest.raises(ValueError):
            kernel.kernel_discrete(-0.5)

    def test_uniform_zero_tau_rejected(self):
        with pytest.raises(ValueError):
            kernel.kernel_uniform(0.0)

    def test_mixture_mass_must_be_one(self):
        with pytest.raises(ValueError):
            kernel.kernel_mixture([(-1.0, 0.5)], tau=1.0)

    def test_mixture_renormalize_halves(self):
        k = kernel.kernel_mixture([(-1.0, 1.0), (0.0, 1.0)], tau=1.0,
                                  renormalize=True)
        assert k.atoms == ((-1.0, 0.5), (0.0, 0.5))

    def test_mixture_zero_mass_rejected(self):
        with pytest.raises(ValueError):
            kernel.kernel_mixture([], tau=1.0, renormalize=True)

    def test_mixture_negative_mass_rejected(self):
        with pytest.raises(ValueError):
            kernel.kernel_mixture([(-0.5, -0.2), (0.0, 1.2)], tau=1.0)

    def test_atom_outside_support_rejected(self):
        with pytest.raises(ValueError):
            kernel.kernel_mixture([(-2.0, 1.0)], tau=1.0)


class TestMeanDelay:
    def test_discrete(self):
        assert kernel.mean_delay(kernel.kernel_discrete(0.7)) == pytest.approx(0.7)

    def test_uniform_is_half_tau(self):
        assert kernel.mean_delay(kernel.kernel_uniform(1.0)) == pytest.approx(0.5)

    def test_mixture_weighted_mean(self):
        k = kernel.kernel_mixture([(-1.0, 0.25), (0.0, 0.75)], tau=1.0)
        assert kernel.mean_delay(k) == pytest.approx(0.25)

    def test_two_equal_atoms(self):
        k = kernel.kernel_mixture([(-1.0, 0.5), (0.0, 0.5)], tau=1.0)
        assert kernel.mean_delay(k) == pytest.approx(0.5)


class TestTransform:
    def test_normalization_at_zero(self):
        for k in (kernel.kernel_discrete(1.0), kernel.kernel_uniform(2.0),
                  kernel.kernel_mixture([(-0.3, 0.4)], [0.6, 0.6], tau=1.0)):
            assert kernel.transform_F(k, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_discrete_is_pure_phase(self):
        k = kernel.kernel_discrete(1.0)
        val = kernel.transform_F(k, 1j * math.pi / 2)
        assert val == pytest.approx(-1j, abs=1e-12)

    def test_uniform_closed_form(self):
        k = kernel.kernel_uniform(1.0)
        assert kernel.transform_F(k, 1.0) == pytest.approx(
            1.0 - math.exp(-1.0), rel=1e-12)

    @pytest.mark.parametrize("s", [9.9e-5, 1.01e-4, 1e-7, 0.02])
    def test_uniform_small_s_accuracy(self, s):
        # both evaluation branches must match the reference series of
        # (1 - e^{-s})/s = 1 - s/2 + s^2/6 - s^3/24 + ...
        k = kernel.kernel_uniform(1.0)
        ref = sum((-s) ** j / math.factorial(j + 1) for j in range(12))
        assert kernel.transform_F(k, s) == pytest.approx(ref, abs=1e-12)

    def test_finite_difference_slope_matches_mean(self):
        for k in (kernel.kernel_discrete(1.0), kernel.kernel_uniform(1.0),
                  kernel.kernel_mixture([(-1.0, 0.25), (0.0, 0.75)], tau=1.0)):
            fd = (kernel.transform_F(k, 1e-5) - kernel.transform_F(k, -1e-5)) / 2e-5
            assert fd.real == pytest.approx(-kernel.mean_delay(k), abs=1e-6)
            assert abs(fd.imag) < 1e-12

    def test_deriv_matches_finite_difference_away_from_zero(self):
        k = kernel.kernel_mixture([(-0.4, 0.3)], [0.5, 0.9], tau=1.0,
                                  renormalize=True)
        for s in (0.8, -0.6 + 1.1j, 2.0j):
            fd = (kernel.transform_F(k, s + 1e-6) - kernel.transform_F(k, s - 1e-6)) / 2e-6
            assert kernel.transform_F_deriv(k, s) == pytest.approx(fd, abs=1e-7)

    @given(random_mixtures())
    def test_normalization_property(self, k):
        assert kernel.transform_F(k, 0.0) == pytest.approx(1.0, abs=1e-12)
        fd = (kernel.transform_F(k, 1e-5) - kernel.transform_F(k, -1e-5)) / 2e-5
        assert fd.real == pytest.approx(-kernel.mean_delay(k), abs=1e-6)


class TestQuadratureWeights:
    def test_discrete_on_node(self):
        u = kernel.quadrature_weights(kernel.kernel_discrete(1.0), 0.25)
        np.testing.assert_allclose(u, [0, 0, 0, 0, 1.0], atol=1e-15)

    def test_uniform_trapezoid(self):
        u = kernel.quadrature_weights(kernel.kernel_uniform(1.0), 0.25)
        np.testing.assert_allclose(u, [.125, .25, .25, .25, .125], atol=1e-15)

    def test_weights_sum_to_one(self):
        k = kernel.kernel_mixture([(-0.37, 0.3)], [0.2, 1.2, 0.7], tau=1.0,
                                  renormalize=True)
        u = kernel.quadrature_weights(k, 0.125)
        assert u.sum() == pytest.approx(1.0, abs=1e-14)

    def test_constant_history_reproduced_exactly(self):
        k = kernel.kernel_mixture([(-0.61, 0.4)], [0.9, 0.3], tau=1.0,
                                  renormalize=True)
        u = kernel.quadrature_weights(k, 0.05)
        assert float(u @ np.full(u.size, 3.7)) == pytest.approx(3.7, abs=1e-13)

    def test_off_node_atom_splits_mass_and_mean(self):
        k = kernel.kernel_mixture([(-0.3, 1.0)], tau=1.0)
        u = kernel.quadrature_weights(k, 0.25)
        assert u.sum() == pytest.approx(1.0, abs=1e-14)
        grid = -0.25 * np.arange(5)
        # linear splitting preserves the mean exactly
        assert float(u @ -grid) == pytest.approx(0.3, abs=1e-14)

    def test_linear_history_second_order(self):
        # misaligned density: the cell-averaging error scales like h^2
        k = kernel.kernel_mixture([], [0.3, 1.5, 1.2], tau=1.0,
                                  renormalize=True)
        tbar = kernel.mean_delay(k)

        def err(h):
            u = kernel.quadrature_weights(k, h)
            grid = -h * np.arange(u.size)
            return abs(float(u @ grid) + tbar)

        e1, e2 = err(0.25), err(0.125)
        assert e1 > 1e-6  # misalignment makes the error visible
        assert 2.5 < e1 / e2 < 6.5

    def test_step_must_divide_tau(self):
        with pytest.raises(ValueError):
            kernel.quadrature_weights(kernel.kernel_uniform(1.0), 0.3)

    def test_step_larger_than_support_rejected(self):
        with pytest.raises(ValueError):
            kernel.quadrature_weights(kernel.kernel_uniform(0.5), 2.0)

    def test_zero_delay_kernel(self):
        u = kernel.quadrature_weights(kernel.kernel_discrete(0.0), 0.1)
        np.testing.assert_allclose(u, [1.0])


class TestGridProfile:
    def test_uniform_profile_density(self):
        p = kernel.grid_profile(kernel.kernel_uniform(1.0), 0.25)
        np.testing.assert_allclose(p.cell_density, [1.0] * 4)
        np.testing.assert_allclose(p.node_mass, np.zeros(5))

    def test_misaligned_density_preserves_mass(self):
        k = kernel.kernel_mixture([], [0.5, 1.5], tau=1.0, renormalize=True)
        p = kernel.grid_profile(k, 0.2)
        assert p.node_mass.sum() + p.cell_density.sum() * 0.2 == pytest.approx(1.0)
