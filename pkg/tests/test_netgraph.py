import numpy as np
import pytest
from hypothesis import given, strategies as st

from netconsensus import matcore, netgraph
from netconsensus.errors import DimensionError

from conftest import random_nonnegative_graph


def weight_tables(max_n=8):
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(
            st.lists(st.floats(0, 3, allow_nan=False), min_size=n, max_size=n),
            min_size=n, max_size=n))


class TestWeightedDigraph:
    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            netgraph.WeightedDigraph([[0.0, -0.1], [0.0, 0.0]])

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            netgraph.WeightedDigraph(np.ones((2, 3)))

    def test_weights_are_frozen(self):
        g = netgraph.WeightedDigraph([[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            g.weights[0, 1] = 5.0


class TestLaplacian:
    def test_two_node_symmetric(self):
        ld = netgraph.laplacian(netgraph.WeightedDigraph([[0, 1], [1, 0]]))
        np.testing.assert_allclose(ld.laplacian, [[1, -1], [-1, 1]])
        np.testing.assert_allclose(ld.degrees, [1, 1])
        assert ld.delta == 1.0

    def test_single_node(self):
        ld = netgraph.laplacian(netgraph.WeightedDigraph([[0.0]]))
        np.testing.assert_allclose(ld.laplacian, [[0.0]])
        assert ld.delta == 0.0

    def test_star_degrees(self):
        ld = netgraph.laplacian(netgraph.preset_star(4, 1.0))
        np.testing.assert_allclose(ld.degrees, [0, 1, 1, 1])
        assert ld.delta == 1.0

    def test_self_loop_does_not_count_toward_delta(self):
        w = np.array([[0.5, 1.0], [1.0, 0.0]])
        ld = netgraph.laplacian(netgraph.WeightedDigraph(w))
        np.testing.assert_allclose(ld.degrees, [1.5, 1.0])
        assert ld.delta == 1.0

    def test_adjacency_roundtrip(self, rng):
        g = random_nonnegative_graph(rng, 5)
        ld = netgraph.laplacian(g)
        np.testing.assert_allclose(ld.adjacency, g.weights, atol=1e-14)

    @given(weight_tables())
    def test_zero_row_sums(self, rows):
        ld = netgraph.laplacian(netgraph.WeightedDigraph(rows))
        np.testing.assert_allclose(
            ld.laplacian @ np.ones(ld.n), np.zeros(ld.n), atol=1e-12)


class TestGershgorin:
    def test_two_node(self, two_node):
        spec = matcore.eigenvalues(two_node.laplacian)
        assert netgraph.gershgorin_check(two_node, spec)

    def test_three_cycle(self):
        ld = netgraph.laplacian(netgraph.preset_ring(3, 1.0))
        spec = matcore.eigenvalues(ld.laplacian)
        # |1.5 +/- 0.866i - 1| = 1 = Delta, right on the disc boundary
        assert netgraph.gershgorin_check(ld, spec)

    def test_random_graphs_always_inside(self, rng):
        for _ in range(25):
            n = int(rng.integers(1, 9))
            ld = netgraph.laplacian(random_nonnegative_graph(rng, n))
            spec = matcore.eigenvalues(ld.laplacian)
            assert netgraph.gershgorin_check(ld, spec, tol=1e-9)

    def test_violation_detected(self, two_node):
        fake = matcore.Spectrum(eigenvalues=(complex(-1.0), complex(2.0)),
                                zero_multiplicity=0)
        assert not netgraph.gershgorin_check(two_node, fake)


class TestPresets:
    def test_chain_edges(self):
        g = netgraph.preset_chain(3, 1.0)
        expected = np.zeros((3, 3))
        expected[1, 0] = 1.0
        expected[2, 1] = 1.0
        np.testing.assert_allclose(g.weights, expected)

    def test_chain_minimal(self):
        g = netgraph.preset_chain(2, 0.5)
        assert g.weights[1, 0] == 0.5
        assert np.count_nonzero(g.weights) == 1

    def test_chain_eigenvalues_lower_triangular(self):
        # the repeated eigenvalue is defective, so the numerical cluster
        # has radius around eps**(1/multiplicity); 1e-6 is ample here
        gain = 0.8
        ld = netgraph.laplacian(netgraph.preset_chain(5, gain))
        vals = np.array(matcore.eigenvalues(ld.laplacian).eigenvalues)
        np.testing.assert_allclose(
            sorted(vals.real), [0.0] + [gain] * 4, atol=1e-6)
        np.testing.assert_allclose(vals.imag, 0.0, atol=1e-6)

    def test_ring_is_directed_cycle(self):
        g = netgraph.preset_ring(3, 1.0)
        assert g.weights[0, 1] == 1.0
        assert g.weights[1, 2] == 1.0
        assert g.weights[2, 0] == 1.0
        assert np.count_nonzero(g.weights) == 3

    def test_complete_delta(self):
        ld = netgraph.laplacian(netgraph.preset_complete(3, 1.0))
        assert ld.delta == 2.0

    def test_star_with_gain(self):
        ld = netgraph.laplacian(netgraph.preset_star(3, 2.0))
        np.testing.assert_allclose(ld.degrees, [0.0, 2.0, 2.0])

    def test_presets_deterministic(self):
        a = netgraph.preset_complete(5, 0.3)
        b = netgraph.preset_complete(5, 0.3)
        np.testing.assert_array_equal(a.weights, b.weights)

    @pytest.mark.parametrize("factory", [
        netgraph.preset_chain, netgraph.preset_ring,
        netgraph.preset_star, netgraph.preset_complete])
    def test_small_n_rejected(self, factory):
        with pytest.raises(ValueError):
            factory(1, 1.0)


class TestLinearize:
    def test_unit_slope_identity(self):
        base = [[0.0, 2.0], [1.0, 0.0]]
        g = netgraph.linearize(base, 1.0)
        np.testing.assert_allclose(g.weights, base)

    def test_half_slope_scales_gains(self):
        g = netgraph.linearize(netgraph.preset_chain(3, 1.0).weights, 0.5)
        assert g.weights[1, 0] == 0.5

    def test_eigenvalues_scale_with_slope(self, rng):
        base = random_nonnegative_graph(rng, 4).weights
        v1 = np.array(matcore.eigenvalues(
            netgraph.laplacian(netgraph.linearize(base, 1.0)).laplacian
        ).eigenvalues)
        v2 = np.array(matcore.eigenvalues(
            netgraph.laplacian(netgraph.linearize(base, 2.5)).laplacian
        ).eigenvalues)
        np.testing.assert_allclose(2.5 * v1, v2, atol=1e-9)

    def test_negative_base_rejected(self):
        with pytest.raises(ValueError):
            netgraph.linearize([[0.0, -1.0], [0.0, 0.0]], 1.0)

    def test_zero_slope_rejected(self):
        with pytest.raises(ValueError):
            netgraph.linearize([[0.0, 1.0], [0.0, 0.0]], 0.0)
