import cmath
import math

import numpy as np
import pytest

from netconsensus import dde, kernel, netgraph, spectral
from netconsensus.errors import AmbiguityError

from conftest import random_h1_graph


@pytest.fixture
def disconnected():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 1.0
    w[2, 3] = w[3, 2] = 1.0
    return netgraph.laplacian(netgraph.WeightedDigraph(w))


class TestChiPropagation:
    def test_zero_is_always_a_root(self, rng):
        for _ in range(5):
            ld = netgraph.laplacian(random_h1_graph(rng, 5))
            kern = kernel.kernel_uniform(0.8)
            assert abs(spectral.chi_propagation(ld, kern, 0.0)) < 1e-9

    def test_two_node_hand_value(self, two_node):
        # (s + 1)^2 - F(s)^2 at s = 1 with a sharp unit delay
        val = spectral.chi_propagation(two_node, kernel.kernel_discrete(1.0), 1.0)
        assert val == pytest.approx(4.0 - math.exp(-2.0), abs=1e-12)

    def test_zero_delay_reduces_to_shifted_laplacian(self, two_node):
        kern = kernel.kernel_discrete(0.0)
        for s in (0.5, 1.0 + 0.7j, -0.3 - 2.1j):
            expected = np.linalg.det(
                s * np.eye(2) + two_node.laplacian.astype(complex))
            assert spectral.chi_propagation(two_node, kern, s) == \
                pytest.approx(expected, abs=1e-10)

    def test_self_weights_rejected(self):
        ld = netgraph.laplacian(netgraph.WeightedDigraph(
            [[0.5, 1.0], [1.0, 0.0]]))
        with pytest.raises(ValueError):
            spectral.chi_propagation(ld, kernel.kernel_discrete(1.0), 0.0)


class TestChiProcessing:
    def test_zero_is_always_a_root(self, two_node):
        assert abs(spectral.chi_processing(
            two_node, kernel.kernel_discrete(0.7), 0.0)) < 1e-14

    def test_two_node_closed_form(self, two_node):
        # eigenvalues 0 and 2 factor the determinant: s (s + 2 F(s))
        tau = 0.6
        kern = kernel.kernel_discrete(tau)
        for s in (0.4, 1.0 + 1.0j, -0.2 + 3.0j):
            expected = s * (s + 2.0 * cmath.exp(-s * tau))
            assert spectral.chi_processing(two_node, kern, s) == \
                pytest.approx(expected, abs=1e-10)

    def test_critical_root_on_imaginary_axis(self, two_node):
        kern = kernel.kernel_discrete(math.pi / 4.0)
        assert abs(spectral.chi_processing(two_node, kern, 2.0j)) < 1e-10


class TestChiPrimeZero:
    def test_two_node_hand_values(self, two_node):
        kern = kernel.kernel_discrete(1.0)
        # adj(L) = [[1,1],[1,1]]: trace(adj (I + D)) = 4, trace(adj) = 2
        assert spectral.chi_prime_zero(two_node, kern, "propagation") == \
            pytest.approx(4.0)
        assert spectral.chi_prime_zero(two_node, kern, "processing") == \
            pytest.approx(2.0)

    @pytest.mark.parametrize("model", ["propagation", "processing"])
    @pytest.mark.parametrize("kern_factory", [
        lambda: kernel.kernel_discrete(0.8),
        lambda: kernel.kernel_uniform(0.8)], ids=["discrete", "uniform"])
    def test_matches_finite_differences(self, rng, model, kern_factory):
        kern = kern_factory()
        chi = {"propagation": spectral.chi_propagation,
               "processing": spectral.chi_processing}[model]
        for _ in range(6):
            n = int(rng.integers(2, 7))
            ld = netgraph.laplacian(random_h1_graph(rng, n))
            analytic = spectral.chi_prime_zero(ld, kern, model)
            step = 1e-5
            fd = (chi(ld, kern, step) - chi(ld, kern, -step)) / (2 * step)
            assert abs(fd.imag) < 1e-9 * max(1.0, abs(analytic))
            assert fd.real == pytest.approx(analytic, rel=1e-5)

    def test_requires_simple_zero(self, disconnected):
        with pytest.raises(AmbiguityError):
            spectral.chi_prime_zero(
                disconnected, kernel.kernel_discrete(0.5), "processing")

    def test_unknown_model(self, two_node):
        with pytest.raises(ValueError):
            spectral.chi_prime_zero(
                two_node, kernel.kernel_discrete(0.5), "laplace")


class TestScalarRoots:
    def test_critical_pair_at_hayes_point(self):
        roots = spectral.scalar_roots(2.0, kernel.kernel_discrete(math.pi / 4))
        assert roots, "expected roots inside the default box"
        closest = min(roots, key=lambda r: abs(r - 2.0j))
        assert abs(closest - 2.0j) < 1e-8
        assert any(abs(r + 2.0j) < 1e-8 for r in roots)

    def test_stable_below_threshold(self):
        roots = spectral.scalar_roots(2.0, kernel.kernel_discrete(0.5))
        assert roots
        assert all(r.real < -1e-10 for r in roots)

    def test_unstable_above_threshold(self):
        roots = spectral.scalar_roots(2.0, kernel.kernel_discrete(0.9))
        assert any(r.real > 1e-10 for r in roots)

    def test_no_delay_single_root(self):
        assert spectral.scalar_roots(3.0, kernel.kernel_discrete(0.0)) == [-3.0]

    def test_residuals_small(self):
        kern = kernel.kernel_uniform(1.2)
        for lam in (0.7, 2.0):
            for r in spectral.scalar_roots(lam, kern):
                assert abs(r + lam * kernel.transform_F(kern, r)) < 1e-8

    def test_sorted_by_descending_real_part(self):
        roots = spectral.scalar_roots(2.0, kernel.kernel_discrete(0.8))
        reals = [r.real for r in roots]
        assert reals == sorted(reals, reverse=True)

    def test_hayes_bracketing_property(self):
        for lam in (0.5, 1.0, 2.0):
            crit = spectral.hayes_threshold(lam)
            below = spectral.scalar_roots(lam, kernel.kernel_discrete(0.9 * crit))
            above = spectral.scalar_roots(lam, kernel.kernel_discrete(1.1 * crit))
            assert all(r.real < -1e-10 for r in below)
            assert any(r.real > 1e-10 for r in above)

    def test_zero_lambda_rejected(self):
        with pytest.raises(ValueError):
            spectral.scalar_roots(0.0, kernel.kernel_discrete(1.0))


class TestHayesThreshold:
    def test_reference_values(self):
        assert spectral.hayes_threshold(2.0) == pytest.approx(math.pi / 4)
        assert spectral.hayes_threshold(1.0) == pytest.approx(math.pi / 2)

    def test_scaling(self):
        assert spectral.hayes_threshold(4.0) == \
            pytest.approx(spectral.hayes_threshold(2.0) / 2)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            spectral.hayes_threshold(0.0)


class TestProcessingVerdict:
    def test_below_threshold(self, two_node):
        report = spectral.processing_verdict(two_node, 0.7)
        assert report.verdict == "consensus"
        assert report.threshold == pytest.approx(math.pi / 4)
        assert report.rightmost_nonzero_real_part < 0

    def test_above_threshold(self, two_node):
        report = spectral.processing_verdict(two_node, 0.9)
        assert report.verdict == "no-consensus"
        assert report.rightmost_nonzero_real_part > 0

    def test_complete_graph_thresholds(self):
        ld = netgraph.laplacian(netgraph.preset_complete(3, 1.0))
        report = spectral.processing_verdict(ld, 0.1)
        assert report.threshold == pytest.approx(math.pi / 6)
        assert report.sufficient_delay_bound == pytest.approx(math.pi / 8)
        assert report.verdict == "consensus"

    def test_asymmetric_is_inconclusive(self):
        ld = netgraph.laplacian(netgraph.preset_ring(3, 1.0))
        report = spectral.processing_verdict(ld, 0.3)
        assert report.verdict == "inconclusive"
        assert report.threshold is None
        assert "symmetric" in report.notes

    def test_h1_failure_raises(self, disconnected):
        with pytest.raises(AmbiguityError):
            spectral.processing_verdict(disconnected, 0.3)

    def test_chi_prime_zero_recorded(self, two_node):
        report = spectral.processing_verdict(two_node, 0.5)
        assert report.chi_prime_zero == pytest.approx(2.0)


class TestPropagationVerdict:
    def test_large_delay_still_consensus(self, two_node):
        report = spectral.propagation_verdict(
            two_node, kernel.kernel_discrete(10.0))
        assert report.verdict == "consensus"
        assert report.h1

    def test_disconnected_no_consensus(self, disconnected):
        report = spectral.propagation_verdict(
            disconnected, kernel.kernel_discrete(1.0))
        assert report.verdict == "no-consensus"
        assert "multiplicity 2" in report.notes

    def test_chain_with_uniform_kernel(self):
        ld = netgraph.laplacian(netgraph.preset_chain(4, 1.0))
        report = spectral.propagation_verdict(ld, kernel.kernel_uniform(1.0))
        assert report.verdict == "consensus"

    def test_scan_sees_only_left_half_plane(self, two_node):
        report = spectral.propagation_verdict(
            two_node, kernel.kernel_discrete(1.0))
        assert report.rightmost_nonzero_real_part < -1e-6


class TestSingleNode:
    def test_processing_verdict_no_coupling_modes(self):
        ld = netgraph.laplacian(netgraph.WeightedDigraph([[0.0]]))
        report = spectral.processing_verdict(ld, 5.0)
        assert report.verdict == "consensus"
        assert report.threshold == math.inf
        assert report.rightmost_nonzero_real_part == -math.inf

    def test_propagation_verdict_trivial(self):
        ld = netgraph.laplacian(netgraph.WeightedDigraph([[0.0]]))
        report = spectral.propagation_verdict(
            ld, kernel.kernel_discrete(0.5))
        assert report.verdict == "consensus"
        # chi(s) = s for one uncoupled node, so the slope at zero is 1
        assert report.chi_prime_zero == pytest.approx(1.0)


class TestCrossModuleConsistency:
    def test_simulation_matches_verdict_around_threshold(self, two_node):
        crit = spectral.hayes_threshold(2.0)
        for factor, expect_consensus in ((0.9, True), (1.1, False)):
            tau = factor * crit
            report = spectral.processing_verdict(two_node, tau)
            assert (report.verdict == "consensus") is expect_consensus
            h = tau / 64.0
            traj = dde.simulate_processing(
                two_node, kernel.kernel_discrete(tau),
                dde.constant_history([0.0, 1.0]), 150.0, h)
            detected = dde.detect_consensus(traj, tol=1e-5, window=5.0)
            assert (detected is not None) is expect_consensus
