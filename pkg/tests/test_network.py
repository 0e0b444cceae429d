import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tradenet.errors import ValidationError
from tradenet.network import (
    AdjacencyView,
    DirectedFlowMatrix,
    WeightedNetwork,
    adjacency,
    assemble_residual_network,
    density,
    symmetrize,
)

from conftest import make_network


def flows_from(values, year=2000):
    return DirectedFlowMatrix(values=np.asarray(values, dtype=float), year=year)


class TestDirectedFlowMatrix:
    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            flows_from([[0, -1], [0, 0]])

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(ValidationError):
            flows_from([[1, 2], [3, 0]])

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            flows_from([[0, np.nan], [0, 0]])


class TestSymmetrize:
    def test_arithmetic_two_flows(self):
        # 4 one way, 2 the other: pre-normalization 3, normalized to 1
        f = flows_from([[0, 4], [2, 0]])
        net = symmetrize(f, mode="arithmetic")
        assert net.normalizer == 3.0
        assert net.weights[0, 1] == 1.0
        assert net.kind == "original"

    def test_geometric_two_flows(self):
        f = flows_from([[0, 4], [2, 0]])
        net = symmetrize(f, mode="geometric")
        assert net.normalizer == pytest.approx(np.sqrt(8.0), abs=1e-12)

    def test_geometric_one_sided_flow_vanishes(self):
        f = flows_from([[0, 4, 0], [0, 0, 1], [0, 2, 0]])
        net = symmetrize(f, mode="geometric")
        assert net.weights[0, 1] == 0.0
        assert net.weights[1, 2] > 0

    def test_symmetric_input_is_rescaled_input(self):
        rng = np.random.default_rng(0)
        v = rng.random((5, 5))
        v = np.triu(v, 1)
        v = v + v.T
        net = symmetrize(flows_from(v))
        np.testing.assert_allclose(net.weights, v / v.max(), rtol=0, atol=0)

    def test_all_zero_flagged_not_error(self):
        net = symmetrize(flows_from(np.zeros((4, 4))))
        assert net.degenerate
        assert net.normalizer == 0.0
        assert net.weights.sum() == 0.0

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            symmetrize(flows_from(np.zeros((2, 2))), mode="harmonic")

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(3, 8))
    def test_invariants_hold(self, seed, n):
        rng = np.random.default_rng(seed)
        v = rng.random((n, n)) * (rng.random((n, n)) < 0.7)
        np.fill_diagonal(v, 0.0)
        net = symmetrize(flows_from(v))
        w = net.weights
        assert np.array_equal(w, w.T)
        assert np.all(np.diagonal(w) == 0)
        assert w.min() >= 0 and w.max() <= 1
        if w.max() > 0:
            assert w.max() == 1.0
        # ratio preservation between any two positive entries
        pre = (v + v.T) / 2
        ii, jj = np.nonzero(np.triu(pre, 1))
        if ii.size >= 2:
            a, b = (ii[0], jj[0]), (ii[1], jj[1])
            assert w[a] / w[b] == pytest.approx(pre[a] / pre[b], rel=1e-12)


class TestAdjacencyDensity:
    def test_triangle_thresholds(self):
        net = make_network([[0, 0.2, 0.5], [0.2, 0, 1.0], [0.5, 1.0, 0]])
        assert adjacency(net, 0.0).bits.sum() == 6  # 3 undirected edges
        assert adjacency(net, 0.3).bits.sum() == 4

    def test_empty_network_no_edges(self):
        net = make_network(np.zeros((3, 3)))
        assert adjacency(net).bits.sum() == 0

    def test_negative_threshold_rejected(self):
        net = make_network(np.zeros((3, 3)))
        with pytest.raises(ValidationError):
            adjacency(net, -0.1)

    def test_adjacency_matches_invariant(self):
        rng = np.random.default_rng(3)
        upper = np.triu(rng.random((6, 6)), 1)
        net = make_network(upper + upper.T)
        view = adjacency(net, 0.4)
        expect = net.weights > 0.4
        np.fill_diagonal(expect, False)
        assert np.array_equal(view.bits, expect)
        assert isinstance(view, AdjacencyView)

    def test_density_complete_and_empty(self):
        assert density(make_network(1 - np.eye(5))) == 1.0
        assert density(make_network(np.zeros((5, 5)))) == 0.0

    def test_density_rejects_single_node(self):
        with pytest.raises(ValidationError):
            density(make_network(np.zeros((1, 1))))

    def test_density_counts_positive_entries(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 0.5
        w[2, 3] = w[3, 2] = 1.0
        assert density(make_network(w)) == pytest.approx(2 / 6)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_density_monotone_in_threshold(self, seed):
        rng = np.random.default_rng(seed)
        w = np.triu(rng.random((7, 7)) * (rng.random((7, 7)) < 0.6), 1)
        net = make_network(w + w.T)
        counts = [adjacency(net, t).bits.sum() for t in (0.0, 0.2, 0.5, 0.9)]
        assert all(a >= b for a, b in zip(counts, counts[1:]))


class TestResidualAssembly:
    @staticmethod
    def _fitted(seed=0, n=12, zero_inflation=0.3):
        from tradenet.design import build_design
        from tradenet.gravity import fit_zippml
        from tradenet.synthetic import synthetic_world

        world = synthetic_world(
            n, seed=seed, zero_inflation=zero_inflation, country_effect_sd=0.0
        )
        net = symmetrize(world.flows)
        design = build_design(
            world.countries, world.dyads, net, include_fixed_effects=False
        )
        return fit_zippml(design), net

    def test_identity_dyad_gets_unit_residual(self):
        from tradenet.network import assemble_residual_network

        fit, net = self._fitted()
        # force one dyad's observed flow equal to its fitted mean
        k = int(np.argmax(fit.response > 0))
        i, j = int(fit.dyad_i[k]), int(fit.dyad_j[k])
        resid = np.where(fit.response > 0, fit.response / fit.fitted_means, 0.0)
        assert fit.residuals[k] == pytest.approx(resid[k], rel=1e-12)
        net_e = assemble_residual_network(fit, net)
        expect = resid[k] / resid.max()
        assert net_e.weights[i, j] == pytest.approx(expect, rel=1e-12)

    def test_zero_dyads_stay_zero_in_preserve_mode(self):
        from tradenet.network import assemble_residual_network

        fit, net = self._fitted()
        net_e = assemble_residual_network(fit, net, zero_mode="preserve")
        zeros = fit.response == 0
        assert np.all(
            net_e.weights[fit.dyad_i[zeros], fit.dyad_j[zeros]] == 0.0
        )
        assert net_e.kind == "residual"
        assert density(net_e) == density(net)

    def test_zip_prune_removes_likely_zero_links(self):
        from tradenet.network import assemble_residual_network

        fit, net = self._fitted(seed=3, n=16, zero_inflation=0.4)
        pruned = assemble_residual_network(
            fit, net, zero_mode="zip_prune", prune_threshold=0.5
        )
        kept = assemble_residual_network(fit, net, zero_mode="preserve")
        assert density(pruned) <= density(kept)
        cut = (fit.zero_probabilities > 0.5) & (fit.response > 0)
        if cut.any():
            assert np.all(
                pruned.weights[fit.dyad_i[cut], fit.dyad_j[cut]] == 0.0
            )
        assert pruned.meta["zero_mode"] == "zip_prune"

    def test_zip_prune_needs_threshold_and_zero_stage(self):
        from tradenet.network import assemble_residual_network

        fit, net = self._fitted()
        with pytest.raises(ValidationError):
            assemble_residual_network(fit, net, zero_mode="zip_prune")

    def test_index_mismatch_rejected(self):
        from tradenet.network import assemble_residual_network

        fit, _ = self._fitted(n=12)
        other = make_network(np.zeros((9, 9)))
        with pytest.raises(ValidationError):
            assemble_residual_network(fit, other)

    def test_invariants_of_residual_network(self):
        fit, net = self._fitted(seed=5, n=18)
        from tradenet.network import assemble_residual_network

        net_e = assemble_residual_network(fit, net)
        w = net_e.weights
        assert np.array_equal(w, w.T)
        assert np.all(np.diagonal(w) == 0)
        assert w.max() == 1.0
        assert net_e.normalizer > 0


class TestWeightedNetworkValidation:
    def test_rejects_asymmetric(self):
        w = np.zeros((3, 3))
        w[0, 1] = 0.5
        with pytest.raises(ValidationError):
            WeightedNetwork(w)

    def test_rejects_weight_above_one(self):
        w = np.zeros((2, 2))
        w[0, 1] = w[1, 0] = 1.5
        with pytest.raises(ValidationError):
            WeightedNetwork(w)

    def test_rejects_nonunit_maximum(self):
        w = np.zeros((2, 2))
        w[0, 1] = w[1, 0] = 0.4
        with pytest.raises(ValidationError):
            WeightedNetwork(w)

    def test_weights_are_immutable(self, triangle):
        with pytest.raises(ValueError):
            triangle.weights[0, 1] = 0.0

    def test_flows_recover_magnitudes(self):
        f = flows_from([[0, 10], [4, 0]])
        net = symmetrize(f)
        assert net.flows[0, 1] == pytest.approx(7.0)
