"""Graph generation, weighting, transition models, and file round trips."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walklab import graphs
from walklab.errors import DegenerateInput, InvalidArgument


class TestErdosRenyi:
    def test_exact_edge_count_and_simplicity(self):
        g = graphs.gen_erdos_renyi(100, 700, seed=0)
        assert g.n_edges == 700
        assert (g.edges[:, 0] < g.edges[:, 1]).all()
        assert len(np.unique(g.edges, axis=0)) == 700

    def test_deterministic_in_seed(self):
        a = graphs.gen_erdos_renyi(60, 150, seed=5)
        b = graphs.gen_erdos_renyi(60, 150, seed=5)
        c = graphs.gen_erdos_renyi(60, 150, seed=6)
        assert np.array_equal(a.edges, b.edges)
        assert not np.array_equal(a.edges, c.edges)

    def test_complete_graph_edge_budget(self):
        g = graphs.gen_erdos_renyi(10, 45, seed=0)
        assert g.n_edges == 45
        with pytest.raises(InvalidArgument):
            graphs.gen_erdos_renyi(10, 46, seed=0)

    def test_degree_sum_is_twice_edges(self):
        g = graphs.gen_erdos_renyi(80, 400, seed=3)
        assert g.degrees().sum() == 2 * g.n_edges


class TestBarabasiAlbert:
    def test_edge_count_formula(self):
        # complete seed on m+1 nodes, then m edges per new node
        for n, m in [(50, 3), (200, 6), (100, 1)]:
            g = graphs.gen_barabasi_albert(n, m, seed=0)
            assert g.n_edges == m * (m + 1) // 2 + (n - m - 1) * m

    def test_min_degree_is_m(self):
        g = graphs.gen_barabasi_albert(300, 4, seed=1)
        assert g.degrees().min() >= 4

    def test_heavy_tail_exists(self):
        g = graphs.gen_barabasi_albert(2000, 4, seed=2)
        deg = g.degrees()
        # preferential attachment produces hubs far above the mean degree
        assert deg.max() > 8 * deg.mean()


class TestWeights:
    def test_weight_table_is_power_law(self):
        pmf = graphs.power_law_weight_table(kappa=2.0, k_min=1, k_max=100)
        ks = np.arange(1, 101, dtype=float)
        expected = ks**-2.0
        expected /= expected.sum()
        np.testing.assert_allclose(pmf, expected, rtol=1e-12)

    def test_kappa_zero_is_uniform(self):
        pmf = graphs.power_law_weight_table(kappa=0.0, k_min=3, k_max=7)
        np.testing.assert_allclose(pmf, 0.2)

    def test_assign_weights_range_and_determinism(self, er_small):
        wg = graphs.assign_weights(er_small, kappa=1.5, k_min=2, k_max=50, seed=9)
        for w in (wg.weights_uv, wg.weights_vu):
            assert w.min() >= 2 and w.max() <= 50
        wg2 = graphs.assign_weights(er_small, kappa=1.5, k_min=2, k_max=50, seed=9)
        assert np.array_equal(wg.weights_uv, wg2.weights_uv)

    def test_directed_weights_independent(self, er_small):
        wg = graphs.assign_weights(er_small, kappa=1.0, k_min=1, k_max=1000, seed=0)
        assert not np.array_equal(wg.weights_uv, wg.weights_vu)

    @given(kappa=st.floats(0.0, 4.0), k_max=st.integers(2, 200))
    @settings(max_examples=30, deadline=None)
    def test_weight_table_normalized(self, kappa, k_max):
        pmf = graphs.power_law_weight_table(kappa, 1, k_max)
        assert pmf.shape == (k_max,)
        assert abs(pmf.sum() - 1.0) < 1e-12
        # heavier kappa never increases the mass of the largest weight
        assert pmf[-1] <= pmf[0] + 1e-15


class TestTransitionModel:
    def test_rows_sum_to_one(self, weighted_model):
        weighted_model.validate()
        row_sums = np.asarray(weighted_model.W.sum(axis=1)).ravel()
        np.testing.assert_allclose(row_sums, 1.0, atol=1e-12)

    def test_initial_distribution_proportional_to_row_weight(self, er_small):
        wg = graphs.assign_weights(er_small, kappa=1.0, k_min=1, k_max=10, seed=4)
        model = graphs.build_transition_model(wg)
        # reconstruct total out-weight per node from the directed weights
        out = np.zeros(er_small.n_nodes)
        np.add.at(out, er_small.edges[:, 0], wg.weights_uv)
        np.add.at(out, er_small.edges[:, 1], wg.weights_vu)
        np.testing.assert_allclose(model.M, out / out.sum(), atol=1e-12)

    def test_unbiased_reduction(self, er_small, er_model):
        deg = er_small.degrees().astype(float)
        np.testing.assert_allclose(er_model.M, deg / deg.sum(), atol=1e-14)
        u = int(np.argmax(deg))
        _, probs = er_model.row(u)
        np.testing.assert_allclose(probs, 1.0 / deg[u], atol=1e-14)

    def test_kappa_zero_unit_weights_match_unbiased(self, er_small, er_model):
        wg = graphs.assign_weights(er_small, kappa=0.0, k_min=1, k_max=1, seed=0)
        model = graphs.build_transition_model(wg)
        np.testing.assert_allclose(
            model.W.toarray(), er_model.W.toarray(), atol=1e-14
        )

    def test_isolated_node_rejected(self):
        g = graphs.Graph(4, np.array([[0, 1], [1, 2]]))  # node 3 isolated
        wg = graphs.assign_weights(g, kappa=0.0, k_min=1, k_max=1, seed=0)
        with pytest.raises(DegenerateInput):
            graphs.build_transition_model(wg)

    def test_row_sum_tolerance_enforced(self):
        w = np.array([[0.5, 0.51], [0.5, 0.5]])
        with pytest.raises(InvalidArgument):
            graphs.TransitionModel(2, w, np.array([0.5, 0.5]))


class TestBigram:
    def test_from_tokens_counts(self):
        counts = graphs.BigramCounts.from_tokens([0, 1, 0, 1, 2], vocab_size=3)
        as_dict = {tuple(p): c for p, c in zip(counts.pairs, counts.counts)}
        assert as_dict == {(0, 1): 2, (1, 0): 1, (1, 2): 1}

    def test_min_count_filter(self):
        counts = graphs.BigramCounts.from_tokens([0, 1, 0, 1, 0, 2], vocab_size=3)
        model = graphs.build_bigram_model(counts, min_count=1)
        # (0,2) and (1,0)... (1,0) occurs twice, (0,2) once -> dropped
        assert model.W[0, 2] == 0.0
        assert model.W[0, 1] == 1.0

    def test_zero_rows_allowed_with_zero_mass(self):
        counts = graphs.BigramCounts(3, np.array([[0, 1]]), np.array([5]))
        model = graphs.build_bigram_model(counts, min_count=0)
        assert model.M[2] == 0.0
        assert np.asarray(model.W.sum(axis=1)).ravel()[2] == 0.0

    def test_probabilities_are_count_ratios(self):
        counts = graphs.BigramCounts(
            2, np.array([[0, 0], [0, 1]]), np.array([3, 1])
        )
        model = graphs.build_bigram_model(counts, min_count=0)
        assert model.W[0, 0] == pytest.approx(0.75)
        assert model.W[0, 1] == pytest.approx(0.25)


class TestRoundTrips:
    def test_graph_file(self, tmp_path, er_small):
        path = tmp_path / "g.txt"
        graphs.write_graph(path, er_small)
        g2, wg2 = graphs.read_graph(path)
        assert wg2 is None
        assert g2.n_nodes == er_small.n_nodes
        assert np.array_equal(g2.edges, er_small.edges)
        header = path.read_text().splitlines()[0]
        assert header == f"#nodes={er_small.n_nodes} edges={er_small.n_edges}"

    def test_weighted_graph_file(self, tmp_path, er_small):
        wg = graphs.assign_weights(er_small, kappa=1.0, k_min=1, k_max=9, seed=1)
        path = tmp_path / "g.txt"
        graphs.write_graph(path, er_small, wg)
        _, wg2 = graphs.read_graph(path)
        assert np.array_equal(wg.weights_uv, wg2.weights_uv)
        assert np.array_equal(wg.weights_vu, wg2.weights_vu)

    def test_transition_model_binary(self, tmp_path, weighted_model):
        path = tmp_path / "m.sltm"
        graphs.write_transition_model(path, weighted_model)
        m2 = graphs.read_transition_model(path)
        assert m2.n_nodes == weighted_model.n_nodes
        np.testing.assert_array_equal(
            m2.W.toarray(), weighted_model.W.toarray()
        )
        np.testing.assert_array_equal(m2.M, weighted_model.M)

    def test_bigram_counts_file(self, tmp_path):
        counts = graphs.BigramCounts.from_tokens([0, 1, 2, 0, 1], vocab_size=4)
        path = tmp_path / "b.txt"
        graphs.write_bigram_counts(path, counts)
        c2 = graphs.read_bigram_counts(path, vocab_size=4)
        assert np.array_equal(counts.pairs, c2.pairs)
        assert np.array_equal(counts.counts, c2.counts)

    def test_sltm_rejects_corrupt_magic(self, tmp_path, er_model):
        path = tmp_path / "m.sltm"
        graphs.write_transition_model(path, er_model)
        raw = bytearray(path.read_bytes())
        raw[0] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(InvalidArgument):
            graphs.read_transition_model(path)
