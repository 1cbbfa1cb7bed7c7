"""Walk sampling, stationary/spectral diagnostics, rank curves, walk files."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walklab import graphs, walks
from walklab.errors import InvalidArgument


class TestSampling:
    def test_sequences_are_legal(self, weighted_model):
        ds = walks.sample_walks(weighted_model, seq_len=32, n_seqs=100, seed=7)
        ds.verify_legal(weighted_model)

    def test_bitwise_deterministic(self, er_model):
        a = walks.sample_walks(er_model, 16, 50, seed=3)
        b = walks.sample_walks(er_model, 16, 50, seed=3)
        assert np.array_equal(a.sequences, b.sequences)
        c = walks.sample_walks(er_model, 16, 50, seed=4)
        assert not np.array_equal(a.sequences, c.sequences)

    def test_chunk_independence(self, er_model):
        """Chunked sampling must reproduce the single-pass stream bitwise."""
        full = walks.sample_walks(er_model, 20, 10000, seed=11, chunk_rows=10000)
        for chunk in (1, 7, 4096, 5001):
            part = walks.sample_walks(er_model, 20, 10000, seed=11,
                                      chunk_rows=chunk)
            assert np.array_equal(full.sequences, part.sequences)

    def test_initial_token_matches_m(self, er_model):
        ds = walks.sample_walks(er_model, 2, 200_000, seed=1)
        emp = np.bincount(ds.sequences[:, 0].astype(np.int64),
                          minlength=er_model.n_nodes) / ds.n_seqs
        assert walks.total_variation(emp, er_model.M) < 0.01

    def test_transition_frequencies_match_w(self, cycle5_model):
        ds = walks.sample_walks(cycle5_model, 50, 2000, seed=5)
        u = ds.sequences[:, :-1].ravel().astype(np.int64)
        v = ds.sequences[:, 1:].ravel().astype(np.int64)
        from_zero = v[u == 0]
        frac_to_1 = (from_zero == 1).mean()
        assert abs(frac_to_1 - 0.5) < 0.01

    def test_dead_end_falls_back_to_initial(self):
        # row 1 has no outgoing transitions; walks restart from M there
        w = np.array([[0.0, 1.0], [0.0, 0.0]])
        model = graphs.TransitionModel(2, w, np.array([1.0, 0.0]))
        ds = walks.sample_walks(model, 6, 10, seed=0)
        np.testing.assert_array_equal(ds.sequences[:, 0], 0)
        np.testing.assert_array_equal(ds.sequences[:, 1], 1)
        np.testing.assert_array_equal(ds.sequences[:, 2], 0)
        ds.verify_legal(model)

    def test_seq_len_one(self, er_model):
        ds = walks.sample_walks(er_model, 1, 10, seed=0)
        assert ds.sequences.shape == (10, 1)

    @given(seed=st.integers(0, 2**31 - 1))
    @settings(max_examples=10, deadline=None)
    def test_chunking_property(self, er_model, seed):
        a = walks.sample_walks(er_model, 8, 100, seed, chunk_rows=100)
        b = walks.sample_walks(er_model, 8, 100, seed, chunk_rows=13)
        assert np.array_equal(a.sequences, b.sequences)


class TestStationary:
    def test_er_stationary_is_degree_over_2e(self, er_small, er_model):
        pi = walks.stationary_distribution(er_model)
        deg = er_small.degrees()
        np.testing.assert_allclose(pi, deg / (2 * er_small.n_edges), atol=1e-10)

    def test_stationarity_fixed_point(self, weighted_model):
        pi = walks.stationary_distribution(weighted_model)
        np.testing.assert_allclose(pi @ weighted_model.W.toarray(), pi,
                                   atol=1e-10)
        assert pi.sum() == pytest.approx(1.0, abs=1e-12)

    def test_bipartite_chain_converges(self):
        # 2-cycle is periodic; plain power iteration oscillates, damping fixes it
        w = np.array([[0.0, 1.0], [1.0, 0.0]])
        model = graphs.TransitionModel(2, w, np.array([0.5, 0.5]))
        pi = walks.stationary_distribution(model)
        np.testing.assert_allclose(pi, 0.5, atol=1e-10)

    def test_disconnected_support_warns(self):
        w = np.array(
            [[0.0, 1.0, 0.0, 0.0],
             [1.0, 0.0, 0.0, 0.0],
             [0.0, 0.0, 0.0, 1.0],
             [0.0, 0.0, 1.0, 0.0]]
        )
        model = graphs.TransitionModel(4, w, np.full(4, 0.25))
        with pytest.warns(UserWarning):
            walks.stationary_distribution(model)


class TestDiagnostics:
    def test_cycle5_spectral_gap(self, cycle5_model):
        # eigenvalues of the 5-cycle walk are cos(2 pi k / 5); the
        # second-largest magnitude is |cos(4 pi / 5)|
        diag = walks.diagnostics(cycle5_model)
        assert diag.spectral_gap == pytest.approx(
            1.0 - abs(math.cos(4 * math.pi / 5)), abs=1e-8
        )

    def test_cycle5_entropies(self, cycle5_model):
        diag = walks.diagnostics(cycle5_model)
        assert diag.entropy_rate == pytest.approx(math.log(2), abs=1e-12)
        assert diag.stationary_entropy == pytest.approx(math.log(5), abs=1e-10)

    def test_er_entropy_rate_oracle(self, er_small, er_model):
        # unbiased walk: H = sum_u pi_u ln(deg_u) with pi_u = deg_u / 2E
        deg = er_small.degrees().astype(float)
        expected = float((deg / deg.sum()) @ np.log(deg))
        diag = walks.diagnostics(er_model)
        assert diag.entropy_rate == pytest.approx(expected, abs=1e-10)

    def test_dense_and_sparse_eig_agree(self, er_model):
        dense = walks._second_eigenvalue_magnitude(er_model.W)
        vals = np.linalg.eigvals(er_model.W.toarray())
        vals = np.sort(np.abs(vals))[::-1]
        assert dense == pytest.approx(vals[1], abs=1e-8)


class TestRankCurves:
    def test_ranked_distributions_shapes(self, weighted_model):
        uni, cond, joint = walks.ranked_distributions(weighted_model)
        assert uni.kind == "unigram"
        assert abs(uni.probabilities.sum() - 1.0) < 1e-9
        assert abs(joint.probabilities.sum() - 1.0) < 1e-9
        assert (np.diff(cond.probabilities) <= 1e-15).all()
        assert len(cond.probabilities) == weighted_model.W.nnz

    def test_ranked_rejects_increasing(self):
        with pytest.raises(InvalidArgument):
            walks.RankedDistribution("unigram", np.array([0.2, 0.8]))

    def test_rank_law_profile_monotone(self, weighted_model):
        deg = int(np.bincount(weighted_model.out_degrees()).argmax())
        profile = walks.rank_law_profile(weighted_model, deg)
        assert profile.shape == (deg,)
        assert (np.diff(profile) <= 1e-12).all()

    def test_kappa2_rank_exponent_near_one(self):
        # heavy weight bias kappa=2 gives rank exponent 1/(kappa-1) = 1;
        # drop rank 1 and the truncated tail where the finite k_max distorts
        from walklab import graphs

        g = graphs.gen_erdos_renyi(2000, 50000, seed=3)
        wg = graphs.assign_weights(g, kappa=2.0, k_min=1, k_max=1000, seed=4)
        model = graphs.build_transition_model(wg)
        profile = walks.rank_law_profile(model, degree=50)
        ranks = np.arange(1, 51)
        window = (ranks >= 2) & (ranks <= 45)
        slope = np.polyfit(np.log(ranks[window]), profile[window], 1)[0]
        assert -slope == pytest.approx(1.0, abs=0.15)

    def test_rank_law_profile_missing_degree(self, er_model):
        with pytest.raises(InvalidArgument):
            walks.rank_law_profile(er_model, degree=10**6)


class TestEmpirical:
    def test_unigram_converges_to_stationary(self, er_model):
        pi = walks.stationary_distribution(er_model)
        small = walks.sample_walks(er_model, 64, 50, seed=2)
        big = walks.sample_walks(er_model, 64, 5000, seed=2)
        tv_small = walks.total_variation(walks.empirical_unigram(small), pi)
        tv_big = walks.total_variation(walks.empirical_unigram(big), pi)
        assert tv_big < tv_small
        assert tv_big < 0.02


class TestWalkFile:
    def test_round_trip(self, tmp_path, weighted_model):
        ds = walks.sample_walks(weighted_model, 17, 33, seed=9)
        path = tmp_path / "w.slwk"
        walks.write_walks(path, ds)
        ds2 = walks.read_walks(path)
        assert ds2.vocab_size == ds.vocab_size
        assert ds2.seq_len == ds.seq_len
        assert np.array_equal(ds.sequences, ds2.sequences)

    def test_rejects_corrupt_magic(self, tmp_path, er_model):
        ds = walks.sample_walks(er_model, 4, 3, seed=0)
        path = tmp_path / "w.slwk"
        walks.write_walks(path, ds)
        raw = bytearray(path.read_bytes())
        raw[0] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(InvalidArgument):
            walks.read_walks(path)

    def test_ranked_csv(self, tmp_path, er_model):
        path = tmp_path / "r.csv"
        walks.write_ranked_csv(path, walks.ranked_distributions(er_model))
        lines = path.read_text().splitlines()
        assert lines[0] == "rank,probability,kind"
        assert len(lines) > er_model.n_nodes
