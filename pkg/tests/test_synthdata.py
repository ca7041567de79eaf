import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgcrf.errors import DimensionMismatchError, InsufficientZerosError
from kgcrf.gcrf import predict
from kgcrf.graph import SimilarityMatrix, edge_count, edge_density, kronecker, laplacian
from kgcrf.nkp import nearest_kron
from kgcrf.randnet import RngStream
from kgcrf.spectral import exact_basis, exact_kron_basis
from kgcrf.synthdata import (
    Dataset,
    decode_pair,
    gen_dataset,
    gen_nkp_dataset,
    gen_outputs,
    kron_laplacian_apply,
    predictor_from_outputs,
    violate_kron,
)


@pytest.fixture(scope="module")
def small_ds():
    return gen_dataset("er", 8, 10, 0.4, rng=RngStream(3, 1))


class TestOutputs:
    def test_noise_free_is_product(self):
        y1, y2, Y = gen_outputs(5, 7, 0.0, RngStream(0))
        assert np.array_equal(Y, np.kron(y1, y2))

    def test_noise_variance(self):
        y1, y2, Y = gen_outputs(100, 100, 0.33, RngStream(1))
        assert np.var(Y - np.kron(y1, y2)) == pytest.approx(0.33 ** 2, rel=0.1)

    def test_invalid(self):
        with pytest.raises(ValueError):
            gen_outputs(1, 5, 0.3, RngStream(0))
        with pytest.raises(ValueError):
            gen_outputs(3, 5, -0.1, RngStream(0))


class TestDataset:
    def test_invariants(self):
        ds = gen_dataset("er", 30, 50, 0.1, rng=RngStream(0, 2))
        assert edge_count(ds.S1) == 43 and edge_count(ds.S2) == 122
        assert edge_density(ds.S1) == pytest.approx(43 / 435)
        for v in (ds.y_train, ds.y_test, ds.R_train, ds.R_test):
            assert v.shape == (1500,)
        SimilarityMatrix(ds.S.entries)
        assert ds.is_kronecker and ds.meta["sigma1"] == 0.33

    def test_construction_identity(self, small_ds):
        b = exact_kron_basis(small_ds.S1, small_ds.S2)
        assert np.allclose(predict(b, 1.0, 5.0, small_ds.R_train), small_ds.y_train, atol=1e-8)
        Q = np.eye(80) + 5 * laplacian(small_ds.S)
        assert np.allclose(np.linalg.solve(Q, small_ds.R_train), small_ds.y_train, atol=1e-8)

    def test_beta_zero_predictor_is_identity(self, small_ds):
        assert np.array_equal(predictor_from_outputs(small_ds.y_train, beta=0.0, factors=(small_ds.S1, small_ds.S2)),
                              small_ds.y_train)

    def test_factored_laplacian_matches_dense(self, small_ds):
        x = np.random.default_rng(0).normal(size=80)
        assert np.allclose(kron_laplacian_apply(small_ds.S1, small_ds.S2, x), laplacian(small_ds.S) @ x)

    def test_kronecker_zero_pattern(self, small_ds):
        S, A1, A2 = small_ds.S.entries, small_ds.S1.entries, small_ds.S2.entries
        n2 = small_ds.n2
        for i in range(80):
            for j in range(80):
                gi, gj, hi, hj = decode_pair(i, j, n2)
                assert (S[i, j] == 0) == (A1[gi, gj] == 0 or A2[hi, hj] == 0)

    def test_deterministic(self):
        a = gen_dataset("ws", 10, 12, 0.3, rng=RngStream(7, 4))
        b = gen_dataset("ws", 10, 12, 0.3, rng=RngStream(7, 4))
        assert a.S1 == b.S1 and a.S2 == b.S2
        assert np.array_equal(a.R_test, b.R_test)

    def test_noise_level_leaves_network_alone(self):
        a = gen_dataset("er", 10, 12, 0.3, 0.0, rng=RngStream(7, 4))
        b = gen_dataset("er", 10, 12, 0.3, 0.5, rng=RngStream(7, 4))
        assert a.S1 == b.S1 and a.S2 == b.S2

    def test_noise_free_test_split_is_latent(self):
        ds = gen_dataset("er", 6, 8, 0.5, 0.0, rng=RngStream(1))
        assert np.array_equal(ds.y_test, ds.y_train)

    def test_test_split_uses_fresh_noise(self, small_ds):
        assert not np.allclose(small_ds.y_test, small_ds.y_train)

    def test_save_load_roundtrip(self, tmp_path, small_ds):
        small_ds.save(tmp_path / "ds")
        back = Dataset.load(tmp_path / "ds")
        assert back.S1 == small_ds.S1 and back.S2 == small_ds.S2 and back.S == small_ds.S
        for name in ("y_train", "y_test", "R_train", "R_test"):
            assert np.array_equal(getattr(back, name), getattr(small_ds, name))
        assert back.meta["graph_type"] == "er" and float(back.meta["sigma1"]) == 0.33
        assert (tmp_path / "ds" / "meta.txt").read_text().count("=") >= 5


@pytest.fixture(scope="module")
def base():
    return gen_dataset("er", 10, 12, 0.3, rng=RngStream(2))


class TestViolate:
    def test_frac_zero_unchanged(self, base):
        assert violate_kron(base.S, base.y1p, base.y2p, 0.0, RngStream(2)) == base.S

    @pytest.mark.parametrize("frac", [0.05, 0.2, 0.6])
    def test_adds_exact_count_and_keeps_existing(self, base, frac):
        S = base.S.entries
        out = violate_kron(base.S, base.y1p, base.y2p, frac, RngStream(2)).entries
        assert edge_count(out) - edge_count(S) == math.floor(frac * edge_count(S))
        assert np.array_equal(out[S > 0], S[S > 0])

    def test_added_values_follow_decoded_kernels(self, base):
        S = base.S.entries
        out = violate_kron(base.S, base.y1p, base.y2p, 0.3, RngStream(5)).entries
        added = np.argwhere((out > 0) & (S == 0))
        assert len(added) > 0
        for i, j in added:
            i1, j1, i2, j2 = i // 12, j // 12, i % 12, j % 12
            expected = math.exp(-abs(base.y1p[i1] - base.y1p[j1])) * math.exp(-abs(base.y2p[i2] - base.y2p[j2]))
            assert out[i, j] == pytest.approx(expected, rel=1e-15)

    def test_insufficient_zeros(self):
        ds = gen_dataset("er", 4, 5, 1.0, rng=RngStream(0))
        with pytest.raises(InsufficientZerosError):
            violate_kron(ds.S, ds.y1p, ds.y2p, 10.0, RngStream(0))

    def test_dimension_mismatch(self, base):
        with pytest.raises(DimensionMismatchError):
            violate_kron(base.S, base.y1p[:-1], base.y2p, 0.1, RngStream(0))

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.01, 0.8), st.integers(0, 1000))
    def test_output_is_valid_similarity(self, frac, seed):
        ds = gen_dataset("er", 6, 7, 0.5, rng=RngStream(seed))
        out = violate_kron(ds.S, ds.y1p, ds.y2p, frac, RngStream(seed))
        SimilarityMatrix(out.entries)


class TestNkpDataset:
    def test_frac_zero_equals_kronecker_dataset(self):
        a = gen_nkp_dataset("er", 8, 9, 0.4, 0.0, rng=RngStream(1, 3))
        b = gen_dataset("er", 8, 9, 0.4, rng=RngStream(1, 3))
        assert a.S == b.S and np.array_equal(a.R_train, b.R_train)

    def test_construction_identity_on_violated_network(self):
        ds = gen_nkp_dataset("er", 8, 9, 0.4, 0.2, rng=RngStream(1, 3))
        assert not ds.is_kronecker
        yhat = predict(exact_basis(ds.S), 1.0, 5.0, ds.R_train)
        assert np.allclose(yhat, ds.y_train, atol=1e-8)
        assert ds.meta["nkp_noise"] == 0.2

    def test_shares_draws_with_kronecker_dataset(self):
        a = gen_nkp_dataset("er", 8, 9, 0.4, 0.2, rng=RngStream(1, 3))
        b = gen_dataset("er", 8, 9, 0.4, rng=RngStream(1, 3))
        assert a.S1 == b.S1 and np.array_equal(a.y_train, b.y_train) and np.array_equal(a.y_test, b.y_test)

    def test_save_load_violated(self, tmp_path):
        ds = gen_nkp_dataset("er", 6, 7, 0.5, 0.1, rng=RngStream(4))
        back = Dataset.load(ds.save(tmp_path / "v"))
        assert not back.is_kronecker and back.S == ds.S

    @pytest.mark.xfail(strict=True, reason="absolute residual level is about 0.8x the published value; "
                                           "its growth with the added fraction matches")
    def test_residual_scale_at_five_percent(self):
        res = [nearest_kron(gen_nkp_dataset("er", 30, 50, 0.1, 0.05, rng=RngStream(0, s)).S, 30, 50).residual_fro
               for s in range(5)]
        assert np.mean(res) == pytest.approx(10.607, rel=0.15)

    def test_residual_grows_like_root_of_added_count(self):
        # Added entries are i.i.d., so the residual should scale with sqrt(frac).
        fracs = [0.05, 0.2]
        res = [np.mean([nearest_kron(gen_nkp_dataset("er", 30, 50, 0.1, f, rng=RngStream(0, s)).S, 30, 50).residual_fro
                        for s in range(4)]) for f in fracs]
        assert res[1] / res[0] == pytest.approx(2.0, rel=0.15)
