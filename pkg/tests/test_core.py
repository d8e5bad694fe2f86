"""Dataset, selection, weight-init, and log-potential behavior."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coresetmcmc import (
    Dataset,
    NumericalError,
    init_weights,
    load_csv,
    log_potential,
    make_model,
    select_coreset,
)


def classification_dataset(labels):
    labels = np.asarray(labels, dtype=float)
    rng = np.random.default_rng(7)
    return Dataset(kind="classification", features=rng.standard_normal((labels.size, 2)),
                   responses=labels)


class TestDatasetInvariants:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Dataset(kind="location", features=np.empty((0, 2)))

    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError):
            classification_dataset([0, 1, 2])

    def test_rejects_negative_counts(self):
        with pytest.raises(ValueError):
            Dataset(kind="counts", features=np.ones((2, 1)), responses=[-1, 3])

    def test_rejects_out_of_range_pair_ids(self):
        with pytest.raises(ValueError):
            Dataset(kind="pairwise", pair_ids=[[0, 5]], responses=[1.0], n_entities=3)


class TestSelectCoreset:
    def test_full_selection_is_permutation(self):
        ds = Dataset(kind="location", features=np.random.default_rng(0).standard_normal((10, 2)))
        sel = select_coreset(ds, 10, rng=np.random.default_rng(1))
        assert sorted(sel.indices.tolist()) == list(range(10))

    def test_rare_positive_class_kept_whole(self):
        # one positive among six; coreset of four is more than twice the
        # positive count, so the positive must be included
        ds = classification_dataset([0, 0, 0, 1, 0, 0])
        sel = select_coreset(ds, 4, balance=True, rng=np.random.default_rng(2))
        assert 3 in sel.indices

    def test_balanced_split_counts(self):
        labels = np.zeros(100)
        labels[:40] = 1
        ds = classification_dataset(labels)
        sel = select_coreset(ds, 10, balance=True, rng=np.random.default_rng(3))
        pos = int(ds.responses[sel.indices].sum())
        assert pos == 5 and sel.m == 10

    def test_exact_half_positives_includes_all(self):
        # boundary case: positives == m/2 exactly falls in the 50/50 branch,
        # which then has to take every positive
        labels = np.zeros(20)
        labels[:3] = 1
        ds = classification_dataset(labels)
        sel = select_coreset(ds, 6, balance=True, rng=np.random.default_rng(4))
        assert set(np.flatnonzero(labels)) <= set(sel.indices.tolist())

    def test_deterministic_and_distinct(self):
        ds = Dataset(kind="location", features=np.random.default_rng(0).standard_normal((50, 3)))
        a = select_coreset(ds, 20, rng=np.random.default_rng(42))
        b = select_coreset(ds, 20, rng=np.random.default_rng(42))
        assert np.array_equal(a.indices, b.indices)
        assert np.unique(a.indices).size == 20

    def test_errors(self):
        ds = classification_dataset([1, 1, 1, 0])
        with pytest.raises(ValueError):
            select_coreset(ds, 5, rng=np.random.default_rng(0))
        with pytest.raises(ValueError):
            # needs 2 negatives but only 1 exists
            select_coreset(ds, 4, balance=True, rng=np.random.default_rng(0))
        loc = Dataset(kind="location", features=np.ones((4, 1)))
        with pytest.raises(ValueError):
            select_coreset(loc, 2, balance=True, rng=np.random.default_rng(0))


class TestInitWeights:
    def test_values(self):
        assert np.allclose(init_weights(100, 10), 10.0)
        assert np.allclose(init_weights(5, 5), 1.0)
        assert np.allclose(init_weights(3, 2), 1.5)

    @given(n=st.integers(1, 10_000), m=st.integers(1, 500))
    @settings(max_examples=50, deadline=None)
    def test_sums_to_n(self, n, m):
        if m > n:
            m = n
        w = init_weights(n, m)
        assert abs(w.sum() - n) <= 1e-12 * n


class TestLogPotential:
    def setup_method(self):
        rng = np.random.default_rng(5)
        self.ds = Dataset(kind="location", features=rng.standard_normal((20, 3)))
        self.model = make_model("gaussian_location", self.ds)
        self.sel = select_coreset(self.ds, 4, rng=rng)

    def test_zero_weights(self):
        assert log_potential(np.zeros(4), np.zeros(3), self.model, self.ds, self.sel) == 0.0

    def test_weighted_sum(self):
        theta = np.array([0.1, -0.2, 0.3])
        ll = self.model.loglik(self.ds, self.sel.indices, theta)
        w = np.array([1.0, 2.0, 0.5, 3.0])
        expected = float(w @ ll)
        assert log_potential(w, theta, self.model, self.ds, self.sel) == pytest.approx(expected, rel=1e-12)

    def test_gaussian_at_matching_point(self):
        ds = Dataset(kind="location", features=np.zeros((1, 3)))
        model = make_model("gaussian_location", ds)
        sel = select_coreset(ds, 1, rng=np.random.default_rng(0))
        value = log_potential(np.ones(1), np.zeros(3), model, ds, sel)
        assert value == pytest.approx(-1.5 * np.log(2 * np.pi), rel=1e-12)

    @given(a=st.floats(0, 5), b=st.floats(0, 5))
    @settings(max_examples=30, deadline=None)
    def test_linear_in_weights(self, a, b):
        theta = np.array([0.3, 0.1, -0.4])
        w1 = np.array([1.0, 0.5, 2.0, 0.25])
        w2 = np.array([0.5, 3.0, 1.0, 2.0])
        lhs = log_potential(a * w1 + b * w2, theta, self.model, self.ds, self.sel)
        rhs = a * log_potential(w1, theta, self.model, self.ds, self.sel) + b * log_potential(
            w2, theta, self.model, self.ds, self.sel
        )
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_nan_is_error(self):
        class BadModel:
            def loglik(self, dataset, indices, theta):
                return np.array([np.nan] * len(indices))

        with pytest.raises(NumericalError):
            log_potential(np.ones(4), np.zeros(3), BadModel(), self.ds, self.sel)

    def test_neg_inf_is_legal(self):
        class ZeroDensityModel:
            def loglik(self, dataset, indices, theta):
                out = np.zeros(len(indices))
                out[0] = -np.inf
                return out

        value = log_potential(np.ones(4), np.zeros(3), ZeroDensityModel(), self.ds, self.sel)
        assert value == -np.inf
        # a zero weight removes the -inf term entirely
        w = np.ones(4)
        w[0] = 0.0
        assert log_potential(w, np.zeros(3), ZeroDensityModel(), self.ds, self.sel) == 0.0


class TestCsvIngestion:
    def test_regression_roundtrip(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x1,x2,y\n1.0,2.0,3.5\n4.0,5.0,-1.25\n")
        ds = load_csv(path, "regression", response_col="y")
        assert ds.features.shape == (2, 2)
        assert np.allclose(ds.responses, [3.5, -1.25])
        assert np.allclose(ds.features[1], [4.0, 5.0])

    def test_pairwise_columns(self, tmp_path):
        path = tmp_path / "games.csv"
        path.write_text("home_id,visitor_id,outcome\n0,1,1\n2,0,0\n")
        ds = load_csv(path, "pairwise")
        assert ds.pair_ids.shape == (2, 2)
        assert ds.n_entities == 3
        assert np.allclose(ds.responses, [1.0, 0.0])

    def test_location_all_features(self, tmp_path):
        path = tmp_path / "loc.csv"
        path.write_text("a,b\n0.5,1.5\n2.5,3.5\n")
        ds = load_csv(path, "location")
        assert ds.features.shape == (2, 2)

    def test_missing_response_col(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x1,y\n1.0,2.0\n")
        with pytest.raises(ValueError):
            load_csv(path, "regression", response_col="z")
