"""Gradient estimator: centering, subsampled estimate, exhaustive unbiasedness,
and agreement with the closed-form Gaussian KL gradient."""

from itertools import combinations

import numpy as np
import pytest
from scipy.integrate import quad

from coresetmcmc import (
    CoresetSelection,
    Dataset,
    UnsupportedModelError,
    center_logliks,
    draw_subsample,
    estimate_gradient,
    exact_kl_gradient,
    init_weights,
    make_model,
    select_coreset,
    subsampled_gradient,
)
from coresetmcmc.models import gaussian_posterior_params


class TestCenterLogliks:
    def test_examples(self):
        assert np.allclose(center_logliks([[1.0, 3.0]]), [[-1.0, 1.0]])
        assert np.allclose(center_logliks([[2.0, 2.0, 2.0]]), [[0.0, 0.0, 0.0]])
        assert np.allclose(center_logliks([[2.0, 0.0]]), [[1.0, -1.0]])

    def test_rows_sum_to_zero(self):
        rng = np.random.default_rng(0)
        table = rng.standard_normal((7, 4)) * 100.0
        centered = center_logliks(table)
        assert np.all(np.abs(centered.sum(axis=1)) <= 1e-10 * np.abs(table).max())

    def test_needs_two_chains(self):
        with pytest.raises(ValueError):
            center_logliks(np.ones((3, 1)))


class TestDrawSubsample:
    def test_full_draw_is_permutation(self):
        idx = draw_subsample(6, 6, np.random.default_rng(0))
        assert sorted(idx.tolist()) == list(range(6))

    def test_single_point(self):
        assert draw_subsample(1, 1, np.random.default_rng(0)).tolist() == [0]

    def test_deterministic(self):
        a = draw_subsample(50, 7, np.random.default_rng(9))
        b = draw_subsample(50, 7, np.random.default_rng(9))
        assert np.array_equal(a, b)

    def test_bounds(self):
        with pytest.raises(ValueError):
            draw_subsample(4, 5, np.random.default_rng(0))


class TestEstimateGradient:
    def test_identical_chains_give_zero(self):
        table = np.repeat(np.random.default_rng(0).standard_normal((5, 1)), 3, axis=1)
        centered = center_logliks(table)
        g = estimate_gradient(np.ones(3), centered[:3], centered[3:], n_data=5)
        assert np.allclose(g, 0.0)

    def test_hand_worked_value(self):
        # raw table l_1 = (1, 3), l_2 = (2, 0); coreset {0} with w = 2,
        # subsample = both points, N = 2; direct summation of the estimator
        # gives g = 4.
        table = np.array([[1.0, 3.0], [1.0, 3.0], [2.0, 0.0]])
        centered = center_logliks(table)
        g = estimate_gradient(np.array([2.0]), centered[:1], centered[1:], n_data=2)
        assert g.shape == (1,)
        assert g[0] == pytest.approx(4.0, rel=1e-12)

    def test_exact_coreset_cancellation_is_bitwise(self):
        rng = np.random.default_rng(3)
        ds = Dataset(kind="location", features=rng.standard_normal((12, 2)))
        model = make_model("gaussian_location", ds)
        sel = select_coreset(ds, 12, rng=rng)
        w = init_weights(12, 12)
        states = [rng.standard_normal(2) for _ in range(2)]
        sub = draw_subsample(12, 12, rng)
        est = subsampled_gradient(model, ds, sel, w, states, sub)
        assert np.all(est.g == 0.0)

    def test_linear_in_weights(self):
        rng = np.random.default_rng(1)
        table = rng.standard_normal((8, 3))
        centered = center_logliks(table)
        cc, cs = centered[:5], centered[5:]
        w1 = rng.random(5)
        w2 = rng.random(5)
        g = estimate_gradient(2.0 * w1 + 3.0 * w2, cc, cs, n_data=8)
        g1 = estimate_gradient(w1, cc, cs, n_data=8)
        g2 = estimate_gradient(w2, cc, cs, n_data=8)
        # affine in w: the subsample term is constant, so combine accordingly
        g_sub = estimate_gradient(np.zeros(5), cc, cs, n_data=8)
        assert np.allclose(g, 2.0 * g1 + 3.0 * g2 - 4.0 * g_sub, rtol=1e-10)

    def test_subsample_unbiasedness_exhaustive(self):
        # averaging the estimate over all C(N,S) subsamples must equal the
        # S=N estimate exactly
        rng = np.random.default_rng(2)
        n, m, s, k = 8, 3, 2, 2
        table = rng.standard_normal((n, k))
        centered = center_logliks(table)
        sel = np.arange(m)
        w = rng.random(m) * 3.0
        total = np.zeros(m)
        subsets = list(combinations(range(n), s))
        for subset in subsets:
            total += estimate_gradient(w, centered[sel], centered[list(subset)], n_data=n)
        averaged = total / len(subsets)
        full = estimate_gradient(w, centered[sel], centered, n_data=n)
        assert np.allclose(averaged, full, rtol=1e-9)


def quadrature_kl_gradient(w, ds, sel):
    """Independent 1-D oracle: integrate the covariance form numerically."""
    x = ds.features[:, 0]
    xm = x[sel.indices]
    mean, var = gaussian_posterior_params(ds, sel.indices, w)
    mu, sd = mean[0], np.sqrt(var)

    def density(t):
        return np.exp(-0.5 * (t - mu) ** 2 / var) / (sd * np.sqrt(2 * np.pi))

    def ll(xn, t):
        return -0.5 * np.log(2 * np.pi) - 0.5 * (xn - t) ** 2

    def second(t):
        return sum(wi * ll(xi, t) for wi, xi in zip(w, xm)) - sum(ll(xn, t) for xn in x)

    lo, hi = mu - 12 * sd, mu + 12 * sd
    e_second = quad(lambda t: second(t) * density(t), lo, hi, limit=200)[0]
    grad = np.empty(len(w))
    for i, xi in enumerate(xm):
        e_first = quad(lambda t: ll(xi, t) * density(t), lo, hi, limit=200)[0]
        e_prod = quad(lambda t: ll(xi, t) * second(t) * density(t), lo, hi, limit=200)[0]
        grad[i] = e_prod - e_first * e_second
    return grad


class TestExactKlGradient:
    def test_zero_at_exact_weights(self):
        rng = np.random.default_rng(4)
        ds = Dataset(kind="location", features=rng.standard_normal((9, 2)))
        model = make_model("gaussian_location", ds)
        sel = select_coreset(ds, 9, rng=rng)
        w = np.ones(9)
        assert np.allclose(exact_kl_gradient(w, model, ds, sel), 0.0, atol=1e-12)

    def test_matches_quadrature_1d(self):
        ds = Dataset(kind="location", features=np.array([[1.0], [-1.0]]))
        model = make_model("gaussian_location", ds)
        sel = CoresetSelection([0])
        w = np.array([2.0])
        closed = exact_kl_gradient(w, model, ds, sel)
        oracle = quadrature_kl_gradient(w, ds, sel)
        assert np.allclose(closed, oracle, atol=1e-8)

    def test_matches_quadrature_larger(self):
        rng = np.random.default_rng(8)
        ds = Dataset(kind="location", features=rng.standard_normal((15, 1)))
        model = make_model("gaussian_location", ds)
        sel = select_coreset(ds, 4, rng=rng)
        w = init_weights(15, 4) * rng.uniform(0.5, 1.5, 4)
        closed = exact_kl_gradient(w, model, ds, sel)
        oracle = quadrature_kl_gradient(w, ds, sel)
        assert np.allclose(closed, oracle, rtol=1e-6, atol=1e-8)

    def test_unsupported_model(self):
        rng = np.random.default_rng(0)
        ds = Dataset(kind="regression", features=rng.standard_normal((5, 2)),
                     responses=rng.standard_normal(5))
        model = make_model("linreg", ds)
        with pytest.raises(UnsupportedModelError):
            exact_kl_gradient(np.ones(2), model, ds, CoresetSelection([0, 1]))


class TestEstimatorExpectation:
    def test_iid_draws_match_exact_gradient(self):
        # Monte Carlo oracle: with iid draws from the weighted posterior the
        # estimator's expectation equals the closed-form gradient (3 SE).
        rng = np.random.default_rng(11)
        ds = Dataset(kind="location", features=rng.standard_normal((40, 2)))
        model = make_model("gaussian_location", ds)
        sel = select_coreset(ds, 5, rng=rng)
        w = init_weights(40, 5) * rng.uniform(0.8, 1.2, 5)
        mean, var = gaussian_posterior_params(ds, sel.indices, w)
        exact = exact_kl_gradient(w, model, ds, sel)

        reps = 20_000
        total = np.zeros(5)
        total_sq = np.zeros(5)
        for _ in range(reps):
            states = [mean + np.sqrt(var) * rng.standard_normal(2) for _ in range(2)]
            sub = draw_subsample(40, 5, rng)
            g = subsampled_gradient(model, ds, sel, w, states, sub).g
            total += g
            total_sq += g * g
        mc_mean = total / reps
        se = np.sqrt((total_sq / reps - mc_mean**2) / reps)
        assert np.all(np.abs(mc_mean - exact) <= 3.0 * se)
