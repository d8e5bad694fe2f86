"""The six supported Bayesian models: per-datum log-likelihoods, log-priors, generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import Dataset

LOG_2PI = float(np.log(2.0 * np.pi))

ELO_SCALE = 400.0


def _design(dataset: Dataset, indices) -> np.ndarray:
    """Feature rows with a prepended intercept column."""
    x = dataset.features[indices]
    return np.column_stack([np.ones(x.shape[0]), x])


def gaussian_posterior_params(dataset: Dataset, indices, weights):
    """Conjugate posterior (mean, isotropic variance) for the unit-covariance
    location model under a weighted likelihood and standard normal prior."""
    w = np.asarray(weights, dtype=float)
    x = dataset.features[np.asarray(indices, dtype=int)]
    precision = 1.0 + w.sum()
    mean = (w @ x) / precision
    return mean, 1.0 / precision


class GaussianLocationModel:
    """Observations x_n ~ N(theta, I) with theta ~ N(0, I)."""

    kind = "gaussian_location"
    default_kernel = "exact"

    def __init__(self, dim: int):
        self.dim = int(dim)

    @property
    def draw_dim(self) -> int:
        return self.dim

    def loglik(self, dataset, indices, theta):
        diff = dataset.features[indices] - np.asarray(theta, dtype=float)
        return -0.5 * (self.dim * LOG_2PI + np.einsum("ij,ij->i", diff, diff))

    def logprior(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -0.5 * (self.dim * LOG_2PI + float(theta @ theta))

    def sample_prior(self, rng):
        return rng.standard_normal(self.dim)

    def draw_vector(self, theta):
        return np.asarray(theta, dtype=float)


class LinearRegressionModel:
    """y_n ~ N([1 x_n] beta, sigma^2) with joint N(0, I) prior on (beta, log sigma^2).

    The parameter vector is (beta_0..beta_p, log sigma^2); working in
    log-variance keeps the state unconstrained for the generic slice kernel.
    """

    kind = "linreg"
    default_kernel = "slice"

    def __init__(self, n_features: int):
        self.n_features = int(n_features)
        self.dim = self.n_features + 2

    @property
    def draw_dim(self) -> int:
        return self.dim

    def loglik(self, dataset, indices, theta):
        theta = np.asarray(theta, dtype=float)
        beta, log_s2 = theta[:-1], theta[-1]
        resid = dataset.responses[indices] - _design(dataset, indices) @ beta
        return -0.5 * (LOG_2PI + log_s2 + resid * resid * np.exp(-log_s2))

    def logprior(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -0.5 * (self.dim * LOG_2PI + float(theta @ theta))

    def sample_prior(self, rng):
        return rng.standard_normal(self.dim)

    def draw_vector(self, theta):
        return np.asarray(theta, dtype=float)


class LogisticRegressionModel:
    """y_n ~ Bernoulli(logit^-1([1 x_n] beta)) with iid Cauchy(0, 1) priors."""

    kind = "logreg"
    default_kernel = "slice"

    def __init__(self, n_features: int):
        self.n_features = int(n_features)
        self.dim = self.n_features + 1

    @property
    def draw_dim(self) -> int:
        return self.dim

    def loglik(self, dataset, indices, theta):
        z = _design(dataset, indices) @ np.asarray(theta, dtype=float)
        y = dataset.responses[indices]
        return -np.logaddexp(0.0, (1.0 - 2.0 * y) * z)

    def logprior(self, theta):
        theta = np.asarray(theta, dtype=float)
        return float(np.sum(-np.log(np.pi) - np.log1p(theta * theta)))

    def sample_prior(self, rng):
        return rng.standard_cauchy(self.dim)

    def draw_vector(self, theta):
        return np.asarray(theta, dtype=float)


class PoissonRegressionModel:
    """y_n ~ Poisson(softplus([1 x_n] beta)) with beta ~ N(0, I)."""

    kind = "poissonreg"
    default_kernel = "slice"

    def __init__(self, n_features: int):
        self.n_features = int(n_features)
        self.dim = self.n_features + 1

    @property
    def draw_dim(self) -> int:
        return self.dim

    def loglik(self, dataset, indices, theta):
        z = _design(dataset, indices) @ np.asarray(theta, dtype=float)
        rate = np.logaddexp(0.0, z)
        y = dataset.responses[indices]
        # rate can underflow to exactly 0; y log(rate) is then 0 for y = 0 and
        # a legal -inf for y > 0.
        with np.errstate(divide="ignore", invalid="ignore"):
            y_term = np.where(y > 0, y * np.log(rate), 0.0)
        return y_term - rate - gammaln(y + 1.0)

    def logprior(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -0.5 * (self.dim * LOG_2PI + float(theta @ theta))

    def sample_prior(self, rng):
        return rng.standard_normal(self.dim)

    def draw_vector(self, theta):
        return np.asarray(theta, dtype=float)


class BradleyTerryModel:
    """Game outcomes y_n ~ Bernoulli over rating differences on the Elo scale."""

    kind = "bradley_terry"
    default_kernel = "slice"

    def __init__(self, n_entities: int):
        self.n_entities = int(n_entities)
        self.dim = self.n_entities

    @property
    def draw_dim(self) -> int:
        return self.dim

    def loglik(self, dataset, indices, theta):
        theta = np.asarray(theta, dtype=float)
        pairs = dataset.pair_ids[indices]
        z = (theta[pairs[:, 0]] - theta[pairs[:, 1]]) / ELO_SCALE
        y = dataset.responses[indices]
        return -np.logaddexp(0.0, (1.0 - 2.0 * y) * z)

    def logprior(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -0.5 * (self.dim * LOG_2PI + float(theta @ theta))

    def sample_prior(self, rng):
        return rng.standard_normal(self.dim)

    def draw_vector(self, theta):
        return np.asarray(theta, dtype=float)


@dataclass
class SsvsState:
    """Sparse-regression chain state: coefficients, inclusion flags, noise variance."""

    beta: np.ndarray
    gamma: np.ndarray
    sigma2: float

    def copy(self) -> "SsvsState":
        return SsvsState(self.beta.copy(), self.gamma.copy(), float(self.sigma2))


class SparseRegressionModel:
    """Spike-and-slab linear regression y_n ~ N(x_n' beta, sigma^2).

    Priors: sigma^2 ~ InvGamma(nu/2, nu*lam/2); gamma_i ~ Bernoulli(q);
    beta_i | gamma_i ~ N(0, (tau or c*tau)^2). No intercept column, matching
    the generating process x' beta.
    """

    kind = "sparse_linreg"
    default_kernel = "gibbs"

    def __init__(self, n_features: int, nu=0.1, lam=1.0, q=0.1, tau=0.1, c=10.0):
        self.n_features = int(n_features)
        self.nu = float(nu)
        self.lam = float(lam)
        self.q = float(q)
        self.tau = float(tau)
        self.c = float(c)

    @property
    def dim(self) -> int:
        return self.n_features

    @property
    def draw_dim(self) -> int:
        # beta, sigma^2, then the inclusion flags
        return 2 * self.n_features + 1

    def prior_sd(self, gamma) -> np.ndarray:
        return np.where(np.asarray(gamma) == 1, self.c * self.tau, self.tau)

    def loglik(self, dataset, indices, state: SsvsState):
        resid = dataset.responses[indices] - dataset.features[indices] @ state.beta
        s2 = float(state.sigma2)
        return -0.5 * (LOG_2PI + np.log(s2) + resid * resid / s2)

    def logprior(self, state: SsvsState):
        a = self.nu / 2.0
        b = self.nu * self.lam / 2.0
        s2 = float(state.sigma2)
        if s2 <= 0:
            return -np.inf
        lp = a * np.log(b) - gammaln(a) - (a + 1.0) * np.log(s2) - b / s2
        gamma = np.asarray(state.gamma)
        with np.errstate(divide="ignore"):
            lp += float(np.sum(np.where(gamma == 1, np.log(self.q), np.log1p(-self.q))))
        sd = self.prior_sd(gamma)
        lp += float(np.sum(-0.5 * LOG_2PI - np.log(sd) - 0.5 * (state.beta / sd) ** 2))
        return float(lp)

    def sample_prior(self, rng) -> SsvsState:
        sigma2 = (self.nu * self.lam / 2.0) / rng.gamma(self.nu / 2.0)
        gamma = (rng.random(self.n_features) < self.q).astype(int)
        beta = self.prior_sd(gamma) * rng.standard_normal(self.n_features)
        return SsvsState(beta=beta, gamma=gamma, sigma2=float(sigma2))

    def draw_vector(self, state: SsvsState):
        return np.concatenate([state.beta, [state.sigma2], state.gamma.astype(float)])


def sparse_true_coefficients(n_features: int, signal: float = 5.0) -> np.ndarray:
    """Generating coefficients: leading half zero, trailing half at the signal level."""
    beta = np.zeros(n_features)
    beta[n_features // 2 :] = signal
    return beta


def generate_synthetic(kind: str, n: int, dim: int, rng, noise_sd: float = 25.0) -> Dataset:
    """Draw a synthetic dataset from the model's generating process.

    ``dim`` is the feature count (regressions), the observation dimension
    (location), or the number of entities (pairwise). Sizes are free so desk-
    scale instances can stand in for the full-size defaults.
    """
    if n < 1 or dim < 1:
        raise ValueError("sizes must be positive")
    if kind == "gaussian_location":
        return Dataset(kind="location", features=rng.standard_normal((n, dim)))
    if kind == "sparse_linreg":
        x = rng.standard_normal((n, dim))
        y = x @ sparse_true_coefficients(dim) + noise_sd * rng.standard_normal(n)
        return Dataset(kind="regression", features=x, responses=y)
    if kind == "linreg":
        x = rng.standard_normal((n, dim))
        beta = rng.standard_normal(dim + 1)
        y = beta[0] + x @ beta[1:] + rng.standard_normal(n)
        return Dataset(kind="regression", features=x, responses=y)
    if kind == "logreg":
        x = rng.standard_normal((n, dim))
        beta = rng.standard_normal(dim + 1)
        p = 1.0 / (1.0 + np.exp(-(beta[0] + x @ beta[1:])))
        return Dataset(kind="classification", features=x, responses=(rng.random(n) < p).astype(float))
    if kind == "poissonreg":
        x = rng.standard_normal((n, dim))
        beta = rng.standard_normal(dim + 1)
        rate = np.logaddexp(0.0, beta[0] + x @ beta[1:])
        return Dataset(kind="counts", features=x, responses=rng.poisson(rate).astype(float))
    if kind == "bradley_terry":
        ratings = ELO_SCALE / 2.0 * rng.standard_normal(dim)
        pairs = np.empty((n, 2), dtype=int)
        for i in range(n):
            pairs[i] = rng.choice(dim, size=2, replace=False)
        z = (ratings[pairs[:, 0]] - ratings[pairs[:, 1]]) / ELO_SCALE
        p = 1.0 / (1.0 + np.exp(-z))
        return Dataset(
            kind="pairwise",
            pair_ids=pairs,
            responses=(rng.random(n) < p).astype(float),
            n_entities=dim,
        )
    raise ValueError(f"unknown model kind {kind!r}")


def make_model(kind: str, dataset: Dataset, **hyper):
    """Instantiate the model for ``kind`` with dimensions taken from the dataset."""
    if kind == "gaussian_location":
        return GaussianLocationModel(dataset.n_features)
    if kind == "sparse_linreg":
        return SparseRegressionModel(dataset.n_features, **hyper)
    if kind == "linreg":
        return LinearRegressionModel(dataset.n_features)
    if kind == "logreg":
        return LogisticRegressionModel(dataset.n_features)
    if kind == "poissonreg":
        return PoissonRegressionModel(dataset.n_features)
    if kind == "bradley_terry":
        return BradleyTerryModel(dataset.n_entities)
    raise ValueError(f"unknown model kind {kind!r}")
