"""Subsampled, chain-centered covariance estimator of the coreset KL gradient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CoresetSelection, Dataset, loglik_table
from .errors import NumericalError, UnsupportedModelError
from .models import GaussianLocationModel, gaussian_posterior_params


@dataclass
class GradientEstimate:
    """One iteration's gradient: the estimate, the subsample it used, and the
    raw (M+S) x K log-likelihood table it was built from."""

    g: np.ndarray
    subsample: np.ndarray
    loglik_table: np.ndarray


def center_logliks(table) -> np.ndarray:
    """Subtract each row's across-chain mean, so every row sums to zero."""
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[1] < 2:
        raise ValueError("need a 2-D table with at least two chains")
    # -inf rows legitimately center to NaN; callers decide whether that is fatal
    with np.errstate(invalid="ignore"):
        return table - table.mean(axis=1, keepdims=True)


def draw_subsample(n_data: int, size: int, rng) -> np.ndarray:
    """Uniform subsample of ``size`` distinct indices from [n_data)."""
    if not 1 <= size <= n_data:
        raise ValueError(f"subsample size {size} must lie in [1, {n_data}]")
    return np.sort(rng.choice(n_data, size=size, replace=False))


def estimate_gradient(w, centered_coreset, centered_subsample, n_data: int) -> np.ndarray:
    """Covariance-style gradient estimate from pre-centered log-likelihood rows.

    g_m = (K-1)^-1 sum_k cc[m,k] * (w @ cc[:,k] - (N/S) * sum_s cs[s,k]).
    """
    w = np.asarray(w, dtype=float)
    cc = np.asarray(centered_coreset, dtype=float)
    cs = np.asarray(centered_subsample, dtype=float)
    if cc.ndim != 2 or cs.ndim != 2 or cc.shape[1] != cs.shape[1]:
        raise ValueError("coreset and subsample blocks must share the chain axis")
    if cc.shape[1] < 2:
        raise ValueError("need at least two chains")
    if w.shape != (cc.shape[0],):
        raise ValueError("weight vector length must match the coreset block")
    if cs.shape[0] < 1:
        raise ValueError("subsample block is empty")
    # The all-ones matvec (rather than .sum) routes both reductions through the
    # same kernel, so when the coreset covers the full data the two terms
    # cancel bitwise and the gradient is exactly zero.
    per_chain = w @ cc - (n_data / cs.shape[0]) * (np.ones(cs.shape[0]) @ cs)
    return (cc @ per_chain) / (cc.shape[1] - 1)


def subsampled_gradient(model, dataset: Dataset, selection: CoresetSelection,
                        w, states, subsample) -> GradientEstimate:
    """Evaluate the full estimator pipeline for one iteration.

    The (M+S) x K table is evaluated once and its centered rows shared between
    the coreset and subsample blocks.
    """
    subsample = np.asarray(subsample, dtype=int)
    indices = np.concatenate([selection.indices, subsample])
    table = loglik_table(model, dataset, indices, states)
    centered = center_logliks(table)
    g = estimate_gradient(w, centered[: selection.m], centered[selection.m :], dataset.n)
    if not np.all(np.isfinite(g)):
        raise NumericalError("non-finite gradient estimate")
    return GradientEstimate(g=g, subsample=subsample, loglik_table=table)


def exact_kl_gradient(w, model, dataset: Dataset, selection: CoresetSelection) -> np.ndarray:
    """Closed-form KL gradient for the Gaussian location model (test oracle).

    Both log-likelihood sums are quadratics in theta, and theta is Gaussian
    under the coreset posterior, so every covariance term is available in
    closed form:

        grad_m = Cov(l_m,  sum_m' w_m' l_m' - sum_n l_n)

    with l_n(theta) = q(theta) + x_n' theta + const, q(theta) = -|theta|^2/2.
    """
    if not isinstance(model, GaussianLocationModel):
        raise UnsupportedModelError("closed-form KL gradient needs the Gaussian location model")
    w = np.asarray(w, dtype=float)
    x_core = dataset.features[selection.indices]
    mean, var = gaussian_posterior_params(dataset, selection.indices, w)
    d = dataset.n_features

    a = w.sum() - dataset.n                       # coefficient of q in the second argument
    b = w @ x_core - dataset.features.sum(axis=0)  # its linear coefficient
    cov_qq = 0.5 * d * var * var + var * float(mean @ mean)
    # Cov(q, b't) = -var * b'mean ; Cov(x_m't, q) = -var * x_m'mean ;
    # Cov(x_m't, b't) = var * x_m'b.
    return a * cov_qq - var * float(b @ mean) - a * var * (x_core @ mean) + var * (x_core @ b)
