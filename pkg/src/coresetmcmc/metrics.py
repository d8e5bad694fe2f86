"""Posterior-quality metrics: average squared z-score, streaming second-half
means, closed-form Gaussian KL, and reference posterior construction."""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .core import CoresetSelection, Dataset
from .errors import NotReadyError, ReferenceFailure
from .kernels import SliceConfig, make_kernel
from .models import GaussianLocationModel, gaussian_posterior_params


@dataclass
class ReferencePosterior:
    """Coordinate-wise mean and standard deviation of the full-data posterior."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.mu.shape != self.sigma.shape:
            raise ValueError("mu and sigma must have equal shape")
        if (self.sigma <= 0).any():
            raise ValueError("reference standard deviations must be positive")


def avg_sq_z(mu_hat, ref: ReferencePosterior) -> float:
    """Mean over coordinates of ((mu_i - mu_hat_i) / sigma_i)^2."""
    mu_hat = np.asarray(mu_hat, dtype=float)
    if mu_hat.shape != ref.mu.shape:
        raise ValueError("dimension mismatch with the reference posterior")
    z = (ref.mu - mu_hat) / ref.sigma
    return float(np.mean(z * z))


class DrawStream:
    """Pooled draw buffer answering second-half means in O(1) via prefix sums.

    The reported mean always covers exactly the most recent ceil(T/2) draws,
    warm-up included, with draws interleaved across chains in push order.
    """

    def __init__(self, dim: int):
        self._prefix = [np.zeros(int(dim))]

    def push(self, draw):
        self._prefix.append(self._prefix[-1] + np.asarray(draw, dtype=float))

    @property
    def count(self) -> int:
        return len(self._prefix) - 1

    def second_half_mean(self) -> np.ndarray:
        total = self.count
        if total < 2:
            raise NotReadyError("need at least two draws")
        half = ceil(total / 2)
        return (self._prefix[total] - self._prefix[total - half]) / half


def second_half_mean(stream: DrawStream) -> np.ndarray:
    return stream.second_half_mean()


def gaussian_kl(w, dataset: Dataset, selection: CoresetSelection) -> float:
    """KL(weighted coreset posterior || full-data posterior), both Gaussian."""
    mu_w, var_w = gaussian_posterior_params(dataset, selection.indices, w)
    mu_f, var_f = gaussian_posterior_params(dataset, np.arange(dataset.n), np.ones(dataset.n))
    d = mu_w.size
    mean_term = float(np.sum((mu_f - mu_w) ** 2)) / var_f
    return 0.5 * (d * var_w / var_f + mean_term - d + d * np.log(var_f / var_w))


def reference_posterior(model, dataset: Dataset, draws: int = 20_000, rng=None,
                        slice_config: SliceConfig | None = None, return_draws: bool = False):
    """Full-data posterior moments: exact by conjugacy for the location model,
    otherwise a long single-chain run of the model's default kernel with the
    first half discarded."""
    if isinstance(model, GaussianLocationModel):
        mean, var = gaussian_posterior_params(dataset, np.arange(dataset.n), np.ones(dataset.n))
        ref = ReferencePosterior(mu=mean, sigma=np.full(mean.size, np.sqrt(var)))
        if return_draws:
            return ref, None
        return ref
    if rng is None:
        rng = np.random.default_rng(0)
    if draws < 4:
        raise ValueError("reference run needs at least 4 draws")
    selection = CoresetSelection(np.arange(dataset.n))
    weights = np.ones(dataset.n)
    kernel = make_kernel(model.default_kernel, model, dataset, selection, slice_config)
    state = model.sample_prior(rng)
    kept = np.empty((draws - draws // 2, model.draw_dim))
    row = 0
    for i in range(draws):
        state = kernel.step(state, weights, rng)
        vec = model.draw_vector(state)
        if not np.all(np.isfinite(vec)):
            raise ReferenceFailure(f"non-finite reference chain state at step {i}")
        if i >= draws // 2:
            kept[row] = vec
            row += 1
    sigma = kept.std(axis=0, ddof=1)
    if (sigma <= 0).any():
        raise ReferenceFailure("degenerate reference posterior (zero spread)")
    ref = ReferencePosterior(mu=kept.mean(axis=0), sigma=sigma)
    if return_draws:
        return ref, kept
    return ref
