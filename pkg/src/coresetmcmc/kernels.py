"""Markov kernels invariant for the weighted coreset posterior.

Three kernels cover the model suite: a hit-and-run slice sampler with
interval doubling for generic real-vector targets, an exact conjugate
sampler for the Gaussian location model, and a Gibbs sweep for the
spike-and-slab regression state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CoresetSelection, Dataset
from .errors import NumericalError
from .models import SsvsState, gaussian_posterior_params

_MAX_SHRINK = 10_000


@dataclass
class SliceConfig:
    initial_width: float = 1.0
    max_doublings: int = 30

    def __post_init__(self):
        if self.initial_width <= 0 or self.max_doublings < 1:
            raise ValueError("need positive width and at least one doubling")


def _doubling_acceptable(f, s, level, width, lo, hi) -> bool:
    """Re-trace the doublings to check the candidate could regenerate (lo, hi).

    Works backwards from the doubled interval, halving towards the candidate,
    and rejects if the candidate's half and the current point's half were
    separated by an interval division with both endpoints below the slice.
    The 1.1 factor guards against float roundoff on the comparisons.
    """
    differ = False
    while hi - lo > 1.1 * width:
        mid = 0.5 * (lo + hi)
        if (0.0 < mid <= s) or (0.0 >= mid and s < mid):
            differ = True
        if s < mid:
            hi = mid
        else:
            lo = mid
        if differ and level >= f(lo) and level >= f(hi):
            return False
    return True


def slice_step(theta, log_density, config: SliceConfig | None = None, rng=None,
               return_info: bool = False):
    """One hit-and-run slice update along a uniform random direction.

    A slice level is drawn below the current log density, an initial interval
    of the configured width is randomly positioned around the current point
    and expanded by doubling until both ends leave the slice (or the doubling
    budget runs out), and the move is sampled by shrinkage, accepting points
    on the slice that pass the doubling-consistency check. Leaves any target
    with the given log density invariant.
    """
    config = config or SliceConfig()
    theta = np.asarray(theta, dtype=float)
    f0 = float(log_density(theta))
    if not np.isfinite(f0):
        raise NumericalError("log density must be finite at the current state")

    direction = rng.standard_normal(theta.size)
    direction /= np.linalg.norm(direction)

    def f(s):
        return float(log_density(theta + s * direction))

    level = f0 - rng.exponential()
    width = config.initial_width
    lo = -width * rng.random()
    hi = lo + width
    f_lo, f_hi = f(lo), f(hi)
    budget = config.max_doublings
    while budget > 0 and (f_lo >= level or f_hi >= level):
        if rng.random() < 0.5:
            lo -= hi - lo
            f_lo = f(lo)
        else:
            hi += hi - lo
            f_hi = f(hi)
        budget -= 1

    doubled_lo, doubled_hi = lo, hi
    for _ in range(_MAX_SHRINK):
        s = rng.uniform(lo, hi)
        f_s = f(s)
        if f_s >= level and _doubling_acceptable(f, s, level, width, doubled_lo, doubled_hi):
            new_theta = theta + s * direction
            if return_info:
                return new_theta, {"level": level, "value": f_s, "step": s}
            return new_theta
        if s < 0.0:
            lo = s
        else:
            hi = s
    raise NumericalError("slice shrinkage failed to find an acceptable point")


def gaussian_exact_step(w, dataset: Dataset, selection: CoresetSelection, rng) -> np.ndarray:
    """Draw directly from the weighted location posterior (unit prior/likelihood
    covariance), which is Gaussian by conjugacy; independent of the current state."""
    w = np.asarray(w, dtype=float)
    if (w < 0).any():
        raise ValueError("weights must be nonnegative")
    mean, var = gaussian_posterior_params(dataset, selection.indices, w)
    return mean + np.sqrt(var) * rng.standard_normal(mean.size)


def ssvs_gibbs_step(state: SsvsState, w, dataset: Dataset, selection: CoresetSelection,
                    hyper, rng) -> SsvsState:
    """Full sweep of the spike-and-slab conditionals under the weighted likelihood.

    Each coreset datum contributes w_m times its log-likelihood, which is the
    same as scaling row m of (X, y) by sqrt(w_m) in the Gaussian quadratics
    and replacing the sample count by sum(w) in the variance update.
    """
    w = np.asarray(w, dtype=float)
    if (w < 0).any():
        raise ValueError("weights must be nonnegative")
    x = dataset.features[selection.indices]
    y = dataset.responses[selection.indices]
    sqrt_w = np.sqrt(w)
    xw = x * sqrt_w[:, None]
    yw = y * sqrt_w

    # beta | gamma, sigma^2
    prior_sd = hyper.prior_sd(state.gamma)
    precision = xw.T @ xw / state.sigma2 + np.diag(1.0 / prior_sd**2)
    rhs = xw.T @ yw / state.sigma2
    chol = np.linalg.cholesky(precision)
    mean = np.linalg.solve(precision, rhs)
    beta = mean + np.linalg.solve(chol.T, rng.standard_normal(mean.size))

    # sigma^2 | beta
    shape = (hyper.nu + w.sum()) / 2.0
    resid = y - x @ beta
    rate = (hyper.nu * hyper.lam + w @ (resid * resid)) / 2.0
    sigma2 = rate / rng.gamma(shape)

    # gamma_i | beta, in log space to dodge underflow in the density ratio
    with np.errstate(divide="ignore"):
        log_odds = (
            np.log(hyper.q) - np.log1p(-hyper.q)
            - np.log(hyper.c)
            + 0.5 * beta * beta * (1.0 / hyper.tau**2 - 1.0 / (hyper.c * hyper.tau) ** 2)
        )
    include = np.where(
        np.isposinf(log_odds), True,
        np.where(np.isneginf(log_odds), False,
                 rng.random(beta.size) < 1.0 / (1.0 + np.exp(-log_odds))),
    )
    return SsvsState(beta=beta, gamma=include.astype(int), sigma2=float(sigma2))


class SliceKernel:
    """Generic kernel: hit-and-run slice update on log prior + weighted log-likelihood."""

    name = "slice"

    def __init__(self, model, dataset, selection, config: SliceConfig | None = None):
        self.model = model
        self.dataset = dataset
        self.selection = selection
        self.config = config or SliceConfig()

    def log_density(self, w):
        model, dataset, idx = self.model, self.dataset, self.selection.indices
        w = np.asarray(w, dtype=float)

        def density(theta):
            return model.logprior(theta) + float(w @ model.loglik(dataset, idx, theta))

        return density

    def step(self, state, w, rng):
        return slice_step(state, self.log_density(w), self.config, rng)


class GaussianExactKernel:
    name = "exact"

    def __init__(self, model, dataset, selection, config=None):
        self.dataset = dataset
        self.selection = selection

    def step(self, state, w, rng):
        return gaussian_exact_step(w, self.dataset, self.selection, rng)


class SsvsGibbsKernel:
    name = "gibbs"

    def __init__(self, model, dataset, selection, config=None):
        self.model = model
        self.dataset = dataset
        self.selection = selection

    def step(self, state, w, rng):
        return ssvs_gibbs_step(state, w, self.dataset, self.selection, self.model, rng)


KERNELS = {"slice": SliceKernel, "exact": GaussianExactKernel, "gibbs": SsvsGibbsKernel}


def make_kernel(name: str, model, dataset, selection, slice_config: SliceConfig | None = None):
    if name not in KERNELS:
        raise ValueError(f"unknown kernel {name!r}")
    return KERNELS[name](model, dataset, selection, slice_config)
