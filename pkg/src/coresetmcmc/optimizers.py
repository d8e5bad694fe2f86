"""Weight-update rules sharing one step interface and a nonnegativity projection.

Every optimizer owns its mutable state, takes (w, g), and returns the next
weight vector already projected onto the nonnegative orthant. Schedules whose
step size divides by an accumulated gradient quantity skip the step while
that accumulator is exactly zero (the iterate is stationary anyway).
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError


def project_nonneg(w) -> np.ndarray:
    """Coordinate-wise max(w, 0); the +0.0 normalizes -0.0 to +0.0."""
    return np.maximum(np.asarray(w, dtype=float), 0.0) + 0.0


def _checked(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise NumericalError("non-finite gradient passed to optimizer")
    return g


class Adam:
    """Bias-corrected moment estimation with a fixed learning rate."""

    def __init__(self, w0, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.learning_rate = float(learning_rate)
        self.beta1, self.beta2, self.eps = float(beta1), float(beta2), float(eps)
        self.m = np.zeros_like(np.asarray(w0, dtype=float))
        self.v = np.zeros_like(self.m)
        self.t = 0

    def step(self, w, g):
        g = _checked(g)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * g
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * g * g
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return project_nonneg(w - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps))


class Dog:
    """SGD with step size (max distance travelled) / sqrt(sum of grad norms^2).

    The running max starts at the movement constant r so the first step is
    well defined before the iterate has moved.
    """

    def __init__(self, w0, r=1e-3):
        if r <= 0:
            raise ValueError("initial movement constant must be positive")
        self.w0 = np.asarray(w0, dtype=float).copy()
        self.max_dist = float(r)
        self.grad_sq_sum = 0.0

    def step(self, w, g):
        g = _checked(g)
        self.max_dist = max(self.max_dist, float(np.linalg.norm(w - self.w0)))
        self.grad_sq_sum += float(g @ g)
        if self.grad_sq_sum == 0.0:
            return project_nonneg(w)
        return project_nonneg(w - (self.max_dist / np.sqrt(self.grad_sq_sum)) * g)


class Dowg:
    """Distance-weighted variant: gradient norms enter weighted by r_t^2."""

    def __init__(self, w0, r=1e-3):
        if r <= 0:
            raise ValueError("initial movement constant must be positive")
        self.w0 = np.asarray(w0, dtype=float).copy()
        self.max_dist = float(r)
        self.weighted_sq_sum = 0.0

    def step(self, w, g):
        g = _checked(g)
        self.max_dist = max(self.max_dist, float(np.linalg.norm(w - self.w0)))
        self.weighted_sq_sum += self.max_dist ** 2 * float(g @ g)
        if self.weighted_sq_sum == 0.0:
            return project_nonneg(w)
        gamma = self.max_dist ** 2 / np.sqrt(self.weighted_sq_sum)
        return project_nonneg(w - gamma * g)


class _DistanceBound:
    """Running lower bound d on the initial distance to the optimum, grown from
    observed correlations between gradients and displacement from w0."""

    def __init__(self, w0, d0):
        if d0 <= 0:
            raise ValueError("initial lower bound must be positive")
        self.w0 = np.asarray(w0, dtype=float).copy()
        self.d = float(d0)
        self.numerator_sum = 0.0
        self.grad_accum = np.zeros_like(self.w0)

    def absorb(self, w, g):
        """Fold the current gradient in, then raise d if the estimate allows."""
        self.numerator_sum += self.d * float(g @ (self.w0 - w))
        self.grad_accum = self.grad_accum + self.d * g
        denom = float(np.linalg.norm(self.grad_accum))
        if denom > 0.0:
            self.d = max(self.numerator_sum / denom, self.d)


class DAdaptSgd(_DistanceBound):
    """SGD with the distance-over-gradients schedule driven by the d estimate."""

    def __init__(self, w0, d0=1e-6):
        super().__init__(w0, d0)
        self.grad_sq_sum = 0.0

    def step(self, w, g):
        g = _checked(g)
        self.grad_sq_sum += float(g @ g)
        if self.grad_sq_sum > 0.0:
            w_new = project_nonneg(w - (self.d / np.sqrt(self.grad_sq_sum)) * g)
        else:
            w_new = project_nonneg(w)
        self.absorb(w, g)
        return w_new


class ProdigyAdam(_DistanceBound):
    """d estimate composed with bias-corrected moments of d-weighted gradients.

    The moment wrapping follows the published ADAM-based variant of the
    d-estimation family; the d update itself is the plain-sum correlation
    bound shared with DAdaptSgd.
    """

    def __init__(self, w0, d0=1e-6, beta1=0.9, beta2=0.999, eps=1e-8):
        super().__init__(w0, d0)
        self.beta1, self.beta2, self.eps = float(beta1), float(beta2), float(eps)
        self.m = np.zeros_like(self.w0)
        self.v = np.zeros_like(self.w0)
        self.t = 0

    def step(self, w, g):
        g = _checked(g)
        self.t += 1
        dg = self.d * g
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * dg
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * dg * dg
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        w_new = project_nonneg(w - self.d * m_hat / (np.sqrt(v_hat) + self.d * self.eps))
        self.absorb(w, g)
        return w_new


class HotDog:
    """Coordinate-wise accelerated distance-over-gradients with a hot-start gate.

    Exponential moving averages replace the cumulative sums of the plain
    schedule: v tracks squared gradients, m the gradients, and d the
    coordinate-wise distance travelled from w0, all bias-corrected by the
    optimization-step counter c. Steps are refused until the gate h opens;
    the run loop flips it when the chains' log-potential traces stabilize.
    """

    def __init__(self, w0, r=1e-3, beta1=0.9, beta2=0.999, eps=1e-8, hot=False):
        if r <= 0:
            raise ValueError("initial step constant must be positive")
        self.w0 = np.asarray(w0, dtype=float).copy()
        self.r = float(r)
        self.beta1, self.beta2, self.eps = float(beta1), float(beta2), float(eps)
        self.m = np.zeros_like(self.w0)
        self.v = np.zeros_like(self.w0)
        self.d = np.zeros_like(self.w0)
        self.c = 0
        self.h = bool(hot)

    def step(self, w, g):
        if not self.h:
            raise RuntimeError("hot-start gate is closed; the caller must not step yet")
        g = _checked(g)
        self.c += 1
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * g * g
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * g
        self.d = self.beta1 * self.d + (1.0 - self.beta1) * np.maximum(np.abs(w - self.w0), self.d)
        v_hat = self.v / (1.0 - self.beta2 ** self.c)
        m_hat = self.m / (1.0 - self.beta1 ** self.c)
        if self.c == 1:
            d_hat = np.full_like(self.w0, self.r)
        else:
            d_hat = self.d / (1.0 - self.beta1 ** (self.c - 1))
        return project_nonneg(w - d_hat * m_hat / np.sqrt(self.c * (v_hat + self.eps)))


OPTIMIZER_KINDS = ("adam", "dog", "dowg", "dadapt_sgd", "prodigy_adam", "hotdog")


def make_optimizer(kind: str, w0, **hyper):
    """Build an optimizer by name; hyperparameters not used by the kind are ignored."""
    w0 = np.asarray(w0, dtype=float)
    if kind == "adam":
        keys = ("learning_rate", "beta1", "beta2", "eps")
    elif kind in ("dog", "dowg"):
        keys = ("r",)
    elif kind == "dadapt_sgd":
        keys = ("d0",)
    elif kind == "prodigy_adam":
        keys = ("d0", "beta1", "beta2", "eps")
    elif kind == "hotdog":
        keys = ("r", "beta1", "beta2", "eps", "hot")
    else:
        raise ValueError(f"unknown optimizer kind {kind!r}")
    cls = {"adam": Adam, "dog": Dog, "dowg": Dowg, "dadapt_sgd": DAdaptSgd,
           "prodigy_adam": ProdigyAdam, "hotdog": HotDog}[kind]
    return cls(w0, **{k: v for k, v in hyper.items() if k in keys and v is not None})
