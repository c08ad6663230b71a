"""Diagonal Gaussian mixtures: parameters, negative log-likelihood and sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, DimensionError, ParameterError
from ..numerics import SeededRng, Tensor, add, as_tensor, div, log, logsumexp, mean, mul, neg, sub, sum_

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class MixtureParams:
    """One step's mixture: ``pi`` (K,), ``mu`` and ``sigma`` (K, D).

    ``log_pi`` keeps the log-weights the network produced so tiny weights
    are not lost to underflow; it defaults to ``log(pi)``.
    """

    pi: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    log_pi: np.ndarray | None = None

    def __post_init__(self):
        pi = np.array(self.pi, dtype=np.float64)
        mu = np.array(self.mu, dtype=np.float64)
        sigma = np.array(self.sigma, dtype=np.float64)
        if pi.ndim != 1 or mu.ndim != 2 or mu.shape != sigma.shape or mu.shape[0] != pi.size:
            raise DimensionError(f"pi {pi.shape}, mu {mu.shape}, sigma {sigma.shape} do not form a K x D mixture")
        if not (np.isfinite(pi).all() and np.isfinite(mu).all() and np.isfinite(sigma).all()):
            raise ContractError("mixture parameters must be finite")
        if (pi < 0).any() or abs(pi.sum() - 1.0) > 1e-9:
            raise ContractError(f"mixture weights must be non-negative and sum to 1, got sum {pi.sum()!r}")
        if (sigma <= 0).any():
            raise ContractError("mixture scales must be positive")
        if self.log_pi is None:
            with np.errstate(divide="ignore"):
                log_pi = np.log(pi)
        else:
            log_pi = np.array(self.log_pi, dtype=np.float64)
        for name, arr in (("pi", pi), ("mu", mu), ("sigma", sigma), ("log_pi", log_pi)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def components(self) -> int:
        return self.pi.size

    @property
    def dim(self) -> int:
        return self.mu.shape[1]

    def mean(self) -> np.ndarray:
        return self.pi @ self.mu

    def variance(self) -> np.ndarray:
        """Per-dimension variance of the mixture (law of total variance)."""
        m = self.mean()
        return self.pi @ (self.sigma**2 + self.mu**2) - m**2


def gmm_nll(log_pi, mu, sigma, y, sigma_floor: float = 1e-6) -> Tensor:
    """Mean negative log-likelihood of targets under diagonal mixtures.

    Shapes: ``log_pi`` (N, K), ``mu`` and ``sigma`` (N, K, D), ``y`` (N, D).
    Differentiable with respect to every mixture argument.
    """
    log_pi, mu, sigma = as_tensor(log_pi), as_tensor(mu), as_tensor(sigma)
    y = np.asarray(y.data if isinstance(y, Tensor) else y, dtype=np.float64)
    n, k, d = mu.shape
    if log_pi.shape != (n, k) or sigma.shape != mu.shape or y.shape != (n, d):
        raise DimensionError(f"log_pi {log_pi.shape}, mu {mu.shape}, sigma {sigma.shape}, y {y.shape} disagree")
    if not np.isfinite(y).all():
        raise ParameterError("targets must be finite")
    lowest = float(sigma.data.min())
    if lowest < sigma_floor:
        raise ContractError(f"sigma {lowest!r} is below the floor {sigma_floor!r}")
    z = div(sub(Tensor(y[:, None, :]), mu), sigma)
    log_density = neg(add(mul(0.5, mul(z, z)), log(sigma)))
    per_component = sub(add(log_pi, sum_(log_density, axis=2)), d * HALF_LOG_2PI)
    return neg(mean(logsumexp(per_component, axis=1)))


def mdn_nll(params: MixtureParams, y, sigma_floor: float = 1e-6) -> float:
    """Negative log-likelihood of one D-dimensional target."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (params.dim,):
        raise DimensionError(f"target has shape {y.shape}, mixture dimension is {params.dim}")
    nll = gmm_nll(params.log_pi[None], params.mu[None], params.sigma[None], y[None], sigma_floor)
    return float(nll)


def sample_mixture(params: MixtureParams, rng: SeededRng, pi_temp: float = 1.0, sigma_temp: float = 1.0) -> np.ndarray:
    """Draw one frame.

    The component comes from ``softmax(log pi / pi_temp)``; ``pi_temp = 0``
    picks the heaviest component, ties going to the lowest index.  The frame
    is ``mu_k + sigma_k * sigma_temp * z``, so ``sigma_temp = 0`` returns the
    component mean exactly.  One uniform and D normals are always consumed so
    the stream position does not depend on the temperatures.
    """
    if pi_temp < 0 or sigma_temp < 0:
        raise ParameterError(f"temperatures must be >= 0, got pi_temp={pi_temp}, sigma_temp={sigma_temp}")
    u = rng.uniform()
    z = rng.normal(params.dim)
    if pi_temp == 0 or params.components == 1:
        k = int(np.argmax(params.log_pi))
    else:
        s = params.log_pi / pi_temp
        w = np.exp(s - s.max())
        cdf = np.cumsum(w / w.sum())
        k = min(int(np.searchsorted(cdf, u, side="right")), params.components - 1)
    if sigma_temp == 0:
        return params.mu[k].copy()
    return params.mu[k] + params.sigma[k] * sigma_temp * z
