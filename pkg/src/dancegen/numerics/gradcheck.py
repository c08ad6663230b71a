"""Central finite-difference check of tape gradients."""

from __future__ import annotations

import numpy as np

from ..errors import NumericError, ParameterError
from .tensor import GradTape, Tensor

# Relative errors are measured against max(|analytic|, |numeric|, ABS_FLOOR)
# so coordinates with vanishing gradient do not divide by ~0.
ABS_FLOOR = 1e-6


def numerical_gradient(f, xs, eps: float) -> list:
    """Central differences ``(f(x+eps) - f(x-eps)) / 2eps`` for every coordinate."""
    grads = []
    for k, x in enumerate(xs):
        g = np.zeros(x.shape)
        base = x.data.copy()
        for idx in np.ndindex(x.shape):
            vals = []
            for step in (eps, -eps):
                pert = base.copy()
                pert[idx] += step
                args = list(xs)
                args[k] = Tensor(pert)
                v = float(f(*args))
                if not np.isfinite(v):
                    raise NumericError(f"non-finite value at perturbed coordinate {idx} of input {k}")
                vals.append(v)
            g[idx] = (vals[0] - vals[1]) / (2.0 * eps)
        grads.append(g)
    return grads


def grad_check(f, x, eps: float = 1e-6) -> float:
    """Worst relative error between tape gradients and central differences.

    ``f`` maps one tensor (or, if ``x`` is a list, several tensors as
    positional arguments) to a scalar tensor.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ParameterError(f"eps must lie in [1e-7, 1e-3], got {eps}")
    xs = [x] if isinstance(x, Tensor) else list(x)
    tracked = [Tensor(t.data, requires_grad=True) for t in xs]
    with GradTape() as tape:
        y = f(*tracked)
    analytic = tape.gradient(y, tracked)
    numeric = numerical_gradient(f, xs, eps)
    worst = 0.0
    for a, n in zip(analytic, numeric):
        if a.size == 0:
            continue
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), ABS_FLOOR)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst
