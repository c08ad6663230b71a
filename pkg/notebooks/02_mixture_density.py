"""
Gaussian mixture heads and sampling temperatures
================================================

The network ends in a K-component diagonal Gaussian mixture over the next
pose.  This script evaluates the negative log-likelihood in closed-form
cases and shows what the two sampling temperatures do.
"""

import math

import numpy as np

from dancegen.mdrnn import MixtureParams, count_params, mdn_nll, profile_config, sample_mixture
from dancegen.numerics import SeededRng

# %%
# A unit Gaussian centred on the target costs D/2 ln(2 pi) nats.
for d in (1, 66):
    y = np.zeros(d)
    print(f"D={d}: {mdn_nll(MixtureParams([1.0], y[None], np.ones((1, d))), y):.6f}",
          f"(closed form {d / 2 * math.log(2 * math.pi):.6f})")

# %%
# Parameter counts of the two layer profiles.
for name in ("small", "paper"):
    print(name, count_params(profile_config(name)))

# %%
# Two well separated components.  pi_temp sharpens the choice of component
# (0 always takes the heaviest) and sigma_temp scales the spread (0 returns
# the component mean).
params = MixtureParams([0.3, 0.7], [[-2.0], [2.0]], [[0.5], [0.5]])
rng = SeededRng(1)
for pi_temp, sigma_temp in [(1.0, 1.0), (0.5, 1.0), (1.0, 0.2), (0.0, 0.0)]:
    draws = np.array([sample_mixture(params, rng, pi_temp, sigma_temp)[0] for _ in range(4000)])
    print(f"pi_temp={pi_temp} sigma_temp={sigma_temp}: share right {np.mean(draws > 0):.2f}, std {draws.std():.2f}")
