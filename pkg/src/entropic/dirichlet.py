"""Dirichlet-Ferguson process: stick-breaking sampler and finite-dimensional laws."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .measures import Discrete

DEFAULT_REMAINDER = 1e-10
DEFAULT_MAX_TERMS = 10**6
_BLOCK = 64


@dataclass(frozen=True, eq=False)
class StickBreakingSample:
    beta: float
    sticks: np.ndarray          # t_k ~ Beta(1, beta)
    weights: np.ndarray         # lambda_k = t_k prod_{i<k} (1 - t_i)
    remainder: float            # prod_k (1 - t_k) = 1 - sum(lambda)
    atoms: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.weights)


def _check_beta(beta):
    if not (beta > 0 and math.isfinite(beta)):
        raise ConfigurationError(f"beta must be positive, got {beta!r}")


def beta_one_inverse_cdf(u, beta):
    """Inverse CDF of Beta(1, beta): ``1 - (1 - u)^(1/beta)``."""
    return -np.expm1(np.log1p(-np.asarray(u, dtype=float)) / beta)


def sample_stick_breaking(beta, rng, remainder_below=DEFAULT_REMAINDER, max_terms=None):
    """Stick-breaking weights, stopped once the unbroken remainder is small.

    Stops at the first ``K`` with remainder below ``remainder_below`` or at
    ``max_terms``, whichever comes first. Uniforms are consumed in blocks of
    64, so output depends only on ``(rng state, beta, truncation)``.
    """
    _check_beta(beta)
    cap = DEFAULT_MAX_TERMS if max_terms is None else int(max_terms)
    if cap < 1:
        raise ConfigurationError("max_terms must be positive")
    thresh = 0.0 if remainder_below is None else float(remainder_below)
    sticks = []
    rem = 1.0
    done = False
    while not done:
        block = beta_one_inverse_cdf(rng.random(_BLOCK), beta)
        for t in block:
            sticks.append(t)
            rem *= 1.0 - t
            if rem < thresh or len(sticks) >= cap or rem == 0.0:
                done = True
                break
    t = np.array(sticks)
    left = np.concatenate([[1.0], np.cumprod(1.0 - t)[:-1]])
    return StickBreakingSample(float(beta), t, t * left, float(np.prod(1.0 - t)))


def stick_weights_batch(beta, rng, size, n_terms):
    """First ``n_terms`` stick-breaking weights for ``size`` independent draws."""
    _check_beta(beta)
    t = beta_one_inverse_cdf(rng.random((size, n_terms)), beta)
    left = np.cumprod(1.0 - t, axis=1)
    left = np.concatenate([np.ones((size, 1)), left[:, :-1]], axis=1)
    return t * left


def expected_stick(beta, k):
    """``E lambda_k = (1/beta) (beta / (1 + beta))^k`` for ``k = 1, 2, ...``."""
    return (1.0 / beta) * (beta / (1.0 + beta)) ** np.asarray(k, dtype=float)


def draw_dirichlet_ferguson(beta, domain, rng, remainder_below=DEFAULT_REMAINDER, max_terms=None):
    """Stick-breaking sample with atom locations drawn iid from ``m``.

    Atoms are drawn after the sticks, one block per sample.
    """
    s = sample_stick_breaking(beta, rng, remainder_below, max_terms)
    atoms = domain.sample(rng, len(s))
    return StickBreakingSample(s.beta, s.sticks, s.weights, s.remainder, atoms)


def to_measure(sample, domain):
    """Discrete measure of a drawn sample; weights renormalized by ``1/(1 - remainder)``."""
    w = sample.weights / sample.weights.sum()
    return Discrete(domain, sample.atoms, w)


def sample_dirichlet_ferguson(beta, domain, rng, remainder_below=DEFAULT_REMAINDER, max_terms=None):
    return to_measure(draw_dirichlet_ferguson(beta, domain, rng, remainder_below, max_terms), domain)


def dirichlet_marginal_logdensity(masses, beta, x):
    """Log-density of Dirichlet(beta m(M_1), ..., beta m(M_N)) on the simplex.

    Points on the boundary give ``+inf`` (exponent below 1) or ``-inf``
    (exponent above 1); a zero coordinate with exponent exactly 1 contributes
    nothing.
    """
    a = beta * np.asarray(masses, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(a <= 0):
        raise PreconditionError("all parameters beta * m(M_i) must be positive")
    if x.shape != a.shape or np.any(x < 0) or abs(x.sum() - 1) > 1e-10:
        raise PreconditionError("x must lie in the simplex")
    norm = math.lgamma(float(a.sum())) - sum(math.lgamma(float(v)) for v in a)
    zero = x == 0
    if np.any(zero):
        up = np.any(zero & (a < 1))
        down = np.any(zero & (a > 1))
        if up and down:
            raise PreconditionError("density is 0 * inf at this boundary point")
        if up:
            return float("inf")
        if down:
            return float("-inf")
    nz = ~zero
    return float(norm + np.sum((a[nz] - 1) * np.log(x[nz])))


def order_sizes(sample):
    """Weights in nonincreasing order (the Dirichlet-Poisson ordering)."""
    w = sample.weights if isinstance(sample, StickBreakingSample) else np.asarray(sample)
    return np.sort(w, kind="stable")[::-1]


def largest_hole_scale(beta):
    """Small-beta scale ``1 / (1 + 0.7 beta)`` of the largest weight."""
    return 1.0 / (1.0 + 0.7 * beta)


def shard_seeds(seed, n_shards):
    """Per-shard seeds for batch sampling: ``seed + shard index``."""
    return [int(seed) + i for i in range(int(n_shards))]
