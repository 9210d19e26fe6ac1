"""Binomial coefficients and binomial-type weights.

Below ``EXACT_LIMIT`` coefficients are exact Python integers; above it they
come from log-gamma so that ``M`` in the thousands neither overflows nor
loses the small tail terms.
"""

import math

import numpy as np

EXACT_LIMIT = 60


def comb(M, k):
    """``C(M, k)`` as an exact integer for ``M <= EXACT_LIMIT``, else a float."""
    if not 0 <= k <= M:
        return 0
    if M <= EXACT_LIMIT:
        return math.comb(M, k)
    return math.exp(log_comb(M, k))


def log_comb(M, k):
    return math.lgamma(M + 1) - math.lgamma(k + 1) - math.lgamma(M - k + 1)


def _xlogy(n, x):
    # n * log(x) with the convention 0 * log(0) = 0
    n = np.asarray(n, dtype=float)
    if x > 0:
        return n * math.log(x)
    return np.where(n == 0, 0.0, -np.inf)


def binomial_weights(M, a, b):
    """``C(M, k) a**(M - k) b**k`` for ``k = 0..M`` with ``a, b >= 0``."""
    k = np.arange(M + 1)
    if M <= EXACT_LIMIT:
        coeffs = np.array([math.comb(M, int(i)) for i in k], dtype=float)
        return coeffs * np.where(M - k == 0, 1.0, float(a) ** (M - k)) * np.where(k == 0, 1.0, float(b) ** k)
    logc = np.array([log_comb(M, int(i)) for i in k])
    return np.exp(logc + _xlogy(M - k, a) + _xlogy(k, b))


def binomial_pmf(M, g):
    """Probability of ``k`` successes in ``M`` trials with failure probability ``g``.

    Note the convention: ``g`` weights the ``M - k`` unsuccessful trials.
    """
    if not 0 <= g <= 1:
        raise ValueError(f"g must lie in [0, 1], got {g}")
    return binomial_weights(M, g, 1 - g)
