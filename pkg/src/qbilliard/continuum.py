"""Large-``M`` limits of the loop-count distributions.

Three regularised families have finite limits:

``dctc``
    product seed with ``g = q**(1/M)``; limit Poisson with ``lam = ln(1/q)``.
``pctc_h``
    incomplete teleportation with ``N = M``; limit
    ``x**(2k) / (k!)**2 / I0(2x)`` with ``x = (1-h)/h``.
``pctc_beta``
    power swaps with ``beta = r/M``; the same form with ``x = r``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .deutsch import regularized_pmf
from .pctc import incomplete_pmf, probabilistic_pmf

FAMILIES = ("dctc", "pctc_h", "pctc_beta")
TAIL_BOUND = 1e-14


def bessel_i(n, x, rtol=1e-16, max_terms=10_000):
    """Modified Bessel function ``I_n(x)`` by its power series.

    Terms ``(x/2)**(2m+n) / (m! (m+n)!)`` are added until one falls below
    ``rtol`` times the partial sum.  Intended for ``0 <= x <= 100``.
    """
    if n < 0 or int(n) != n:
        raise ValueError(f"order must be a nonnegative integer, got {n}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0:
        return 1.0 if n == 0 else 0.0
    half = x / 2
    term = math.exp(n * math.log(half) - math.lgamma(n + 1))
    total = term
    sq = half * half
    for m in range(1, max_terms):
        term *= sq / (m * (m + n))
        total += term
        if term < rtol * total:
            return total
    raise ArithmeticError(f"series for I_{n}({x}) did not converge")


def _check_q(q):
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    return math.log(1 / q)


def _check_h(h):
    if not 0 < h <= 1:
        raise ValueError(f"h must lie in (0, 1], got {h}")
    return (1 - h) / h


def _check_r(r):
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    return float(r)


def poisson_pmf(k, lam):
    k = np.asarray(k)
    if lam == 0:
        return np.where(k == 0, 1.0, 0.0)
    lg = np.vectorize(math.lgamma)(k + 1.0)
    return np.exp(k * math.log(lam) - lam - lg)


def bessel_form_pmf(k, x):
    """``x**(2k) / (k!)**2 / I0(2x)``."""
    k = np.asarray(k)
    if x == 0:
        return np.where(k == 0, 1.0, 0.0)
    lg = np.vectorize(math.lgamma)(k + 1.0)
    return np.exp(2 * k * math.log(x) - 2 * lg) / bessel_i(0, 2 * x)


def dctc_limit_pmf(k, q):
    """``q ln(1/q)**k / k!``."""
    return poisson_pmf(k, _check_q(q))


def pctc_h_limit_pmf(k, h):
    return bessel_form_pmf(k, _check_h(h))


def pctc_beta_limit_pmf(k, r):
    return bessel_form_pmf(k, _check_r(r))


def dctc_limit_expectation(q):
    return _check_q(q)


def bessel_form_expectation(x):
    if x == 0:
        return 0.0
    return x * bessel_i(1, 2 * x) / bessel_i(0, 2 * x)


def pctc_h_limit_expectation(h):
    return bessel_form_expectation(_check_h(h))


def pctc_beta_limit_expectation(r):
    return bessel_form_expectation(_check_r(r))


def _scale(family, param):
    if family == "dctc":
        return _check_q(param)
    if family == "pctc_h":
        return _check_h(param)
    if family == "pctc_beta":
        return _check_r(param)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def limit_pmf(family, param, k):
    fn = {"dctc": dctc_limit_pmf, "pctc_h": pctc_h_limit_pmf, "pctc_beta": pctc_beta_limit_pmf}
    if family not in fn:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    return fn[family](k, param)


def limit_expectation(family, param):
    fn = {
        "dctc": dctc_limit_expectation,
        "pctc_h": pctc_h_limit_expectation,
        "pctc_beta": pctc_beta_limit_expectation,
    }
    if family not in fn:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    return fn[family](param)


def truncation_index(family, param, bound=TAIL_BOUND):
    """Smallest ``K > 2x`` with ``2 * Pr(K) < bound``.

    Past ``k > 2x`` successive terms of both limit families shrink by more
    than a factor of two, so everything from ``K`` on sums to less than
    ``2 Pr(K)``.
    """
    x = _scale(family, param)
    k = 0
    while True:
        if k > 2 * x and 2 * float(limit_pmf(family, param, k)) < bound:
            return k
        k += 1


def limit_distribution(family, param, bound=TAIL_BOUND):
    """Limit pmf on ``0..K-1`` with ``K`` from ``truncation_index``."""
    K = truncation_index(family, param, bound)
    return limit_pmf(family, param, np.arange(K))


def finite_pmf(family, param, M):
    """Regularised finite-``M`` distribution of the family."""
    if family == "dctc":
        _check_q(param)
        return regularized_pmf(M, param)
    if family == "pctc_h":
        _check_h(param)
        return incomplete_pmf(M, M, param)
    if family == "pctc_beta":
        return probabilistic_pmf(M, _check_r(param) / M)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


@dataclass(frozen=True)
class ConvergenceReport:
    family: str
    param: float
    rows: tuple
    monotone: bool

    @property
    def final_distance(self):
        return self.rows[-1][1]


def sup_distance(family, param, M):
    finite = finite_pmf(family, param, M)
    K = max(M, truncation_index(family, param))
    limit = limit_pmf(family, param, np.arange(K + 1))
    padded = np.zeros(K + 1)
    padded[: finite.size] = finite
    return float(np.abs(padded - limit).max())


def convergence_report(family, param, M_list):
    """Sup-norm distance to the limit for each ``M``.

    ``monotone`` is True when the distances never increase along
    ``M_list``.
    """
    rows = tuple((int(M), sup_distance(family, param, int(M))) for M in M_list)
    dists = [d for _, d in rows]
    monotone = all(b <= a for a, b in zip(dists, dists[1:]))
    return ConvergenceReport(family, float(param), rows, monotone)
