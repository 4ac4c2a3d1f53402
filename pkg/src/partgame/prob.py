"""Combinatorial probability kernels.

All functions are generic over the number type: pass :class:`Fraction`
arguments to get exact results, floats for fast approximate ones.  Strings
are parsed as exact rationals.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

from .numeric import Number, to_exact


def _prob(q) -> Number:
    if isinstance(q, str):
        q = to_exact(q)
    elif isinstance(q, int) and not isinstance(q, bool):
        q = Fraction(q)
    if not 0 <= q <= 1:
        raise ValueError(f"probability {q!r} outside [0, 1]")
    return q


def binom_coeff(n: int, j: int) -> int:
    """``C(n, j)``, zero outside ``0 <= j <= n``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if j < 0 or j > n:
        return 0
    return comb(n, j)


def binomial_pmf(m: int, j: int, q) -> Number:
    """P(exactly ``j`` successes in ``m`` Bernoulli(q) trials)."""
    q = _prob(q)
    if j < 0 or j > m:
        return q * 0
    return comb(m, j) * q**j * (1 - q) ** (m - j)


# The number type is part of the cache key: Fraction(1, 2) and 0.5 hash alike.
@lru_cache(maxsize=65536)
def _binomial_tail(m: int, t: int, q: Number, _kind: type) -> Number:
    if t <= 0:
        return q * 0 + 1
    if t > m:
        return q * 0
    p = 1 - q
    return sum(comb(m, j) * q**j * p ** (m - j) for j in range(t, m + 1))


def binomial_tail(m: int, t: int, q) -> Number:
    """P(at least ``t`` successes among ``m`` independent Bernoulli(q) trials)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    q = _prob(q)
    return _binomial_tail(m, t, q, type(q))


def f_term(lam: int, j: int, q) -> Number:
    """Probability that exactly ``j - 1`` of ``lam - 1`` Bernoulli(q) users are selected.

    ``f(lam, j, q) = C(lam-1, j-1) q^(j-1) (1-q)^(lam-j)``.
    """
    if lam < 1:
        raise ValueError(f"lam must be >= 1, got {lam}")
    if j < 1 or j > lam:
        raise ValueError(f"need 1 <= j <= lam, got j={j}, lam={lam}")
    q = _prob(q)
    return comb(lam - 1, j - 1) * q ** (j - 1) * (1 - q) ** (lam - j)


def f_or_zero(lam: int, j: int, q) -> Number:
    """:func:`f_term` extended by zero where the binomial term is empty."""
    q = _prob(q)
    if lam < 1 or j < 1 or j > lam:
        return q * 0
    return f_term(lam, j, q)


def poisson_binomial_pmf(probs: Iterable) -> list:
    """Distribution of the success count of independent heterogeneous trials.

    Plain O(n^2) convolution of the factors ``(1 - p) + p x``; exact for
    Fraction input.
    """
    dist = [Fraction(1)]
    for p in probs:
        p = _prob(p)
        nxt = [p * 0] * (len(dist) + 1)
        for s, mass in enumerate(dist):
            nxt[s] += mass * (1 - p)
            nxt[s + 1] += mass * p
        dist = nxt
    return dist


@lru_cache(maxsize=65536)
def _pb_tail_sorted(probs: tuple, t: int, _kinds: tuple) -> Number:
    if t <= 0:
        return Fraction(1) if not probs else probs[0] * 0 + 1
    if t > len(probs):
        return Fraction(0) if not probs else probs[0] * 0
    return sum(poisson_binomial_pmf(probs)[t:])


def poisson_binomial_tail(probs: Sequence, t: int) -> Number:
    """P(at least ``t`` successes) for independent Bernoulli(p_i) trials."""
    checked = tuple(sorted(_prob(p) for p in probs))
    return _pb_tail_sorted(checked, t, tuple(type(p) for p in checked))


def verify_binomial_identity(lam: int, k: int, q) -> bool:
    """Check the one-step decomposition of the binomial tail at threshold k-1.

    ``tail(lam, k-1) == tail(lam-1, k-1) + C(lam-1, k-2) q^(k-1) (1-q)^(lam-k+1)``:
    adding one more trial raises the tail by exactly the chance that the new
    trial is the (k-1)-th success.
    """
    if not 1 <= k <= lam:
        raise ValueError(f"need 1 <= k <= lam, got k={k}, lam={lam}")
    q = _prob(q)
    lhs = binomial_tail(lam, k - 1, q)
    extra = binom_coeff(lam - 1, k - 2) * q ** (k - 1) * (1 - q) ** (lam - k + 1)
    return lhs == binomial_tail(lam - 1, k - 1, q) + extra
