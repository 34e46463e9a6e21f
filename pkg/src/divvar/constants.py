"""Euler-product arithmetic constants with certified truncation tails.

The constants multiplying the variance main terms are built from the local
factor

    frak_a_p = sum_{l >= 0} C(k+l-1, k-1)^2 p^{-l},

via a_k = prod_p (1 - 1/p)^{k^2} frak_a_p, its average version
a~_k = a_k * prod_p (1 - (1/p)(1 - 1/frak_a_p)), and the modulus-local
a_k(q) = a_k * prod_{p | q} 1/frak_a_p.

Truncating at p <= P drops factors of the form 1 + O(k^4 / p^2); the tail
bound uses sum_{p > P} p^-2 < 1/P with a deviation constant measured on the
primes up to 10^4 and asserted beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_PRIME_LIMIT = 10**6
_MEASURE_LIMIT = 10**4
_SERIES_RTOL = 1e-17


@dataclass(frozen=True)
class EulerConstantResult:
    value: float
    tail_bound: float  # certified absolute error of the truncation
    prime_limit: int


def primes(limit: int) -> np.ndarray:
    """All primes <= limit, by a vectorized Eratosthenes sieve."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.nonzero(is_prime)[0].astype(np.int64)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return False
    return True


def frak_a_p(k: int, p: int) -> float:
    """The local series sum_{l} C(k+l-1,k-1)^2 p^{-l}, summed to 1e-17 relative."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    total = 0.0
    pinv = 1.0 / p
    power = 1.0
    ell = 0
    while True:
        term = math.comb(k + ell - 1, k - 1) ** 2 * power
        total += term
        ell += 1
        power *= pinv
        if term < _SERIES_RTOL * total and ell > k:
            return total


def _frak_a_vec(k: int, ps: np.ndarray) -> np.ndarray:
    """frak_a_p for an array of primes at once."""
    pinv = 1.0 / ps.astype(np.float64)
    total = np.zeros_like(pinv)
    power = np.ones_like(pinv)
    ell = 0
    while True:
        b = math.comb(k + ell - 1, k - 1) ** 2
        term = b * power
        total += term
        ell += 1
        power *= pinv
        # the largest prime ratio term/total is attained at p=2
        if b * 2.0 ** (-(ell)) < _SERIES_RTOL and ell > k:
            return total


def _factor_logs(k: int, ps: np.ndarray) -> np.ndarray:
    """log of the per-prime factor (1 - 1/p)^{k^2} * frak_a_p."""
    pinv = 1.0 / ps.astype(np.float64)
    return k * k * np.log1p(-pinv) + np.log(_frak_a_vec(k, ps))


def _deviation_constant(k: int) -> float:
    """Measured C with |factor - 1| <= C k^4 / p^2 for p > k^2, on p <= 10^4.

    |factor - 1| * p^2 can approach its limit from below, so the measured
    maximum carries a 2x safety margin; the product loop re-asserts the
    padded bound on every prime actually used.
    """
    ps = primes(_MEASURE_LIMIT)
    ps = ps[ps > k * k]
    factors = np.exp(_factor_logs(k, ps))
    return 2.0 * float(np.max(np.abs(factors - 1.0) * ps.astype(np.float64) ** 2) / k**4)


def a_k_const(k: int, prime_limit: int = DEFAULT_PRIME_LIMIT) -> EulerConstantResult:
    """Truncated Euler product for a_k with a certified tail bound."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if prime_limit < 100:
        raise ValueError(f"need prime_limit >= 100, got {prime_limit}")
    ps = primes(prime_limit)
    logs = _factor_logs(k, ps)
    value = math.exp(math.fsum(logs.tolist()))
    c_dev = _deviation_constant(k)
    # assert the measured bound continues to hold on the primes actually used
    big = ps[ps > _MEASURE_LIMIT]
    if big.size:
        dev = np.abs(np.expm1(logs[ps > _MEASURE_LIMIT])) * big.astype(np.float64) ** 2
        noise = 1e-14 * float(big.max()) ** 2
        if float(dev.max()) > 1.0001 * c_dev * k**4 + noise:
            raise AssertionError("per-factor deviation bound violated beyond 10^4")
    tail = abs(value) * math.expm1(c_dev * k**4 / prime_limit)
    return EulerConstantResult(value, tail, prime_limit)


def a_tilde_k(k: int, prime_limit: int = DEFAULT_PRIME_LIMIT) -> EulerConstantResult:
    """Truncated product for the modulus-averaged constant a~_k."""
    base = a_k_const(k, prime_limit)
    ps = primes(prime_limit)
    fa = _frak_a_vec(k, ps)
    pinv = 1.0 / ps.astype(np.float64)
    logs = np.log1p(-pinv * (1.0 - 1.0 / fa))
    value = base.value * math.exp(math.fsum(logs.tolist()))
    # omitted factors are 1 - O(k^2/p^2): 1 - 1/frak_a_p <= k^2/p
    tail = base.tail_bound + abs(value) * math.expm1(k * k / prime_limit)
    return EulerConstantResult(value, tail, prime_limit)


def a_k_of_q(k: int, q: int, base: EulerConstantResult) -> float:
    """a_k(q) = a_k * prod_{p | q} 1/frak_a_p, by factoring q."""
    if q < 1:
        raise ValueError(f"need q >= 1, got {q}")
    value = base.value
    m = q
    p = 2
    while p * p <= m:
        if m % p == 0:
            value /= frak_a_p(k, p)
            while m % p == 0:
                m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        value /= frak_a_p(k, m)
    return value


def a_k_of_q_bulk(k: int, q_max: int, base: EulerConstantResult) -> np.ndarray:
    """a_k(q) for every q <= q_max (index 0 unused), in O(q_max log log q_max)."""
    out = np.full(q_max + 1, base.value, dtype=np.float64)
    out[0] = 0.0
    ps = primes(q_max)
    fa = _frak_a_vec(k, ps)
    for p, f in zip(ps.tolist(), fa.tolist()):
        out[p::p] /= f
    return out


def dirichlet_series_check(k: int, q: int, n_max: int, dk_sq_over_n=None) -> float:
    """Partial-sum probe of the limit definition of a_k(q).

    Evaluates (s-1)^{k^2} * sum_{n <= n_max, (n,q)=1} d_k(n)^2 / n^s at
    s = 1 + 1/log(n_max).  Converges to a_k(q) only logarithmically; used as
    a soft consistency check, never as the computation of record.
    """
    from .sieve import sieve_dk

    s = 1.0 + 1.0 / math.log(n_max)
    table = sieve_dk(k, n_max)
    n = np.arange(n_max + 1, dtype=np.float64)
    n[0] = 1.0
    vals = table.values.astype(np.float64) ** 2 * n ** (-s)
    vals[0] = 0.0
    if q > 1:
        coprime = np.gcd(np.arange(n_max + 1, dtype=np.int64), q) == 1
        vals = np.where(coprime, vals, 0.0)
    return (s - 1.0) ** (k * k) * float(vals.sum())
