import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from divvar.constants import (
    a_k_const,
    a_k_of_q,
    a_k_of_q_bulk,
    a_tilde_k,
    frak_a_p,
    is_prime,
    primes,
)


def test_primes_small():
    assert list(primes(30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@given(st.integers(min_value=-5, max_value=500))
def test_is_prime_agrees_with_sieve(n):
    table = set(primes(500).tolist())
    assert is_prime(n) == (n in table)


def test_frak_a_p_k1():
    # k=1: sum of p^-l = geometric series
    for p in (2, 3, 11):
        assert frak_a_p(1, p) == pytest.approx(1 / (1 - 1 / p), rel=1e-14)


def test_a1_is_one():
    r = a_k_const(1, 10**5)
    assert abs(r.value - 1.0) <= max(r.tail_bound, 1e-12)


def test_a2_matches_basel_constant():
    # the k=2 Euler product collapses to 6/pi^2
    r = a_k_const(2, 10**6)
    assert abs(r.value - 6 / math.pi**2) <= r.tail_bound


def test_stability_across_prime_limits():
    for k in (2, 3):
        r5 = a_k_const(k, 10**5)
        r6 = a_k_const(k, 10**6)
        assert abs(r5.value - r6.value) <= r5.tail_bound + r6.tail_bound
        t5 = a_tilde_k(k, 10**5)
        t6 = a_tilde_k(k, 10**6)
        assert abs(t5.value - t6.value) <= t5.tail_bound + t6.tail_bound


def test_tail_bound_shrinks():
    r5 = a_k_const(2, 10**5)
    r6 = a_k_const(2, 10**6)
    assert r6.tail_bound < r5.tail_bound


def test_a_k_of_q_depends_on_radical_only():
    base = a_k_const(2, 10**6)
    assert a_k_of_q(2, 12, base) == pytest.approx(a_k_of_q(2, 6, base), rel=1e-14)
    assert a_k_of_q(2, 1, base) == base.value


def test_bulk_matches_single():
    base = a_k_const(2, 10**6)
    bulk = a_k_of_q_bulk(2, 500, base)
    for q in (1, 2, 30, 97, 441, 500):
        assert bulk[q] == pytest.approx(a_k_of_q(2, q, base), rel=1e-12)


def test_mean_of_a_q_approaches_a_tilde():
    base = a_k_const(2, 10**6)
    tilde = a_tilde_k(2, 10**6).value
    errs = []
    for Q in (10**3, 10**4):
        bulk = a_k_of_q_bulk(2, Q, base)
        errs.append(abs(float(np.mean(bulk[1:])) - tilde))
    assert errs[1] < errs[0]


@settings(max_examples=50)
@given(st.integers(min_value=2, max_value=5), st.sampled_from([2, 3, 5, 7, 11, 13]))
def test_frak_a_p_exceeds_one(k, p):
    # the local factor is a sum of positive terms starting at 1
    assert frak_a_p(k, p) > 1.0
