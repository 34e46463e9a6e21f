"""Exact piecewise polynomials from the unitary-group variance prediction.

gamma_k(c) is the degree k^2-1 piecewise polynomial, with knots at the
integers 0..k, defined by the delta-slice integral of the squared Vandermonde
density over the unit cube, normalized by k! and the square of a Barnes-G
value.  Everything in this module is exact rational arithmetic
(``fractions.Fraction``); floats appear only in the Monte-Carlo oracle.

The off-diagonal correction polynomial p_k is computed by two independent
routes (a formal three-variable Laurent-series residue, and a closed
multinomial sum) which serve as mutual oracles.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

DEFAULT_K_BOUND = 6


class PolynomialBoundError(ValueError):
    pass


# ----------------------------------------------------------------------------
# Rational polynomials (dense, ascending degree, trailing zeros trimmed)
# ----------------------------------------------------------------------------

class RationalPolynomial:
    """Dense polynomial over Fraction; the zero polynomial has degree -1."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Fraction | int] = ()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalPolynomial) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] += x
        return RationalPolynomial(out)

    def __sub__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        return self + other.scale(-1)

    def __mul__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        if not self or not other:
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return RationalPolynomial(out)

    def scale(self, s) -> "RationalPolynomial":
        s = Fraction(s)
        return RationalPolynomial([s * x for x in self.coeffs])

    def eval(self, c) -> Fraction:
        c = Fraction(c)
        acc = Fraction(0)
        for x in reversed(self.coeffs):
            acc = acc * c + x
        return acc

    def eval_float(self, c: float) -> float:
        acc = 0.0
        for x in reversed(self.coeffs):
            acc = acc * c + float(x)
        return acc

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial([i * x for i, x in enumerate(self.coeffs)][1:])

    def integral_over(self, a, b) -> Fraction:
        """Exact definite integral over [a, b]."""
        anti = [Fraction(0)] + [x / (i + 1) for i, x in enumerate(self.coeffs)]
        p = RationalPolynomial(anti)
        return p.eval(b) - p.eval(a)

    def compose_linear(self, alpha, beta) -> "RationalPolynomial":
        """Exact substitution c -> alpha + beta*c."""
        shift = RationalPolynomial([Fraction(alpha), Fraction(beta)])
        acc = RationalPolynomial()
        for x in reversed(self.coeffs):
            acc = acc * shift + RationalPolynomial([x])
        return acc

    def __repr__(self) -> str:
        return f"RationalPolynomial({list(self.coeffs)!r})"


def _shifted_monomial(t: int, n: int, coeff: Fraction) -> RationalPolynomial:
    """coeff * (c - t)^n expanded in the monomial basis of c."""
    out = [Fraction(0)] * (n + 1)
    for i in range(n + 1):
        out[i] = coeff * math.comb(n, i) * Fraction(-t) ** (n - i)
    return RationalPolynomial(out)


# ----------------------------------------------------------------------------
# Piecewise polynomials on [0, k] with integer knots
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewisePolynomial:
    """k polynomial pieces; piece j is valid on [j, j+1), c=k owned by the last."""

    k: int
    pieces: tuple[RationalPolynomial, ...]

    def eval(self, c) -> Fraction:
        c = Fraction(c)
        if c < 0 or c > self.k:
            raise ValueError(f"c={c} outside [0, {self.k}]")
        j = min(int(c), self.k - 1)
        return self.pieces[j].eval(c)

    def eval_float(self, c: float) -> float:
        if c < 0 or c > self.k:
            raise ValueError(f"c={c} outside [0, {self.k}]")
        j = min(int(math.floor(c)), self.k - 1)
        return self.pieces[j].eval_float(c)

    def integral(self) -> Fraction:
        return sum(
            (p.integral_over(j, j + 1) for j, p in enumerate(self.pieces)),
            Fraction(0),
        )

    def to_json(self) -> str:
        obj = {
            "k": self.k,
            "pieces": [[str(c) for c in p.coeffs] for p in self.pieces],
        }
        return json.dumps(obj, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "PiecewisePolynomial":
        obj = json.loads(text)
        pieces = tuple(
            RationalPolynomial([Fraction(c) for c in piece]) for piece in obj["pieces"]
        )
        return PiecewisePolynomial(obj["k"], pieces)


# ----------------------------------------------------------------------------
# Barnes G and the Vandermonde square
# ----------------------------------------------------------------------------

def barnes_g(n: int) -> int:
    """G(n) = 0! * 1! * ... * (n-2)! for n >= 1, so G(1) = G(2) = 1."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    out = 1
    for i in range(1, n - 1):
        out *= math.factorial(i)
    return out


def vandermonde_sq(k: int, k_bound: int = DEFAULT_K_BOUND) -> dict[tuple[int, ...], int]:
    """Expansion of (prod_{i<j} (w_i - w_j))^2 as exponent-vector -> coefficient."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if k > k_bound:
        raise PolynomialBoundError(f"k={k} exceeds bound {k_bound} ((k!)^2 terms)")
    # Vandermonde determinant: sum over permutations of signed monomials.
    terms: list[tuple[tuple[int, ...], int]] = []
    for perm in itertools.permutations(range(k)):
        sign = 1
        seen = [False] * k
        for i in range(k):
            if seen[i]:
                continue
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
        terms.append((perm, sign))
    out: dict[tuple[int, ...], int] = {}
    for e1, s1 in terms:
        for e2, s2 in terms:
            key = tuple(a + b for a, b in zip(e1, e2))
            out[key] = out.get(key, 0) + s1 * s2
    return {key: c for key, c in out.items() if c}


# ----------------------------------------------------------------------------
# Exact delta-slice integrals over the unit cube
# ----------------------------------------------------------------------------

def slice_integral(a: Sequence[int]) -> PiecewisePolynomial:
    """Exact density c -> int_{[0,1]^k} delta(sum w - c) prod w_i^{a_i} dw.

    Via Laplace transforms: each factor int_0^1 w^a e^{-sw} dw equals
    a!/s^{a+1} - e^{-s} sum_{j<=a} (a!/j!) s^{j-a-1}.  Expanding the product
    by inclusion-exclusion over which factors take the e^{-s} part gives
    Laurent polynomials in 1/s attached to shifts e^{-t s}; inverting
    termwise yields truncated powers (c - t)_+^{m-1}/(m-1)!.
    """
    k = len(a)
    if k < 1 or any(ai < 0 for ai in a):
        raise ValueError(f"need nonempty nonnegative exponents, got {a!r}")
    # Per-coordinate Laurent parts as {m: coeff} meaning coeff * s^{-m}.
    plain = []
    shifted = []
    for ai in a:
        fact = math.factorial(ai)
        plain.append({ai + 1: Fraction(fact)})
        shifted.append(
            {ai + 1 - j: Fraction(fact, math.factorial(j)) for j in range(ai + 1)}
        )
    # by_shift[t] accumulates the Laurent polynomial attached to e^{-t s}.
    by_shift: list[dict[int, Fraction]] = [dict() for _ in range(k + 1)]
    for subset in range(1 << k):
        t = subset.bit_count()
        prod = {0: Fraction(1)}
        for i in range(k):
            part = shifted[i] if subset >> i & 1 else plain[i]
            nxt: dict[int, Fraction] = {}
            for m1, c1 in prod.items():
                for m2, c2 in part.items():
                    key = m1 + m2
                    nxt[key] = nxt.get(key, Fraction(0)) + c1 * c2
            prod = nxt
        sign = -1 if t % 2 else 1
        acc = by_shift[t]
        for m, c in prod.items():
            acc[m] = acc.get(m, Fraction(0)) + sign * c
    # Invert: s^{-m} e^{-ts} -> (c - t)_+^{m-1}/(m-1)!; assemble pieces.
    shift_polys = []
    for t in range(k + 1):
        p = RationalPolynomial()
        for m, c in by_shift[t].items():
            if c:
                p = p + _shifted_monomial(t, m - 1, c / math.factorial(m - 1))
        shift_polys.append(p)
    pieces = []
    running = RationalPolynomial()
    for j in range(k):
        running = running + shift_polys[j]
        pieces.append(running)
    return PiecewisePolynomial(k, tuple(pieces))


def gamma_exact(k: int, k_bound: int = DEFAULT_K_BOUND) -> PiecewisePolynomial:
    """gamma_k as exact rational pieces on [0,1), ..., [k-1,k).

    Sums slice integrals of the squared-Vandermonde monomials and scales by
    1/(k! * G(k+1)^2).  Monomials are merged by exponent multiset first,
    since the slice integral is symmetric in the exponents.
    """
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if k > k_bound:
        raise PolynomialBoundError(f"k={k} exceeds bound {k_bound}")
    merged: dict[tuple[int, ...], int] = {}
    for expo, coeff in vandermonde_sq(k, k_bound).items():
        key = tuple(sorted(expo))
        merged[key] = merged.get(key, 0) + coeff
    total = [RationalPolynomial() for _ in range(k)]
    for expo, coeff in merged.items():
        if coeff == 0:
            continue
        dens = slice_integral(expo)
        for j in range(k):
            total[j] = total[j] + dens.pieces[j].scale(coeff)
    norm = Fraction(1, math.factorial(k) * barnes_g(k + 1) ** 2)
    return PiecewisePolynomial(k, tuple(p.scale(norm) for p in total))


def gamma_eval(g: PiecewisePolynomial, c) -> Fraction:
    """Exact evaluation of a piecewise polynomial at rational c in [0, k]."""
    return g.eval(c)


# ----------------------------------------------------------------------------
# The correction polynomial p_k, by two independent methods
# ----------------------------------------------------------------------------

class MultiSeries:
    """Truncated Laurent series in three formal variables (s1, s2, z).

    Terms map exponent triples to Fraction coefficients; multiplication
    discards terms whose exponents exceed the declared truncation orders.
    """

    __slots__ = ("terms", "orders")

    def __init__(self, terms: dict[tuple[int, int, int], Fraction],
                 orders: tuple[int, int, int]):
        self.orders = orders
        self.terms = {
            e: c
            for e, c in terms.items()
            if c and all(ei <= oi for ei, oi in zip(e, orders))
        }

    def __mul__(self, other: "MultiSeries") -> "MultiSeries":
        o1, o2, o3 = self.orders
        out: dict[tuple[int, int, int], Fraction] = {}
        for (a1, a2, a3), ca in self.terms.items():
            for (b1, b2, b3), cb in other.terms.items():
                e = (a1 + b1, a2 + b2, a3 + b3)
                if e[0] > o1 or e[1] > o2 or e[2] > o3:
                    continue
                out[e] = out.get(e, Fraction(0)) + ca * cb
        return MultiSeries(out, self.orders)

    def coefficient(self, e: tuple[int, int, int]) -> Fraction:
        return self.terms.get(e, Fraction(0))


def _p_k_residue(k: int) -> RationalPolynomial:
    """Coefficient extraction from the rewritten two-sided residue form.

    Builds F = e^{s1+s2-z} (s1-z)^k (s2-z)^k / (z^{k^2} s1^k s2^k (s1+s2-z)^2)
    as a truncated Laurent series and reads off the polynomial from
    p_k(c) = -sum_w c^w/w! * [s1^-1 s2^-1 z^{-1-w}] F.
    """
    zord = k * k + 2 * k
    orders = (k, k, zord)

    def series(terms):
        return MultiSeries(terms, orders)

    one = Fraction(1)
    e1 = series({(u, 0, 0): Fraction(1, math.factorial(u)) for u in range(k + 1)})
    e2 = series({(0, u, 0): Fraction(1, math.factorial(u)) for u in range(k + 1)})
    ez = series(
        {(0, 0, w): Fraction((-1) ** w, math.factorial(w)) for w in range(zord + 1)}
    )
    b1 = series(
        {(a, 0, k - a): Fraction(math.comb(k, a) * (-1) ** (k - a)) for a in range(k + 1)}
    )
    b2 = series(
        {(0, a, k - a): Fraction(math.comb(k, a) * (-1) ** (k - a)) for a in range(k + 1)}
    )
    # 1/(s1+s2-z)^2 = z^-2 sum_j (j+1) ((s1+s2)/z)^j; j > 2k-2 cannot reach
    # the target s-exponents.
    geo_terms: dict[tuple[int, int, int], Fraction] = {}
    for j in range(2 * k - 1):
        for t in range(j + 1):
            e = (t, j - t, -j - 2)
            geo_terms[e] = geo_terms.get(e, Fraction(0)) + (j + 1) * math.comb(j, t) * one
    geo = series(geo_terms)
    shift = series({(-k, -k, -k * k): one})

    f = e1 * e2 * ez * b1 * b2 * geo * shift
    coeffs = []
    for w in range(k * k):
        cw = f.coefficient((-1, -1, -1 - w))
        coeffs.append(-cw / math.factorial(w))
    return RationalPolynomial(coeffs)


def _p_k_multinomial(k: int) -> RationalPolynomial:
    """Direct evaluation of the closed multinomial-sum expansion of p_k."""
    n = k * k - 1
    total = RationalPolynomial()
    lead = Fraction((-1) ** k, math.factorial(n))
    for a in range(k):
        for b in range(k):
            if a + b > n:
                continue
            m1 = Fraction(
                math.factorial(n),
                math.factorial(a) * math.factorial(b) * math.factorial(n - a - b),
            )
            for alpha in range(k - a):
                for beta in range(k - b):
                    m2 = Fraction(
                        math.factorial(n + alpha + beta),
                        math.factorial(alpha) * math.factorial(beta) * math.factorial(n),
                    )
                    coeff = (
                        lead
                        * (-1) ** (a + b + alpha + beta)
                        * m1
                        * m2
                        * math.comb(k, a + alpha + 1)
                        * math.comb(k, b + beta + 1)
                    )
                    # c^{a+b} (1-c)^{n-a-b}
                    term = _shifted_monomial(1, n - a - b, Fraction((-1) ** (n - a - b)))
                    term = term * _shifted_monomial(0, a + b, coeff)
                    total = total + term
    return total


def p_k(k: int, method: str = "residue", k_bound: int = DEFAULT_K_BOUND) -> RationalPolynomial:
    """The correction polynomial on [1,2): gamma_k - c^{k^2-1}/(k^2-1)! there.

    method is "residue" (formal Laurent-series coefficient extraction) or
    "multinomial" (closed finite sum); the two agree coefficient-by-coefficient
    and serve as mutual oracles.
    """
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if k > k_bound:
        raise PolynomialBoundError(f"k={k} exceeds bound {k_bound}")
    method = method.lower()
    if method == "residue":
        return _p_k_residue(k)
    if method == "multinomial":
        return _p_k_multinomial(k)
    raise ValueError(f"unknown method {method!r}")


# ----------------------------------------------------------------------------
# Monte-Carlo oracle
# ----------------------------------------------------------------------------

def gamma_mc_oracle(k: int, c: float, samples: int, seed: int) -> tuple[float, float]:
    """Unbiased Monte-Carlo estimate of gamma_k(c) with its standard error.

    Samples k-1 uniforms, sets the last coordinate to c minus their sum
    (conditioning on the delta constraint), and averages the squared
    Vandermonde of the full point whenever that coordinate lands in [0,1].
    Deterministic for a fixed seed.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if not 0 < c < k:
        raise ValueError(f"need 0 < c < k, got c={c}")
    if samples < 10**4:
        raise ValueError(f"need samples >= 10^4, got {samples}")
    rng = np.random.default_rng(seed)
    norm = 1.0 / (math.factorial(k) * barnes_g(k + 1) ** 2)
    batch = 1 << 18
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        w = rng.random((b, k - 1))
        last = c - w.sum(axis=1)
        ok = (last >= 0.0) & (last <= 1.0)
        pts = np.concatenate([w, last[:, None]], axis=1)
        vals = np.ones(b)
        for i in range(k):
            for j in range(i + 1, k):
                vals *= (pts[:, i] - pts[:, j]) ** 2
        vals = np.where(ok, vals, 0.0)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += b
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    std_err = math.sqrt(var / samples)
    return mean * norm, std_err * norm
