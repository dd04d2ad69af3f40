"""
Exact arithmetic in cyclotomic fields Q(zeta_N).

A value is stored at its minimal conductor N, expanded over the basis
zeta_N^E whose CRT components (E mod p^k, for every prime power p^k
exactly dividing N) lie below phi(p^k).  The basis is compatible with the
tower of cyclotomic subfields, so two values are equal iff their
(conductor, terms) pairs are identical.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple, Union

from sympy import divisors, factorint

Rational = Union[int, Fraction]
Terms = Tuple[Tuple[int, Fraction], ...]


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


@lru_cache(maxsize=None)
def _prime_powers(n: int) -> Tuple[Tuple[int, int, int, int], ...]:
    """(p, k, p**k, inverse of n / p**k modulo p**k) for each p**k exactly dividing n."""
    out = []
    for p, k in sorted(factorint(n).items()):
        pk = p ** k
        out.append((p, k, pk, pow(n // pk, -1, pk)))
    return tuple(out)


@lru_cache(maxsize=None)
def _expansion(n: int) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
    """Canonical expansion of zeta_n^e for every e in [0, n), as (E, +-1) pairs."""
    table = []
    powers = _prime_powers(n)
    for e in range(n):
        acc: Dict[int, int] = {0: 1}
        for p, _, pk, inv in powers:
            cof = n // pk
            f = e * inv % pk
            step = pk // p
            phi = (p - 1) * step
            if f < phi:
                comps = [(f, 1)]
            else:
                # Phi_{p^k}(x) = sum_{i<p} x^(i p^(k-1))
                r = f - phi
                comps = [(i * step + r, -1) for i in range(p - 1)]
            nxt: Dict[int, int] = {}
            for base, c in acc.items():
                for f2, c2 in comps:
                    key = (base + f2 * cof) % n
                    nxt[key] = nxt.get(key, 0) + c * c2
            acc = nxt
        table.append(tuple(sorted(acc.items())))
    return tuple(table)


def _reduce(n: int, raw: Mapping[int, Fraction]) -> Dict[int, Fraction]:
    table = _expansion(n)
    out: Dict[int, Fraction] = {}
    for e, c in raw.items():
        if not c:
            continue
        for key, sign in table[e % n]:
            out[key] = out.get(key, 0) + sign * c
    return {k: v for k, v in out.items() if v}


def _minimize(n: int, terms: Dict[int, Fraction]) -> Tuple[int, Dict[int, Fraction]]:
    """Drop primes from the conductor while the value lies in the subfield."""
    changed = True
    while changed and n > 1:
        changed = False
        for p, k, pk, inv in _prime_powers(n):
            comps = [e * inv % pk for e in terms]
            if k == 1:
                inside = all(f == 0 for f in comps)
            else:
                inside = all(f % p == 0 for f in comps)
            if inside:
                n //= p
                terms = {e // p: c for e, c in terms.items()}
                changed = True
                break
    return n, terms


class Cyclotomic:
    """
    Immutable element of a cyclotomic field.

    Construct from a conductor and a map exponent -> rational coefficient;
    the input need not be reduced.  Arithmetic rebases operands to the lcm
    of their conductors.
    """

    __slots__ = ("_n", "_terms", "_hash")

    def __init__(self, conductor: int = 1, terms: Optional[Mapping[int, Rational]] = None):
        if conductor < 1:
            raise ValueError(f"conductor must be positive, got {conductor}")
        raw: Dict[int, Fraction] = {}
        for e, c in (terms or {}).items():
            key = int(e) % conductor
            raw[key] = raw.get(key, 0) + Fraction(c)
        self._set(*_minimize(conductor, _reduce(conductor, raw)))

    def _set(self, n: int, terms: Mapping[int, Fraction]) -> None:
        self._n = n
        self._terms: Terms = tuple(sorted((e, Fraction(c)) for e, c in terms.items() if c))
        self._hash: Optional[int] = None

    @classmethod
    def _build(cls, n: int, canonical: Dict[int, Fraction]) -> "Cyclotomic":
        obj = cls.__new__(cls)
        obj._set(*_minimize(n, canonical))
        return obj

    @classmethod
    def rational(cls, value: Rational) -> "Cyclotomic":
        value = Fraction(value)
        return cls._build(1, {0: value} if value else {})

    # --- accessors -------------------------------------------------------

    @property
    def conductor(self) -> int:
        return self._n

    @property
    def terms(self) -> Dict[int, Fraction]:
        return dict(self._terms)

    def _lifted(self, m: int) -> Dict[int, Fraction]:
        f = m // self._n
        return {e * f: c for e, c in self._terms}

    def terms_at(self, m: int) -> Dict[int, Fraction]:
        """Canonical terms of this value written at conductor m (a multiple of the conductor)."""
        if m % self._n:
            raise ValueError(f"conductor {self._n} does not divide {m}")
        return _reduce(m, self._lifted(m))

    def is_zero(self) -> bool:
        return not self._terms

    def as_rational(self) -> Optional[Fraction]:
        if self._n != 1:
            return None
        return self._terms[0][1] if self._terms else Fraction(0)

    # --- field operations ------------------------------------------------

    def __add__(self, other: Any) -> "Cyclotomic":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return cyclo_sum((self, other))

    __radd__ = __add__

    def __neg__(self) -> "Cyclotomic":
        return Cyclotomic._build(self._n, {e: -c for e, c in self._terms})

    def __sub__(self, other: Any) -> "Cyclotomic":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return cyclo_sum((self, -other))

    def __rsub__(self, other: Any) -> "Cyclotomic":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return cyclo_sum((other, -self))

    def __mul__(self, other: Any) -> "Cyclotomic":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Cyclotomic":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _mul(self, other.inverse())

    def __rtruediv__(self, other: Any) -> "Cyclotomic":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _mul(other, self.inverse())

    def __pow__(self, k: int) -> "Cyclotomic":
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "Cyclotomic":
        return _conjugate(self)

    def galois(self, a: int) -> "Cyclotomic":
        """Image under the automorphism zeta_N -> zeta_N^a (a coprime to N)."""
        if gcd(a, self._n) != 1:
            raise ValueError(f"{a} is not a unit modulo {self._n}")
        raw = {e * a % self._n: c for e, c in self._terms}
        return Cyclotomic._build(self._n, _reduce(self._n, raw))

    def inverse(self) -> "Cyclotomic":
        return _inverse(self)

    def root_order(self) -> Optional[int]:
        """Multiplicative order if this is a root of unity, else None."""
        if self.is_zero() or _mul(self, self.conjugate()) != 1:
            return None
        for d in divisors(2 * self._n):
            if self ** d == 1:
                return d
        return None

    # --- protocol --------------------------------------------------------

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, Cyclotomic):
            return self._n == other._n and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.as_rational() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            value = self.as_rational()
            self._hash = hash(value) if value is not None else hash((self._n, self._terms))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __complex__(self) -> complex:
        return sum(
            (float(c) * cmath.exp(2j * cmath.pi * e / self._n) for e, c in self._terms),
            0j,
        )

    def __repr__(self) -> str:
        body = ", ".join(f"{e}: {c}" for e, c in self._terms)
        return f"Cyclotomic({self._n}, {{{body}}})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in self._terms:
            if self._n == 1 or e == 0:
                parts.append(str(c))
            else:
                root = f"z{self._n}" if e == 1 else f"z{self._n}^{e}"
                parts.append(root if c == 1 else f"-{root}" if c == -1 else f"{c}*{root}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> Dict[str, Any]:
        return {
            "N": self._n,
            "terms": [[e, c.numerator, c.denominator] for e, c in self._terms],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Cyclotomic":
        return cls(int(data["N"]), {int(e): Fraction(int(p), int(q)) for e, p, q in data["terms"]})


def _coerce(value: Any) -> Optional[Cyclotomic]:
    if isinstance(value, Cyclotomic):
        return value
    if isinstance(value, (int, Fraction)):
        return Cyclotomic.rational(value)
    return None


@lru_cache(maxsize=1 << 16)
def _mul(a: Cyclotomic, b: Cyclotomic) -> Cyclotomic:
    if not a._terms or not b._terms:
        return ZERO
    if a._n == 1 or b._n == 1:
        scalar, other = (a, b) if a._n == 1 else (b, a)
        s = scalar._terms[0][1]
        return Cyclotomic._build(other._n, {e: s * c for e, c in other._terms})
    m = lcm(a._n, b._n)
    left, right = a._lifted(m), b._lifted(m)
    raw: Dict[int, Fraction] = {}
    for ea, ca in left.items():
        for eb, cb in right.items():
            key = (ea + eb) % m
            raw[key] = raw.get(key, 0) + ca * cb
    return Cyclotomic._build(m, _reduce(m, raw))


@lru_cache(maxsize=1 << 14)
def _conjugate(a: Cyclotomic) -> Cyclotomic:
    raw = {(-e) % a._n: c for e, c in a._terms}
    return Cyclotomic._build(a._n, _reduce(a._n, raw))


@lru_cache(maxsize=1 << 12)
def _inverse(a: Cyclotomic) -> Cyclotomic:
    if not a._terms:
        raise ZeroDivisionError("inverse of zero in a cyclotomic field")
    if len(a._terms) == 1:
        e, c = a._terms[0]
        return Cyclotomic._build(a._n, _reduce(a._n, {(-e) % a._n: 1 / c}))
    # x^-1 = (product of the other Galois conjugates) / norm(x)
    others = ONE
    for u in range(2, a._n):
        if gcd(u, a._n) == 1:
            others = others * a.galois(u)
    norm = (a * others).as_rational()
    if norm is None:
        raise ArithmeticError(f"norm of {a!r} is not rational")
    return _mul(others, Cyclotomic.rational(1 / norm))


def cyclo_sum(values: Iterable[Any]) -> Cyclotomic:
    """Sum many values with a single canonicalisation at the common conductor."""
    items = []
    m = 1
    for v in values:
        v = _coerce(v)
        if v is None:
            raise TypeError(f"cannot add {v!r} to a cyclotomic number")
        if v._terms:
            items.append(v)
            m = lcm(m, v._n)
    acc: Dict[int, Fraction] = {}
    for v in items:
        f = m // v._n
        for e, c in v._terms:
            key = e * f
            acc[key] = acc.get(key, 0) + c
    return Cyclotomic._build(m, {e: c for e, c in acc.items() if c})


@lru_cache(maxsize=4096)
def root_of_unity(order: int, exponent: int = 1) -> Cyclotomic:
    """zeta_order ** exponent in canonical form."""
    if order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    return Cyclotomic(order, {exponent % order: 1})


@lru_cache(maxsize=256)
def sqrt_integer(m: int) -> Cyclotomic:
    """
    Exact square root of an integer.

    sqrt(2) = zeta_8 + zeta_8^-1, sqrt(-1) = zeta_4, and for an odd prime p
    the quadratic Gauss sum g_p satisfies g_p = sqrt(p) or i*sqrt(p).
    """
    if m == 0:
        return ZERO
    value = root_of_unity(4) if m < 0 else ONE
    square, free = 1, 1
    for p, k in factorint(abs(m)).items():
        square *= p ** (k // 2)
        if k % 2:
            free *= p
    for p in factorint(free):
        if p == 2:
            root = root_of_unity(8, 1) + root_of_unity(8, -1)
        else:
            gauss = cyclo_sum(root_of_unity(p, a * a) for a in range(p))
            root = gauss if p % 4 == 1 else gauss * root_of_unity(4, -1)
        value = value * root
    return value * square


ZERO = Cyclotomic.rational(0)
ONE = Cyclotomic.rational(1)
