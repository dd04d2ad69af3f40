"""
Finite abelian groups, quadratic forms and exact 2-/3-cocycles.

Forms and cocycles are materialised as integer exponent tables: an entry k in
a table of order L stands for zeta_L^k.  Identity checks run as vectorised
numpy sweeps over the group's addition table.
"""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property, reduce
from math import gcd, isqrt
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint, isprime, is_quad_residue

from .cyclo import Cyclotomic, lcm, root_of_unity
from .errors import LimitExceeded, ShapeMismatch, SpecError, ValidationFailure, Violation

logger = logging.getLogger(__name__)

GroupElement = Tuple[int, ...]

DEFAULT_MAX_GROUP_ORDER = 4096
COCYCLE_KINDS = ("I", "I1", "I2", "II")


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Invariant-factor presentation Z_{m1} x ... x Z_{mk} with m1 | m2 | ... | mk."""
    invariant_factors: Tuple[int, ...] = ()

    def __post_init__(self):
        factors = tuple(int(m) for m in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", factors)
        for m in factors:
            if m < 2:
                raise SpecError(f"invariant factor {m} must be at least 2")
        for a, b in zip(factors, factors[1:]):
            if b % a:
                raise SpecError(f"invariant factors {factors} do not form a divisibility chain")

    @classmethod
    def from_cyclic_factors(cls, factors: Iterable[int]) -> "FiniteAbelianGroup":
        """Normalise an arbitrary product of cyclic groups to invariant factors."""
        by_prime: Dict[int, List[int]] = {}
        for m in factors:
            if m < 1:
                raise SpecError(f"cyclic factor {m} must be positive")
            for p, k in factorint(m).items():
                by_prime.setdefault(p, []).append(p ** k)
        width = max((len(v) for v in by_prime.values()), default=0)
        out = [1] * width
        for powers in by_prime.values():
            powers.sort(reverse=True)
            for slot, q in enumerate(powers):
                out[width - 1 - slot] *= q
        return cls(tuple(m for m in out if m > 1))

    @classmethod
    def cyclic(cls, n: int) -> "FiniteAbelianGroup":
        return cls.from_cyclic_factors([n])

    @classmethod
    def parse(cls, text: str) -> "FiniteAbelianGroup":
        """Parse "Z5", "Z3xZ3", "Z2xZ4" or "1"/"Z1" for the trivial group."""
        text = text.strip().replace(" ", "")
        if text in ("", "1", "Z1", "trivial"):
            return cls(())
        parts = re.split(r"[x×*]", text)
        factors = []
        for part in parts:
            match = re.fullmatch(r"Z_?(\d+)", part, flags=re.IGNORECASE)
            if not match:
                raise SpecError(f"cannot parse group factor {part!r} in {text!r}")
            factors.append(int(match.group(1)))
        return cls.from_cyclic_factors(factors)

    @classmethod
    def from_element_orders(cls, orders: Sequence[int]) -> "FiniteAbelianGroup":
        """Isomorphism type of a finite abelian group from the multiset of element orders."""
        cyclic: List[int] = []
        for p, a in factorint(len(orders)).items():
            # sizes[k] = |G[p^k]|; log_p(sizes[k] / sizes[k-1]) factors have order >= p^k
            sizes = [sum(1 for o in orders if (p ** k) % o == 0) for k in range(a + 1)]
            at_least = [_log(sizes[k] // sizes[k - 1], p) for k in range(1, a + 1)] + [0]
            for k in range(a):
                cyclic.extend([p ** (k + 1)] * (at_least[k] - at_least[k + 1]))
        return cls.from_cyclic_factors(cyclic)

    # --- structure -------------------------------------------------------

    @property
    def order(self) -> int:
        return reduce(lambda a, b: a * b, self.invariant_factors, 1)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def is_cyclic(self) -> bool:
        return self.rank <= 1

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "1"
        return "x".join(f"Z{m}" for m in self.invariant_factors)

    def elements(self, limit: Optional[int] = DEFAULT_MAX_GROUP_ORDER) -> List[GroupElement]:
        """All elements in lexicographic coordinate order."""
        if limit is not None and self.order > limit:
            raise LimitExceeded(
                f"group {self} of order {self.order} exceeds the limit {limit}",
                order=self.order, limit=limit,
            )
        return list(self._elements)

    @cached_property
    def _elements(self) -> Tuple[GroupElement, ...]:
        return tuple(itertools.product(*(range(m) for m in self.invariant_factors)))

    def index(self, x: GroupElement) -> int:
        i = 0
        for c, m in zip(x, self.invariant_factors):
            i = i * m + c % m
        return i

    def element(self, index: int) -> GroupElement:
        return self._elements[index]

    def reduce(self, coords: Sequence[int]) -> GroupElement:
        if len(coords) != self.rank:
            raise ShapeMismatch(f"element {tuple(coords)} has wrong length for {self}")
        return tuple(c % m for c, m in zip(coords, self.invariant_factors))

    def add(self, x: GroupElement, y: GroupElement) -> GroupElement:
        return tuple((a + b) % m for a, b, m in zip(x, y, self.invariant_factors))

    def neg(self, x: GroupElement) -> GroupElement:
        return tuple((-a) % m for a, m in zip(x, self.invariant_factors))

    def scale(self, k: int, x: GroupElement) -> GroupElement:
        return tuple((k * a) % m for a, m in zip(x, self.invariant_factors))

    def element_order(self, x: GroupElement) -> int:
        return reduce(lcm, (m // gcd(a, m) for a, m in zip(x, self.invariant_factors)), 1)

    @property
    def zero(self) -> GroupElement:
        return (0,) * self.rank

    def generators(self) -> List[GroupElement]:
        return [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]

    @cached_property
    def add_table(self) -> np.ndarray:
        """add_table[i, j] = index of element(i) + element(j)."""
        n = self.order
        coords = np.array(self._elements, dtype=np.int64).reshape(n, self.rank)
        mods = np.array(self.invariant_factors, dtype=np.int64)
        summed = (coords[:, None, :] + coords[None, :, :]) % mods
        weights = np.array(
            [reduce(lambda a, b: a * b, self.invariant_factors[i + 1:], 1) for i in range(self.rank)],
            dtype=np.int64,
        )
        return (summed * weights).sum(axis=-1) if self.rank else np.zeros((n, n), dtype=np.int64)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.argmin(self.add_table, axis=1)

    def character_table(self) -> np.ndarray:
        """Exponents of the dual group at order exponent(G): chi_c(x) = zeta^table[c, x]."""
        L = self.exponent
        coords = np.array(self._elements, dtype=np.int64).reshape(self.order, self.rank)
        scale = np.array([L // m for m in self.invariant_factors], dtype=np.int64)
        return ((coords * scale) @ coords.T) % L if self.rank else np.zeros((1, 1), dtype=np.int64)

    def homomorphism(self, images: Sequence[GroupElement]) -> Optional[List[int]]:
        """Index map of the endomorphism sending generator i to images[i], or None if ill-defined."""
        for m, img in zip(self.invariant_factors, images):
            if self.scale(m, img) != self.zero:
                return None
        out = []
        for x in self._elements:
            y = self.zero
            for c, img in zip(x, images):
                y = self.add(y, self.scale(c, img))
            out.append(self.index(y))
        return out

    def automorphisms(self, limit: Optional[int] = DEFAULT_MAX_GROUP_ORDER) -> List[Tuple[GroupElement, ...]]:
        """All automorphisms as tuples of generator images, deterministic order."""
        elems = self.elements(limit)
        candidates = [
            [y for y in elems if self.scale(m, y) == self.zero and self.element_order(y) == m]
            for m in self.invariant_factors
        ]
        out = []
        for images in itertools.product(*candidates):
            mapping = self.homomorphism(images)
            if mapping is not None and len(set(mapping)) == self.order:
                out.append(tuple(images))
        return out




def _log(n: int, p: int) -> int:
    k = 0
    while n > 1:
        n //= p
        k += 1
    return k


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """
    Root-of-unity valued quadratic form phi on a finite abelian group.

    phi(x) = zeta_order^exponents[index(x)].  Construction checks phi(0) = 1,
    phi(-x) = phi(x) and bimultiplicativity of the associated form
    b(x, y) = phi(x + y) / (phi(x) phi(y)).
    """
    group: FiniteAbelianGroup
    order: int
    exponents: np.ndarray = field(repr=False)

    def __post_init__(self):
        table = np.asarray(self.exponents, dtype=np.int64) % self.order
        if table.shape != (self.group.order,):
            raise ShapeMismatch(f"form table has shape {table.shape}, expected ({self.group.order},)")
        object.__setattr__(self, "exponents", table)
        violation = self.check()
        if violation is not None:
            raise ValidationFailure(violation)

    @classmethod
    def from_values(cls, group: FiniteAbelianGroup, values: Sequence[Cyclotomic]) -> "QuadraticForm":
        orders = []
        for v in values:
            o = v.root_order()
            if o is None:
                raise SpecError(f"form value {v} is not a root of unity")
            orders.append(o)
        L = reduce(lcm, orders, 1)
        exps = []
        for v in values:
            exps.append(next(k for k in range(L) if root_of_unity(L, k) == v))
        return cls(group, L, np.array(exps, dtype=np.int64))

    @classmethod
    def diagonal(cls, group: FiniteAbelianGroup, coefficients: Sequence[int]) -> "QuadraticForm":
        """
        phi(x) = prod_i zeta_{2 m_i}^{a_i x_i^2} for even m_i and zeta_{m_i}^{a_i x_i^2} for odd m_i.

        On Z2 the coefficients 0, 1, 2, 3 give phi(1) = 1, i, -1, -i.
        """
        if len(coefficients) != group.rank:
            raise ShapeMismatch(
                f"{len(coefficients)} form coefficients given for {group} of rank {group.rank}"
            )
        bases = [2 * m if m % 2 == 0 else m for m in group.invariant_factors]
        L = reduce(lcm, bases, 1)
        exps = [
            sum(a * c * c * (L // base) for a, c, base in zip(coefficients, x, bases)) % L
            for x in group.elements(None)
        ]
        return cls(group, L, np.array(exps, dtype=np.int64))

    def check(self) -> Optional[Violation]:
        G, L, q = self.group, self.order, self.exponents
        if q[0] != 0:
            return Violation("form_normalized", (G.zero,))
        bad = np.nonzero(q[G.neg_table] != q)[0]
        if bad.size:
            return Violation("form_even", (G.element(int(bad[0])),))
        B = self.bilinear_table
        A = G.add_table
        # b(x + y, z) = b(x, z) b(y, z)
        diff = (B[A] - B[:, None, :] - B[None, :, :]) % L
        bad = np.argwhere(diff)
        if bad.size:
            x, y, z = (G.element(int(i)) for i in bad[0])
            return Violation("form_bimultiplicative", (x, y, z))
        return None

    @cached_property
    def bilinear_table(self) -> np.ndarray:
        q, A = self.exponents, self.group.add_table
        return (q[A] - q[:, None] - q[None, :]) % self.order

    def value(self, x: GroupElement) -> Cyclotomic:
        return root_of_unity(self.order, int(self.exponents[self.group.index(x)]))

    def bilinear(self, x: GroupElement, y: GroupElement) -> Cyclotomic:
        G = self.group
        return root_of_unity(self.order, int(self.bilinear_table[G.index(x), G.index(y)]))

    def radical(self) -> List[GroupElement]:
        B = self.bilinear_table
        return [self.group.element(i) for i in range(self.group.order) if not B[i].any()]

    def is_nondegenerate(self) -> bool:
        return len(self.radical()) == 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuadraticForm):
            return NotImplemented
        if self.group != other.group:
            return False
        L = lcm(self.order, other.order)
        return bool(np.array_equal(
            self.exponents * (L // self.order) % L, other.exponents * (L // other.order) % L,
        ))

    def __hash__(self) -> int:
        return hash((self.group, tuple(self.values_key())))

    def values_key(self) -> List[Cyclotomic]:
        return [root_of_unity(self.order, int(k)) for k in self.exponents]


def least_nonresidue(p: int) -> int:
    return next(c for c in range(2, p) if not is_quad_residue(c, p))


def standard_form(p: int, variant: str = "residue") -> QuadraticForm:
    """phi(a) = zeta_p^{a^2} (residue) or zeta_p^{c a^2} with c the least nonresidue mod p."""
    if p == 2 or not isprime(p):
        raise SpecError(f"standard forms need an odd prime, got {p}")
    if variant not in ("residue", "nonresidue"):
        raise SpecError(f"unknown form variant {variant!r}")
    c = 1 if variant == "residue" else least_nonresidue(p)
    group = FiniteAbelianGroup.cyclic(p)
    return QuadraticForm(group, p, np.array([c * a * a % p for a in range(p)], dtype=np.int64))


def automorphisms_preserving_form(phi: QuadraticForm,
                                  limit: Optional[int] = DEFAULT_MAX_GROUP_ORDER) -> List[Tuple[GroupElement, ...]]:
    """Automorphisms t (as generator images) with phi(t(a)) = phi(a) for every a."""
    G = phi.group
    out = []
    for images in G.automorphisms(limit):
        mapping = np.array(G.homomorphism(images), dtype=np.int64)
        if np.array_equal(phi.exponents[mapping], phi.exponents):
            out.append(images)
    return out


# --- cocycles ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cocycle2:
    """Normalized 2-cocycle beta(g, h) = zeta_order^table[g, h] on an abelian group."""
    group: FiniteAbelianGroup
    order: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.group.order
        table = np.asarray(self.table, dtype=np.int64) % self.order
        if table.shape != (n, n):
            raise ShapeMismatch(f"2-cochain table has shape {table.shape}, expected ({n}, {n})")
        object.__setattr__(self, "table", table)

    def check(self) -> Optional[Violation]:
        G, T, L = self.group, self.table, self.order
        if T[0].any() or T[:, 0].any():
            return Violation("cocycle2_normalized")
        A = G.add_table
        # beta(g,h) beta(g+h,l) = beta(h,l) beta(g,h+l)
        diff = (T[:, :, None] + T[A] - T[None, :, :] - T[:, A]) % L
        bad = np.argwhere(diff)
        if bad.size:
            return Violation("cocycle2_identity", tuple(G.element(int(i)) for i in bad[0]))
        return None

    def value(self, g: GroupElement, h: GroupElement) -> Cyclotomic:
        G = self.group
        return root_of_unity(self.order, int(self.table[G.index(g), G.index(h)]))

    @cached_property
    def alternating_table(self) -> np.ndarray:
        return (self.table - self.table.T) % self.order

    def is_symmetric(self) -> bool:
        return not self.alternating_table.any()


@dataclass(frozen=True, eq=False)
class Cocycle3:
    """Normalized 3-cocycle omega(a, b, c) = zeta_order^table[a, b, c] on an abelian group."""
    group: FiniteAbelianGroup
    order: int
    table: np.ndarray = field(repr=False)
    exponents: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        n = self.group.order
        table = np.asarray(self.table, dtype=np.int64) % self.order
        if table.shape != (n, n, n):
            raise ShapeMismatch(f"3-cochain table has shape {table.shape}, expected ({n},)*3")
        object.__setattr__(self, "table", table)

    def check(self) -> Optional[Violation]:
        G, W, L = self.group, self.table, self.order
        if W[0].any() or W[:, 0].any() or W[:, :, 0].any():
            return Violation("cocycle3_normalized")
        A = G.add_table
        # omega(b,c,d) omega(a,b+c,d) omega(a,b,c) = omega(a+b,c,d) omega(a,b,c+d)
        lhs = W[None, :, :, :] + W[:, A, :] + W[:, :, :, None]
        rhs = W[A] + W[:, :, A]
        bad = np.argwhere((lhs - rhs) % L)
        if bad.size:
            return Violation("cocycle3_identity", tuple(G.element(int(i)) for i in bad[0]))
        return None

    def value(self, a: GroupElement, b: GroupElement, c: GroupElement) -> Cyclotomic:
        G = self.group
        return root_of_unity(self.order, int(self.table[G.index(a), G.index(b), G.index(c)]))

    @property
    def label(self) -> str:
        return format_cocycle(dict(self.exponents))

    @classmethod
    def trivial(cls, group: FiniteAbelianGroup) -> "Cocycle3":
        n = group.order
        return cls(group, 1, np.zeros((n, n, n), dtype=np.int64))


def _require(cocycle):
    violation = cocycle.check()
    if violation is not None:
        raise ValidationFailure(violation)
    return cocycle


def _generator_table(G: FiniteAbelianGroup, kind: str) -> Tuple[int, np.ndarray]:
    if kind not in COCYCLE_KINDS:
        raise SpecError(f"unknown cocycle kind {kind!r}; expected one of {COCYCLE_KINDS}")
    elems = np.array(G.elements(), dtype=np.int64).reshape(G.order, G.rank)
    if kind == "I":
        if G.rank != 1:
            raise ShapeMismatch(f"cocycle kind I needs a cyclic group, got {G}")
        m = G.invariant_factors[0]
        i = elems[:, 0]
        # [x] is floor(x): i' + i'' < 2m so the bracket is 0 or 1
        carry = (i[:, None] + i[None, :]) // m
        return m, i[:, None, None] * carry[None, :, :]
    if G.rank != 2 or G.invariant_factors[0] != G.invariant_factors[1]:
        raise ShapeMismatch(f"cocycle kind {kind} needs a group Z_q x Z_q, got {G}")
    q = G.invariant_factors[0]
    i, j = elems[:, 0], elems[:, 1]
    lead, tail = {"I1": (i, i), "I2": (j, j), "II": (i, j)}[kind]
    carry = (tail[:, None] + tail[None, :]) // q
    return q, lead[:, None, None] * carry[None, :, :]


def cocycle_generator(G: FiniteAbelianGroup, kind: str, root_index: int = 1) -> Cocycle3:
    """
    Explicit generator 3-cocycles on cyclic groups and on Z_q x Z_q.

    Args:
        G: Z_m for kind "I"; Z_q x Z_q for kinds "I1", "I2" and "II".
        kind: which generator.
        root_index: the generator is taken with root zeta^root_index.

    Returns:
        The validated cocycle.
    """
    order, table = _generator_table(G, kind)
    return _require(Cocycle3(G, order, root_index * table, ((kind, root_index % order),)))


def cocycle_from_exponents(G: FiniteAbelianGroup, exponents: Dict[str, int]) -> Cocycle3:
    """Product of generators, each raised to the given exponent."""
    active = {k: e for k, e in exponents.items() if e}
    if not active:
        return Cocycle3.trivial(G)
    order, table = 1, None
    for kind in sorted(active, key=COCYCLE_KINDS.index):
        m, t = _generator_table(G, kind)
        t = active[kind] * t
        if table is None:
            order, table = m, t
        else:
            new = lcm(order, m)
            table = table * (new // order) + t * (new // m)
            order = new
    return _require(Cocycle3(G, order, table, tuple(sorted(
        ((k, e % order) for k, e in active.items()), key=lambda kv: COCYCLE_KINDS.index(kv[0])))))


def parse_cocycle(text: str) -> Dict[str, int]:
    """Parse "I:1" or "I1:1,I2:0,II:2"; an empty string or "trivial" is the trivial cocycle."""
    text = text.strip()
    if text in ("", "0", "trivial", "none"):
        return {}
    out: Dict[str, int] = {}
    for part in text.split(","):
        match = re.fullmatch(r"\s*(I|I1|I2|II)\s*:\s*(-?\d+)\s*", part)
        if not match:
            raise SpecError(f"cannot parse cocycle term {part!r}; expected KIND:EXPONENT")
        kind = match.group(1)
        if kind in out:
            raise SpecError(f"cocycle kind {kind} given twice in {text!r}")
        out[kind] = int(match.group(2))
    if "I" in out and len(out) > 1:
        raise SpecError("kind I cannot be combined with I1, I2 or II")
    return out


def format_cocycle(exponents: Dict[str, int]) -> str:
    active = [(k, e) for k, e in exponents.items() if e]
    if not active:
        return "trivial"
    return ",".join(f"{k}:{e}" for k, e in sorted(active, key=lambda kv: COCYCLE_KINDS.index(kv[0])))


def slant_dx(omega: Cocycle3, x: GroupElement) -> Cocycle2:
    """omega_x(g, h) = omega(x, g, h) omega(g, h, x) / omega(g, x, h)."""
    G, W = omega.group, omega.table
    i = G.index(x)
    table = W[i, :, :] + W[:, :, i] - W[:, i, :]
    return _require(Cocycle2(G, omega.order, table))


def is_coboundary(beta: Cocycle2) -> bool:
    """For finite abelian groups a class is trivial iff its alternating pairing is."""
    return beta.is_symmetric()


def radical_of_pairing(beta: Cocycle2) -> List[GroupElement]:
    G = beta.group
    alt = beta.alternating_table
    radical = [G.element(i) for i in range(G.order) if not alt[i].any()]
    quotient = G.order // len(radical)
    if isqrt(quotient) ** 2 != quotient:
        raise ValidationFailure(
            Violation("radical_index_square", (len(radical),), f"|G|/|R| = {quotient}")
        )
    return radical


def trivialize_symmetric(beta: Cocycle2) -> Tuple[int, np.ndarray]:
    """
    Cochain epsilon with beta(a, b) = epsilon(a) epsilon(b) / epsilon(a + b).

    Returns (order, exponents) with epsilon(x) = zeta_order^exponents[index(x)];
    the order is beta.order * exponent(G).
    """
    if not beta.is_symmetric():
        raise ValueError("only symmetric 2-cocycles are coboundaries")
    G = beta.group
    e_G = G.exponent
    M = beta.order * e_G
    T = beta.table * e_G
    A = G.add_table
    eps = np.zeros(G.order, dtype=np.int64)
    known = [0]
    for gen, m in zip(G.generators(), G.invariant_factors):
        g = G.index(gen)
        # cyclic piece on <gen>: eps(g)^m = prod_k beta(k gen, gen)
        cyc = [0]
        for _ in range(m - 1):
            cyc.append(int(A[cyc[-1], g]))
        total = sum(int(beta.table[c, g]) for c in cyc)
        eps_b = {0: 0}
        step = total * (e_G // m)
        for k in range(1, m):
            prev = cyc[k - 1]
            eps_b[cyc[k]] = (eps_b[prev] + step - T[prev, g]) % M
        # fold: eps(a + b) = eps(a) eps_B(b) / beta(a, b)
        merged = []
        for a in known:
            for b in cyc:
                s = int(A[a, b])
                eps[s] = (eps[a] + eps_b[b] - T[a, b]) % M
                merged.append(s)
        known = merged
    coboundary = (eps[:, None] + eps[None, :] - eps[A]) % M
    if not np.array_equal(coboundary, T % M):
        raise ValidationFailure(Violation("coboundary_trivialization", (), str(G)))
    return M, eps
