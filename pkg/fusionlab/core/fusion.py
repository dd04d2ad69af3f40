"""
Fusion rings, fusion subcategories and the grading / nilpotency structure
that depends only on the Grothendieck ring.

Subcategories are index sets; internally they travel as integer bitmasks so
that closures, joins and lattice enumeration stay cheap.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import isqrt
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import factorint

from .abelian import FiniteAbelianGroup
from .errors import CertificationError, LimitExceeded, ValidationFailure, Violation

logger = logging.getLogger(__name__)

DEFAULT_LATTICE_RANK = 64
CERTIFY_TOLERANCE = 1e-9
POWER_TOLERANCE = 1e-12

Product = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class FPDim:
    """Frobenius-Perron dimension d together with its certified square d^2."""
    value: float
    square: int

    @property
    def is_integer(self) -> bool:
        return isqrt(self.square) ** 2 == self.square

    @property
    def squarefree_part(self) -> int:
        return squarefree_part(self.square)


def squarefree_part(n: int) -> int:
    out = 1
    for p, k in factorint(n).items():
        if k % 2:
            out *= p
    return out


def _bits(mask: int) -> List[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


class FusionRing:
    """
    Based ring with unit 0, a duality involution and structure constants N_ij^k.

    Args:
        labels: display names of the simples; index 0 is the unit.
        dual: dual[i] is the index of the dual simple.
        coefficients: sparse map (i, j, k) -> N_ij^k, zero entries omitted.
    """

    def __init__(self, labels: Sequence[str], dual: Sequence[int],
                 coefficients: Mapping[Tuple[int, int, int], int]):
        self.labels: Tuple[str, ...] = tuple(str(x) for x in labels)
        self.rank = len(self.labels)
        self.dual: Tuple[int, ...] = tuple(int(d) for d in dual)
        products: List[List[Dict[int, int]]] = [[{} for _ in range(self.rank)] for _ in range(self.rank)]
        for (i, j, k), value in coefficients.items():
            if value:
                products[i][j][k] = int(value)
        self.products: Tuple[Tuple[Product, ...], ...] = tuple(
            tuple(tuple(sorted(cell.items())) for cell in row) for row in products
        )
        self.support: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(sum(1 << k for k, _ in cell) for cell in row) for row in self.products
        )
        self._lattice: Optional[List[int]] = None

    # --- construction ----------------------------------------------------

    @classmethod
    def group_ring(cls, group: FiniteAbelianGroup,
                   labels: Optional[Sequence[str]] = None) -> "FusionRing":
        elems = group.elements()
        A = group.add_table
        if labels is None:
            labels = ["(" + ",".join(map(str, x)) + ")" if group.rank else "0" for x in elems]
        coefficients = {(i, j, int(A[i, j])): 1 for i in range(len(elems)) for j in range(len(elems))}
        return cls(labels, [int(k) for k in group.neg_table], coefficients)

    def tensor(self, other: "FusionRing") -> "FusionRing":
        """Deligne product ring; simple (a, b) has index a * other.rank + b."""
        r = other.rank
        labels = [f"{a}⊠{b}" for a in self.labels for b in other.labels]
        dual = [self.dual[a] * r + other.dual[b] for a in range(self.rank) for b in range(r)]
        coefficients: Dict[Tuple[int, int, int], int] = {}
        for a1, a2 in itertools.product(range(self.rank), repeat=2):
            for b1, b2 in itertools.product(range(r), repeat=2):
                for k1, n1 in self.products[a1][a2]:
                    for k2, n2 in other.products[b1][b2]:
                        coefficients[(a1 * r + b1, a2 * r + b2, k1 * r + k2)] = n1 * n2
        return FusionRing(labels, dual, coefficients)

    # --- access ----------------------------------------------------------

    def N(self, i: int, j: int, k: int) -> int:
        for kk, v in self.products[i][j]:
            if kk == k:
                return v
        return 0

    def constituents(self, i: int, j: int) -> List[int]:
        return [k for k, _ in self.products[i][j]]

    @cached_property
    def dense(self) -> np.ndarray:
        """Dense N[i, j, k] array."""
        out = np.zeros((self.rank,) * 3, dtype=np.int64)
        for i in range(self.rank):
            for j in range(self.rank):
                for k, v in self.products[i][j]:
                    out[i, j, k] = v
        return out

    @cached_property
    def permutation_table(self) -> Optional[np.ndarray]:
        """Product table if every product is a single simple with multiplicity 1."""
        table = np.zeros((self.rank, self.rank), dtype=np.int64)
        for i in range(self.rank):
            for j in range(self.rank):
                cell = self.products[i][j]
                if len(cell) != 1 or cell[0][1] != 1:
                    return None
                table[i, j] = cell[0][0]
        return table

    @property
    def full_mask(self) -> int:
        return (1 << self.rank) - 1

    def __repr__(self) -> str:
        return f"FusionRing(rank={self.rank}, labels={list(self.labels)!r})"

    # --- validation ------------------------------------------------------

    def validate(self) -> Optional[Violation]:
        """First violated fusion-ring identity, or None."""
        n = self.rank
        if n == 0:
            return Violation("nonempty")
        if len(self.dual) != n:
            return Violation("dual_length", (len(self.dual), n))
        for i in range(n):
            d = self.dual[i]
            if not 0 <= d < n or self.dual[d] != i:
                return Violation("dual_involution", (i,))
        if self.dual[0] != 0:
            return Violation("dual_unit", (0,))
        for j in range(n):
            if self.products[0][j] != ((j, 1),):
                return Violation("unit", (0, j))
            if self.products[j][0] != ((j, 1),):
                return Violation("unit", (j, 0))
        for i in range(n):
            for j in range(n):
                if self.products[i][j] != self.products[j][i]:
                    return Violation("commutativity", (i, j))
                expected = 1 if j == self.dual[i] else 0
                if self.N(i, j, 0) != expected:
                    return Violation("rigidity", (i, j, 0), f"N = {self.N(i, j, 0)}")
                di, dj = self.dual[i], self.dual[j]
                for k, v in self.products[i][j]:
                    if self.N(dj, di, self.dual[k]) != v:
                        return Violation("duality", (i, j, k))
        return self._check_associativity()

    def _check_associativity(self) -> Optional[Violation]:
        P = self.permutation_table
        if P is not None:
            # (ij)k = i(jk), one row of i at a time
            for i in range(self.rank):
                bad = np.argwhere(P[P[i]] != P[i][P])
                if bad.size:
                    j, k = (int(x) for x in bad[0])
                    return Violation("associativity", (i, j, k))
            return None
        N = self.dense
        for i in range(self.rank):
            # sum_m N_ij^m N_mk^l against sum_m N_jk^m N_im^l
            lhs = np.tensordot(N[i], N, axes=([1], [0]))
            rhs = np.tensordot(N, N[i], axes=([2], [0]))
            bad = np.argwhere(lhs != rhs)
            if bad.size:
                j, k, l = (int(x) for x in bad[0])
                return Violation("associativity", (i, j, k, l))
        return None

    def require_valid(self) -> "FusionRing":
        violation = self.validate()
        if violation is not None:
            raise ValidationFailure(violation)
        return self

    # --- Frobenius-Perron dimensions --------------------------------------

    @cached_property
    def fpdims(self) -> Tuple[FPDim, ...]:
        """
        FP dimensions of all simples.

        The vector d is the Perron eigenvector of the regular element sum_i N_i,
        a positive matrix, found by power iteration and normalised to d_0 = 1.
        Each d^2 must be within CERTIFY_TOLERANCE of an integer.
        """
        if self.permutation_table is not None:
            return tuple(FPDim(1.0, 1) for _ in range(self.rank))
        R = self.dense.sum(axis=0).astype(float) + np.eye(self.rank)
        v = np.ones(self.rank) / np.sqrt(self.rank)
        for _ in range(100000):
            w = R @ v
            w /= np.linalg.norm(w)
            if np.max(np.abs(w - v)) < POWER_TOLERANCE:
                v = w
                break
            v = w
        else:
            raise CertificationError("power iteration for FP dimensions did not converge", rank=self.rank)
        d = v / v[0]
        out = []
        for i, value in enumerate(d):
            square = int(round(value * value))
            if abs(value * value - square) >= CERTIFY_TOLERANCE or square < 1:
                raise CertificationError(
                    f"FPdim of {self.labels[i]} is {value!r}; its square is not an integer",
                    simple=self.labels[i], value=float(value),
                )
            out.append(FPDim(float(value), square))
        return tuple(out)

    def fpdim_object(self, i: int) -> FPDim:
        return self.fpdims[i]

    def is_invertible(self, i: int) -> bool:
        return self.products[i][self.dual[i]] == ((0, 1),)

    # --- subcategories ----------------------------------------------------

    def subcategory(self, members: Union[int, Iterable[int]]) -> "FusionSubcategory":
        mask = members if isinstance(members, int) else sum(1 << i for i in set(members))
        return FusionSubcategory(self, mask)

    @property
    def whole(self) -> "FusionSubcategory":
        return FusionSubcategory(self, self.full_mask)

    @property
    def trivial(self) -> "FusionSubcategory":
        return FusionSubcategory(self, 1)

    def closure_mask(self, seed: int) -> int:
        """Least subcategory (as a mask) containing seed."""
        mask = seed | 1
        for i in _bits(seed):
            mask |= 1 << self.dual[i]
        frontier = mask
        while frontier:
            members = _bits(mask)
            new = 0
            for i in _bits(frontier):
                row = self.support[i]
                for j in members:
                    new |= row[j]
            new &= ~mask
            mask |= new
            frontier = new
        return mask

    def join_mask(self, a: int, b: int) -> int:
        """Join of two subcategories: the constituents of a (x) b, valid for commutative rings."""
        out = 0
        for i in _bits(a):
            row = self.support[i]
            for j in _bits(b):
                out |= row[j]
        return out

    def adjoint_mask(self, mask: int) -> int:
        seed = 0
        for i in _bits(mask):
            seed |= self.support[i][self.dual[i]]
        return self.closure_mask(seed)

    def commutator_mask(self, mask: int) -> int:
        seed = 0
        for i in range(self.rank):
            if self.support[i][self.dual[i]] & ~mask == 0:
                seed |= 1 << i
        return self.closure_mask(seed)

    def pointed_mask(self) -> int:
        return sum(1 << i for i in range(self.rank) if self.is_invertible(i))

    def integral_mask(self) -> int:
        return sum(1 << i for i, d in enumerate(self.fpdims) if d.is_integer)

    def fpdim_of_mask(self, mask: int) -> int:
        return sum(self.fpdims[i].square for i in _bits(mask))

    def series_masks(self, mask: int) -> List[int]:
        """Descending central series starting at mask, until it stabilises."""
        series = [mask]
        while True:
            nxt = self.adjoint_mask(series[-1])
            if nxt == series[-1]:
                return series
            series.append(nxt)


@dataclass(frozen=True)
class FusionSubcategory:
    """A fusion subcategory, identified by its member set."""
    parent: FusionRing = field(compare=False, repr=False)
    mask: int

    def __post_init__(self):
        object.__setattr__(self, "mask", self.mask | 1)

    @property
    def members(self) -> Tuple[int, ...]:
        return tuple(_bits(self.mask))

    @property
    def labels(self) -> List[str]:
        return [self.parent.labels[i] for i in self.members]

    @property
    def size(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def __le__(self, other: "FusionSubcategory") -> bool:
        return self.mask & ~other.mask == 0

    def __lt__(self, other: "FusionSubcategory") -> bool:
        return self.mask != other.mask and self <= other

    def is_trivial(self) -> bool:
        return self.mask == 1

    def is_whole(self) -> bool:
        return self.mask == self.parent.full_mask

    def is_closed(self) -> bool:
        return self.parent.closure_mask(self.mask) == self.mask

    @property
    def fpdim(self) -> int:
        return self.parent.fpdim_of_mask(self.mask)

    def is_pointed(self) -> bool:
        return all(self.parent.is_invertible(i) for i in self.members)

    def as_ring(self) -> FusionRing:
        """The subcategory as a fusion ring in its own right, relabelled 0..size-1."""
        idx = {old: new for new, old in enumerate(self.members)}
        R = self.parent
        coefficients = {
            (idx[i], idx[j], idx[k]): v
            for i in self.members for j in self.members for k, v in R.products[i][j]
        }
        return FusionRing(self.labels, [idx[R.dual[i]] for i in self.members], coefficients)

    def to_dict(self) -> Dict[str, object]:
        return {"members": list(self.members), "labels": self.labels, "fpdim": self.fpdim}


Category = Union[FusionRing, FusionSubcategory]


def _as_sub(obj: Category) -> FusionSubcategory:
    return obj.whole if isinstance(obj, FusionRing) else obj


# --- operations ----------------------------------------------------------------


def validate(R: FusionRing) -> Optional[Violation]:
    return R.validate()


def fpdim_object(R: FusionRing, i: int) -> FPDim:
    return R.fpdim_object(i)


def fpdim_category(obj: Category) -> int:
    """Sum of squared dimensions of the simples, a certified integer."""
    sub = _as_sub(obj)
    return sub.fpdim


def subcategory_generated(R: FusionRing, seed: Iterable[int]) -> FusionSubcategory:
    return R.subcategory(R.closure_mask(sum(1 << i for i in set(seed))))


def join(a: FusionSubcategory, b: FusionSubcategory) -> FusionSubcategory:
    return FusionSubcategory(a.parent, a.parent.join_mask(a.mask, b.mask))


def adjoint_subcategory(obj: Category) -> FusionSubcategory:
    sub = _as_sub(obj)
    return FusionSubcategory(sub.parent, sub.parent.adjoint_mask(sub.mask))


def central_series(obj: Category) -> List[FusionSubcategory]:
    sub = _as_sub(obj)
    return [FusionSubcategory(sub.parent, m) for m in sub.parent.series_masks(sub.mask)]


def is_nilpotent(obj: Category) -> bool:
    return central_series(obj)[-1].is_trivial()


def nilpotency_class(obj: Category) -> Optional[int]:
    """Number of strict steps of the central series, or None when not nilpotent."""
    series = central_series(obj)
    return len(series) - 1 if series[-1].is_trivial() else None


def commutator_subcategory(R: FusionRing, sub: FusionSubcategory) -> FusionSubcategory:
    return FusionSubcategory(R, R.commutator_mask(sub.mask))


def pointed_part(R: FusionRing) -> FusionSubcategory:
    return R.subcategory(R.pointed_mask())


def integral_part(R: FusionRing) -> FusionSubcategory:
    sub = R.subcategory(R.integral_mask())
    if not sub.is_closed():
        raise ValidationFailure(Violation("integral_part_closed", sub.members))
    return sub


@dataclass(frozen=True)
class Grading:
    """
    A faithful grading of the simples by a finite abelian group.

    classes[c] lists the simples of component c (component 0 is neutral),
    component[i] is the component of simple i and table is the group law on
    component indices.
    """
    classes: Tuple[Tuple[int, ...], ...]
    component: Tuple[int, ...]
    table: Tuple[Tuple[int, ...], ...]
    names: Tuple[str, ...] = ()

    @property
    def order(self) -> int:
        return len(self.classes)

    @cached_property
    def group(self) -> FiniteAbelianGroup:
        orders = []
        for c in range(self.order):
            k, x = 1, c
            while x != 0:
                x = self.table[x][c]
                k += 1
            orders.append(k)
        return FiniteAbelianGroup.from_element_orders(orders)

    def refines(self, other: "Grading") -> bool:
        """True if every component of self lies inside a single component of other."""
        return all(len({other.component[i] for i in cls}) == 1 for cls in self.classes)

    def to_dict(self) -> Dict[str, object]:
        return {
            "group": str(self.group),
            "order": self.order,
            "classes": [list(c) for c in self.classes],
            "names": list(self.names),
        }


def universal_grading(R: FusionRing) -> Grading:
    """Partition by i ~ j iff i (x) dual(j) meets C_ad, with the induced group law."""
    ad = R.adjoint_mask(R.full_mask)
    component = [-1] * R.rank
    classes: List[Tuple[int, ...]] = []
    for i in range(R.rank):
        if component[i] >= 0:
            continue
        members = R.join_mask(1 << i, ad)
        for j in _bits(members):
            if component[j] >= 0:
                raise ValidationFailure(Violation("universal_grading_partition", (i, j)))
            component[j] = len(classes)
        classes.append(tuple(_bits(members)))
    table = [[-1] * len(classes) for _ in classes]
    for i in range(R.rank):
        for j in range(R.rank):
            ci, cj = component[i], component[j]
            for k in R.constituents(i, j):
                if table[ci][cj] == -1:
                    table[ci][cj] = component[k]
                elif table[ci][cj] != component[k]:
                    raise ValidationFailure(
                        Violation("universal_grading_well_defined", (i, j, k))
                    )
    return Grading(tuple(classes), tuple(component), tuple(tuple(r) for r in table))


def dimensional_grading(R: FusionRing) -> Grading:
    """
    Grading by the square-free part n of d^2, with E the elementary abelian
    2-group of occurring square-free parts under multiplication modulo squares.
    """
    parts = [d.squarefree_part for d in R.fpdims]
    names = sorted(set(parts))
    index = {n: c for c, n in enumerate(names)}

    def times(a: int, b: int) -> int:
        return squarefree_part(a * b)

    for a in names:
        for b in names:
            if times(a, b) not in index:
                raise ValidationFailure(Violation("dimensional_grading_closed", (a, b)))
    for i in range(R.rank):
        for j in range(R.rank):
            want = times(parts[i], parts[j])
            for k in R.constituents(i, j):
                if parts[k] != want:
                    raise ValidationFailure(
                        Violation("dimensional_grading_compatible", (i, j, k),
                                  f"part {parts[k]} != {want}")
                    )
    classes = tuple(tuple(i for i in range(R.rank) if parts[i] == n) for n in names)
    table = tuple(tuple(index[times(a, b)] for b in names) for a in names)
    return Grading(classes, tuple(index[p] for p in parts), table, tuple(str(n) for n in names))


def is_generalized_tambara_yamagami(R: FusionRing) -> bool:
    pointed = R.pointed_mask()
    if pointed == R.full_mask:
        return False
    others = [i for i in range(R.rank) if not pointed >> i & 1]
    return all(R.support[i][j] & ~pointed == 0 for i in others for j in others)


def enumerate_subcategories(R: FusionRing, limit: Optional[int] = DEFAULT_LATTICE_RANK) -> List[FusionSubcategory]:
    """
    All fusion subcategories: closures of single simples completed under joins.

    Ordered by (size, member list).
    """
    if limit is not None and R.rank > limit:
        raise LimitExceeded(f"rank {R.rank} exceeds the lattice limit {limit}", rank=R.rank, limit=limit)
    return [R.subcategory(m) for m in _lattice_masks(R)]


def _lattice_masks(R: FusionRing) -> List[int]:
    if R._lattice is not None:
        return R._lattice
    seen = {1}
    for i in range(R.rank):
        seen.add(R.closure_mask(1 << i))
    frontier = list(seen)
    while frontier:
        current = list(seen)
        new = []
        for a in frontier:
            for b in current:
                m = R.join_mask(a, b)
                if m not in seen:
                    seen.add(m)
                    new.append(m)
        frontier = new
    out = sorted(seen, key=lambda m: (bin(m).count("1"), _bits(m)))
    R._lattice = out
    logger.debug("lattice of rank-%d ring has %d subcategories", R.rank, len(out))
    return out


def maximal_nilpotent_subcategory(R: FusionRing, limit: Optional[int] = DEFAULT_LATTICE_RANK) -> FusionSubcategory:
    """Join of all nilpotent subcategories; nilpotent itself."""
    if is_nilpotent(R):
        return R.whole
    mask = 1
    for sub in enumerate_subcategories(R, limit):
        if is_nilpotent(sub):
            mask = R.join_mask(mask, sub.mask)
    result = R.subcategory(mask)
    if not is_nilpotent(result):
        raise ValidationFailure(Violation("maximal_nilpotent_is_nilpotent", result.members))
    return result
