"""
Modular data: a fusion ring with exact S and T.

S is unnormalised (S[0][0] = 1, S[0][i] = d_i) and T lists the twists.
Balancing is checked as S_ij = theta_i^-1 theta_j^-1 sum_k N_ij^k d_k theta_k.

When the ring is pointed and every S/T entry is a root of unity, the data is
converted to integer exponent tables at a common order and all identities
run as numpy sweeps; otherwise the checks use exact cyclotomic arithmetic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint

from .cyclo import Cyclotomic, cyclo_sum, lcm, root_of_unity
from .errors import FusionLabError, LimitExceeded, ValidationFailure, Violation
from .fusion import (
    DEFAULT_LATTICE_RANK,
    FusionRing,
    FusionSubcategory,
    _bits,
    enumerate_subcategories,
    is_nilpotent,
)

logger = logging.getLogger(__name__)

Matrix = Tuple[Tuple[Cyclotomic, ...], ...]

# Verlinde recovery is quartic in the rank
DEFAULT_VERLINDE_RANK = 27


@dataclass(frozen=True)
class SymmetricClass:
    kind: Literal["tannakian", "super_tannakian_svect_core"]
    witness: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, object]:
        return {"kind": self.kind, "witness": list(self.witness)}


@dataclass(eq=False)
class ModularData:
    """Fusion ring plus exact S matrix and twists."""
    ring: FusionRing
    S: Matrix = field(repr=False)
    T: Tuple[Cyclotomic, ...] = field(repr=False)
    name: str = ""

    def __post_init__(self):
        self.S = tuple(tuple(row) for row in self.S)
        self.T = tuple(self.T)

    @classmethod
    def from_exponents(cls, ring: FusionRing, order: int, S_exp: np.ndarray,
                       T_exp: Sequence[int], name: str = "") -> "ModularData":
        """Pointed data whose S and T entries are zeta_order^exponent."""
        S = tuple(tuple(root_of_unity(order, int(e)) for e in row) for row in np.asarray(S_exp))
        T = tuple(root_of_unity(order, int(e)) for e in T_exp)
        return cls(ring, S, T, name)

    @property
    def rank(self) -> int:
        return self.ring.rank

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.ring.labels

    @property
    def global_dim(self) -> int:
        return self.ring.whole.fpdim

    def d(self, i: int) -> Cyclotomic:
        return self.S[0][i]

    @cached_property
    def exponent_tables(self) -> Optional[Tuple[int, np.ndarray, np.ndarray]]:
        """(order, S exponents, T exponents) when every entry is a root of unity."""
        values = {v for row in self.S for v in row} | set(self.T)
        L = reduce(lcm, (v.conductor for v in values), 2)
        lookup = {root_of_unity(L, e): e for e in range(L)}
        if any(v not in lookup for v in values):
            return None
        S_exp = np.array([[lookup[v] for v in row] for row in self.S], dtype=np.int64)
        T_exp = np.array([lookup[v] for v in self.T], dtype=np.int64)
        return L, S_exp, T_exp

    @cached_property
    def centralizing(self) -> np.ndarray:
        """centralizing[i, j] iff S[i][j] = d_i d_j."""
        n = self.rank
        tables = self.exponent_tables if self.ring.permutation_table is not None else None
        if tables is not None:
            return tables[1] == 0
        d = [self.d(i) for i in range(n)]
        out = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for j in range(i, n):
                out[i, j] = out[j, i] = self.S[i][j] == d[i] * d[j]
        return out

    @cached_property
    def orthogonality_defect(self) -> Optional[Tuple[int, int]]:
        """First (i, j) with (S S^*)_ij != D^2 delta_ij, or None."""
        S, n, D2 = self.S, self.rank, self.global_dim
        conj = [[x.conjugate() for x in row] for row in S]
        for i in range(n):
            for j in range(i, n):
                value = cyclo_sum(S[i][r] * conj[j][r] for r in range(n))
                if value != (D2 if i == j else 0):
                    return i, j
        return None


# --- validation ------------------------------------------------------------------


def validate_modular(M: ModularData) -> Optional[Violation]:
    """
    First violated modular-data identity, or None.

    Checks shapes, normalisation, symmetry, S against the certified FP
    dimensions, balancing, the fusion-character identity
    sum_k N_ij^k S_kr = S_ir S_jr / d_r and, when the Muger center is
    trivial, orthogonality S S^* = D^2 I.  Together the last two are
    equivalent to recovering every N_ij^k from S via Verlinde.
    """
    R = M.ring
    violation = R.validate()
    if violation is not None:
        return violation
    n = R.rank
    if len(M.S) != n or any(len(row) != n for row in M.S) or len(M.T) != n:
        return Violation("shape", (n,))
    if M.S[0][0] != 1 or M.T[0] != 1:
        return Violation("normalization", (0, 0))
    for i, dim in enumerate(R.fpdims):
        d = M.S[0][i]
        if d * d != dim.square or complex(d).real <= 0:
            return Violation("quantum_dimension", (0, i), f"S[0][{i}] = {d}, d^2 = {dim.square}")
    for i, theta in enumerate(M.T):
        if theta.root_order() is None:
            return Violation("twist_root_of_unity", (i,))
    tables = M.exponent_tables if R.permutation_table is not None else None
    if tables is not None:
        return _validate_pointed(M, *tables)
    return _validate_general(M)


def _validate_pointed(M: ModularData, L: int, E: np.ndarray, t: np.ndarray) -> Optional[Violation]:
    R = M.ring
    P = R.permutation_table
    dual = np.array(R.dual, dtype=np.int64)
    bad = np.argwhere(E != E.T)
    if bad.size:
        return Violation("S_symmetric", tuple(int(x) for x in bad[0]))
    bad = np.argwhere((E[dual] + E) % L)
    if bad.size:
        return Violation("S_dual_conjugate", tuple(int(x) for x in bad[0]))
    # S_{xy, r} = S_{x, r} S_{y, r}, one x at a time
    for x in range(R.rank):
        bad = np.argwhere((E[P[x]] - E[x][None, :] - E) % L)
        if bad.size:
            return Violation("verlinde_character", (x, *(int(v) for v in bad[0])))
    # S_xy = theta_x^-1 theta_y^-1 theta_{xy}
    bad = np.argwhere((E - t[P] + t[:, None] + t[None, :]) % L)
    if bad.size:
        return Violation("balancing", tuple(int(x) for x in bad[0]))
    # S is now a bicharacter, so its rows are orthogonal exactly when the
    # radical, which is the Muger center, is trivial
    return None


def _validate_general(M: ModularData) -> Optional[Violation]:
    R, S, T = M.ring, M.S, M.T
    n = R.rank
    d = [S[0][i] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if S[i][j] != S[j][i]:
                return Violation("S_symmetric", (i, j))
            if S[i][j] != S[R.dual[i]][j].conjugate():
                return Violation("S_dual_conjugate", (i, j))
    inv_d = [x.inverse() for x in d]
    for i in range(n):
        for j in range(i, n):
            cell = R.products[i][j]
            for r in range(n):
                lhs = cyclo_sum(S[k][r] * v for k, v in cell)
                if lhs != S[i][r] * S[j][r] * inv_d[r]:
                    return Violation("verlinde_character", (i, j, r))
    if int(M.centralizing.all(axis=1).sum()) == 1 and M.orthogonality_defect is not None:
        return Violation("verlinde_orthogonality", M.orthogonality_defect)
    theta_inv = [t.inverse() for t in T]
    dtheta = [d[k] * T[k] for k in range(n)]
    for i in range(n):
        for j in range(i, n):
            inner = cyclo_sum(dtheta[k] * v for k, v in R.products[i][j])
            if S[i][j] != theta_inv[i] * theta_inv[j] * inner:
                return Violation("balancing", (i, j))
    return None


def require_modular(M: ModularData) -> ModularData:
    violation = validate_modular(M)
    if violation is not None:
        raise ValidationFailure(violation, f"{M.name or 'modular data'}: {violation.identity} at {violation.witness}")
    return M


def verlinde_coefficient(M: ModularData, i: int, j: int, k: int) -> Cyclotomic:
    """(1/D^2) sum_r S_ir S_jr conj(S_kr) / d_r."""
    S = M.S
    total = cyclo_sum(
        S[i][r] * S[j][r] * S[k][r].conjugate() * S[0][r].inverse() for r in range(M.rank)
    )
    return total / M.global_dim


def verlinde_mismatch(M: ModularData,
                      limit: Optional[int] = DEFAULT_VERLINDE_RANK) -> Optional[Tuple[int, int, int]]:
    """First (i, j, k) whose Verlinde coefficient differs from N_ij^k, or None."""
    n = M.rank
    if limit is not None and n > limit:
        raise LimitExceeded(f"rank {n} exceeds the Verlinde limit {limit}", rank=n, limit=limit)
    R = M.ring
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                if verlinde_coefficient(M, i, j, k) != R.N(i, j, k):
                    return i, j, k
    return None


# --- centralizers ------------------------------------------------------------------


def centralizes(M: ModularData, i: int, j: int) -> bool:
    return bool(M.centralizing[i, j])


def centralizer_of(M: ModularData, sub: FusionSubcategory) -> FusionSubcategory:
    members = list(sub.members)
    C = M.centralizing[:, members]
    return M.ring.subcategory([i for i in range(M.rank) if C[i].all()])


def muger_center(M: ModularData) -> FusionSubcategory:
    return centralizer_of(M, M.ring.whole)


def is_nondegenerate(M: ModularData) -> bool:
    """Trivial Muger center, cross-checked against invertibility of S."""
    trivial = muger_center(M).is_trivial()
    if trivial != _s_invertible(M):
        raise ValidationFailure(Violation("nondegeneracy_cross_check", (), M.name))
    return trivial


def _s_invertible(M: ModularData) -> bool:
    tables = M.exponent_tables if M.ring.permutation_table is not None else None
    if tables is not None:
        E = tables[1]
        return all(E[i].any() for i in range(1, M.rank))
    # S S^* = D^2 I exactly; a Muger center member repeats the dimension row
    return M.orthogonality_defect is None


def is_slightly_degenerate(M: ModularData) -> bool:
    """Muger center equivalent to svect."""
    center = muger_center(M)
    if center.size != 2:
        return False
    delta = center.members[1]
    return M.ring.is_invertible(delta) and M.T[delta] == -1


def is_symmetric(M: ModularData, sub: FusionSubcategory) -> bool:
    return sub <= centralizer_of(M, sub)


def classify_symmetric(M: ModularData, sub: FusionSubcategory) -> SymmetricClass:
    if not is_symmetric(M, sub):
        raise ValueError(f"subcategory {sub.labels} does not centralize itself")
    nontrivial = [i for i in sub.members if M.T[i] != 1]
    if not nontrivial:
        return SymmetricClass("tannakian", sub.members)
    invertible = [i for i in nontrivial if M.ring.is_invertible(i) and M.T[i] == -1]
    return SymmetricClass("super_tannakian_svect_core", tuple(invertible[:1] or nontrivial[:1]))


def is_tannakian(M: ModularData, sub: FusionSubcategory) -> bool:
    return is_symmetric(M, sub) and all(M.T[i] == 1 for i in sub.members)


def enumerate_within(sub: FusionSubcategory,
                     limit: Optional[int] = DEFAULT_LATTICE_RANK) -> List[FusionSubcategory]:
    """Subcategory lattice of a fusion subcategory, as subcategories of the parent."""
    if sub.is_whole():
        return enumerate_subcategories(sub.parent, limit)
    members = sub.members
    inner = enumerate_subcategories(sub.as_ring(), limit)
    return [sub.parent.subcategory([members[i] for i in s.members]) for s in inner]


def tannakian_subcategories(M: ModularData, limit: Optional[int] = DEFAULT_LATTICE_RANK,
                            within: Optional[FusionSubcategory] = None) -> List[FusionSubcategory]:
    """Tannakian subcategories of M (or of a given subcategory of M), trivial one included."""
    candidates = enumerate_within(within or M.ring.whole, limit)
    found = [s for s in candidates if is_tannakian(M, s)]
    if is_nondegenerate(M):
        for s in found:
            if M.global_dim % (s.fpdim ** 2):
                raise ValidationFailure(Violation("tannakian_dimension_square_divides", s.members))
    return found


# --- products and decompositions -----------------------------------------------------


def deligne_product(M1: ModularData, M2: ModularData) -> ModularData:
    ring = M1.ring.tensor(M2.ring)
    r = M2.rank
    name = f"{M1.name}⊠{M2.name}" if M1.name and M2.name else ""
    t1 = M1.exponent_tables if M1.ring.permutation_table is not None else None
    t2 = M2.exponent_tables if M2.ring.permutation_table is not None else None
    if t1 is not None and t2 is not None:
        # simple (a, b) sits at a * r + b, so S1 is repeated in blocks and S2 tiled
        (L1, S1, T1), (L2, S2, T2) = t1, t2
        L = lcm(L1, L2)
        S_exp = np.kron(S1 * (L // L1), np.ones((r, r), dtype=np.int64)) + np.tile(S2 * (L // L2), (M1.rank, M1.rank))
        T_exp = np.repeat(T1 * (L // L1), r) + np.tile(T2 * (L // L2), M1.rank)
        return require_modular(ModularData.from_exponents(ring, L, S_exp % L, T_exp % L, name))
    S = tuple(
        tuple(M1.S[a][c] * M2.S[b][e] for c in range(M1.rank) for e in range(r))
        for a in range(M1.rank) for b in range(r)
    )
    T = tuple(M1.T[a] * M2.T[b] for a in range(M1.rank) for b in range(r))
    return require_modular(ModularData(ring, S, T, name))


def _element_order(P: np.ndarray, i: int) -> int:
    k, x = 1, i
    while x != 0:
        x = int(P[x, i])
        k += 1
    return k


def _is_prime_power(n: int, p: int) -> bool:
    return set(factorint(n)) <= {p}


def prime_decomposition(M: ModularData,
                        limit: Optional[int] = DEFAULT_LATTICE_RANK) -> List[FusionSubcategory]:
    """
    Components of prime-power FPdim of a nilpotent nondegenerate datum.

    For each prime p dividing FPdim the component is the unique maximal
    subcategory of p-power dimension.  The components pairwise centralize,
    their dimensions multiply to FPdim and each is nondegenerate.
    """
    R = M.ring
    if not is_nilpotent(R):
        raise FusionLabError("prime decomposition needs a nilpotent datum", name=M.name)
    if not is_nondegenerate(M):
        raise FusionLabError("prime decomposition needs a nondegenerate datum", name=M.name)
    dim = M.global_dim
    primes = sorted(factorint(dim))
    P = R.permutation_table
    components = []
    if P is not None:
        orders = [_element_order(P, i) for i in range(R.rank)]
        for p in primes:
            components.append(R.subcategory([i for i in range(R.rank) if _is_prime_power(orders[i], p)]))
    else:
        lattice = enumerate_subcategories(R, limit)
        for p in primes:
            candidates = [s for s in lattice if _is_prime_power(s.fpdim, p)]
            top = max(candidates, key=lambda s: s.fpdim)
            if not all(s <= top for s in candidates):
                raise ValidationFailure(Violation("prime_component_unique", (p,), str(top.members)))
            components.append(top)
    for a in range(len(components)):
        for b in range(a + 1, len(components)):
            if not components[a] <= centralizer_of(M, components[b]):
                raise ValidationFailure(Violation("prime_components_centralize", (primes[a], primes[b])))
    if reduce(lambda x, y: x * y, (c.fpdim for c in components), 1) != dim:
        raise ValidationFailure(Violation("prime_components_dimension", tuple(c.fpdim for c in components)))
    for p, c in zip(primes, components):
        inner = centralizer_of(M, c).mask & c.mask
        if inner != 1:
            raise ValidationFailure(Violation("prime_component_nondegenerate", (p,), str(_bits(inner))))
    return components


def restrict(M: ModularData, sub: FusionSubcategory) -> ModularData:
    """The data of a subcategory, relabelled in member order."""
    members = sub.members
    S = tuple(tuple(M.S[i][j] for j in members) for i in members)
    T = tuple(M.T[i] for i in members)
    return ModularData(sub.as_ring(), S, T, M.name)
