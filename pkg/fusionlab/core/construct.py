"""
Builders for every category family: pointed categories of metric groups,
Ising categories, twisted doubles of abelian groups and Deligne products,
and the deterministic zoo assembled from them.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .abelian import (
    DEFAULT_MAX_GROUP_ORDER,
    Cocycle2,
    Cocycle3,
    FiniteAbelianGroup,
    GroupElement,
    QuadraticForm,
    cocycle_from_exponents,
    format_cocycle,
    parse_cocycle,
    radical_of_pairing,
    slant_dx,
    standard_form,
    trivialize_symmetric,
)
from .cyclo import ONE, ZERO, root_of_unity, sqrt_integer
from .errors import LimitExceeded, ShapeMismatch, SpecError, ValidationFailure, Violation
from .fusion import FusionRing
from .modular import ModularData, deligne_product, require_modular, validate_modular
from .schemas import IsingSpec, MetricGroupSpec, ProductSpec, TwistedDoubleSpec, ZooSpec

logger = logging.getLogger(__name__)

DEFAULT_MAX_RANK = 405
NOT_CONSTRUCTED = "modular data not constructed"

# (sign of gamma in the fusion rule, sign of beta in the projective characters)
DOUBLE_CONVENTIONS = ((1, 1), (-1, 1), (1, -1), (-1, -1))


@dataclass(frozen=True)
class ZooLimits:
    max_rank: int = DEFAULT_MAX_RANK
    max_group_order: int = DEFAULT_MAX_GROUP_ORDER
    q5_samples: int = 10
    seed: int = 0


def _fmt(x: GroupElement) -> str:
    return ",".join(str(c) for c in x) if x else "0"


# --- metric groups and Ising ----------------------------------------------------------


def metric_group_category(A: FiniteAbelianGroup, phi: QuadraticForm, name: str = "") -> ModularData:
    """Group ring of A with S = b (the form associated to phi) and T = phi."""
    if phi.group != A:
        raise ShapeMismatch(f"form is defined on {phi.group}, not on {A}")
    ring = FusionRing.group_ring(A, [_fmt(x) for x in A.elements()])
    M = ModularData.from_exponents(ring, phi.order, phi.bilinear_table, phi.exponents, name)
    return require_modular(M)


ISING_LABELS = ("1", "ε", "σ")


def ising_ring() -> FusionRing:
    coefficients = {(0, j, j): 1 for j in range(3)}
    coefficients.update({(j, 0, j): 1 for j in range(1, 3)})
    coefficients.update({
        (1, 1, 0): 1, (1, 2, 2): 1, (2, 1, 2): 1, (2, 2, 0): 1, (2, 2, 1): 1,
    })
    return FusionRing(ISING_LABELS, (0, 1, 2), coefficients)


def ising_category(twist_index: int, name: str = "") -> ModularData:
    """
    Ising braided category with theta_sigma = zeta_16^twist_index.

    Args:
        twist_index: odd integer; only its class mod 16 matters.
    """
    if twist_index % 2 == 0:
        raise SpecError(f"Ising twist index must be odd, got {twist_index}")
    r2 = sqrt_integer(2)
    S = (
        (ONE, ONE, r2),
        (ONE, ONE, -r2),
        (r2, -r2, ZERO),
    )
    T = (ONE, -ONE, root_of_unity(16, twist_index))
    return require_modular(ModularData(ising_ring(), S, T, name or f"Ising({twist_index % 16})"))


# --- twisted doubles --------------------------------------------------------------------


@dataclass(frozen=True)
class Sector:
    """Simples over one group element: `simples` of them, each of squared dimension `dim_square`."""
    element: GroupElement
    simples: int
    dim_square: int


@dataclass
class TwistedDoubleResult:
    group: FiniteAbelianGroup
    cocycle: Cocycle3
    sectors: Tuple[Sector, ...]
    modular: Optional[ModularData] = None
    marker: Optional[str] = None

    @property
    def simples(self) -> int:
        return sum(s.simples for s in self.sectors)

    @property
    def total_dim(self) -> int:
        return sum(s.simples * s.dim_square for s in self.sectors)

    @property
    def pointed(self) -> bool:
        return all(s.dim_square == 1 for s in self.sectors)


def twisted_double(G: FiniteAbelianGroup, omega: Cocycle3, max_rank: int = DEFAULT_MAX_RANK,
                   name: str = "", limit: Optional[int] = DEFAULT_MAX_GROUP_ORDER) -> TwistedDoubleResult:
    """
    Simple-object census of Rep(D^omega G) and, in the pointed case, its modular data.

    Sector g has |R_g| simples of dimension sqrt(|G| / |R_g|), with R_g the
    radical of the alternating pairing of the slant 2-cocycle omega_g.
    """
    if omega.group != G:
        raise ShapeMismatch(f"cocycle is defined on {omega.group}, not on {G}")
    elems = G.elements(limit)
    n = len(elems)
    slants = [slant_dx(omega, g) for g in elems]
    sectors = []
    for g, beta in zip(elems, slants):
        radical = radical_of_pairing(beta)
        sectors.append(Sector(g, len(radical), n // len(radical)))
    result = TwistedDoubleResult(G, omega, tuple(sectors))
    if not result.pointed:
        result.marker = f"{NOT_CONSTRUCTED}: not pointed"
    elif n * n > max_rank:
        result.marker = f"{NOT_CONSTRUCTED}: rank {n * n} exceeds {max_rank}"
    else:
        result.modular = _pointed_double(G, omega, slants, name or f"D^{omega.label}({G})")
    return result


def _pointed_double(G: FiniteAbelianGroup, omega: Cocycle3, slants: Sequence[Cocycle2],
                    name: str) -> ModularData:
    """
    Modular data of a pointed twisted double.

    Simples are (g, a) with projective character chi_{g,a} = eps_g * rho_a,
    where eps_g trivialises the symmetric slant beta_g and rho_a is linear.
    The fusion (g, a)(h, b) = (g + h, c) is read off from
    chi_{g,a} chi_{h,b} gamma(g, h) = chi_{g+h,c}, the twist is chi_{g,a}(g)
    and S follows from balancing.  Each sign convention is tried in turn and
    validate_modular decides.
    """
    n = G.order
    L, e = omega.order, G.exponent
    M0 = L * e
    A = G.add_table
    W = omega.table
    idx = np.arange(n)
    # gamma[x, g, h] = omega_x(g, h)
    gamma = (W + W.transpose(2, 0, 1) - W.transpose(1, 0, 2)) % L
    char = G.character_table() * L % M0
    rows = {tuple(int(v) for v in row): a for a, row in enumerate(char)}
    labels = [f"{_fmt(g)}:{_fmt(a)}" for g in G.elements(None) for a in G.elements(None)]
    last: Optional[Violation] = None
    for s_gamma, s_beta in DOUBLE_CONVENTIONS:
        eps = np.array([
            trivialize_symmetric(Cocycle2(G, L, s_beta * beta.table))[1] for beta in slants
        ], dtype=np.int64)
        base = (eps[:, None, :] + eps[None, :, :]
                + s_gamma * e * gamma.transpose(1, 2, 0) - eps[A]) % M0
        shift = np.zeros((n, n), dtype=np.int64)
        ok = True
        for g, h in itertools.product(range(n), repeat=2):
            c = rows.get(tuple(int(v) for v in base[g, h]))
            if c is None:
                ok = False
                break
            shift[g, h] = c
        if not ok:
            last = Violation("double_fusion_character", (s_gamma, s_beta))
            logger.debug("%s: convention %s gives no linear character", name, (s_gamma, s_beta))
            continue
        product = A[:, None, :, None] * n + A[A[None, :, None, :], shift[:, None, :, None]]
        P = product.reshape(n * n, n * n)
        dual = [int(np.argmax(P[i] == 0)) for i in range(n * n)]
        ring = FusionRing(labels, dual, {(i, j, int(P[i, j])): 1 for i in range(n * n) for j in range(n * n)})
        chi = (eps[:, None, :] + char[None, :, :]) % M0  # chi[g, a, x]
        twist = (np.diag(eps)[:, None] + char.T) % M0
        corr = (s_gamma * e * gamma[A, idx[:, None], idx[None, :]]
                - s_beta * e * (gamma[idx[:, None], idx[:, None], idx[None, :]]
                                + gamma[idx[None, :], idx[:, None], idx[None, :]]))
        S4 = chi[:, :, :, None] + chi.transpose(2, 0, 1)[:, None, :, :] + corr[:, None, :, None]
        S = (S4 % M0).reshape(n * n, n * n)
        M = ModularData.from_exponents(ring, M0, S, twist.reshape(-1), name)
        last = validate_modular(M)
        if last is None:
            logger.debug("%s: built with convention %s", name, (s_gamma, s_beta))
            return M
        logger.debug("%s: convention %s fails %s", name, (s_gamma, s_beta), last.identity)
    raise ValidationFailure(last, f"{name}: no sign convention gives valid modular data")


# --- specs and the zoo -------------------------------------------------------------------


@dataclass
class ZooEntry:
    """A zoo member; `source` is set for instances read from a file instead of built from a spec."""
    id: str
    spec: Optional[ZooSpec]
    data: Optional[ModularData] = None
    census: Optional[TwistedDoubleResult] = None
    source: Optional[str] = None

    @property
    def census_only(self) -> bool:
        return self.data is None

    @property
    def rank(self) -> int:
        return self.data.rank if self.data is not None else self.census.simples

    @property
    def fpdim(self) -> int:
        return self.data.global_dim if self.data is not None else self.census.total_dim

    @property
    def family(self) -> str:
        return self.spec.family if self.spec is not None else "file"


def spec_id(spec: ZooSpec) -> str:
    """Deterministic, filename-safe identifier of a spec."""
    if spec.family == "metric_group":
        form = spec.form or "c" + ".".join(str(c) for c in (spec.coefficients or []))
        return f"metric-{spec.group}-{form}"
    if spec.family == "ising":
        return f"ising-{spec.twist % 16}"
    if spec.family == "twisted_double":
        label = format_cocycle(parse_cocycle(spec.cocycle))
        return f"double-{spec.group}-{label.replace(':', '^').replace(',', '.')}"
    return "__".join(spec_id(f) for f in spec.factors)


def spec_name(spec: ZooSpec) -> str:
    if spec.name:
        return spec.name
    if spec.family == "metric_group":
        form = spec.form or f"c={spec.coefficients}"
        return f"({spec.group}, {form})"
    if spec.family == "ising":
        return f"Ising({spec.twist % 16})"
    if spec.family == "twisted_double":
        return f"D^[{format_cocycle(parse_cocycle(spec.cocycle))}]({spec.group})"
    return "⊠".join(spec_name(f) for f in spec.factors)


def metric_form(spec: MetricGroupSpec) -> Tuple[FiniteAbelianGroup, QuadraticForm]:
    group = FiniteAbelianGroup.parse(spec.group)
    if spec.form is not None:
        if spec.coefficients is not None:
            raise SpecError("give either a form variant or coefficients, not both")
        if not group.is_cyclic() or group.order < 3:
            raise SpecError(f"form variants need Z_p for an odd prime p, got {group}")
        return group, standard_form(group.order, spec.form)
    coefficients = spec.coefficients if spec.coefficients is not None else [1] * group.rank
    return group, QuadraticForm.diagonal(group, coefficients)


def build_from_spec(spec: ZooSpec, limits: ZooLimits = ZooLimits(),
                    cache: Optional[Dict[str, ZooEntry]] = None) -> ZooEntry:
    key = spec_id(spec)
    if cache is not None and key in cache:
        return cache[key]
    name = spec_name(spec)
    if spec.family == "metric_group":
        group, phi = metric_form(spec)
        group.elements(limits.max_group_order)
        entry = ZooEntry(key, spec, data=metric_group_category(group, phi, name))
    elif spec.family == "ising":
        entry = ZooEntry(key, spec, data=ising_category(spec.twist, name))
    elif spec.family == "twisted_double":
        group = FiniteAbelianGroup.parse(spec.group)
        group.elements(limits.max_group_order)
        omega = cocycle_from_exponents(group, parse_cocycle(spec.cocycle))
        census = twisted_double(group, omega, limits.max_rank, name, limits.max_group_order)
        entry = ZooEntry(key, spec, data=census.modular, census=census)
    else:
        if not spec.factors:
            raise SpecError("a product needs at least one factor")
        parts = [build_from_spec(f, limits, cache) for f in spec.factors]
        for part in parts:
            if part.data is None:
                raise LimitExceeded(f"factor {part.id} has no modular data", factor=part.id)
        rank = 1
        for part in parts:
            rank *= part.data.rank
        if rank > limits.max_rank:
            raise LimitExceeded(f"product rank {rank} exceeds {limits.max_rank}", rank=rank)
        data = parts[0].data
        for part in parts[1:]:
            data = deligne_product(data, part.data)
        data.name = name
        entry = ZooEntry(key, spec, data=data)
    if cache is not None:
        cache[key] = entry
    return entry


def _metric(group: str, form: Optional[str] = None, coefficients: Optional[List[int]] = None) -> MetricGroupSpec:
    return MetricGroupSpec(family="metric_group", group=group, form=form, coefficients=coefficients)


def _ising(twist: int) -> IsingSpec:
    return IsingSpec(family="ising", twist=twist)


def _double(group: str, exponents: Dict[str, int]) -> TwistedDoubleSpec:
    return TwistedDoubleSpec(family="twisted_double", group=group, cocycle=format_cocycle(exponents))


def _product(*factors: ZooSpec) -> ProductSpec:
    return ProductSpec(family="product", factors=list(factors))


def double_cocycles(group: FiniteAbelianGroup) -> List[Dict[str, int]]:
    """Every generator-exponent cocycle on Z_m or Z_q x Z_q."""
    if group.is_cyclic():
        return [{"I": k} for k in range(group.order)] if group.order > 1 else [{}]
    q = group.invariant_factors[0]
    if group.rank != 2 or group.invariant_factors[1] != q:
        raise ShapeMismatch(f"no generator sweep for {group}")
    return [{"I1": a, "I2": b, "II": c} for a, b, c in itertools.product(range(q), repeat=3)]


def default_specs(limits: ZooLimits = ZooLimits()) -> List[ZooSpec]:
    """The zoo's members, in a fixed order."""
    rng = random.Random(limits.seed)
    specs: List[ZooSpec] = []
    for p in (3, 5, 7, 11, 13):
        for variant in ("residue", "nonresidue"):
            specs.append(_metric(f"Z{p}", form=variant))
    for a in range(4):
        specs.append(_metric("Z2", coefficients=[a]))
    for k in (1, 3, 5, 7):
        specs.append(_metric("Z4", coefficients=[k]))
    specs.append(_metric("Z6", coefficients=[1]))
    semion, svect = _metric("Z2", coefficients=[1]), _metric("Z2", coefficients=[2])
    z3, z5, z7 = (_metric(f"Z{p}", form="residue") for p in (3, 5, 7))
    specs += [
        _product(z3, z5), _product(semion, z3), _product(semion, z5), _product(z3, z7),
        _product(semion, z3, z5), _product(svect, z3),
    ]
    for t in range(1, 16, 2):
        specs.append(_ising(t))
    for group in ("Z2", "Z4", "Z2xZ2", "Z3", "Z9", "Z3xZ3"):
        for exponents in double_cocycles(FiniteAbelianGroup.parse(group)):
            specs.append(_double(group, exponents))
    for group in ("Z25", "Z5xZ5"):
        sweep = double_cocycles(FiniteAbelianGroup.parse(group))
        for exponents in rng.sample(sweep, min(limits.q5_samples, len(sweep))):
            specs.append(_double(group, exponents))
    ising = _ising(1)
    specs += [
        _product(ising, z3), _product(ising, z5), _product(ising, z7), _product(_ising(3), semion),
        _product(ising, _ising(3)), _product(ising, ising, ising), _product(ising, ising, z3),
        _product(ising, _double("Z3", {"I": 1})),
        _product(z5, _double("Z3", {})), _product(z5, _double("Z3", {"I": 1})),
        _product(semion, _double("Z9", {"I": 1})), _product(semion, _double("Z3xZ3", {"II": 1})),
        _product(z5, _double("Z3xZ3", {"II": 1})),
    ]
    return specs


def build_zoo(limits: ZooLimits = ZooLimits()) -> List[ZooEntry]:
    """Build every default spec that fits the limits; members over the limits are logged and left out."""
    cache: Dict[str, ZooEntry] = {}
    entries: List[ZooEntry] = []
    seen = set()
    for spec in default_specs(limits):
        key = spec_id(spec)
        if key in seen:
            continue
        seen.add(key)
        try:
            entry = build_from_spec(spec, limits, cache)
        except LimitExceeded as exc:
            logger.info("zoo: skipping %s (%s)", key, exc.message)
            continue
        logger.debug("zoo: built %s, rank %d, FPdim %d", key, entry.rank, entry.fpdim)
        entries.append(entry)
    logger.info("zoo: %d members", len(entries))
    return entries
