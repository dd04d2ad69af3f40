"""
Verification suites.

Each suite walks the zoo in instance-id order, counts every instance that
does not meet its hypotheses as skipped and records failures with a witness
and the single command that reproduces them.
"""

from __future__ import annotations

import logging
import random
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from math import isqrt
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from sympy import factorint

from .abelian import automorphisms_preserving_form, slant_dx
from .codec import load_modular, load_spec_of
from .construct import ZooEntry, metric_form
from .errors import FusionLabError, LimitExceeded, SpecError, ValidationFailure, Violation
from .fusion import (
    DEFAULT_LATTICE_RANK,
    FusionSubcategory,
    adjoint_subcategory,
    dimensional_grading,
    enumerate_subcategories,
    is_generalized_tambara_yamagami,
    is_nilpotent,
    maximal_nilpotent_subcategory,
    pointed_part,
    universal_grading,
)
from .modular import (
    ModularData,
    centralizer_of,
    is_nondegenerate,
    prime_decomposition,
    tannakian_subcategories,
    validate_modular,
)
from .schemas import SuiteFailure, SuiteReport

logger = logging.getLogger(__name__)

DISCLAIMER = (
    "Instances are constructed categories from the zoo (plus any --extra files); "
    "a pass confirms each statement on these instances and is not an independent proof."
)


@dataclass
class VerifyContext:
    """Instances and limits shared by every suite of one run."""
    entries: List[ZooEntry]
    lattice_rank: Optional[int] = DEFAULT_LATTICE_RANK
    random_draws: int = 500
    seed: int = 0
    timings: bool = False
    _validity: Dict[str, Optional[Violation]] = field(default_factory=dict, repr=False)

    def select(self, instance: Optional[str]) -> "VerifyContext":
        """Restrict to a single instance id."""
        if instance is None:
            return self
        chosen = [e for e in self.entries if e.id == instance]
        if not chosen:
            raise SpecError(f"unknown instance {instance!r}", instance=instance)
        return VerifyContext(chosen, self.lattice_rank, self.random_draws, self.seed, self.timings)

    def violation(self, entry: ZooEntry) -> Optional[Violation]:
        """Validation result for entries read from files; built entries are validated on construction."""
        if entry.source is None or entry.data is None:
            return None
        if entry.id not in self._validity:
            try:
                self._validity[entry.id] = validate_modular(entry.data)
            except FusionLabError as exc:
                self._validity[entry.id] = Violation(exc.kind, (), exc.message)
        return self._validity[entry.id]


def load_extra(path: str) -> ZooEntry:
    """Read a category file as an unvalidated instance; the suites validate it."""
    data = load_modular(path, validate=False)
    spec = load_spec_of(path)
    entry_id = f"file-{Path(path).stem}"
    data.name = data.name or entry_id
    return ZooEntry(entry_id, spec, data=data, source=str(path))


def reproduce_command(suite: str, entry: ZooEntry) -> str:
    command = f"fusionlab verify --suite {suite}"
    if entry.source is not None:
        command += f" --extra {entry.source}"
    return f"{command} --instance {entry.id}"


class SuiteRun:
    """Counters and failures of one suite over one context."""

    def __init__(self, name: str, context: VerifyContext):
        self.name = name
        self.context = context
        self.checked = 0
        self.skipped = 0
        self.failures: List[SuiteFailure] = []
        self._counted = False
        self._start = time.perf_counter()

    def instances(self) -> Iterator[ZooEntry]:
        for entry in sorted(self.context.entries, key=lambda e: e.id):
            self._counted = False
            yield entry

    def skip(self, entry: ZooEntry, reason: str) -> None:
        self.skipped += 1
        logger.debug("%s: skip %s (%s)", self.name, entry.id, reason)

    def check(self, entry: ZooEntry) -> None:
        self.checked += 1
        self._counted = True
        logger.debug("%s: check %s", self.name, entry.id)

    def fail(self, entry: ZooEntry, identity: str, witness: Sequence = (), detail: str = "") -> None:
        logger.info("%s: %s fails %s at %s", self.name, entry.id, identity, list(witness))
        self.failures.append(SuiteFailure(
            instance=entry.id,
            identity=identity,
            witness=list(witness),
            detail=detail,
            reproduce=reproduce_command(self.name, entry),
        ))

    def data(self, entry: ZooEntry) -> Optional[ModularData]:
        """Modular data of entry, or None after recording a skip (census only) or a failure (invalid file)."""
        if entry.data is None:
            self.skip(entry, "census only")
            return None
        violation = self.context.violation(entry)
        if violation is not None:
            self.check(entry)
            self.fail(entry, violation.identity, violation.witness, violation.detail)
            return None
        return entry.data

    @contextmanager
    def guard(self, entry: ZooEntry):
        """Turn limits into skips and raised violations into failures."""
        try:
            yield
        except LimitExceeded as exc:
            if self._counted:
                self.checked -= 1
            self.skip(entry, exc.message)
        except ValidationFailure as exc:
            v = exc.violation
            self.fail(entry, v.identity, v.witness, v.detail or exc.message)
        except FusionLabError as exc:
            self.fail(entry, exc.kind, (), exc.message)

    def report(self) -> SuiteReport:
        failures = sorted(self.failures, key=lambda f: (f.instance, f.identity, repr(f.witness)))
        wall = round(time.perf_counter() - self._start, 3) if self.context.timings else None
        logger.info("%s: %d checked, %d skipped, %d failures", self.name, self.checked, self.skipped, len(failures))
        return SuiteReport(
            suite=self.name,
            checked=self.checked,
            skipped=self.skipped,
            failures=failures,
            disclaimer=DISCLAIMER,
            passed=not failures,
            wall_time=wall,
        )


SuiteFunction = Callable[[VerifyContext], SuiteReport]


@dataclass(frozen=True)
class Suite:
    name: str
    run: SuiteFunction
    summary: str


SUITES: Dict[str, Suite] = {}


def register(name: str, summary: str):
    def wrap(func: SuiteFunction) -> SuiteFunction:
        SUITES[name] = Suite(name, func, summary)
        return func
    return wrap


def resolve_suites(requested: Sequence[str]) -> List[str]:
    """Expand "all" and reject unknown names."""
    names: List[str] = []
    for name in requested:
        if name == "all":
            names.extend(n for n in SUITES if n not in names)
        elif name in SUITES:
            if name not in names:
                names.append(name)
        else:
            raise SpecError(f"unknown suite {name!r}; choose from {', '.join(['all', *SUITES])}", suite=name)
    return names


def run_suites(requested: Sequence[str], context: VerifyContext) -> List[SuiteReport]:
    return [SUITES[name].run(context) for name in resolve_suites(requested)]


# --- helpers ------------------------------------------------------------------------------


def _is_integral(M: ModularData) -> bool:
    return all(d.is_integer for d in M.ring.fpdims)


def _census_integral(entry: ZooEntry) -> bool:
    return all(isqrt(s.dim_square) ** 2 == s.dim_square for s in entry.census.sectors)


def _is_pointed(M: ModularData) -> bool:
    return M.ring.pointed_mask() == M.ring.full_mask


def _squarefree_prime_to(factors: Dict[int, int], q: int) -> bool:
    return all(k == 1 for p, k in factors.items() if p != q)


def asf_shape(dim: int, q: Optional[int] = None) -> Optional[Tuple[int, int, int]]:
    """
    (d, q, n) with dim = d * q**n, n >= 1 and d square-free and prime to q.

    Without q, the smallest odd prime giving that shape is used.
    """
    factors = factorint(dim)
    candidates = [q] if q is not None else sorted(p for p in factors if p % 2)
    for p in candidates:
        n = factors.get(p, 0)
        if n >= 1 and _squarefree_prime_to(factors, p):
            return dim // p ** n, p, n
    return None


# --- suites -------------------------------------------------------------------------------


@register("uppbound", "|E|^2 divides FPdim for nondegenerate weakly integral instances")
def suite_uppbound(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("uppbound", context)
    for entry in run.instances():
        M = run.data(entry)
        if M is None:
            continue
        with run.guard(entry):
            if not is_nondegenerate(M):
                run.skip(entry, "degenerate")
                continue
            run.check(entry)
            E = dimensional_grading(M.ring).order
            if M.global_dim % (E * E):
                run.fail(entry, "dimension_group_square_divides", [E, M.global_dim])
    return run.report()


@register("2squarefree", "instances with FPdim not divisible by 4 are integral")
def suite_2squarefree(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("2squarefree", context)
    for entry in run.instances():
        if entry.data is None:
            run.check(entry)
            if entry.fpdim % 4 and not _census_integral(entry):
                run.fail(entry, "not_divisible_by_4_is_integral", [entry.fpdim])
            continue
        M = run.data(entry)
        if M is None:
            continue
        with run.guard(entry):
            run.check(entry)
            if M.global_dim % 4 and not _is_integral(M):
                witness = [i for i, d in enumerate(M.ring.fpdims) if not d.is_integer]
                run.fail(entry, "not_divisible_by_4_is_integral", [M.global_dim, witness[0]])
    return run.report()


@register("pt-ddqq", "twisted doubles of groups of order q^2 are pointed of rank q^4")
def suite_pt_ddqq(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("pt-ddqq", context)
    for entry in run.instances():
        census = entry.census
        if census is None:
            run.skip(entry, "not a twisted double")
            continue
        order = census.group.order
        q = isqrt(order)
        if q * q != order or q not in (2, 3, 5):
            run.skip(entry, f"group order {order}")
            continue
        with run.guard(entry):
            run.check(entry)
            omega = census.cocycle
            violation = omega.check()
            if violation is not None:
                run.fail(entry, violation.identity, violation.witness)
                continue
            if not census.pointed:
                bad = next(s for s in census.sectors if s.dim_square != 1)
                run.fail(entry, "double_pointed", [list(bad.element), bad.dim_square])
            if census.simples != q ** 4:
                run.fail(entry, "double_rank_q4", [census.simples, q ** 4])
            for x in census.group.elements(None):
                if not slant_dx(omega, x).is_symmetric():
                    run.fail(entry, "slant_symmetric", [list(x)])
                    break
    return run.report()


@register("asf-nilpotent", "nondegenerate instances of FPdim d q^n are integral, nilpotent and decompose by primes")
def suite_asf_nilpotent(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("asf-nilpotent", context)
    for entry in run.instances():
        M = run.data(entry)
        if M is None:
            continue
        with run.guard(entry):
            shape = asf_shape(M.global_dim)
            if shape is None:
                run.skip(entry, f"FPdim {M.global_dim} is not of the form d q^n")
                continue
            if not is_nondegenerate(M):
                run.skip(entry, "degenerate")
                continue
            run.check(entry)
            d, q, n = shape
            if not _is_integral(M):
                run.fail(entry, "asf_integral", [d, q, n])
                continue
            if not is_nilpotent(M.ring):
                run.fail(entry, "asf_nilpotent", [d, q, n])
                continue
            primes = sorted(factorint(M.global_dim))
            for p, component in zip(primes, prime_decomposition(M, context.lattice_rank)):
                if p == q:
                    if component.fpdim != q ** n:
                        run.fail(entry, "asf_q_component", [q, component.fpdim])
                elif component.fpdim != p or not component.is_pointed():
                    run.fail(entry, "asf_prime_component_pointed", [p, component.fpdim])
            spec = entry.spec
            if spec is not None and spec.family == "metric_group" and spec.form is not None:
                _, phi = metric_form(spec)
                automorphisms = automorphisms_preserving_form(phi)
                if len(automorphisms) != 2:
                    run.fail(entry, "form_automorphisms_are_sign", [len(automorphisms)])
    return run.report()


def _q4_shape(dim: int) -> Optional[int]:
    factors = factorint(dim)
    for q in (3, 5):
        if factors.get(q) == 4 and _squarefree_prime_to(factors, q):
            return q
    return None


@register("dimq4-pointed", "integral nondegenerate instances of FPdim d q^4 are pointed")
def suite_dimq4_pointed(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("dimq4-pointed", context)
    for entry in run.instances():
        if entry.data is None:
            # twisted doubles are nondegenerate, so the census suffices
            q = _q4_shape(entry.fpdim)
            if q is None or not _census_integral(entry):
                run.skip(entry, "census outside the hypotheses")
                continue
            run.check(entry)
            if not entry.census.pointed:
                run.fail(entry, "dimq4_pointed", [q, entry.fpdim])
            continue
        M = run.data(entry)
        if M is None:
            continue
        with run.guard(entry):
            q = _q4_shape(M.global_dim)
            if q is None or not _is_integral(M) or not is_nondegenerate(M):
                run.skip(entry, "outside the hypotheses")
                continue
            run.check(entry)
            if not _is_pointed(M):
                witness = [i for i in range(M.rank) if not M.ring.is_invertible(i)]
                run.fail(entry, "dimq4_pointed", [q, M.global_dim, witness[0]])
    return run.report()


def _ising_factor(M: ModularData, lattice: List[FusionSubcategory]) -> Optional[Tuple[FusionSubcategory, FusionSubcategory]]:
    """An Ising subcategory I with pointed centralizer B, I and B mutually centralizing and spanning M."""
    for sub in lattice:
        if sub.size != 3 or sub.fpdim != 4 or sub.is_pointed():
            continue
        if not is_generalized_tambara_yamagami(sub.as_ring()):
            continue
        B = centralizer_of(M, sub)
        if B.mask & sub.mask != 1 or not B.is_pointed():
            continue
        if sub <= centralizer_of(M, B) and sub.fpdim * B.fpdim == M.global_dim:
            return sub, B
    return None


@register("structure-swi", "structure of strictly weakly integral nondegenerate instances")
def suite_structure_swi(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("structure-swi", context)
    for entry in run.instances():
        M = run.data(entry)
        if M is None:
            continue
        with run.guard(entry):
            if _is_integral(M) or not is_nondegenerate(M):
                run.skip(entry, "integral or degenerate")
                continue
            run.check(entry)
            R = M.ring
            ad = adjoint_subcategory(R)
            if ad.fpdim == 2:
                if not is_generalized_tambara_yamagami(R):
                    run.fail(entry, "adjoint_dim_2_is_generalized_ty", list(ad.members))
                elif _ising_factor(M, enumerate_subcategories(R, context.lattice_rank)) is None:
                    run.fail(entry, "ising_times_pointed", list(ad.members))
            elif not _is_pointed(M):
                found = tannakian_subcategories(M, context.lattice_rank)
                if not any(not s.is_trivial() for s in found):
                    run.fail(entry, "nontrivial_tannakian", [ad.fpdim])
            shape = asf_shape(M.global_dim, 2)
            if shape is not None:
                _, _, n = shape
                U = universal_grading(R).order
                if U % (2 ** n) == 0 and not _is_pointed(M):
                    run.fail(entry, "universal_grading_2n_pointed", [U, n])
    return run.report()


@register("cnil", "C_nil contains every nilpotent subcategory; D_ad = D for its centralizer D; double centralizers return every subcategory")
def suite_cnil(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("cnil", context)
    for entry in run.instances():
        M = run.data(entry)
        if M is None:
            continue
        with run.guard(entry):
            if not is_nondegenerate(M):
                run.skip(entry, "degenerate")
                continue
            R = M.ring
            whole_nilpotent = is_nilpotent(R)
            large = context.lattice_rank is not None and R.rank > context.lattice_rank
            if large and not whole_nilpotent:
                run.skip(entry, f"rank {R.rank} exceeds the lattice limit")
                continue
            run.check(entry)
            nil = maximal_nilpotent_subcategory(R, context.lattice_rank)
            if not is_nilpotent(nil):
                run.fail(entry, "cnil_nilpotent", list(nil.members))
            D = centralizer_of(M, nil)
            if adjoint_subcategory(D).mask != D.mask:
                run.fail(entry, "centralizer_of_cnil_is_perfect", list(D.members))
            if large:
                continue
            lattice = enumerate_subcategories(R, context.lattice_rank)
            for sub in lattice:
                if is_nilpotent(sub) and not sub <= nil:
                    run.fail(entry, "cnil_contains_nilpotent", list(sub.members))
                    break
            total = R.whole.fpdim
            for sub in lattice:
                C = centralizer_of(M, sub)
                if centralizer_of(M, C) != sub:
                    run.fail(entry, "double_centralizer", list(sub.members))
                    break
                if sub.fpdim * C.fpdim != total:
                    run.fail(entry, "centralizer_dimension", [sub.fpdim, C.fpdim])
                    break
            for sub in tannakian_subcategories(M, context.lattice_rank):
                if not sub <= nil:
                    run.fail(entry, "tannakian_in_cnil", list(sub.members))
                    break
    return run.report()


# --- additional suites ---------------------------------------------------------------------


def _series_join(R, a: int, b: int) -> Optional[int]:
    """First n where (a v b)^(n) differs from a^(n) v b^(n), or None."""
    x, y, z = R.join_mask(a, b), a, b
    for n in range(R.rank + 1):
        if x != R.join_mask(y, z):
            return n
        nx, ny, nz = R.adjoint_mask(x), R.adjoint_mask(y), R.adjoint_mask(z)
        if (nx, ny, nz) == (x, y, z):
            return None
        x, y, z = nx, ny, nz
    return None


@register("gen-nil", "central series commute with joins; commutator sandwich (S^co)_ad <= S <= (S_ad)^co")
def suite_gen_nil(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("gen-nil", context)
    pool: List[Tuple[ZooEntry, List[FusionSubcategory]]] = []
    for entry in run.instances():
        M = run.data(entry)
        if M is None:
            continue
        with run.guard(entry):
            pool.append((entry, enumerate_subcategories(M.ring, context.lattice_rank)))
    rng = random.Random(context.seed)
    for _ in range(context.random_draws if pool else 0):
        entry, lattice = rng.choice(pool)
        a, b = rng.choice(lattice), rng.choice(lattice)
        R = entry.data.ring
        run.check(entry)
        n = _series_join(R, a.mask, b.mask)
        if n is not None:
            run.fail(entry, "series_of_join", [list(a.members), list(b.members), n])
        co = R.commutator_mask(a.mask)
        if R.adjoint_mask(co) & ~a.mask:
            run.fail(entry, "commutator_adjoint_inside", [list(a.members)])
        if a.mask & ~R.commutator_mask(R.adjoint_mask(a.mask)):
            run.fail(entry, "inside_commutator_of_adjoint", [list(a.members)])
    return run.report()


@register("gradings", "universal and dimensional gradings, subcategory dimensions, adjoint structure in dimension d 2^n")
def suite_gradings(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("gradings", context)
    for entry in run.instances():
        M = run.data(entry)
        if M is None:
            continue
        with run.guard(entry):
            run.check(entry)
            R = M.ring
            U, E = universal_grading(R), dimensional_grading(R)
            if not U.refines(E):
                run.fail(entry, "universal_refines_dimensional", [U.order, E.order])
            nondegenerate = is_nondegenerate(M)
            if nondegenerate and U.order != pointed_part(R).fpdim:
                run.fail(entry, "universal_order_is_pointed_dim", [U.order, pointed_part(R).fpdim])
            if context.lattice_rank is None or R.rank <= context.lattice_rank:
                for sub in enumerate_subcategories(R, context.lattice_rank):
                    if M.global_dim % sub.fpdim:
                        run.fail(entry, "subcategory_dim_divides", list(sub.members))
                        break
            shape = asf_shape(M.global_dim, 2)
            if not nondegenerate or shape is None:
                continue
            ad = adjoint_subcategory(R)
            for i in ad.members:
                square = R.fpdims[i].square
                if square & (square - 1) or not R.fpdims[i].is_integer:
                    run.fail(entry, "adjoint_dims_power_of_2", [i, square])
                    break
            if not _is_pointed(M) and ad.mask & R.pointed_mask() == 1:
                run.fail(entry, "adjoint_pointed_part_nontrivial", list(ad.members))
    return run.report()


@register("squarefree-pointed", "nondegenerate instances of square-free FPdim are pointed")
def suite_squarefree_pointed(context: VerifyContext) -> SuiteReport:
    run = SuiteRun("squarefree-pointed", context)
    for entry in run.instances():
        M = run.data(entry)
        if M is None:
            continue
        with run.guard(entry):
            if any(k > 1 for k in factorint(M.global_dim).values()) or not is_nondegenerate(M):
                run.skip(entry, "FPdim not square-free or degenerate")
                continue
            run.check(entry)
            if not _is_pointed(M):
                run.fail(entry, "squarefree_pointed", [M.global_dim])
    return run.report()
