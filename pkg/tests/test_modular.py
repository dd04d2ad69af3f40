import itertools

import pytest

from fusionlab.core.abelian import FiniteAbelianGroup, QuadraticForm, cocycle_from_exponents, standard_form
from fusionlab.core.construct import ising_category, metric_group_category, twisted_double
from fusionlab.core.cyclo import ONE, root_of_unity, sqrt_integer
from fusionlab.core.errors import FusionLabError, LimitExceeded, SpecError, ValidationFailure
from fusionlab.core.fusion import enumerate_subcategories, fpdim_category, nilpotency_class
from fusionlab.core.modular import (
    ModularData,
    centralizer_of,
    classify_symmetric,
    deligne_product,
    is_nondegenerate,
    is_slightly_degenerate,
    is_symmetric,
    is_tannakian,
    muger_center,
    prime_decomposition,
    require_modular,
    restrict,
    tannakian_subcategories,
    validate_modular,
    verlinde_coefficient,
    verlinde_mismatch,
)


def metric(text, coefficients):
    G = FiniteAbelianGroup.parse(text)
    return metric_group_category(G, QuadraticForm.diagonal(G, coefficients))


class TestIsing:
    @pytest.mark.parametrize("twist", [1, 3, 5, 7, 9, 11, 13, 15])
    def test_all_twists_are_modular(self, twist):
        M = ising_category(twist)
        assert validate_modular(M) is None
        assert M.T[2] == root_of_unity(16, twist)
        assert M.global_dim == 4
        assert is_nondegenerate(M)

    def test_even_twist_is_rejected(self):
        with pytest.raises(SpecError):
            ising_category(2)

    def test_verlinde_recovers_fusion(self, ising):
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    assert verlinde_coefficient(ising, i, j, k) == ising.ring.N(i, j, k)

    def test_verlinde_mismatch(self, ising):
        assert verlinde_mismatch(ising) is None
        S = [list(row) for row in ising.S]
        S[1][2] = S[2][1] = sqrt_integer(2)
        assert verlinde_mismatch(ModularData(ising.ring, S, ising.T)) is not None
        with pytest.raises(LimitExceeded):
            verlinde_mismatch(ising, limit=2)

    def test_structure(self, ising):
        assert muger_center(ising).is_trivial()
        assert nilpotency_class(ising.ring) == 2
        assert tannakian_subcategories(ising) == [ising.ring.trivial]

    def test_tampered_s_fails_verlinde(self, ising):
        S = [list(row) for row in ising.S]
        S[1][2] = S[2][1] = sqrt_integer(2)
        violation = validate_modular(ModularData(ising.ring, S, ising.T))
        assert violation.identity == "verlinde_character"
        assert violation.witness == (2, 2, 2)

    def test_non_root_twist(self, ising):
        T = (ONE, -ONE, sqrt_integer(2))
        assert validate_modular(ModularData(ising.ring, ising.S, T)).identity == "twist_root_of_unity"


class TestPointed:
    def test_metric_group(self):
        M = metric_group_category(FiniteAbelianGroup.cyclic(5), standard_form(5))
        assert M.rank == 5
        assert M.global_dim == 5
        assert is_nondegenerate(M)
        assert M.exponent_tables is not None

    def test_semion(self, semion):
        assert is_nondegenerate(semion)
        assert semion.T[1] == root_of_unity(4)

    def test_svect(self, svect):
        assert not is_nondegenerate(svect)
        assert muger_center(svect).is_whole()
        assert is_slightly_degenerate(svect)
        assert classify_symmetric(svect, svect.ring.whole).kind == "super_tannakian_svect_core"
        assert not is_tannakian(svect, svect.ring.whole)

    def test_rep_z2(self):
        M = metric("Z2", [0])
        assert not is_slightly_degenerate(M)
        assert classify_symmetric(M, M.ring.whole).kind == "tannakian"
        assert is_tannakian(M, M.ring.whole)

    def test_tampered_twist_fails_balancing(self, z3):
        T = (ONE, ONE, z3.T[2])
        violation = validate_modular(ModularData(z3.ring, z3.S, T))
        assert violation.identity == "balancing"

    def test_relabelled_s_fails_the_character_identity(self):
        z5 = metric_group_category(FiniteAbelianGroup.cyclic(5), standard_form(5))
        swap = [0, 2, 1, 4, 3]
        S = [[z5.S[swap[i]][swap[j]] for j in range(5)] for i in range(5)]
        violation = validate_modular(ModularData(z5.ring, S, z5.T))
        assert violation.identity == "verlinde_character"
        assert violation.witness == (1, 1, 1)

    def test_require_modular_raises(self, z3):
        T = (ONE, ONE, z3.T[2])
        with pytest.raises(ValidationFailure) as info:
            require_modular(ModularData(z3.ring, z3.S, T, "bad"))
        assert info.value.violation.identity == "balancing"


class TestProducts:
    def test_ising_times_svect(self, ising, svect):
        M = deligne_product(ising, svect)
        assert M.rank == 6
        assert M.global_dim == 8
        assert not is_nondegenerate(M)
        assert muger_center(M).members == (0, 1)
        assert is_slightly_degenerate(M)

    def test_pointed_product_entries(self, z3, semion):
        M = deligne_product(z3, semion)
        for a, b, c, e in itertools.product(range(3), range(2), range(3), range(2)):
            assert M.S[a * 2 + b][c * 2 + e] == z3.S[a][c] * semion.S[b][e]
        assert M.T[5] == z3.T[2] * semion.T[1]
        assert M.exponent_tables is not None

    def test_ising_squared_has_tannakian_subcategory(self, ising):
        M = deligne_product(ising, ising)
        found = [s.members for s in tannakian_subcategories(M)]
        assert (0,) in found
        assert (0, 4) in found

    def test_centralizer_of_factor(self, ising, z3):
        M = deligne_product(ising, z3)
        factor = M.ring.subcategory([0, 3, 6])
        assert centralizer_of(M, factor).members == (0, 1, 2)
        assert not is_symmetric(M, factor)
        with pytest.raises(ValueError):
            classify_symmetric(M, factor)

    def test_restrict(self, ising, z3):
        M = deligne_product(ising, z3)
        part = restrict(M, M.ring.subcategory([0, 3, 6]))
        assert validate_modular(part) is None
        assert part.global_dim == 4

    def test_prime_decomposition_pointed(self, z3):
        M = deligne_product(z3, metric_group_category(FiniteAbelianGroup.cyclic(5), standard_form(5)))
        components = prime_decomposition(M)
        assert [c.fpdim for c in components] == [3, 5]

    def test_prime_decomposition_general(self, ising, z3):
        components = prime_decomposition(deligne_product(ising, z3))
        assert [c.fpdim for c in components] == [4, 3]
        assert components[0].members == (0, 3, 6)

    def test_prime_decomposition_needs_nondegenerate(self, svect, z3):
        with pytest.raises(FusionLabError):
            prime_decomposition(deligne_product(svect, z3))


class TestExactNondegeneracy:
    def test_ising_rows_are_orthogonal(self, ising):
        assert ising.orthogonality_defect is None
        assert deligne_product(ising, ising).orthogonality_defect is None

    def test_degenerate_product_has_a_defect(self, ising, svect):
        M = deligne_product(ising, svect)
        assert M.ring.permutation_table is None
        # the svect generator repeats the dimension row
        assert M.orthogonality_defect == (0, 1)
        assert is_nondegenerate(M) is False

    def test_slightly_degenerate_ising_square(self, ising, svect):
        M = deligne_product(deligne_product(ising, ising), svect)
        assert M.orthogonality_defect is not None
        assert not is_nondegenerate(M)


def _pointed_double(group, exponents):
    G = FiniteAbelianGroup.parse(group)
    return twisted_double(G, cocycle_from_exponents(G, exponents)).modular


NONDEGENERATE = {
    "ising": lambda: ising_category(1),
    "ising-z3": lambda: deligne_product(ising_category(1), metric_group_category(
        FiniteAbelianGroup.cyclic(3), standard_form(3))),
    "ising-ising3": lambda: deligne_product(ising_category(1), ising_category(3)),
    "z5": lambda: metric_group_category(FiniteAbelianGroup.cyclic(5), standard_form(5, "nonresidue")),
    "double-semion": lambda: _pointed_double("Z2", {"I": 1}),
    "toric-code": lambda: _pointed_double("Z2", {}),
}


class TestDoubleCentralizer:
    @pytest.mark.parametrize("build", list(NONDEGENERATE.values()), ids=list(NONDEGENERATE))
    def test_every_subcategory(self, build):
        M = build()
        assert is_nondegenerate(M)
        total = fpdim_category(M.ring.whole)
        for sub in enumerate_subcategories(M.ring):
            C = centralizer_of(M, sub)
            assert centralizer_of(M, C) == sub, sub.members
            assert sub.fpdim * C.fpdim == total, sub.members
