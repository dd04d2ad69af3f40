import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fusionlab.core.abelian import (
    Cocycle2,
    Cocycle3,
    FiniteAbelianGroup,
    QuadraticForm,
    automorphisms_preserving_form,
    cocycle_from_exponents,
    cocycle_generator,
    format_cocycle,
    is_coboundary,
    least_nonresidue,
    parse_cocycle,
    radical_of_pairing,
    slant_dx,
    standard_form,
    trivialize_symmetric,
)
from fusionlab.core.cyclo import root_of_unity
from fusionlab.core.errors import LimitExceeded, ShapeMismatch, SpecError, ValidationFailure

SMALL_GROUPS = ["Z2", "Z3", "Z4", "Z6", "Z2xZ2", "Z2xZ4", "Z3xZ3", "Z9"]


class TestGroups:
    def test_parse_normalises_to_invariant_factors(self):
        assert FiniteAbelianGroup.parse("Z3xZ3").invariant_factors == (3, 3)
        assert FiniteAbelianGroup.parse("Z2xZ3") == FiniteAbelianGroup.cyclic(6)
        assert FiniteAbelianGroup.parse("Z4xZ2").invariant_factors == (2, 4)
        assert FiniteAbelianGroup.parse("1").order == 1

    def test_str(self):
        assert str(FiniteAbelianGroup.parse("Z3xZ3")) == "Z3xZ3"
        assert str(FiniteAbelianGroup.parse("Z1")) == "1"

    def test_bad_input(self):
        with pytest.raises(SpecError):
            FiniteAbelianGroup.parse("S3")
        with pytest.raises(SpecError):
            FiniteAbelianGroup((4, 2))

    def test_from_cyclic_factors(self):
        assert FiniteAbelianGroup.from_cyclic_factors([2, 4, 6]).invariant_factors == (2, 2, 12)

    def test_elements_respect_limit(self):
        with pytest.raises(LimitExceeded):
            FiniteAbelianGroup.cyclic(10).elements(limit=5)
        assert len(FiniteAbelianGroup.cyclic(10).elements(limit=None)) == 10

    @pytest.mark.parametrize("text", SMALL_GROUPS)
    def test_from_element_orders(self, text):
        G = FiniteAbelianGroup.parse(text)
        orders = [G.element_order(x) for x in G.elements()]
        assert FiniteAbelianGroup.from_element_orders(orders) == G

    @pytest.mark.parametrize("text", SMALL_GROUPS)
    def test_tables(self, text):
        G = FiniteAbelianGroup.parse(text)
        A = G.add_table
        n = G.order
        for i in range(n):
            assert A[i, G.neg_table[i]] == 0
        x, y = G.element(n - 1), G.element(n // 2)
        assert G.element(int(A[G.index(x), G.index(y)])) == G.add(x, y)

    def test_character_table_is_orthogonal(self):
        G = FiniteAbelianGroup.parse("Z2xZ4")
        chars = G.character_table()
        L = G.exponent
        values = np.exp(2j * np.pi * chars / L)
        assert np.allclose(values @ values.conj().T, G.order * np.eye(G.order))

    @pytest.mark.parametrize("text,count", [("Z5", 4), ("Z8", 4), ("Z2xZ2", 6), ("Z3xZ3", 48)])
    def test_automorphism_count(self, text, count):
        assert len(FiniteAbelianGroup.parse(text).automorphisms()) == count


class TestForms:
    def test_z2_values(self):
        z2 = FiniteAbelianGroup.cyclic(2)
        expected = {0: 1, 1: root_of_unity(4), 2: -1, 3: root_of_unity(4, 3)}
        for a, value in expected.items():
            assert QuadraticForm.diagonal(z2, [a]).value((1,)) == value

    def test_nondegeneracy(self):
        z2 = FiniteAbelianGroup.cyclic(2)
        assert QuadraticForm.diagonal(z2, [1]).is_nondegenerate()
        assert not QuadraticForm.diagonal(z2, [2]).is_nondegenerate()
        assert not QuadraticForm.diagonal(z2, [0]).is_nondegenerate()
        assert standard_form(5).is_nondegenerate()

    def test_invalid_tables_are_rejected(self):
        z3 = FiniteAbelianGroup.cyclic(3)
        with pytest.raises(ValidationFailure) as info:
            QuadraticForm(z3, 3, [0, 1, 2])
        assert info.value.violation.identity == "form_even"
        with pytest.raises(ShapeMismatch):
            QuadraticForm.diagonal(z3, [1, 1])

    def test_from_values(self):
        z3 = FiniteAbelianGroup.cyclic(3)
        phi = QuadraticForm.from_values(z3, [root_of_unity(3, 0), root_of_unity(3), root_of_unity(3)])
        assert phi == standard_form(3)

    def test_standard_form_needs_odd_prime(self):
        for p in (2, 4, 9):
            with pytest.raises(SpecError):
                standard_form(p)

    def test_nonresidue_variant_differs(self):
        assert least_nonresidue(7) == 3
        assert standard_form(7, "nonresidue") != standard_form(7, "residue")

    @pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
    @pytest.mark.parametrize("variant", ["residue", "nonresidue"])
    def test_form_automorphisms_are_plus_minus_one(self, p, variant):
        assert len(automorphisms_preserving_form(standard_form(p, variant))) == 2


class TestCocycles:
    @pytest.mark.parametrize("text,kind", [
        ("Z2", "I"), ("Z4", "I"), ("Z9", "I"),
        ("Z2xZ2", "I1"), ("Z2xZ2", "I2"), ("Z2xZ2", "II"),
        ("Z3xZ3", "I1"), ("Z3xZ3", "II"),
    ])
    def test_generators_are_cocycles(self, text, kind):
        omega = cocycle_generator(FiniteAbelianGroup.parse(text), kind)
        assert omega.check() is None

    def test_strict_bracket_is_not_a_cocycle(self):
        G = FiniteAbelianGroup.cyclic(4)
        i = np.arange(4)
        carry = (i[:, None] + i[None, :] + 3) // 4 - 1
        strict = Cocycle3(G, 4, i[:, None, None] * carry[None, :, :])
        assert strict.check() is not None

    def test_kind_needs_the_right_group(self):
        with pytest.raises(ShapeMismatch):
            cocycle_generator(FiniteAbelianGroup.parse("Z2xZ2"), "I")
        with pytest.raises(ShapeMismatch):
            cocycle_generator(FiniteAbelianGroup.parse("Z6"), "II")
        with pytest.raises(SpecError):
            cocycle_generator(FiniteAbelianGroup.parse("Z6"), "III")

    def test_parse_and_format(self):
        assert parse_cocycle("I1:1,I2:0,II:2") == {"I1": 1, "I2": 0, "II": 2}
        assert format_cocycle({"I1": 1, "I2": 0, "II": 2}) == "I1:1,II:2"
        assert parse_cocycle("trivial") == {}
        assert format_cocycle({}) == "trivial"

    @pytest.mark.parametrize("text", ["I:1,II:1", "X:1", "I1:1,I1:2", "II"])
    def test_parse_rejects(self, text):
        with pytest.raises(SpecError):
            parse_cocycle(text)

    def test_product_label(self):
        omega = cocycle_from_exponents(FiniteAbelianGroup.parse("Z3xZ3"), {"I1": 1, "I2": 0, "II": 2})
        assert omega.label == "I1:1,II:2"
        assert cocycle_from_exponents(FiniteAbelianGroup.cyclic(3), {}).label == "trivial"

    @given(st.sampled_from(["Z2xZ2", "Z3xZ3"]), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
    def test_slants_of_generator_products_are_symmetric(self, text, a, b, c):
        G = FiniteAbelianGroup.parse(text)
        omega = cocycle_from_exponents(G, {"I1": a, "I2": b, "II": c})
        for x in G.elements():
            beta = slant_dx(omega, x)
            assert beta.check() is None
            assert beta.is_symmetric()
            assert is_coboundary(beta)
            assert len(radical_of_pairing(beta)) == G.order

    @pytest.mark.parametrize("text,exponents", [
        ("Z4", {"I": 1}), ("Z9", {"I": 2}), ("Z2xZ2", {"I1": 1, "II": 1}), ("Z3xZ3", {"II": 1}),
    ])
    def test_trivialize_symmetric(self, text, exponents):
        G = FiniteAbelianGroup.parse(text)
        omega = cocycle_from_exponents(G, exponents)
        A = G.add_table
        for x in G.elements():
            beta = slant_dx(omega, x)
            M, eps = trivialize_symmetric(beta)
            assert M == beta.order * G.exponent
            coboundary = (eps[:, None] + eps[None, :] - eps[A]) % M
            assert np.array_equal(coboundary, beta.table * (M // beta.order) % M)

    def test_alternating_cocycle_is_not_trivialized(self):
        G = FiniteAbelianGroup.parse("Z2xZ2")
        coords = np.array(G.elements())
        beta = Cocycle2(G, 2, np.outer(coords[:, 0], coords[:, 1]))
        assert beta.check() is None
        assert not is_coboundary(beta)
        assert radical_of_pairing(beta) == [G.zero]
        with pytest.raises(ValueError):
            trivialize_symmetric(beta)
