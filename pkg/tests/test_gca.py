from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from brstkit import liealg
from brstkit.gca import (
    Element,
    GeneratorTable,
    SliceSpec,
    SliceTooLarge,
    UnboundedSlice,
    basis_slice,
    grading_weight,
    normalize,
    parse_element,
)

SO3_FC = GeneratorTable.build(liealg.so3(), "small_FC")
ISO3_SPLIT = GeneratorTable.build(liealg.iso3(), "split_semidirect", liealg.default_split(liealg.iso3()))
ISO21_FULL = GeneratorTable.build(liealg.iso21(), "split_full", liealg.default_split(liealg.iso21()))


def g(table, label):
    return table.gen(label)


def test_odd_square_vanishes():
    c1 = g(SO3_FC, "C1")
    assert (c1 * c1).is_zero()


def test_odd_generators_anticommute():
    c1, c2 = g(SO3_FC, "C1"), g(SO3_FC, "C2")
    assert c1 * c2 == -(c2 * c1)


def test_product_is_bilinear():
    f1, f2, c1, c2 = (g(SO3_FC, x) for x in ("F1", "F2", "C1", "C2"))
    assert (f1 + f2) * (c1 * c2) == f1 * c1 * c2 + f2 * c1 * c2


def test_normalize_examples():
    c1, c2, f1 = (SO3_FC.id_of(x) for x in ("C1", "C2", "F1"))
    assert normalize(SO3_FC, [c2, c1]) == ((c1, c2), Fraction(-1))
    assert normalize(SO3_FC, [f1, c1]) == (tuple(sorted((c1, f1))), Fraction(1))
    assert normalize(SO3_FC, [c1, c2, c1]) is None


def test_slice_examples():
    so3_ghosts = GeneratorTable.build(liealg.so3(), "ce_ghost")
    assert basis_slice(so3_ghosts, {"ghost": 3}) == [(0, 1, 2)]
    assert len(basis_slice(ISO3_SPLIT, {"ghost": 0, "curvature": 2})) == 21
    iso_ghosts = GeneratorTable.build(liealg.iso3(), "ce_ghost")
    assert len(basis_slice(iso_ghosts, {"ghost": 1, "form": 0})) == 6


def test_slice_guards():
    with pytest.raises(UnboundedSlice):
        basis_slice(ISO21_FULL, {"ghost": 1})
    with pytest.raises(SliceTooLarge):
        basis_slice(ISO3_SPLIT, {"ghost": 0, "curvature": 4}, max_size=50)
    assert basis_slice(ISO3_SPLIT, {"ghost": -1, "curvature": 0}) == []


def test_slice_spec_round_trip():
    spec = SliceSpec.of(ghost__J=1, curvature=2)
    assert spec.as_dict() == {"curvature": 2, "ghost:J": 1}
    assert spec.shifted({"ghost:J": -2}).is_empty()


def test_sector_weights():
    eta = ISO21_FULL.generators[ISO21_FULL.id_of("eta1")]
    assert grading_weight(eta, "ghost:K") == 1
    assert grading_weight(eta, "ghost:J") == 0
    assert grading_weight(eta, "ghost:*") == 1
    with pytest.raises(ValueError):
        grading_weight(eta, "spin")


def test_parse_examples():
    x = parse_element(SO3_FC, "1/2 * C1 F2^2 - C3")
    assert str(x) == "1/2 * C1 F2^2 - C3"
    assert parse_element(SO3_FC, "C2 C1") == -parse_element(SO3_FC, "C1 C2")
    with pytest.raises(ValueError):
        parse_element(SO3_FC, "C1 +")
    with pytest.raises(KeyError):
        parse_element(SO3_FC, "Q7")


# ---------------------------------------------------------------- properties


def elements(table, max_terms=3, max_len=3):
    n = len(table)
    mono = st.lists(st.integers(0, n - 1), max_size=max_len)
    coef = st.fractions(min_value=-3, max_value=3, max_denominator=3)
    return st.lists(st.tuples(mono, coef), max_size=max_terms).map(
        lambda ts: sum((Element.from_monomial(table, m, c) for m, c in ts), table.zero())
    )


def homogeneous(table, max_len=3):
    n = len(table)
    return st.tuples(st.lists(st.integers(0, n - 1), max_size=max_len), st.fractions(min_value=-3, max_value=3, max_denominator=3)).map(
        lambda mc: Element.from_monomial(table, *mc)
    )


TABLES = [SO3_FC, ISO21_FULL]


@pytest.mark.parametrize("table", TABLES, ids=["so3_FC", "iso21_full"])
@given(data=st.data())
def test_product_is_associative(table, data):
    x, y, z = (data.draw(elements(table)) for _ in range(3))
    assert (x * y) * z == x * (y * z)


@pytest.mark.parametrize("table", TABLES, ids=["so3_FC", "iso21_full"])
@given(data=st.data())
def test_graded_commutativity(table, data):
    x, y = data.draw(homogeneous(table)), data.draw(homogeneous(table))
    if x.is_zero() or y.is_zero():
        return
    sign = -1 if (x.parity() and y.parity()) else 1
    assert x * y == (y * x).scale(sign)


@pytest.mark.parametrize("table", TABLES, ids=["so3_FC", "iso21_full"])
@given(data=st.data())
def test_normalize_matches_bubble_sort(table, data):
    factors = data.draw(st.lists(st.integers(0, len(table) - 1), max_size=6))
    got = normalize(table, factors)
    mono, sign = oracles.sort_with_sign(factors, list(table.odd))
    if sign == 0:
        assert got is None
    else:
        assert got == (mono, Fraction(sign))
        # normalising a canonical monomial changes nothing
        assert normalize(table, list(got[0])) == (got[0], Fraction(1))


@pytest.mark.parametrize("table", TABLES, ids=["so3_FC", "iso21_full"])
@given(data=st.data())
def test_print_parse_round_trip(table, data):
    x = data.draw(elements(table))
    assert parse_element(table, str(x)) == x


def oracle_weights(table):
    return [{"form": gen.form_degree, "ghost": gen.ghost_number, "curvature": int(gen.kind == "curvature")} for gen in table.generators]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.integers(0, 2))
def test_slice_enumeration_matches_brute_force(ghost, curv):
    table = ISO3_SPLIT
    got = basis_slice(table, {"ghost": ghost, "curvature": curv})
    want = oracles.enumerate_slice(oracle_weights(table), list(table.odd), {"ghost": ghost, "curvature": curv}, ghost + curv)
    assert got == sorted(want)
