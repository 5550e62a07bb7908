import pytest

from brstkit import hs, liealg
from brstkit.cohom import span_contains
from brstkit.deriv import build
from brstkit.gca import GeneratorTable

ISO3 = liealg.iso3()
ISO3_SPLIT = liealg.default_split(ISO3)


@pytest.mark.parametrize("name, degrees", [("so3", [3]), ("so21", [3]), ("so21xso21", [3, 3])])
def test_primitive_degrees(name, degrees):
    prim = hs.primitives(liealg.builtin(name))
    assert prim.degrees == degrees


def test_so3_primitive_is_the_ghost_cube():
    prim = hs.primitives(liealg.so3())
    assert [str(p) for p in prim.primitives] == ["C1 C2 C3"]
    assert prim.poincare(3) == [1, 0, 0, 1]


def test_two_primitives_are_independent_in_so21xso21():
    prim = hs.primitives(liealg.so21xso21())
    assert prim.poincare(6) == [1, 0, 0, 2, 0, 0, 1]


def test_non_semisimple_algebra_has_no_primitive_set():
    with pytest.raises(hs.NotSemisimple):
        hs.primitives(liealg.abelian(2))


def test_relative_part_with_trivial_coefficients():
    rel = hs.relative_cohomology(ISO3, ISO3_SPLIT, "trivial", 0)
    assert [rel[(g, 0)].dimension for g in range(4)] == [1, 0, 0, 1]
    assert [str(r) for r in rel[(3, 0)].representatives] == ["C1 C2 C3"]


def test_relative_part_at_low_curvature_degree():
    rel = hs.relative_cohomology(ISO3, ISO3_SPLIT, "symmetric", 2)
    assert hs.table_one(rel) == [[1, 0, 2], [0, 1, 0], [0, 1, 0], [1, 0, 2]]
    t = rel[(0, 2)].representatives[0].table
    # gh_C = 0: polynomials in f1 and f3 only
    for text in ("G1^2 + G2^2 + G3^2", "F1 G1 + F2 G2 + F3 G3"):
        assert any(rel[(0, 2)].class_of(t.parse(text)))
    f2 = t.parse("F1^2 + F2^2 + F3^2")
    assert span_contains(rel[(0, 2)].representatives, f2) is None
    # gh_C = 2: the FC^2 family starts at curvature degree one
    assert str(rel[(2, 1)].representatives[0]) == "C1 C2 F3 - C1 C3 F2 + C2 C3 F1"
    assert rel[(2, 2)].dimension == 0


def test_assembly_with_trivial_coefficients():
    dec = hs.decompose(ISO3, ISO3_SPLIT, "trivial", 0)
    assert dec.ghost_dims(6) == [1, 0, 0, 2, 0, 0, 1]


def test_trivial_ideal_reduces_to_the_semisimple_part():
    so3 = liealg.so3()
    dec = hs.decompose(so3, liealg.default_split(so3), "trivial", 0)
    assert dec.ghost_dims(3) == [1, 0, 0, 1]


@pytest.mark.parametrize("name, module, degree", [("iso3", "trivial", 0), ("so3+abelian1", "trivial", 0), ("so3+abelian1", "symmetric", 2), ("iso21", "symmetric", 2)])
def test_crosscheck_small_cases(name, module, degree):
    alg = liealg.builtin(name)
    report = hs.crosscheck(alg, liealg.default_split(alg), module, degree)
    assert report.ok, report.mismatches


def test_assembled_elements_are_cocycles():
    dec = hs.decompose(ISO3, ISO3_SPLIT, "symmetric", 2)
    gs = build("gammaS", dec.primitive_part.table)
    for elems in dec.assembled.values():
        for x in elems:
            assert gs.apply(x).is_zero()


def test_transfer_between_tables_keeps_labels():
    a = GeneratorTable.build(ISO3, "split_semidirect", ISO3_SPLIT)
    b = GeneratorTable.build(ISO3, "split_full", ISO3_SPLIT)
    x = a.parse("1/2 * eta1 C2 G3 - F1^2")
    y = hs.transfer(x, b)
    assert y.table is b
    assert str(y) == str(x)
    assert hs.transfer(y, a) == x
