import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from brstkit import liealg
from brstkit.liealg import AlgebraParseError, LieAlgebra, SemidirectSplit, SplitError

BUILTIN_NAMES = ["so3", "so21", "iso3", "iso21", "so21xso21", "abelian3", "so3+abelian1"]


def dense_constants(alg):
    return {(c, a, b): alg.f(c, a, b) for a in range(alg.dim) for b in range(alg.dim) for c in range(alg.dim) if alg.f(c, a, b)}


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_satisfy_jacobi_by_brute_force(name):
    alg = liealg.builtin(name)
    assert liealg.validate(alg) == []
    assert oracles.jacobi_violations(dense_constants(alg), alg.dim) == []


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_killing_form_matches_trace_of_adjoints(name):
    alg = liealg.builtin(name)
    expected = oracles.killing_matrix(dense_constants(alg), alg.dim)
    assert [list(r) for r in liealg.killing_form(alg).matrix] == expected


def test_so3_killing_is_minus_two_identity():
    kf = liealg.killing_form(liealg.so3())
    assert kf.matrix == tuple(tuple(Fraction(-2 if i == j else 0) for j in range(3)) for i in range(3))
    assert kf.rank() == 3


def test_iso21_killing_is_degenerate_with_only_rotation_block():
    kf = liealg.killing_form(liealg.iso21())
    assert kf.rank() == 3
    assert all(kf.matrix[i][j] == 0 for i in range(6) for j in range(6) if i >= 3 or j >= 3)


def test_abelian_killing_is_zero():
    assert not any(any(r) for r in liealg.killing_form(liealg.abelian(4)).matrix)


def perturbed_so3(changes):
    st_ = {k: dict(v) for k, v in liealg.so3().structure.items()}
    for (a, b, c), v in changes.items():
        st_.setdefault((a, b), {})[c] = Fraction(v)
    return LieAlgebra("so3-perturbed", ("J1", "J2", "J3"), st_)


def test_rescaling_a_single_so3_constant_keeps_jacobi():
    # [J2,J3] = 2 J1 is still a Lie algebra (rescale J1), so nothing is reported
    alg = perturbed_so3({(1, 2, 0): 2})
    assert liealg.validate(alg) == []
    assert oracles.jacobi_violations(dense_constants(alg), 3) == []


def test_genuine_perturbation_is_reported_with_components():
    alg = perturbed_so3({(1, 2, 1): 1})  # [J2,J3] = J1 + J2
    report = liealg.validate(alg)
    assert report
    assert not liealg.is_valid(alg)
    brute = oracles.jacobi_violations(dense_constants(alg), 3)
    reported = {v.indices for v in report if v.kind == "jacobi"}
    assert reported
    for a, b, c, e in reported:
        assert (a, b, c, e) in brute
        assert liealg.jacobi_component(alg, a, b, c, e) == v_value(report, (a, b, c, e))


def v_value(report, idx):
    return next(v.value for v in report if v.indices == idx)


def test_diagonal_entry_is_reported_as_antisymmetry_violation():
    alg = LieAlgebra("bad", ("X", "Y"), {(0, 0): {1: 1}})
    kinds = {v.kind for v in liealg.validate(alg)}
    assert "antisymmetry" in kinds


def test_semidirect_certificates():
    cert = liealg.verify_semidirect(liealg.iso3(), SemidirectSplit((0, 1, 2), (3, 4, 5), True))
    assert cert.ideal_abelian
    so3so3 = liealg.builtin("so3+so3")
    cert = liealg.verify_semidirect(so3so3, SemidirectSplit((0, 1, 2), (3, 4, 5)))
    assert not cert.ideal_abelian
    with pytest.raises(SplitError):
        liealg.verify_semidirect(liealg.iso3(), SemidirectSplit((3, 4, 5), (0, 1, 2)))
    with pytest.raises(SplitError):
        liealg.verify_semidirect(so3so3, SemidirectSplit((0, 1, 2), (3, 4, 5), True))
    with pytest.raises(SplitError):
        liealg.verify_semidirect(liealg.iso3(), SemidirectSplit((0, 1), (3, 4, 5)))


def test_default_splits():
    assert liealg.default_split(liealg.iso21()) == SemidirectSplit((0, 1, 2), (3, 4, 5), True)
    sp = liealg.default_split(liealg.builtin("so3+abelian1"))
    assert sp.subalg_indices == (0, 1, 2) and sp.ideal_indices == (3,)
    assert liealg.default_split(liealg.so21xso21()).ideal_indices == ()


def test_invariant_metrics():
    alg = liealg.iso21()
    assert liealg.check_invariant_metric(alg, liealg.omega0_iso21()) == (True, None)
    ok, witness = liealg.check_invariant_metric(alg, liealg.BilinearForm(tuple(tuple(Fraction(int(i == j)) for j in range(6)) for i in range(6))))
    assert not ok and len(witness) == 3
    for name in BUILTIN_NAMES:
        a = liealg.builtin(name)
        assert liealg.check_invariant_metric(a, liealg.killing_form(a))[0]
    with pytest.raises(ValueError):
        liealg.check_invariant_metric(alg, liealg.killing_form(liealg.so3()))


def test_deformation_at_zero_is_iso21():
    alg, omega = liealg.deform_iso21(0, 0)
    assert alg.structure == liealg.iso21().structure
    assert omega == liealg.omega0_iso21()


def test_deformation_at_one_is_semisimple():
    alg, _ = liealg.deform_iso21(1, 0)
    assert liealg.is_valid(alg)
    assert liealg.killing_form(alg).rank() == 6


@given(st.fractions(min_value=-3, max_value=3, max_denominator=4), st.fractions(min_value=-3, max_value=3, max_denominator=4))
def test_deformed_metric_is_invariant_and_determinant_matches_oracle(lam, mu):
    alg, omega = liealg.deform_iso21(lam, mu)
    assert liealg.is_valid(alg)
    assert liealg.check_invariant_metric(alg, omega)[0]
    assert omega.determinant() == oracles.dense_determinant([list(r) for r in omega.matrix])
    # closed form of the determinant over the three 2x2 blocks
    assert omega.determinant() == (lam * mu * mu - 1) ** 3


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_json_round_trip(name):
    alg = liealg.builtin(name)
    back = liealg.loads(json.dumps(liealg.to_json(alg)))
    assert back.structure == alg.structure
    assert back.basis == alg.basis
    assert back.canonical_json() == alg.canonical_json()


@pytest.mark.parametrize(
    "text, where",
    [
        ('{"name": "x", "basis": ["a", "b"], "structure": [[0, 1, 1, "1/2"], [1, 0, 1, "1"]]}', "structure[1]"),
        ('{"name": "x", "basis": ["a", "b"], "structure": [[0, 1, 1, "1"], [0, 1, 1, "2"]]}', "structure[1]"),
        ('{"name": "x", "basis": ["a", "b"], "structure": [[0, 5, 1, "1"]]}', "structure[0][1]"),
        ('{"name": "x", "basis": ["a", "b"], "structure": [[0, 1, 1, "1/0"]]}', "structure[0][3]"),
        ('{"name": "x", "basis": ["a", "a"], "structure": []}', "basis"),
        ('{"name": "x", "basis": ["a"]}', "structure"),
        ('{"name": "x", "basis": ["a"], "structure": [}', "line 1 column 45"),
    ],
)
def test_parse_errors_carry_a_location(text, where):
    with pytest.raises(AlgebraParseError) as info:
        liealg.loads(text)
    assert info.value.where == where


def test_reversed_entry_is_negated():
    alg = liealg.loads('{"name": "x", "basis": ["a", "b"], "structure": [[1, 0, 1, "3/2"]]}')
    assert alg.f(1, 0, 1) == Fraction(-3, 2)
    assert alg.f(1, 1, 0) == Fraction(3, 2)


def test_unknown_builtin():
    with pytest.raises(KeyError):
        liealg.builtin("sl7")


def test_bilinear_form_rejects_asymmetric_matrix():
    with pytest.raises(ValueError):
        liealg.BilinearForm(((Fraction(0), Fraction(1)), (Fraction(0), Fraction(0))))
