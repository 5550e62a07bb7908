from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from brstkit import linalg

small = st.integers(min_value=-4, max_value=4)


def matrices(max_rows=6, max_cols=6):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def as_sparse_rows(m):
    return [{j: Fraction(v) for j, v in enumerate(row) if v} for row in m]


def as_columns(m):
    cols = len(m[0])
    return [{i: Fraction(m[i][j]) for i in range(len(m)) if m[i][j]} for j in range(cols)]


@given(matrices())
def test_rank_agrees_with_dense_elimination(m):
    assert linalg.rank(as_sparse_rows(m)) == oracles.dense_rank(m)


@given(matrices())
def test_nullspace_is_kernel_with_rank_nullity(m):
    cols = as_columns(m)
    kernel = linalg.nullspace(cols)
    assert len(kernel) == len(cols) - oracles.dense_rank(m)
    for v in kernel:
        image = [sum(Fraction(m[i][j]) * c for j, c in v.items()) for i in range(len(m))]
        assert not any(image)


@given(matrices(), st.lists(small, min_size=6, max_size=6))
def test_solve_returns_a_solution_exactly_when_consistent(m, coeffs):
    cols = as_columns(m)
    reachable = {}
    for j, c in enumerate(coeffs[: len(cols)]):
        for i, v in cols[j].items():
            reachable[i] = reachable.get(i, 0) + c * v
    sol = linalg.solve(cols, reachable)
    assert sol is not None
    got = {}
    for j, c in sol.items():
        for i, v in cols[j].items():
            got[i] = got.get(i, 0) + c * v
    assert {i: v for i, v in got.items() if v} == {i: v for i, v in reachable.items() if v}


def test_solve_detects_inconsistency():
    cols = [{0: Fraction(1)}, {0: Fraction(2)}]
    assert linalg.solve(cols, {1: Fraction(1)}) is None


@settings(max_examples=60)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_determinant_matches_dense(m):
    assert linalg.determinant(m) == oracles.dense_determinant(m)


def test_echelon_membership_and_reduced_rows():
    ech = linalg.echelon([{0: 1, 1: 2}, {1: 1, 2: 1}])
    assert ech.rank == 2
    assert ech.contains({0: 1, 1: 3, 2: 1})
    assert not ech.contains({2: 1})
    pivots = [p for p, _ in ech.reduced_rows()]
    assert pivots == sorted(pivots)


def test_integer_row_clears_denominators():
    row = linalg.integer_row({0: Fraction(1, 2), 3: Fraction(2, 3)})
    assert all(isinstance(v, int) for v in row.values())
    assert row[0] * 4 == row[3] * 3


@given(matrices(5, 5), st.lists(small, min_size=5, max_size=5))
def test_tracked_span_expresses_combinations(m, coeffs):
    rows = as_sparse_rows(m)
    span = linalg.TrackedSpan(rows)
    target = {}
    for k, c in enumerate(coeffs[: len(rows)]):
        for j, v in rows[k].items():
            target[j] = target.get(j, 0) + c * v
    combo = span.express(target)
    assert combo is not None
    back = {}
    for k, c in combo.items():
        for j, v in rows[k].items():
            back[j] = back.get(j, 0) + c * v
    assert {j: v for j, v in back.items() if v} == {j: v for j, v in target.items() if v}
