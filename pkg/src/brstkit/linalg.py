"""Exact sparse linear algebra over the rationals.

Vectors are dicts ``{column: value}`` with no stored zeros.  The forward
pass works on integer rows (each row is scaled to clear denominators and
kept primitive by content removal), so no fractions appear until the
back-substitution that produces reduced echelon rows, kernels and
solutions.  Pivots are always the first nonzero column of a row, which
makes every result a deterministic function of the input order.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

Vector = Mapping[int, Fraction]


def integer_row(row: Mapping[int, Fraction | int]) -> dict[int, int]:
    """Scale a rational row to a primitive integer row (same line)."""
    items = [(c, Fraction(v)) for c, v in row.items() if v]
    if not items:
        return {}
    den = 1
    for _, v in items:
        den = lcm(den, v.denominator)
    out = {c: int(v * den) for c, v in items}
    return _primitive(out)


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    if g > 1:
        row = {c: v // g for c, v in row.items()}
    lead = row[min(row)]
    if lead < 0:
        row = {c: -v for c, v in row.items()}
    return row


def _cross(r: dict[int, int], p: dict[int, int], col: int) -> dict[int, int]:
    """Fraction-free elimination of ``col`` from ``r`` using pivot row ``p``."""
    a = p[col]
    b = r[col]
    g = gcd(a, b)
    a //= g
    b //= g
    out = {c: a * v for c, v in r.items()}
    for c, v in p.items():
        w = out.get(c, 0) - b * v
        if w:
            out[c] = w
        else:
            out.pop(c, None)
    return _primitive(out) if out else out


class RowEchelon:
    """Incremental fraction-free row echelon form.

    Rows are reduced against the current pivots on insertion; a row that
    survives becomes a new pivot row keyed by its leading column.
    """

    def __init__(self) -> None:
        self.pivots: dict[int, dict[int, int]] = {}

    def __len__(self) -> int:
        return len(self.pivots)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, Fraction | int]) -> dict[int, int]:
        r = integer_row(row)
        pivots = self.pivots
        while r:
            c = min(r)
            p = pivots.get(c)
            if p is None:
                return r
            r = _cross(r, p, c)
        return r

    def add(self, row: Mapping[int, Fraction | int]) -> bool:
        r = self.reduce(row)
        if not r:
            return False
        self.pivots[min(r)] = r
        return True

    def contains(self, row: Mapping[int, Fraction | int]) -> bool:
        return not self.reduce(row)

    def reduced_rows(self) -> list[tuple[int, dict[int, Fraction]]]:
        """Reduced row echelon form by rational back-substitution.

        Returns ``(pivot, row)`` pairs sorted by pivot; every row has a 1
        at its pivot and zeros at every other pivot column.
        """
        order = sorted(self.pivots, reverse=True)
        done: dict[int, dict[int, Fraction]] = {}
        for c in order:
            p = self.pivots[c]
            lead = p[c]
            row = {k: Fraction(v, lead) for k, v in p.items()}
            for q in sorted(k for k in row if k != c and k in done):
                f = row.get(q)
                if not f:
                    continue
                for k, v in done[q].items():
                    w = row.get(k, 0) - f * v
                    if w:
                        row[k] = w
                    else:
                        row.pop(k, None)
            done[c] = row
        return [(c, done[c]) for c in sorted(done)]


def echelon(rows: Iterable[Mapping[int, Fraction | int]]) -> RowEchelon:
    e = RowEchelon()
    for r in rows:
        e.add(r)
    return e


def rank(rows: Iterable[Mapping[int, Fraction | int]]) -> int:
    return echelon(rows).rank


def transpose(columns: Sequence[Mapping[int, Fraction]]) -> dict[int, dict[int, Fraction]]:
    rows: dict[int, dict[int, Fraction]] = {}
    for j, col in enumerate(columns):
        for i, v in col.items():
            if v:
                rows.setdefault(i, {})[j] = v
    return rows


def nullspace(columns: Sequence[Mapping[int, Fraction]]) -> list[dict[int, Fraction]]:
    """Basis of ``{x : sum_j x_j columns[j] = 0}``.

    One vector per free column, in increasing column order, with a 1 at
    the free column (the standard RREF kernel basis).
    """
    n = len(columns)
    rows = transpose(columns)
    e = echelon(rows[i] for i in sorted(rows))
    reduced = e.reduced_rows()
    pivot_cols = {c for c, _ in reduced}
    basis = []
    for free in range(n):
        if free in pivot_cols:
            continue
        vec = {free: Fraction(1)}
        for c, row in reduced:
            v = row.get(free)
            if v:
                vec[c] = -v
        basis.append(vec)
    return basis


def solve(columns: Sequence[Mapping[int, Fraction]], target: Mapping[int, Fraction]) -> dict[int, Fraction] | None:
    """Some ``x`` with ``sum_j x_j columns[j] = target``, or ``None``.

    The returned solution sets every free variable to zero.
    """
    n = len(columns)
    rows = transpose(columns)
    for i, v in target.items():
        if v:
            rows.setdefault(i, {})[n] = Fraction(v)
    e = echelon(rows[i] for i in sorted(rows))
    reduced = e.reduced_rows()
    x: dict[int, Fraction] = {}
    for c, row in reduced:
        if c == n:
            return None
        v = row.get(n)
        if v:
            x[c] = v
    return x


def determinant(matrix: Sequence[Sequence[Fraction | int]]) -> Fraction:
    """Bareiss determinant of a square rational matrix."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    den = 1
    for row in matrix:
        for v in row:
            den = lcm(den, Fraction(v).denominator)
    a = [[int(Fraction(v) * den) for v in row] for row in matrix]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return Fraction(sign * a[n - 1][n - 1], den**n)


def dense_rank(matrix: Sequence[Sequence[Fraction | int]]) -> int:
    return rank({j: v for j, v in enumerate(row) if v} for row in matrix)


class TrackedSpan:
    """Span of a list of rational vectors with membership witnesses.

    ``express(v)`` returns coefficients ``c`` with ``sum c_i gens[i] = v``
    or ``None`` when ``v`` is outside the span.
    """

    def __init__(self, gens: Sequence[Mapping[int, Fraction]] = ()) -> None:
        self._rows: dict[int, tuple[dict[int, Fraction], dict[int, Fraction]]] = {}
        self.size = 0
        for g in gens:
            self.add(g)

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _reduce(self, v: Mapping[int, Fraction]) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
        r = {c: Fraction(x) for c, x in v.items() if x}
        combo: dict[int, Fraction] = {}
        rows = self._rows
        while r:
            hit = None
            for c in sorted(r):
                if c in rows:
                    hit = c
                    break
            if hit is None:
                break
            f = r[hit]
            prow, pcombo = rows[hit]
            for k, x in prow.items():
                w = r.get(k, 0) - f * x
                if w:
                    r[k] = w
                else:
                    r.pop(k, None)
            for k, x in pcombo.items():
                w = combo.get(k, 0) + f * x
                if w:
                    combo[k] = w
                else:
                    combo.pop(k, None)
        return r, combo

    def add(self, v: Mapping[int, Fraction]) -> bool:
        idx = self.size
        self.size += 1
        r, combo = self._reduce(v)
        if not r:
            return False
        c = min(r)
        lead = r[c]
        # r = v - sum combo_k gens_k, so the pivot row stands for that combination
        row = {k: x / lead for k, x in r.items()}
        comb = {k: -x / lead for k, x in combo.items()}
        comb[idx] = comb.get(idx, 0) + 1 / lead
        self._rows[c] = (row, {k: x for k, x in comb.items() if x})
        return True

    def express(self, v: Mapping[int, Fraction]) -> dict[int, Fraction] | None:
        r, combo = self._reduce(v)
        if r:
            return None
        return combo
