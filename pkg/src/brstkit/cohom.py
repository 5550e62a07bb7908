"""Cohomology of derivations on finite graded slices, over the rationals.

Cochains are handled as sparse vectors indexed by monomials.  Every
result carries enough data to be checked independently: representatives
are cocycles, and :meth:`CohomologyBasis.decompose` returns an explicit
preimage for the exact part of any cocycle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import linalg
from .deriv import Derivation
from .gca import (
    DEFAULT_MAX_SLICE,
    Element,
    GeneratorTable,
    Monomial,
    SliceError,
    SliceSpec,
    basis_slice,
)


class NotNilpotent(ValueError):
    pass


class NotACocycle(ValueError):
    pass


def _spec(spec) -> SliceSpec:
    return spec if isinstance(spec, SliceSpec) else SliceSpec.from_dict(spec)


def target_spec(d: Derivation, spec: SliceSpec, sign: int = 1) -> SliceSpec:
    return spec.shifted({k: sign * d.grading_shift(k) for k, _ in spec.targets})


@dataclass
class SliceComplex:
    """Matrix of ``derivation`` from ``domain_basis`` to ``codomain_basis``.

    ``columns[j]`` maps codomain positions to coefficients of the image of
    domain monomial ``j``.
    """

    derivation_name: str
    table: GeneratorTable
    domain_basis: list[Monomial]
    codomain_basis: list[Monomial]
    columns: list[dict[int, Fraction]]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.codomain_basis), len(self.domain_basis)

    def rank(self) -> int:
        return linalg.rank(self.columns)

    def nullity(self) -> int:
        return len(self.domain_basis) - self.rank()

    def dense(self) -> list[list[Fraction]]:
        rows, cols = self.shape
        out = [[Fraction(0)] * cols for _ in range(rows)]
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                out[i][j] = v
        return out

    def kernel(self) -> list[Element]:
        return [vector_to_element(self.table, self.domain_basis, v) for v in linalg.nullspace(self.columns)]


def matrix_of(d: Derivation, spec, max_size: int = DEFAULT_MAX_SLICE) -> SliceComplex:
    spec = _spec(spec)
    domain = basis_slice(d.table, spec, max_size)
    codomain = basis_slice(d.table, target_spec(d, spec), max_size) if domain else []
    pos = {m: i for i, m in enumerate(codomain)}
    cols = []
    for m in domain:
        col = {}
        for mm, c in d.apply_monomial(m).items():
            i = pos.get(mm)
            if i is None:
                raise SliceError(f"{d.name} maps {spec.as_dict()} outside the shifted slice")
            col[i] = c
        cols.append(col)
    return SliceComplex(d.name, d.table, domain, codomain, cols)


def vector_to_element(table: GeneratorTable, basis: Sequence[Monomial], vec: Mapping[int, Fraction]) -> Element:
    return Element(table, {basis[i]: c for i, c in vec.items()})


class _Index:
    """Assigns consecutive column numbers to monomials as they appear."""

    def __init__(self, monomials: Iterable[Monomial] = ()):
        self.pos: dict[Monomial, int] = {}
        self.mono: list[Monomial] = []
        for m in monomials:
            self.get(m)

    def get(self, m: Monomial) -> int:
        i = self.pos.get(m)
        if i is None:
            i = self.pos[m] = len(self.mono)
            self.mono.append(m)
        return i

    def vector(self, x: Element | Mapping[Monomial, Fraction]) -> dict[int, Fraction]:
        terms = x.terms if isinstance(x, Element) else x
        return {self.get(m): c for m, c in terms.items()}


def _combination(elems: Sequence[Element], coefs: Mapping[int, Fraction], table: GeneratorTable) -> Element:
    out: dict[Monomial, Fraction] = {}
    for k, c in coefs.items():
        for m, v in elems[k].terms.items():
            out[m] = out.get(m, 0) + c * v
    return Element(table, out)


@dataclass
class CohomologyBasis:
    derivation: Derivation
    dimension: int
    representatives: list[Element]
    boundaries: list[Element]
    preimages: list[Element]
    grading: dict = field(default_factory=dict)
    kernel_dimension: int = 0

    def __post_init__(self) -> None:
        self._index = _Index()
        gens = [self._index.vector(b) for b in self.boundaries]
        gens += [self._index.vector(r) for r in self.representatives]
        self._span = linalg.TrackedSpan(gens)

    def decompose(self, x: Element) -> tuple[list[Fraction], Element]:
        """Class coordinates ``c`` and ``w`` with ``x = sum c_i rep_i + D w``."""
        if self.derivation.apply(x).terms:
            raise NotACocycle(f"element is not a {self.derivation.name}-cocycle")
        combo = self._span.express(self._index.vector(x))
        if combo is None:
            raise ValueError("cocycle lies outside the slice this basis was computed on")
        nb = len(self.boundaries)
        coords = [combo.get(nb + i, Fraction(0)) for i in range(self.dimension)]
        witness = _combination(self.preimages, {k: c for k, c in combo.items() if k < nb}, x.table)
        return coords, witness

    def class_of(self, x: Element) -> list[Fraction]:
        return self.decompose(x)[0]

    def is_trivial(self, x: Element) -> bool:
        return not any(self.class_of(x))

    def to_json(self) -> dict:
        return {"dim": self.dimension, "representatives": [str(r) for r in self.representatives]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def subspace_cohomology(
    d: Derivation,
    current: Sequence[Element],
    previous: Sequence[Element] = (),
    grading: Mapping | None = None,
    check: bool = True,
) -> CohomologyBasis:
    """Cohomology at ``span(current)`` of the complex ``span(previous) -> span(current) -> ...``.

    ``current`` must be linearly independent and ``D(previous)`` must lie in
    its span; both are the caller's responsibility except that ``D^2 = 0``
    on ``previous`` is checked when ``check`` is set.
    """
    table = d.table
    # kernel of D on span(current)
    out_index = _Index()
    images = [out_index.vector(d.apply(x)) for x in current]
    ker = [_combination(current, v, table) for v in linalg.nullspace(images)]
    # image of D from span(previous)
    boundaries, preimages = [], []
    ech = linalg.RowEchelon()
    cur_index = _Index()
    for w in previous:
        b = d.apply(w)
        if check and b.terms and d.apply(b).terms:
            raise NotNilpotent(f"{d.name} squares to a nonzero map on this slice")
        if ech.add(cur_index.vector(b)):
            boundaries.append(b)
            preimages.append(w)
    # complete the image inside the kernel in echelon order
    reps = []
    for k in ker:
        if ech.add(cur_index.vector(k)):
            reps.append(k)
    if len(boundaries) + len(reps) != len(ker):
        raise NotNilpotent(f"image of {d.name} is not contained in its kernel")
    return CohomologyBasis(d, len(reps), reps, boundaries, preimages, dict(grading or {}), len(ker))


def monomial_elements(table: GeneratorTable, monos: Iterable[Monomial]) -> list[Element]:
    return [Element(table, {m: Fraction(1)}) for m in monos]


def cohomology(d: Derivation, spec, max_size: int = DEFAULT_MAX_SLICE) -> CohomologyBasis:
    """Cohomology of ``d`` at the slice ``spec`` (previous slice derived from the shifts)."""
    spec = _spec(spec)
    cur = basis_slice(d.table, spec, max_size)
    prev_spec = target_spec(d, spec, -1)
    prev = basis_slice(d.table, prev_spec, max_size)
    return subspace_cohomology(
        d, monomial_elements(d.table, cur), monomial_elements(d.table, prev), spec.as_dict()
    )


def cohomology_dimension(d: Derivation, spec, max_size: int = DEFAULT_MAX_SLICE) -> int:
    """Rank-only dimension ``dim ker(out) - rank(in)``."""
    spec = _spec(spec)
    m_out = matrix_of(d, spec, max_size)
    if not m_out.domain_basis:
        return 0
    m_in = matrix_of(d, target_spec(d, spec, -1), max_size)
    return m_out.nullity() - m_in.rank()


def invariant_subspace(ops: Sequence[Derivation], basis: Sequence[Element] | SliceSpec | Mapping, table: GeneratorTable | None = None) -> list[Element]:
    """Basis of the joint kernel of ``ops`` on a slice or on ``span(basis)``."""
    if isinstance(basis, (SliceSpec, dict)):
        if table is None:
            if not ops:
                raise ValueError("table needed to enumerate a slice without operators")
            table = ops[0].table
        elems = monomial_elements(table, basis_slice(table, _spec(basis)))
    else:
        elems = list(basis)
    if not elems:
        return []
    table = elems[0].table
    if not ops:
        return elems
    index = _Index()
    cols = []
    for x in elems:
        col = {}
        for k, op in enumerate(ops):
            for m, c in op.apply(x).terms.items():
                col[index.get((k, m))] = c
        cols.append(col)
    return [_combination(elems, v, table) for v in linalg.nullspace(cols)]


def is_coboundary(d: Derivation, x: Element, source: SliceSpec | Mapping | Sequence[Element]) -> Element | None:
    """Some ``w`` in the source with ``D w = x``, or ``None``."""
    if d.apply(x).terms:
        raise NotACocycle(f"element is not a {d.name}-cocycle")
    if not x.terms:
        return x.table.zero()
    if isinstance(source, (SliceSpec, dict)):
        elems = monomial_elements(d.table, basis_slice(d.table, _spec(source)))
    else:
        elems = list(source)
    index = _Index()
    cols = [index.vector(d.apply(w)) for w in elems]
    sol = linalg.solve(cols, index.vector(x))
    if sol is None:
        return None
    return _combination(elems, sol, x.table)


def span_contains(vectors: Sequence[Element], x: Element) -> dict[int, Fraction] | None:
    index = _Index()
    span = linalg.TrackedSpan([index.vector(v) for v in vectors])
    return span.express(index.vector(x))
