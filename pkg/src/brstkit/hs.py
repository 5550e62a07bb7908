"""Hochschild-Serre reduction for a split ``G = K |x J`` with ``K`` semisimple.

The cohomology of ``G`` with values in ``V`` (either the trivial module or
the symmetric algebra on curvatures, truncated by degree) factors as the
ghost cohomology of ``K`` times the ``K``-invariant cohomology of the part
of ``gammaS`` that raises the ideal ghost number.  The factorisation is
checked by computing both sides independently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from . import linalg
from .cohom import (
    CohomologyBasis,
    _Index,
    cohomology,
    cohomology_dimension,
    invariant_subspace,
    monomial_elements,
    subspace_cohomology,
)
from .deriv import build
from .gca import DEFAULT_MAX_SLICE, Element, GeneratorTable, SliceSpec, basis_slice
from .liealg import LieAlgebra, SemidirectSplit, killing_form, verify_semidirect

MODULES = ("trivial", "symmetric")


class NotSemisimple(ValueError):
    pass


def transfer(x: Element, table: GeneratorTable) -> Element:
    """Rewrite ``x`` in another table with the same generator labels."""
    if x.table is table:
        return x
    src = x.table.generators
    terms: dict = {}
    for m, c in x.terms.items():
        e = Element.from_monomial(table, [table.id_of(src[i].label) for i in m], c)
        for mm, v in e.terms.items():
            terms[mm] = terms.get(mm, 0) + v
    return Element(table, terms)


@dataclass
class PrimitiveSet:
    table: GeneratorTable
    primitives: list[Element]
    degrees: list[int]
    dims: list[int]

    def indexed_basis(self) -> list[tuple[tuple[int, ...], Element, int]]:
        """``(index set, product, ghost number)`` for products of distinct primitives."""
        out = []
        for r in range(len(self.primitives) + 1):
            for idx in combinations(range(len(self.primitives)), r):
                x = self.table.one()
                for i in idx:
                    x = x * self.primitives[i]
                out.append((idx, x, sum(self.degrees[i] for i in idx)))
        return out

    def monomial_basis(self) -> list[tuple[Element, int]]:
        """Products of distinct primitives with their ghost numbers, starting with ``1``."""
        return [(x, g) for _, x, g in self.indexed_basis()]

    def poincare(self, top: int) -> list[int]:
        dims = [0] * (top + 1)
        for _, g in self.monomial_basis():
            if g <= top:
                dims[g] += 1
        return dims


def primitives(alg: LieAlgebra, max_ghost: int | None = None, table: GeneratorTable | None = None) -> PrimitiveSet:
    """Indecomposable ghost cohomology classes of a semisimple algebra.

    With ``table`` given (a split scheme), the computation runs on the
    subalgebra ghosts of that table using ``gammaS0``; otherwise on a fresh
    Chevalley-Eilenberg ghost table of ``alg``.
    """
    if table is None:
        if killing_form(alg).determinant() == 0:
            raise NotSemisimple(f"{alg.name} has a degenerate Killing form")
        table = GeneratorTable.build(alg, "ce_ghost")
        d = build("gammaS", table)
        n = alg.dim

        def spec(k):
            return {"ghost": k}
    else:
        split = table.split
        n = len(split.subalg_indices)
        d = build("gammaS0", table)
        zero = {k: 0 for k in ("ghost:J", "curvature", "connection", "covariant_ghost_derivative")
                if k == "ghost:J" or table.has_kind(k)}

        def spec(k):
            return dict(zero, **{"ghost:K": k})
    if max_ghost is None:
        max_ghost = n
    prims: list[Element] = []
    degs: list[int] = []
    dims = []
    for k in range(max_ghost + 1):
        h = cohomology(d, spec(k))
        dims.append(h.dimension)
        if k == 0 or not h.dimension:
            continue
        index = _Index()
        ech = linalg.RowEchelon()
        for b in h.boundaries:
            ech.add(index.vector(b))
        # decomposables: products of lower classes
        lower = PrimitiveSet(table, prims, degs, dims).monomial_basis()
        for x, g in lower:
            if g == k and len(x.terms):
                ech.add(index.vector(x))
        for r in h.representatives:
            if ech.add(index.vector(r)):
                prims.append(r)
                degs.append(k)
    return PrimitiveSet(table, prims, degs, dims)


def relative_table(alg: LieAlgebra, split: SemidirectSplit) -> GeneratorTable:
    verify_semidirect(alg, split)
    return GeneratorTable.build(alg, "split_semidirect", split)


def _is_abelian(table: GeneratorTable) -> bool:
    alg = table.algebra
    J = table.split.ideal_indices
    return all(not alg.bracket(a, b) for a, b in combinations(J, 2))


def _merge(parts: list[CohomologyBasis], d, grading) -> CohomologyBasis:
    reps, bounds, pre = [], [], []
    kd = 0
    for p in parts:
        reps += p.representatives
        bounds += p.boundaries
        pre += p.preimages
        kd += p.kernel_dimension
    return CohomologyBasis(d, len(reps), reps, bounds, pre, dict(grading), kd)


def relative_cohomology(
    alg: LieAlgebra,
    split: SemidirectSplit,
    module: str = "symmetric",
    max_degree: int = 4,
    table: GeneratorTable | None = None,
    max_size: int = DEFAULT_MAX_SLICE,
) -> dict[tuple[int, int], CohomologyBasis]:
    """``(gh_C, curvature degree) -> `` cohomology of ``gammaS1`` on ``K``-invariants."""
    if module not in MODULES:
        raise ValueError(f"module must be one of {MODULES}")
    if table is None:
        table = relative_table(alg, split)
    top = 0 if module == "trivial" else max_degree
    g1 = build("gammaS1", table)
    rho = [build(f"rhoT_e:{A}", table) for A in table.split.subalg_indices]
    nJ = len(table.split.ideal_indices)
    fine = _is_abelian(table)
    invariants: dict[SliceSpec, list[Element]] = {}

    def inv(spec: SliceSpec) -> list[Element]:
        if spec.is_empty():
            return []
        if spec not in invariants:
            invariants[spec] = invariant_subspace(rho, spec, table) if rho else _all(table, spec, max_size)
        return invariants[spec]

    out = {}
    for ghc in range(nJ + 1):
        for deg in range(top + 1):
            if fine:
                specs = [
                    SliceSpec.of(ghost__K=0, ghost__J=ghc, curvature__J=nf, curvature__K=deg - nf)
                    for nf in range(deg + 1)
                ]
            else:
                specs = [SliceSpec.of(ghost__K=0, ghost__J=ghc, curvature=deg)]
            parts = []
            for s in specs:
                prev = s.shifted({k: -g1.grading_shift(k) for k, _ in s.targets})
                parts.append(subspace_cohomology(g1, inv(s), inv(prev)))
            out[(ghc, deg)] = _merge(parts, g1, {"gh_C": ghc, "degree": deg})
    return out


def _all(table, spec, max_size):
    return monomial_elements(table, basis_slice(table, spec, max_size))


@dataclass
class HSDecomposition:
    primitive_part: PrimitiveSet
    relative_part: dict[tuple[int, int], CohomologyBasis]
    assembled: dict[tuple[int, int], list[Element]] = field(default_factory=dict)

    def dims(self) -> dict[tuple[int, int], int]:
        """``(total ghost, curvature degree) -> dimension``."""
        return {k: len(v) for k, v in self.assembled.items()}

    def ghost_dims(self, top: int) -> list[int]:
        out = [0] * (top + 1)
        for (g, _), v in self.assembled.items():
            if g <= top:
                out[g] += len(v)
        return out

    def relative_dims(self) -> dict[tuple[int, int], int]:
        return {k: v.dimension for k, v in self.relative_part.items()}


def assemble(prim: PrimitiveSet, relative: dict[tuple[int, int], CohomologyBasis]) -> HSDecomposition:
    """All products (relative representative) x (product of primitives)."""
    thetas = prim.monomial_basis()
    out: dict[tuple[int, int], list[Element]] = {}
    for (ghc, deg), h in sorted(relative.items()):
        for v in h.representatives:
            for theta, gk in thetas:
                x = v * transfer(theta, v.table) if theta.table is not v.table else v * theta
                out.setdefault((ghc + gk, deg), []).append(x)
    return HSDecomposition(prim, relative, out)


def decompose(
    alg: LieAlgebra,
    split: SemidirectSplit,
    module: str = "symmetric",
    max_degree: int = 4,
    max_size: int = DEFAULT_MAX_SLICE,
) -> HSDecomposition:
    table = relative_table(alg, split)
    prim = primitives(alg, table=table)
    rel = relative_cohomology(alg, split, module, max_degree, table, max_size)
    return assemble(prim, rel)


@dataclass
class CrosscheckReport:
    direct: dict[tuple[int, int], int]
    assembled: dict[tuple[int, int], int]
    mismatches: list[tuple[int, int, int, int]]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def ghost_dims(self, which: str = "direct") -> list[int]:
        src = self.direct if which == "direct" else self.assembled
        top = max(g for g, _ in src)
        out = [0] * (top + 1)
        for (g, _), v in src.items():
            out[g] += v
        return out


def direct_dims(
    table: GeneratorTable, module: str, max_degree: int, max_size: int = DEFAULT_MAX_SLICE
) -> dict[tuple[int, int], int]:
    d = build("gammaS", table)
    top = 0 if module == "trivial" else max_degree
    out = {}
    for g in range(table.algebra.dim + 1):
        for deg in range(top + 1):
            out[(g, deg)] = cohomology_dimension(d, {"ghost": g, "curvature": deg}, max_size)
    return out


def crosscheck(
    alg: LieAlgebra,
    split: SemidirectSplit,
    module: str = "symmetric",
    max_degree: int = 3,
    max_size: int = DEFAULT_MAX_SLICE,
) -> CrosscheckReport:
    """Compare rank-based direct dimensions of ``H(gammaS)`` with the assembled ones."""
    dec = decompose(alg, split, module, max_degree, max_size)
    direct = direct_dims(dec.primitive_part.table, module, max_degree, max_size)
    assembled = {k: 0 for k in direct}
    for k, v in dec.dims().items():
        assembled[k] = assembled.get(k, 0) + v
    bad = []
    for k in sorted(set(direct) | set(assembled)):
        a, b = direct.get(k, 0), assembled.get(k, 0)
        if a != b:
            bad.append((k[0], k[1], a, b))
    return CrosscheckReport(direct, assembled, bad)


def table_one(rel: dict[tuple[int, int], CohomologyBasis]) -> list[list[int]]:
    """Rows indexed by ``gh_C``, columns by curvature degree."""
    rows = max(k[0] for k in rel) + 1
    cols = max(k[1] for k in rel) + 1
    grid = [[0] * cols for _ in range(rows)]
    for (g, d), h in rel.items():
        grid[g][d] = h.dimension
    return grid


__all__ = [
    "HSDecomposition",
    "PrimitiveSet",
    "assemble",
    "crosscheck",
    "decompose",
    "primitives",
    "relative_cohomology",
    "table_one",
    "transfer",
]
