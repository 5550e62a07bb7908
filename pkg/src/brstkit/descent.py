"""Descent equations in the small algebra.

Two generator tables are used side by side for a split ``G = K |x J``:
the full table (ghosts, connections, curvatures and covariant ghost
derivatives) where ``d``, ``lambda`` and the lifts live, and the polynomial
table in curvatures and ghosts where ``gamma`` cohomology is computed.
Projection from the first to the second sets connections and covariant
ghost derivatives to zero; it is a chain map for ``gamma`` and induces an
isomorphism in cohomology, so classes are always read off after projecting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import linalg
from .cohom import CohomologyBasis, NotACocycle, cohomology, invariant_subspace, is_coboundary
from .deriv import Derivation, SchemeError, build
from .gca import DEFAULT_MAX_SLICE, KINDS, Element, GeneratorTable, SliceSpec
from .hs import HSDecomposition, assemble, primitives, relative_cohomology, transfer
from .liealg import LieAlgebra, SemidirectSplit, verify_semidirect


class DescentError(ValueError):
    pass


class LinkingError(RuntimeError):
    """A linking system that must be solvable was not (internal inconsistency)."""


@lru_cache(maxsize=None)
def _ops(table: GeneratorTable) -> dict[str, Derivation]:
    out = {}
    for name in ("gamma", "d", "lambda", "tau"):
        try:
            out[name] = build(name, table)
        except SchemeError:
            pass
    return out


@lru_cache(maxsize=None)
def polynomial_table(table: GeneratorTable) -> GeneratorTable:
    """Companion table without connections and covariant ghost derivatives."""
    if not table.has_kind("connection"):
        return table
    scheme = "split_semidirect" if table.split is not None else "small_FC"
    return GeneratorTable.build(table.algebra, scheme, table.split)


def project(x: Element, target: GeneratorTable | None = None) -> Element:
    """Set connections and covariant ghost derivatives to zero."""
    if target is None:
        target = polynomial_table(x.table)
    gens = x.table.generators
    kill = [g.id for g in gens if g.kind in ("connection", "covariant_ghost_derivative")]
    return transfer(x.substitute_zero(kill), target)


def _require(table: GeneratorTable, *names: str) -> list[Derivation]:
    ops = _ops(table)
    missing = [n for n in names if n not in ops]
    if missing:
        raise SchemeError(f"operators {missing} need the full variable scheme")
    return [ops[n] for n in names]


def _check_cocycle(gamma: Derivation, b: Element) -> None:
    if gamma.apply(b).terms:
        raise NotACocycle("input is not a gamma-cocycle")


def lift_once(b: Element) -> Element:
    """``lambda b``, which satisfies ``d b + gamma(lambda b) = 0`` for a gamma-cocycle ``b``."""
    gamma, d, lam = _require(b.table, "gamma", "d", "lambda")
    _check_cocycle(gamma, b)
    w = lam.apply(b)
    if (d.apply(b) + gamma.apply(w)).terms:
        raise LinkingError("first lift failed the linking identity")
    return w


def second_lift_identity(b: Element) -> Element:
    """``d(lambda b) + gamma(1/2 lambda^2 b) - tau b``; zero for every gamma-cocycle."""
    gamma, d, lam, tau = _require(b.table, "gamma", "d", "lambda", "tau")
    lb = lam.apply(b)
    return d.apply(lb) + gamma.apply(lam.apply(lb)).scale(Fraction(1, 2)) - tau.apply(b)


@dataclass
class Obstruction:
    tau_b: Element
    projected: Element
    trivial: bool
    witness: Element | None
    coordinates: list[Fraction] | None = None


def _slice_of(x: Element) -> dict[str, int]:
    table = x.table
    degs = set()
    for m in x.terms:
        gh = sum(table.generators[i].ghost_number for i in m)
        cv = sum(1 for i in m if table.generators[i].kind == "curvature")
        degs.add((gh, cv))
    if len(degs) != 1:
        raise DescentError("element is not homogeneous in ghost number and curvature degree")
    gh, cv = degs.pop()
    return {"ghost": gh, "curvature": cv}


def obstruction(b: Element, context: "DescentContext | None" = None) -> Obstruction:
    """``tau b`` and whether its gamma-class vanishes (then a second lift exists)."""
    table = b.table
    tau = _ops(table).get("tau") or build("tau", table)
    gamma = _ops(table).get("gamma") or build("gamma", table)
    _check_cocycle(gamma, b)
    tb = tau.apply(b)
    p = project(tb) if table.has_kind("connection") else tb
    if not p.terms:
        return Obstruction(tb, p, True, p, [] if context else None)
    gs = build("gammaS", p.table)
    spec = _slice_of(p)
    w = is_coboundary(gs, p, {**spec, "ghost": spec["ghost"] - 1})
    coords = None
    if context is not None:
        coords = context.class_space(spec["ghost"], spec["curvature"]).class_of(transfer(p, context.poly))
    return Obstruction(tb, p, w is not None, w, coords)


# ---------------------------------------------------------------- transgression


@dataclass
class DescentChain:
    """``rungs[0]`` is the bottom; ``gamma rungs[k+1] + d rungs[k] = 0``."""

    bottom: Element
    rungs: list[Element]
    obstruction: Element | None = None

    def verify(self) -> bool:
        gamma, d = _require(self.bottom.table, "gamma", "d")
        if gamma.apply(self.rungs[0]).terms:
            return False
        return all(
            not (gamma.apply(self.rungs[k + 1]) + d.apply(self.rungs[k])).terms
            for k in range(len(self.rungs) - 1)
        )

    def __len__(self) -> int:
        return len(self.rungs)


def _sector_spec(table: GeneratorTable, x: Element, form: int, ghost: int) -> SliceSpec:
    spec = {"form": form, "ghost": ghost}
    sectors = {table.generators[i].sector for m in x.terms for i in m}
    if table.split is not None and sectors == {"K"}:
        for kind in KINDS:
            if table.has_kind(kind):
                spec[f"{kind}:J"] = 0
    return SliceSpec.from_dict(spec)


def descend(b: Element, max_rungs: int | None = None, max_size: int = DEFAULT_MAX_SLICE) -> DescentChain:
    """Lift ``b`` as far as the linking equations allow.

    The first lift is ``lambda b``; later rungs are the reduced-echelon
    particular solutions of ``gamma w = -d(previous)`` over the slice of the
    right bidegree (restricted to subalgebra generators when ``b`` only
    involves those).  The chain stops at ghost number zero or at the first
    unsolvable equation, whose right-hand side is stored as the obstruction.
    """
    gamma, d, _ = _require(b.table, "gamma", "d", "lambda")
    _check_cocycle(gamma, b)
    rungs = [b]
    if not b.terms:
        return DescentChain(b, rungs)
    degs = b.multidegrees()
    if len(degs) != 1:
        raise DescentError("bottom must have a single (form, ghost) bidegree")
    form, ghost = degs.pop()
    if ghost == 0:
        rhs = d.apply(b)
        return DescentChain(b, rungs, rhs if rhs.terms else None)
    rungs.append(lift_once(b))
    while True:
        if max_rungs is not None and len(rungs) > max_rungs:
            return DescentChain(b, rungs)
        top = rungs[-1]
        rhs = d.apply(top)
        k = len(rungs) - 1
        if not rhs.terms:
            return DescentChain(b, rungs)
        if ghost - k - 1 < 0:
            return DescentChain(b, rungs, rhs)
        spec = _sector_spec(b.table, b, form + k + 1, ghost - k - 1)
        w = is_coboundary(gamma, -rhs, spec)
        if w is None:
            return DescentChain(b, rungs, rhs)
        rungs.append(w)


def transgress(theta: Element, full_table: GeneratorTable | None = None) -> DescentChain:
    """Chain from a primitive of the semisimple factor down to ghost number zero."""
    if full_table is not None and theta.table is not full_table:
        theta = transfer(theta, full_table)
    chain = descend(theta)
    if chain.rungs and chain.rungs[-1].terms:
        _, gh = next(iter(chain.rungs[-1].multidegrees()))
        if gh != 0:
            raise LinkingError(f"transgression stopped at ghost number {gh}")
    return chain


# ---------------------------------------------------------------- sigma / tau splitting


def ncf_degree(table: GeneratorTable, mono) -> int:
    gens = table.generators
    return sum(1 for i in mono if gens[i].sector == "J" and gens[i].kind in ("ghost", "curvature"))


@dataclass
class SigmaTauPart:
    k: int
    v: Element
    t: Element
    s: Element
    sigma_t: Element
    tau_s: Element


@dataclass
class SigmaTauSplit:
    v: Element
    v0: Element
    parts: list[SigmaTauPart]

    def sigma_part(self) -> Element:
        out = self.v.table.zero()
        for p in self.parts:
            out = out + p.sigma_t
        return out

    def tau_part(self) -> Element:
        out = self.v.table.zero()
        for p in self.parts:
            out = out + p.tau_s
        return out

    def reconstruct(self) -> Element:
        return self.v0 + self.sigma_part() + self.tau_part()


def split_sigma_tau(v: Element, check_invariant: bool = True) -> SigmaTauSplit:
    """``v = v0 + sum_k (sigma t_k + tau s_k)`` with ``t_k = tau v_k / k``, ``s_k = sigma v_k / k``."""
    table = v.table
    sigma = build("sigma", table)
    tau = build("tau", table)
    if check_invariant and table.split is not None:
        for A in table.split.subalg_indices:
            if build(f"rhoT_e:{A}", table).apply(v).terms:
                raise DescentError("element is not invariant under the subalgebra")
    by_k: dict[int, dict] = {}
    for m, c in v.terms.items():
        by_k.setdefault(ncf_degree(table, m), {})[m] = c
    v0 = Element(table, by_k.pop(0, {}))
    parts = []
    for k in sorted(by_k):
        vk = Element(table, by_k[k])
        t = tau.apply(vk).scale(Fraction(1, k))
        s = sigma.apply(vk).scale(Fraction(1, k))
        parts.append(SigmaTauPart(k, vk, t, s, sigma.apply(t), tau.apply(s)))
    out = SigmaTauSplit(v, v0, parts)
    if out.reconstruct() != v:
        raise LinkingError("sigma/tau reconstruction failed")
    return out


# ---------------------------------------------------------------- classification


@dataclass
class ClassEntry:
    kind: str  # "E2", "F1", "d1F1"; E2 entries carry a sub-kind
    element: Element
    ghost: int
    degree: int
    sub: str = ""
    witness: dict = field(default_factory=dict)

    def label(self) -> str:
        return f"{self.kind}{':' + self.sub if self.sub else ''}"


@dataclass
class DescentClassification:
    e2: list[ClassEntry]
    f1: list[ClassEntry]
    d1f1: list[ClassEntry]
    dims: dict[tuple[int, int], int]

    def e2_part(self, sub: str) -> list[ClassEntry]:
        return [e for e in self.e2 if e.sub == sub]

    def counts(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for e in self.e2 + self.f1 + self.d1f1:
            out[(e.ghost, e.degree)] = out.get((e.ghost, e.degree), 0) + 1
        return out

    def complete(self) -> bool:
        c = self.counts()
        return all(c.get(k, 0) == v for k, v in self.dims.items()) and sum(c.values()) == sum(self.dims.values())


class DescentContext:
    """Shared tables, operators and Hochschild-Serre data for one algebra and split."""

    def __init__(self, alg: LieAlgebra, split: SemidirectSplit, max_degree: int = 2, max_size: int = DEFAULT_MAX_SLICE):
        verify_semidirect(alg, split)
        self.alg = alg
        self.split = split
        self.max_degree = max_degree
        self.max_size = max_size
        self.full = GeneratorTable.build(alg, "split_full", split)
        self.poly = GeneratorTable.build(alg, "split_semidirect", split)
        self.abelian = all(not alg.bracket(a, b) for a in split.ideal_indices for b in split.ideal_indices)
        self.gamma_s = build("gammaS", self.poly)
        self.prims = primitives(alg, table=self.poly)
        reach = max_degree + (2 if self.prims.primitives else 0)
        self.relative = relative_cohomology(alg, split, "symmetric", reach, self.poly, max_size)
        self.hs: HSDecomposition = assemble(self.prims, self.relative)
        self._spaces: dict[tuple[int, int], CohomologyBasis] = {}

    def class_space(self, ghost: int, degree: int) -> CohomologyBasis:
        """Coboundaries of the slice plus the Hochschild-Serre basis as representatives."""
        key = (ghost, degree)
        if key not in self._spaces:
            base = cohomology(self.gamma_s, {"ghost": ghost, "curvature": degree}, self.max_size)
            reps = self.hs.assembled.get(key, [])
            if len(reps) != base.dimension:
                raise LinkingError(f"basis size {len(reps)} differs from dimension {base.dimension} at {key}")
            space = CohomologyBasis(self.gamma_s, len(reps), list(reps), base.boundaries, base.preimages, {"ghost": ghost, "curvature": degree}, base.kernel_dimension)
            if space._span.rank != len(base.boundaries) + len(reps):
                raise LinkingError(f"assembled classes are dependent at {key}")
            self._spaces[key] = space
        return self._spaces[key]

    def to_full(self, x: Element) -> Element:
        return transfer(x, self.full)


def _independent(vectors: list[list[Fraction]], seed: list[list[Fraction]] = ()) -> list[int]:
    ech = linalg.RowEchelon()
    for v in seed:
        ech.add({i: c for i, c in enumerate(v) if c})
    keep = []
    for k, v in enumerate(vectors):
        if ech.add({i: c for i, c in enumerate(v) if c}):
            keep.append(k)
    return keep


def _primitive_degree(prims) -> int | None:
    degs = set(prims.degrees)
    if len(degs) > 1:
        raise DescentError("primitives of different ghost degrees are not supported")
    return degs.pop() if degs else None


def classify(alg: LieAlgebra, split: SemidirectSplit, max_degree: int = 2, context: DescentContext | None = None) -> DescentClassification:
    ctx = context or DescentContext(alg, split, max_degree)
    if not ctx.abelian:
        raise DescentError("classification requires an abelian ideal")
    max_degree = ctx.max_degree
    thetas = ctx.prims.indexed_basis()
    e2_rel: list[tuple[Element, tuple[int, ...], int, int]] = []
    f1, d1f1 = [], []
    for (ghc, deg), h in sorted(ctx.relative.items()):
        if deg > max_degree or not h.dimension:
            continue
        v0s, sts, tss = [], [], []
        for v in h.representatives:
            sp = split_sigma_tau(v, check_invariant=False)
            if sp.v0.terms:
                v0s.append(sp.v0)
            for p in sp.parts:
                if p.sigma_t.terms:
                    sts.append((p.sigma_t, {"t": p.t, "k": p.k}))
                if p.tau_s.terms:
                    tss.append((p.tau_s, {"s": p.s, "k": p.k}))
        coords = lambda xs: [h.class_of(x) for x in xs]
        e_idx = _independent(coords(v0s))
        f_idx = _independent(coords([x for x, _ in sts]))
        t_idx = _independent(coords([x for x, _ in tss]))
        if len(e_idx) + len(f_idx) + len(t_idx) != h.dimension:
            raise LinkingError(f"sigma/tau decomposition does not span the block {(ghc, deg)}")
        for idx, theta, gk in thetas:
            for i in e_idx:
                e2_rel.append((v0s[i], idx, ghc + gk, deg))
            for i in f_idx:
                x, w = sts[i]
                f1.append(ClassEntry("F1", x * theta, ghc + gk, deg, witness=dict(w, theta=theta)))
            for i in t_idx:
                x, w = tss[i]
                d1f1.append(ClassEntry("d1F1", x * theta, ghc + gk, deg, witness=dict(w, theta=theta)))
    e2 = _split_e2(ctx, e2_rel)
    dims = {k: len(v) for k, v in ctx.hs.assembled.items() if k[1] <= max_degree}
    out = DescentClassification(e2, f1, d1f1, dims)
    if not out.complete():
        raise LinkingError("classification does not cover the cohomology")
    return out


def transgression_images(ctx: DescentContext) -> list[Element]:
    """``pi(d top)`` for each primitive's chain: the invariant polynomial it transgresses to."""
    out = []
    for theta in ctx.prims.primitives:
        chain = transgress(theta, ctx.full)
        d = _ops(ctx.full)["d"]
        out.append(project(d.apply(chain.rungs[-1]), ctx.poly))
    return out


def _koszul(ctx: DescentContext, images: list[Element], v0: Element, idx: tuple[int, ...]) -> Element:
    """``d3`` on ``v0 * theta_I``: remove each primitive in turn, replacing it by its image."""
    prims = ctx.prims.primitives
    out = ctx.poly.zero()
    for pos, i in enumerate(idx):
        rest = ctx.poly.one()
        for j in idx:
            if j != i:
                rest = rest * prims[j]
        sign = -1 if pos % 2 else 1
        out = out + (v0 * images[i] * rest).scale(sign)
    return out


def _split_e2(ctx: DescentContext, e2_rel: list[tuple[Element, tuple[int, ...], int, int]]) -> list[ClassEntry]:
    """Split ``E2`` into persisting classes, ``F3`` sources and their ``d3`` images."""
    r = _primitive_degree(ctx.prims)
    table = ctx.poly

    def product(v0, idx):
        x = v0
        for i in idx:
            x = x * ctx.prims.primitives[i]
        return x

    if r is None:
        return [ClassEntry("E2", product(v0, idx), g, d, "1") for v0, idx, g, d in e2_rel]
    images = transgression_images(ctx)
    by_slice: dict[tuple[int, int], list[int]] = {}
    for n, (_, _, g, d) in enumerate(e2_rel):
        by_slice.setdefault((g, d), []).append(n)
    d3 = [_koszul(ctx, images, v0, idx) for v0, idx, _, _ in e2_rel]
    f3: set[int] = set()
    landed: dict[tuple[int, int], list[Element]] = {}
    kernels: dict[tuple[int, int], list[Element]] = {}
    for (g, d), ns in sorted(by_slice.items()):
        ys = [d3[n] for n in ns]
        if any(y.terms for y in ys):
            space = ctx.class_space(g - r, d + 2)
            cols = [space.class_of(y) for y in ys]
        else:
            cols = [[] for _ in ys]
        for pos in _independent(cols):
            f3.add(ns[pos])
            landed.setdefault((g - r, d + 2), []).append(ys[pos])
        kern = []
        for kv in linalg.nullspace([{i: c for i, c in enumerate(v) if c} for v in cols]):
            x = table.zero()
            for j, c in kv.items():
                x = x + product(*e2_rel[ns[j]][:2]).scale(c)
            kern.append(x)
        kernels[(g, d)] = kern
    out = []
    for (g, d), ns in sorted(by_slice.items()):
        space = ctx.class_space(g, d)
        seed = [space.class_of(y) for y in landed.get((g, d), [])]
        kern = kernels[(g, d)]
        for k in _independent([space.class_of(x) for x in kern], seed):
            out.append(ClassEntry("E2", kern[k], g, d, "1"))
        for y in landed.get((g, d), []):
            out.append(ClassEntry("E2", y, g, d, "d3F3"))
        for n in ns:
            if n in f3:
                v0, idx, _, _ = e2_rel[n]
                out.append(ClassEntry("E2", product(v0, idx), g, d, "F3", {"d3": d3[n], "primitives": idx}))
    for tgt, ys in landed.items():
        if tgt not in by_slice:
            out.extend(ClassEntry("E2", y, tgt[0], tgt[1], "d3F3") for y in ys)
    return [e for e in out if e.degree <= ctx.max_degree]


# ---------------------------------------------------------------- lambda sharp and table


def lambda_sharp(entry: ClassEntry, ctx: DescentContext) -> Element:
    """``(lambda sigma t) Theta + (sigma t) lambda Theta`` for an F1 class, in the full table."""
    if entry.kind != "F1":
        raise DescentError("lambda sharp is defined on F1 classes only")
    b = ctx.to_full(entry.element)
    return lift_once(b)


@dataclass
class DescentTable:
    rows: list[list[list[str]]]
    width: int = 4

    def counts(self) -> list[list[int]]:
        return [[len(cell) for cell in row] for row in self.rows]

    def pattern(self) -> list[list[int]]:
        return [[int(bool(cell)) for cell in row] for row in self.rows]

    def to_json(self) -> dict:
        return {"rows": [{"ghost": g, "columns": row} for g, row in enumerate(self.rows)]}

    def to_text(self, show_classes: bool = False) -> str:
        head = ["gh"] + [f"depth {j}" for j in range(self.width)]
        body = [[str(g)] + [str(len(c)) for c in row] for g, row in enumerate(self.rows)]
        widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
        lines = ["  ".join(s.rjust(w) for s, w in zip(r, widths)) for r in [head] + body]
        if show_classes:
            for g, row in enumerate(self.rows):
                for j, cell in enumerate(row):
                    for s in cell:
                        lines.append(f"[{g},{j}] {s}")
        return "\n".join(lines) + "\n"


def build_table(alg: LieAlgebra, split: SemidirectSplit, max_degree: int = 2, context: DescentContext | None = None, classification: DescentClassification | None = None) -> DescentTable:
    """Grid of ``H(gamma|d)`` representatives by ghost number and lift depth.

    Depth 0 holds bottoms that persist; F1 classes also contribute their
    lambda-sharp lift at depth 1; each F3 class contributes its full
    transgression tower, one rung per depth.
    """
    ctx = context or DescentContext(alg, split, max_degree)
    cls = classification or classify(alg, split, max_degree, ctx)
    cells: dict[tuple[int, int], list[str]] = {}

    def put(g: int, j: int, x: Element) -> None:
        cells.setdefault((g, j), []).append(str(x))

    for e in cls.e2_part("1"):
        put(e.ghost, 0, e.element)
    for e in cls.f1:
        put(e.ghost, 0, e.element)
        put(e.ghost - 1, 1, lambda_sharp(e, ctx))
    for e in cls.e2_part("F3"):
        chain = descend(ctx.to_full(e.element))
        for j, r in enumerate(chain.rungs):
            put(e.ghost - j, j, r)
    top = max([alg.dim] + [g for g, _ in cells])
    width = max([4] + [j + 1 for _, j in cells])
    rows = [[sorted(cells.get((g, j), [])) for j in range(width)] for g in range(top + 1)]
    return DescentTable(rows, width)


def invariant_cocycles(ctx: DescentContext, spec) -> list[Element]:
    rho = [build(f"rhoT_e:{A}", ctx.poly) for A in ctx.split.subalg_indices]
    return invariant_subspace(rho, spec, ctx.poly)
