"""Graded derivations of the free graded-commutative algebra.

A derivation is stored by its images on generators and extended by the
graded Leibniz rule.  :func:`build` constructs the operators used on the
small algebra: the BRST differential, the exterior derivative, the
contracting operator ``lambda`` with ``d = [lambda, gamma]``, the
obstruction differential ``tau``, its partner ``sigma``, the semidirect
splits of ``gamma`` and the representation operators on invariants.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping

from .gca import Element, GeneratorTable, Monomial, grading_weight, mul_monomials


class SchemeError(ValueError):
    """Operator not defined on this generator table."""


class InhomogeneousError(ValueError):
    pass


HALF = Fraction(1, 2)


class Derivation:
    """``images[gid]`` is the image of generator ``gid``; absent means zero."""

    def __init__(
        self,
        name: str,
        table: GeneratorTable,
        parity: int,
        degree_shift: tuple[int, int],
        images: Mapping[int, Element],
    ):
        self.name = name
        self.table = table
        self.parity = parity % 2
        self.degree_shift = tuple(degree_shift)
        clean = {}
        for gid, img in images.items():
            if img.table is not table:
                raise ValueError("image lives in another generator table")
            if img.terms:
                clean[gid] = img
        self.images: dict[int, Element] = clean
        self._cache: dict[Monomial, dict[Monomial, Fraction]] = {}
        self._check_degrees()

    def _check_degrees(self) -> None:
        gens = self.table.generators
        for gid, img in self.images.items():
            g = gens[gid]
            want = (g.form_degree + self.degree_shift[0], g.ghost_number + self.degree_shift[1])
            for m in img.terms:
                if self.table.degrees(m) != want:
                    raise ValueError(f"{self.name}: image of {g.label} has wrong degree")

    def image(self, gid: int) -> Element:
        return self.images.get(gid) or self.table.zero()

    def grading_shift(self, name: str) -> int:
        """Constant change of grading ``name``; raises if not homogeneous."""
        if name == "form":
            return self.degree_shift[0]
        if name == "ghost":
            return self.degree_shift[1]
        gens = self.table.generators
        weights = [grading_weight(g, name) for g in gens]
        found = None
        for gid, img in self.images.items():
            for m in img.terms:
                s = sum(weights[i] for i in m) - weights[gid]
                if found is None:
                    found = s
                elif s != found:
                    raise InhomogeneousError(f"{self.name} does not shift {name!r} uniformly")
        return 0 if found is None else found

    def _apply_monomial(self, mono: Monomial) -> dict[Monomial, Fraction]:
        hit = self._cache.get(mono)
        if hit is not None:
            return hit
        odd = self.table.odd
        out: dict[Monomial, Fraction] = {}
        n = len(mono)
        i = 0
        prefix_odd = 0
        while i < n:
            g = mono[i]
            j = i
            while j < n and mono[j] == g:
                j += 1
            img = self.images.get(g)
            if img is not None:
                # an even generator repeated k times contributes k x^(k-1) D(x)
                mult = j - i
                prefix, suffix = mono[:i], mono[i + 1:]
                sign = -1 if (self.parity and prefix_odd % 2) else 1
                for m, c in img.terms.items():
                    m1, s1 = mul_monomials(odd, prefix, m)
                    if not s1:
                        continue
                    m2, s2 = mul_monomials(odd, m1, suffix)
                    if not s2:
                        continue
                    v = out.get(m2, 0) + sign * s1 * s2 * mult * c
                    if v:
                        out[m2] = v
                    else:
                        del out[m2]
            if odd[g]:
                prefix_odd += j - i
            i = j
        self._cache[mono] = out
        return out

    def apply(self, x: Element) -> Element:
        if x.table is not self.table:
            raise ValueError("element and derivation use different generator tables")
        out: dict[Monomial, Fraction] = {}
        for mono, c in x.terms.items():
            for m, v in self._apply_monomial(mono).items():
                out[m] = out.get(m, 0) + c * v
        return Element(self.table, out)

    __call__ = apply

    def apply_monomial(self, mono: Monomial) -> dict[Monomial, Fraction]:
        return dict(self._apply_monomial(mono))

    def _combine(self, other: "Derivation", sign: int, name: str) -> "Derivation":
        if other.table is not self.table:
            raise ValueError("derivations use different generator tables")
        if other.parity != self.parity or other.degree_shift != self.degree_shift:
            if not other.images:
                return self
            if not self.images:
                return other.scale(sign)
            raise ValueError("cannot add derivations of different parity or degree")
        imgs = {}
        for gid in set(self.images) | set(other.images):
            imgs[gid] = self.image(gid) + other.image(gid).scale(sign)
        return Derivation(name, self.table, self.parity, self.degree_shift, imgs)

    def __add__(self, other: "Derivation") -> "Derivation":
        return self._combine(other, 1, f"({self.name}+{other.name})")

    def __sub__(self, other: "Derivation") -> "Derivation":
        return self._combine(other, -1, f"({self.name}-{other.name})")

    def scale(self, s, name: str | None = None) -> "Derivation":
        s = Fraction(s)
        imgs = {g: img.scale(s) for g, img in self.images.items()}
        return Derivation(name or f"{s}*{self.name}", self.table, self.parity, self.degree_shift, imgs)

    def renamed(self, name: str) -> "Derivation":
        return Derivation(name, self.table, self.parity, self.degree_shift, self.images)

    def is_zero(self) -> bool:
        return not self.images

    def image_table(self) -> list[tuple[str, str]]:
        """``(generator label, image text)`` pairs in generator order."""
        return [(self.table.generators[g].label, str(img)) for g, img in sorted(self.images.items())]

    def __repr__(self) -> str:
        return f"Derivation({self.name!r}, parity={self.parity}, shift={self.degree_shift})"


def graded_commutator(d1: Derivation, d2: Derivation, name: str | None = None) -> Derivation:
    """``[D1, D2] = D1 D2 - (-1)^(p1 p2) D2 D1`` on generators."""
    if d1.table is not d2.table:
        raise ValueError("derivations use different generator tables")
    sign = -1 if (d1.parity and d2.parity) else 1
    imgs = {}
    for g in range(len(d1.table)):
        v = d1.apply(d2.image(g)) - d2.apply(d1.image(g)).scale(sign)
        if v.terms:
            imgs[g] = v
    shift = (d1.degree_shift[0] + d2.degree_shift[0], d1.degree_shift[1] + d2.degree_shift[1])
    return Derivation(name or f"[{d1.name},{d2.name}]", d1.table, d1.parity + d2.parity, shift, imgs)


def derivations_equal(d1: Derivation, d2: Derivation) -> bool:
    if d1.table is not d2.table:
        return False
    if not d1.images and not d2.images:
        return True
    if d1.parity != d2.parity or d1.degree_shift != d2.degree_shift:
        return False
    return all(d1.image(g) == d2.image(g) for g in range(len(d1.table)))


def nilpotency_check(d: Derivation) -> tuple[bool, str | None]:
    """Whether ``D^2 = 0``; the witness is the first generator label with ``D^2 x != 0``."""
    if d.parity != 1:
        raise ValueError("nilpotency is checked for odd derivations only")
    for g in range(len(d.table)):
        if d.apply(d.image(g)).terms:
            return False, d.table.generators[g].label
    return True, None


# ---------------------------------------------------------------- builders


def _ids(table: GeneratorTable, kind: str) -> list[tuple[int, int]]:
    """``(generator id, adjoint index)`` for one kind."""
    return [(g.id, g.adjoint_index) for g in table.generators if g.kind == kind]


def _need(table: GeneratorTable, *kinds: str, op: str) -> None:
    for k in kinds:
        if not table.has_kind(k):
            raise SchemeError(f"operator {op!r} needs {k} generators (scheme {table.variable_scheme!r})")


def _bilinear(table: GeneratorTable, kind1: str, kind2: str, a: int, coef=1) -> Element:
    """``coef * f^a_{bc} X^b Y^c`` with X of kind1 and Y of kind2."""
    alg = table.algebra
    out = table.zero()
    terms: dict[Monomial, Fraction] = {}
    coef = Fraction(coef)
    for b in range(alg.dim):
        gb = table.find(kind1, b)
        if gb is None:
            continue
        for c in range(alg.dim):
            v = alg.f(a, b, c)
            if not v:
                continue
            gc = table.find(kind2, c)
            if gc is None:
                continue
            e = Element.from_monomial(table, (gb, gc), coef * v)
            for m, x in e.terms.items():
                terms[m] = terms.get(m, 0) + x
    return Element(table, terms) if terms else out


def _gen(table: GeneratorTable, kind: str, a: int) -> Element:
    g = table.find(kind, a)
    return table.zero() if g is None else Element(table, {(g,): Fraction(1)})


def _no_connections(table: GeneratorTable, op: str) -> None:
    if table.has_kind("connection") and not table.has_kind("covariant_ghost_derivative"):
        raise SchemeError(f"operator {op!r} needs covariant ghost derivatives alongside connections")


def gamma(table: GeneratorTable) -> Derivation:
    _need(table, "ghost", op="gamma")
    _no_connections(table, "gamma")
    imgs = {}
    for g, a in _ids(table, "ghost"):
        imgs[g] = _bilinear(table, "ghost", "ghost", a, -HALF)
    for g, a in _ids(table, "connection"):
        imgs[g] = -_gen(table, "covariant_ghost_derivative", a)
    for g, a in _ids(table, "curvature"):
        imgs[g] = _bilinear(table, "curvature", "ghost", a)
    return Derivation("gamma", table, 1, (0, 1), imgs)


def exterior_d(table: GeneratorTable) -> Derivation:
    _need(table, "ghost", "connection", "curvature", "covariant_ghost_derivative", op="d")
    imgs = {}
    for g, a in _ids(table, "ghost"):
        imgs[g] = _gen(table, "covariant_ghost_derivative", a) - _bilinear(table, "connection", "ghost", a)
    for g, a in _ids(table, "connection"):
        imgs[g] = _gen(table, "curvature", a) - _bilinear(table, "connection", "connection", a, HALF)
    for g, a in _ids(table, "curvature"):
        imgs[g] = -_bilinear(table, "connection", "curvature", a)
    for g, a in _ids(table, "covariant_ghost_derivative"):
        imgs[g] = _bilinear(table, "curvature", "ghost", a) - _bilinear(
            table, "connection", "covariant_ghost_derivative", a
        )
    return Derivation("d", table, 1, (1, 0), imgs)


def lam(table: GeneratorTable) -> Derivation:
    """``A^a d/dC^a - (F^a - 1/2 [A,A]^a) d/dDC^a``; even, shifts (form, ghost) by (+1, -1)."""
    _need(table, "ghost", "connection", "curvature", "covariant_ghost_derivative", op="lambda")
    imgs = {}
    for g, a in _ids(table, "ghost"):
        imgs[g] = _gen(table, "connection", a)
    for g, a in _ids(table, "covariant_ghost_derivative"):
        imgs[g] = _bilinear(table, "connection", "connection", a, HALF) - _gen(table, "curvature", a)
    return Derivation("lambda", table, 0, (1, -1), imgs)


def tau(table: GeneratorTable) -> Derivation:
    """``F^a d/dC^a`` summed over every ghost that has a matching curvature."""
    _need(table, "ghost", "curvature", op="tau")
    imgs = {g: _gen(table, "curvature", a) for g, a in _ids(table, "ghost")}
    return Derivation("tau", table, 1, (2, -1), imgs)


def _ideal(table: GeneratorTable, op: str) -> set[int]:
    if table.split is None:
        raise SchemeError(f"operator {op!r} needs a semidirect split")
    return set(table.split.ideal_indices)


def _require_abelian(table: GeneratorTable, op: str) -> set[int]:
    J = _ideal(table, op)
    alg = table.algebra
    for a in J:
        for b in J:
            if alg.bracket(a, b):
                raise SchemeError(f"operator {op!r} requires an abelian ideal")
    return J


def sigma(table: GeneratorTable) -> Derivation:
    """``C^alpha d/dF^alpha`` over the ideal; defined only for an abelian ideal."""
    J = _require_abelian(table, "sigma")
    _need(table, "ghost", "curvature", op="sigma")
    imgs = {g: _gen(table, "ghost", a) for g, a in _ids(table, "curvature") if a in J}
    return Derivation("sigma", table, 1, (-2, 1), imgs)


def counting(table: GeneratorTable, kinds: tuple[str, ...], sector: str | None, name: str) -> Derivation:
    imgs = {}
    for g in table.generators:
        if g.kind in kinds and (sector is None or g.sector == sector):
            imgs[g.id] = Element(table, {(g.id,): Fraction(1)})
    return Derivation(name, table, 0, (0, 0), imgs)


def gamma_s(table: GeneratorTable) -> Derivation:
    """``gamma`` on ghosts and curvatures only."""
    if table.has_kind("connection") or table.has_kind("covariant_ghost_derivative"):
        raise SchemeError("gammaS is defined on ghost and curvature generators only")
    return gamma(table).renamed("gammaS")


def _split_by_ideal_ghosts(d: Derivation, J: set[int]) -> tuple[Derivation, Derivation]:
    table = d.table
    jghost = [g.kind == "ghost" and g.adjoint_index in J for g in table.generators]
    parts: tuple[dict, dict] = ({}, {})
    for gid, img in d.images.items():
        base = int(jghost[gid])
        buckets: tuple[dict, dict] = ({}, {})
        for m, c in img.terms.items():
            delta = sum(jghost[i] for i in m) - base
            if delta not in (0, 1):
                raise InhomogeneousError(f"{d.name} changes the ideal ghost count by {delta}")
            buckets[delta][m] = c
        for k in (0, 1):
            if buckets[k]:
                parts[k][gid] = Element(table, buckets[k])
    return (
        Derivation(f"{d.name}0", table, d.parity, d.degree_shift, parts[0]),
        Derivation(f"{d.name}1", table, d.parity, d.degree_shift, parts[1]),
    )


def gamma_s_parts(table: GeneratorTable) -> tuple[Derivation, Derivation]:
    """``gammaS = gammaS0 + gammaS1`` with ``gammaS1`` raising the ideal ghost count by one."""
    J = _ideal(table, "gammaS0")
    return _split_by_ideal_ghosts(gamma_s(table), J)


def rho_subalgebra(table: GeneratorTable, A: int) -> Derivation:
    """``x^c -> -f^c_{A b} x^b`` on curvatures and ideal ghosts; zero on subalgebra ghosts."""
    J = _ideal(table, "rhoT_e")
    alg = table.algebra
    if A not in table.split.subalg_indices:
        raise ValueError(f"index {A} is not in the subalgebra")
    imgs = {}
    for g in table.generators:
        if g.kind == "ghost" and g.adjoint_index not in J:
            continue
        if g.kind not in ("ghost", "curvature"):
            raise SchemeError("rhoT_e is defined on ghost and curvature generators only")
        terms: dict[Monomial, Fraction] = {}
        for b in range(alg.dim):
            v = alg.f(g.adjoint_index, A, b)
            if v:
                terms[(table.find(g.kind, b),)] = -v
        imgs[g.id] = Element(table, terms)
    return Derivation(f"rhoT_e:{A}", table, 0, (0, 0), imgs)


def partial(table: GeneratorTable, gid: int) -> Derivation:
    """Left derivative with respect to one generator."""
    g = table.generators[gid]
    return Derivation(
        f"d/d{g.label}", table, g.parity, (-g.form_degree, -g.ghost_number), {gid: table.one()}
    )


def rho_ideal(table: GeneratorTable, alpha: int) -> Derivation:
    """``{gammaS1, d/dC^alpha}``."""
    J = _ideal(table, "rhoT_h")
    if alpha not in J:
        raise ValueError(f"index {alpha} is not in the ideal")
    _, g1 = gamma_s_parts(table)
    gid = table.find("ghost", alpha)
    return graded_commutator(g1, partial(table, gid), f"rhoT_h:{alpha}")


OPERATORS: dict[str, Callable[..., Derivation]] = {
    "gamma": gamma,
    "d": exterior_d,
    "lambda": lam,
    "tau": tau,
    "sigma": sigma,
    "gammaS": gamma_s,
    "gammaS0": lambda t: gamma_s_parts(t)[0],
    "gammaS1": lambda t: gamma_s_parts(t)[1],
    "gammaR": lambda t: gamma_s(t).renamed("gammaR"),
    "gammaR1": lambda t: gamma_s_parts(t)[1].renamed("gammaR1"),
    "N_eta": lambda t: counting(t, ("ghost",), "K", "N_eta"),
    "N_C": lambda t: counting(t, ("ghost",), "J", "N_C"),
    "N_CF": lambda t: counting(t, ("ghost", "curvature"), "J", "N_CF"),
}


def build(name: str, table: GeneratorTable) -> Derivation:
    """Operator by name.

    Parametrised names take an adjoint index after a colon:
    ``rhoT_e:A``, ``rhoT_h:alpha`` and ``dC:alpha``.
    """
    head, _, arg = name.partition(":")
    if arg:
        idx = int(arg)
        if head == "rhoT_e":
            return rho_subalgebra(table, idx)
        if head == "rhoT_h":
            return rho_ideal(table, idx)
        if head == "dC":
            gid = table.find("ghost", idx)
            if gid is None:
                raise SchemeError(f"no ghost with adjoint index {idx}")
            return partial(table, gid).renamed(name)
        raise KeyError(f"unknown operator {name!r}")
    try:
        factory = OPERATORS[name]
    except KeyError:
        raise KeyError(f"unknown operator {name!r}") from None
    if name in ("N_eta", "N_C", "N_CF"):
        _ideal(table, name)
    return factory(table)
