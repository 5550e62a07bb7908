"""Free graded-commutative algebra on ghosts, potentials and curvatures.

A monomial is a sorted tuple of generator ids (even generators may
repeat); an :class:`Element` maps monomials to nonzero ``Fraction``
coefficients.  Parity of a generator is ``(form_degree + ghost_number) % 2``
and reordering two odd factors costs a sign.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .liealg import LieAlgebra, SemidirectSplit

Monomial = tuple[int, ...]

KINDS = ("ghost", "connection", "curvature", "covariant_ghost_derivative")
KIND_DEGREES = {
    "ghost": (0, 1),
    "connection": (1, 0),
    "curvature": (2, 0),
    "covariant_ghost_derivative": (1, 1),
}

# label prefixes: plain scheme, then K / J sectors of a semidirect split
_PREFIX = {
    "ghost": ("C", "eta", "C"),
    "connection": ("A", "B", "A"),
    "curvature": ("F", "G", "F"),
    "covariant_ghost_derivative": ("DC", "Deta", "DC"),
}

SCHEMES = {
    "ce_ghost": ("ghost",),
    "small_FC": ("ghost", "curvature"),
    "small_full": KINDS,
    "split_semidirect": ("ghost", "curvature"),
    "split_full": KINDS,
}


class SliceError(ValueError):
    pass


class UnboundedSlice(SliceError):
    pass


class SliceTooLarge(SliceError):
    pass


@dataclass(frozen=True)
class Generator:
    id: int
    label: str
    kind: str
    adjoint_index: int
    form_degree: int
    ghost_number: int
    sector: str = ""

    @property
    def parity(self) -> int:
        return (self.form_degree + self.ghost_number) % 2


@dataclass(frozen=True, eq=False)
class GeneratorTable:
    generators: tuple[Generator, ...]
    algebra: LieAlgebra
    variable_scheme: str
    split: SemidirectSplit | None = None
    odd: tuple[bool, ...] = field(init=False, repr=False)
    _by_label: dict = field(init=False, repr=False)
    _by_kind: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        labels = [g.label for g in self.generators]
        if len(set(labels)) != len(labels):
            raise ValueError("generator labels must be unique")
        for i, g in enumerate(self.generators):
            if g.id != i:
                raise ValueError("generator ids must be 0..n-1 in order")
            if not 0 <= g.adjoint_index < self.algebra.dim:
                raise ValueError(f"adjoint index out of range for {g.label}")
            if KIND_DEGREES[g.kind] != (g.form_degree, g.ghost_number):
                raise ValueError(f"degrees of {g.label} do not match kind {g.kind}")
        object.__setattr__(self, "odd", tuple(bool(g.parity) for g in self.generators))
        object.__setattr__(self, "_by_label", {g.label: g.id for g in self.generators})
        object.__setattr__(
            self, "_by_kind", {(g.kind, g.adjoint_index): g.id for g in self.generators}
        )

    @classmethod
    def build(
        cls, algebra: LieAlgebra, scheme: str = "small_full", split: SemidirectSplit | None = None
    ) -> "GeneratorTable":
        if scheme not in SCHEMES:
            raise ValueError(f"unknown variable scheme {scheme!r}")
        if scheme.startswith("split") and split is None:
            raise ValueError(f"scheme {scheme!r} needs a semidirect split")
        kinds = SCHEMES[scheme]
        gens = []
        for kind in KINDS:
            if kind not in kinds:
                continue
            form, ghost = KIND_DEGREES[kind]
            for a in range(algebra.dim):
                if split is None:
                    sector = ""
                    label = f"{_PREFIX[kind][0]}{a + 1}"
                else:
                    sector = "K" if a in split.subalg_indices else "J"
                    members = split.subalg_indices if sector == "K" else split.ideal_indices
                    pre = _PREFIX[kind][1 if sector == "K" else 2]
                    label = f"{pre}{members.index(a) + 1}"
                gens.append(Generator(len(gens), label, kind, a, form, ghost, sector))
        return cls(tuple(gens), algebra, scheme, split)

    def __len__(self) -> int:
        return len(self.generators)

    def id_of(self, label: str) -> int:
        try:
            return self._by_label[label]
        except KeyError:
            raise KeyError(f"unknown generator label {label!r}") from None

    def find(self, kind: str, adjoint_index: int) -> int | None:
        return self._by_kind.get((kind, adjoint_index))

    def has_kind(self, kind: str) -> bool:
        return any(g.kind == kind for g in self.generators)

    def degrees(self, mono: Monomial) -> tuple[int, int]:
        gens = self.generators
        return (sum(gens[i].form_degree for i in mono), sum(gens[i].ghost_number for i in mono))

    def gen(self, label: str) -> "Element":
        return Element(self, {(self.id_of(label),): Fraction(1)})

    def one(self) -> "Element":
        return Element(self, {(): Fraction(1)})

    def zero(self) -> "Element":
        return Element(self, {})

    def parse(self, text: str) -> "Element":
        return parse_element(self, text)


def normalize(table: GeneratorTable, factors: Sequence[int], coefficient=1) -> tuple[Monomial, Fraction] | None:
    """Canonical monomial for a product of generators, or ``None`` if zero."""
    n = len(table)
    for i in factors:
        if not 0 <= i < n:
            raise KeyError(f"unknown generator id {i}")
    coefficient = Fraction(coefficient)
    if coefficient == 0:
        return None
    odd = table.odd
    odds = [i for i in factors if odd[i]]
    if len(set(odds)) != len(odds):
        return None
    inversions = 0
    for x in range(len(odds)):
        ox = odds[x]
        for y in range(x + 1, len(odds)):
            if odds[y] < ox:
                inversions += 1
    if inversions % 2:
        coefficient = -coefficient
    return tuple(sorted(factors)), coefficient


def mul_monomials(odd: Sequence[bool], m1: Monomial, m2: Monomial) -> tuple[Monomial, int]:
    """Product of canonical monomials as ``(monomial, sign)``; sign 0 means zero."""
    if not m1:
        return m2, 1
    if not m2:
        return m1, 1
    odd1 = [i for i in m1 if odd[i]]
    swaps = 0
    if odd1:
        s1 = set(odd1)
        for y in m2:
            if odd[y]:
                if y in s1:
                    return (), 0
                swaps += sum(1 for x in odd1 if x > y)
    return tuple(sorted(m1 + m2)), (-1 if swaps % 2 else 1)


class Element:
    """Immutable linear combination of canonical monomials."""

    __slots__ = ("table", "terms")

    def __init__(self, table: GeneratorTable, terms: Mapping[Monomial, Fraction] | None = None):
        self.table = table
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = Fraction(c)
        self.terms: dict[Monomial, Fraction] = clean

    @classmethod
    def from_monomial(cls, table: GeneratorTable, factors: Sequence[int], coefficient=1) -> "Element":
        res = normalize(table, factors, coefficient)
        if res is None:
            return cls(table)
        return cls(table, {res[0]: res[1]})

    def _check(self, other: "Element") -> None:
        if other.table is not self.table:
            raise ValueError("elements belong to different generator tables")

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.terms == ({(): Fraction(other)} if other else {})
        if not isinstance(other, Element):
            return NotImplemented
        return self.table is other.table and self.terms == other.terms

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other) -> "Element":
        if isinstance(other, (int, Fraction)):
            other = Element(self.table, {(): Fraction(other)})
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Element(self.table, out)

    __radd__ = __add__

    def __neg__(self) -> "Element":
        return Element(self.table, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Element":
        return self + (-other)

    def __rsub__(self, other) -> "Element":
        return (-self) + other

    def scale(self, s) -> "Element":
        s = Fraction(s)
        if s == 0:
            return Element(self.table)
        return Element(self.table, {m: c * s for m, c in self.terms.items()})

    def __mul__(self, other) -> "Element":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Element):
            return NotImplemented
        self._check(other)
        odd = self.table.odd
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m, s = mul_monomials(odd, m1, m2)
                if s:
                    out[m] = out.get(m, 0) + s * c1 * c2
        return Element(self.table, out)

    def __rmul__(self, other) -> "Element":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int) -> "Element":
        out = self.table.one()
        for _ in range(n):
            out = out * self
        return out

    def monomials(self) -> list[Monomial]:
        return sorted(self.terms)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def multidegrees(self) -> set[tuple[int, int]]:
        return {self.table.degrees(m) for m in self.terms}

    def parity(self) -> int:
        """Common parity of all terms (0 for the zero element)."""
        pars = {sum(d) % 2 for d in self.multidegrees()}
        if len(pars) > 1:
            raise ValueError("element has mixed parity")
        return pars.pop() if pars else 0

    def substitute_zero(self, ids: Iterable[int]) -> "Element":
        """Set the given generators to zero."""
        kill = set(ids)
        return Element(self.table, {m: c for m, c in self.terms.items() if not kill.intersection(m)})

    def __str__(self) -> str:
        return format_element(self)

    def __repr__(self) -> str:
        return f"Element({format_element(self)!r})"


# ---------------------------------------------------------------- text syntax


def _fmt_monomial(table: GeneratorTable, mono: Monomial) -> str:
    parts = []
    i = 0
    while i < len(mono):
        j = i
        while j < len(mono) and mono[j] == mono[i]:
            j += 1
        label = table.generators[mono[i]].label
        parts.append(label if j - i == 1 else f"{label}^{j - i}")
        i = j
    return " ".join(parts)


def format_element(x: Element) -> str:
    if not x.terms:
        return "0"
    out = []
    for k, mono in enumerate(sorted(x.terms)):
        c = x.terms[mono]
        neg = c < 0
        a = -c if neg else c
        if mono:
            body = _fmt_monomial(x.table, mono)
            if a != 1:
                body = f"{a} * {body}"
        else:
            body = str(a)
        if k == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z][A-Za-z0-9_]*)|(\S))")


def parse_element(table: GeneratorTable, text: str) -> Element:
    """Parse ``coef * label^k label ...`` terms joined by ``+``/``-``."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", num))
        elif name is not None:
            tokens.append(("name", name))
        else:
            tokens.append(("op", op))
        pos = m.end()
    if not tokens:
        raise ValueError("empty element text")
    total = table.zero()
    i = 0
    first = True
    while i < len(tokens):
        sign = 1
        if tokens[i][0] == "op" and tokens[i][1] in "+-":
            sign = -1 if tokens[i][1] == "-" else 1
            i += 1
        elif not first:
            raise ValueError(f"expected '+' or '-' in {text!r}")
        first = False
        coef = Fraction(sign)
        seen_any = False
        if i < len(tokens) and tokens[i][0] == "num":
            coef *= Fraction(tokens[i][1])
            i += 1
            seen_any = True
            if i < len(tokens) and tokens[i] == ("op", "*"):
                i += 1
        factors: list[int] = []
        while i < len(tokens) and tokens[i][0] == "name":
            gid = table.id_of(tokens[i][1])
            i += 1
            power = 1
            if i < len(tokens) and tokens[i] == ("op", "^"):
                if i + 1 >= len(tokens) or tokens[i + 1][0] != "num" or "/" in tokens[i + 1][1]:
                    raise ValueError(f"bad exponent in {text!r}")
                power = int(tokens[i + 1][1])
                i += 2
            factors.extend([gid] * power)
            seen_any = True
            if i < len(tokens) and tokens[i] == ("op", "*"):
                i += 1
        if not seen_any:
            raise ValueError(f"malformed term in {text!r}")
        total = total + Element.from_monomial(table, factors, coef)
    return total


# ---------------------------------------------------------------- slices


def grading_weight(gen: Generator, name: str) -> int:
    if name == "form":
        return gen.form_degree
    if name == "ghost":
        return gen.ghost_number
    if name == "degree":
        return 1
    kind, _, sector = name.partition(":")
    if kind not in KIND_DEGREES:
        raise ValueError(f"unknown grading {name!r}")
    if gen.kind != kind:
        return 0
    if sector in ("", "*") or gen.sector == sector:
        return 1
    return 0


@dataclass(frozen=True)
class SliceSpec:
    """Exact targets for a set of gradings, e.g. ``{"ghost": 3, "curvature:*": 2}``."""

    targets: tuple[tuple[str, int], ...]

    @classmethod
    def of(cls, **targets: int) -> "SliceSpec":
        return cls.from_dict(targets)

    @classmethod
    def from_dict(cls, targets: Mapping[str, int]) -> "SliceSpec":
        return cls(tuple(sorted((k.replace("__", ":"), int(v)) for k, v in targets.items())))

    def as_dict(self) -> dict[str, int]:
        return dict(self.targets)

    def shifted(self, shifts: Mapping[str, int]) -> "SliceSpec":
        return SliceSpec(tuple(sorted((k, v + shifts.get(k, 0)) for k, v in self.targets)))

    def is_empty(self) -> bool:
        return any(v < 0 for _, v in self.targets)


DEFAULT_MAX_SLICE = 200_000


def basis_slice(table: GeneratorTable, spec: SliceSpec | Mapping[str, int], max_size: int = DEFAULT_MAX_SLICE) -> list[Monomial]:
    """All canonical monomials meeting the targets, in lexicographic order."""
    if not isinstance(spec, SliceSpec):
        spec = SliceSpec.from_dict(spec)
    if spec.is_empty():
        return []
    names = [k for k, _ in spec.targets]
    goal = [v for _, v in spec.targets]
    gens = table.generators
    weights = [[grading_weight(g, k) for k in names] for g in gens]
    caps = []
    for g, w in zip(gens, weights):
        if g.parity:
            caps.append(1)
            continue
        bound = None
        for wk, tk in zip(w, goal):
            if wk > 0:
                b = tk // wk
                bound = b if bound is None else min(bound, b)
        if bound is None:
            raise UnboundedSlice(f"generator {g.label} is not bounded by {dict(spec.targets)}")
        caps.append(bound)
    n = len(gens)
    # suffix maxima for pruning
    reach = [[0] * len(goal) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        reach[i] = [reach[i + 1][k] + weights[i][k] * caps[i] for k in range(len(goal))]
    out: list[Monomial] = []
    cur: list[int] = []

    def rec(i: int, rem: list[int]) -> None:
        if any(rem[k] > reach[i][k] for k in range(len(rem))):
            return
        if i == n:
            if not any(rem):
                out.append(tuple(cur))
                if len(out) > max_size:
                    raise SliceTooLarge(f"slice {dict(spec.targets)} exceeds {max_size} monomials")
            return
        w = weights[i]
        for e in range(caps[i] + 1):
            nxt = [rem[k] - e * w[k] for k in range(len(rem))]
            if any(v < 0 for v in nxt):
                break
            cur.extend([i] * e)
            rec(i + 1, nxt)
            del cur[len(cur) - e:]

    rec(0, list(goal))
    out.sort()
    return out
