"""Finite-dimensional Lie algebras with exact rational structure constants."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from . import linalg


class AlgebraParseError(ValueError):
    """Malformed algebra description; ``where`` names the line or field."""

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class SplitError(ValueError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Structure constants ``f^c_{ab}`` stored sparsely for ``a < b``.

    ``structure`` maps ``(a, b)`` to ``{c: value}``.  Entries with ``a == b``
    are kept only so that :func:`validate` can report them.
    """

    name: str
    basis: tuple[str, ...]
    structure: Mapping[tuple[int, int], Mapping[int, Fraction]]
    metric_for_indices: tuple[tuple[Fraction, ...], ...] | None = None
    _dense: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.basis)
        if n == 0:
            raise ValueError("a Lie algebra needs at least one basis element")
        clean: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (a, b), vec in self.structure.items():
            for idx in (a, b, *vec):
                if not 0 <= idx < n:
                    raise ValueError(f"structure index {idx} out of range for dim {n}")
            if a > b:
                raise ValueError("structure keys must have a <= b")
            v = {c: _frac(x) for c, x in vec.items() if x}
            if v:
                clean[(a, b)] = v
        object.__setattr__(self, "structure", clean)
        if self.metric_for_indices is not None:
            m = tuple(tuple(_frac(x) for x in row) for row in self.metric_for_indices)
            if len(m) != n or any(len(r) != n for r in m):
                raise ValueError("metric must be dim x dim")
            object.__setattr__(self, "metric_for_indices", m)
        dense = [[{} for _ in range(n)] for _ in range(n)]
        for (a, b), vec in clean.items():
            dense[a][b] = dict(vec)
            if a != b:
                dense[b][a] = {c: -x for c, x in vec.items()}
        object.__setattr__(self, "_dense", tuple(tuple(r) for r in dense))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def f(self, c: int, a: int, b: int) -> Fraction:
        """The constant ``f^c_{ab}``, i.e. the ``c`` component of ``[e_a, e_b]``."""
        return self._dense[a][b].get(c, Fraction(0))

    def bracket(self, a: int, b: int) -> dict[int, Fraction]:
        return dict(self._dense[a][b])

    def metric(self) -> tuple[tuple[Fraction, ...], ...]:
        if self.metric_for_indices is not None:
            return self.metric_for_indices
        n = self.dim
        return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))

    def is_abelian(self) -> bool:
        return not self.structure

    def subalgebra_constants(self, indices: Sequence[int]) -> "LieAlgebra":
        """Restrict the constants to ``indices`` (no closure check)."""
        pos = {a: i for i, a in enumerate(indices)}
        st: dict[tuple[int, int], dict[int, Fraction]] = {}
        for i, a in enumerate(indices):
            for j in range(i + 1, len(indices)):
                vec = {pos[c]: v for c, v in self._dense[a][indices[j]].items() if c in pos}
                if vec:
                    st[(i, j)] = vec
        return LieAlgebra(f"{self.name}|sub", tuple(self.basis[a] for a in indices), st)

    def canonical_json(self) -> str:
        return json.dumps(to_json(self), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class SemidirectSplit:
    """``G = K |x J``: subalgebra indices (ghosts eta) and ideal indices (ghosts C)."""

    subalg_indices: tuple[int, ...]
    ideal_indices: tuple[int, ...]
    abelian_ideal: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "subalg_indices", tuple(self.subalg_indices))
        object.__setattr__(self, "ideal_indices", tuple(self.ideal_indices))


@dataclass(frozen=True)
class BilinearForm:
    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        m = tuple(tuple(_frac(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", m)
        n = len(m)
        if any(len(r) != n for r in m):
            raise ValueError("bilinear form must be square")
        for i in range(n):
            for j in range(i):
                if m[i][j] != m[j][i]:
                    raise ValueError("bilinear form must be symmetric")

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def rank(self) -> int:
        return linalg.dense_rank(self.matrix)

    def determinant(self) -> Fraction:
        return linalg.determinant(self.matrix)

    def is_nondegenerate(self) -> bool:
        return self.determinant() != 0


@dataclass(frozen=True)
class Violation:
    kind: str  # "antisymmetry" or "jacobi"
    indices: tuple[int, ...]
    value: Fraction

    def __str__(self) -> str:
        return f"{self.kind} violated at {self.indices}: {self.value}"


def jacobi_component(alg: LieAlgebra, a: int, b: int, c: int, d: int) -> Fraction:
    f = alg.f
    total = Fraction(0)
    for e in range(alg.dim):
        total += f(e, a, b) * f(d, e, c) + f(e, b, c) * f(d, e, a) + f(e, c, a) * f(d, e, b)
    return total


def validate(alg: LieAlgebra) -> list[Violation]:
    """Every violated antisymmetry or Jacobi component; empty means valid."""
    report = []
    for (a, b), vec in sorted(alg.structure.items()):
        if a == b:
            for c, v in sorted(vec.items()):
                report.append(Violation("antisymmetry", (a, b, c), v))
    n = alg.dim
    if report:
        triples = [(a, b, c) for a in range(n) for b in range(n) for c in range(n)]
    else:
        # the Jacobi sum is alternating in (a, b, c) once f is antisymmetric
        triples = list(combinations(range(n), 3))
    for a, b, c in triples:
        for d in range(n):
            v = jacobi_component(alg, a, b, c, d)
            if v:
                report.append(Violation("jacobi", (a, b, c, d), v))
    return report


def is_valid(alg: LieAlgebra) -> bool:
    return not validate(alg)


def killing_form(alg: LieAlgebra) -> BilinearForm:
    """``G_{AB} = sum_{C,D} f^D_{AC} f^C_{BD}``."""
    n = alg.dim
    f = alg.f
    m = [[Fraction(0)] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            s = Fraction(0)
            for c in range(n):
                for d in range(n):
                    x = f(d, a, c)
                    if x:
                        s += x * f(c, b, d)
            m[a][b] = m[b][a] = s
    return BilinearForm(tuple(tuple(r) for r in m))


@dataclass(frozen=True)
class SemidirectCertificate:
    split: SemidirectSplit
    subalgebra_closed: bool
    ideal_stable: bool
    ideal_abelian: bool
    subalgebra_killing: BilinearForm
    subalgebra_killing_determinant: Fraction


def verify_semidirect(alg: LieAlgebra, split: SemidirectSplit) -> SemidirectCertificate:
    K, J = split.subalg_indices, split.ideal_indices
    if sorted(K + J) != list(range(alg.dim)) or len(set(K)) != len(K):
        raise SplitError("subalgebra and ideal indices must partition the basis")
    kset, jset = set(K), set(J)
    for a, b in combinations(K, 2):
        for c, v in alg.bracket(a, b).items():
            if c not in kset:
                raise SplitError(f"[{alg.basis[a]}, {alg.basis[b]}] leaves the subalgebra")
    for a in range(alg.dim):
        for b in J:
            for c in alg.bracket(a, b):
                if c not in jset:
                    raise SplitError(f"[{alg.basis[a]}, {alg.basis[b]}] leaves the ideal")
    abelian = all(not alg.bracket(a, b) for a, b in combinations(J, 2))
    if split.abelian_ideal and not abelian:
        raise SplitError("ideal declared abelian but has nonzero brackets")
    kill = killing_form(alg.subalgebra_constants(K)) if K else BilinearForm(())
    det = kill.determinant()
    if det == 0:
        raise SplitError("Killing form of the subalgebra is degenerate (not semisimple)")
    return SemidirectCertificate(split, True, True, abelian, kill, det)


def check_invariant_metric(alg: LieAlgebra, omega: BilinearForm) -> tuple[bool, tuple[int, int, int] | None]:
    """Ad-invariance ``sum_D f^D_{CA} W_{DB} + f^D_{CB} W_{AD} = 0``; returns a witness (A, B, C)."""
    n = alg.dim
    if omega.dim != n:
        raise ValueError(f"metric has dimension {omega.dim}, algebra has {n}")
    W = omega.matrix
    for A in range(n):
        for B in range(n):
            for C in range(n):
                s = Fraction(0)
                for D, x in alg.bracket(C, A).items():
                    s += x * W[D][B]
                for D, x in alg.bracket(C, B).items():
                    s += x * W[A][D]
                if s:
                    return False, (A, B, C)
    return True, None


# ---------------------------------------------------------------- builtins

EPS = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}
EUCLID = (1, 1, 1)
MINKOWSKI = (-1, 1, 1)


def _eps(a: int, b: int, c: int) -> int:
    return EPS.get((a, b, c), 0)


def _diag(d: Sequence[int]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(d[i]) if i == j else Fraction(0) for j in range(len(d))) for i in range(len(d)))


def _block(m1, m2):
    n1, n2 = len(m1), len(m2)
    out = []
    for i in range(n1):
        out.append(tuple(m1[i]) + (Fraction(0),) * n2)
    for i in range(n2):
        out.append((Fraction(0),) * n1 + tuple(m2[i]))
    return tuple(out)


def so3_like(signature: Sequence[int] = EUCLID, name: str = "so3", prefix: str = "J") -> LieAlgebra:
    """``[J_a, J_b] = eps_abc J^c`` with the index raised by ``diag(signature)``."""
    st = {}
    for a, b in combinations(range(3), 2):
        vec = {}
        for c in range(3):
            e = _eps(a, b, c)
            if e:
                vec[c] = Fraction(e, signature[c])  # g^{cc} = 1/g_cc
        st[(a, b)] = vec
    return LieAlgebra(name, tuple(f"{prefix}{i + 1}" for i in range(3)), st, _diag(signature))


def iso_like(signature: Sequence[int], name: str, lam=0) -> LieAlgebra:
    """Basis ``J1..J3, P1..P3``; ``[P_a, P_b] = lam eps_abc J^c`` deforms it."""
    lam = _frac(lam)
    st: dict[tuple[int, int], dict[int, Fraction]] = {}
    for a, b in combinations(range(3), 2):
        for c in range(3):
            e = _eps(a, b, c)
            if not e:
                continue
            coef = Fraction(e, signature[c])
            st.setdefault((a, b), {})[c] = coef
            if lam:
                st.setdefault((a + 3, b + 3), {})[c] = lam * coef
    for a in range(3):
        for b in range(3):
            for c in range(3):
                e = _eps(a, b, c)
                if e:
                    st.setdefault((a, b + 3), {})[c + 3] = Fraction(e, signature[c])
    g = _diag(signature)
    basis = ("J1", "J2", "J3", "P1", "P2", "P3")
    return LieAlgebra(name, basis, st, _block(g, g))


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(f"abelian{n}", tuple(f"X{i + 1}" for i in range(n)), {})


def direct_sum(x: LieAlgebra, y: LieAlgebra, name: str | None = None) -> LieAlgebra:
    off = x.dim
    st = {k: dict(v) for k, v in x.structure.items()}
    for (a, b), vec in y.structure.items():
        st[(a + off, b + off)] = {c + off: v for c, v in vec.items()}
    basis = tuple(f"{l}" for l in x.basis) + tuple(f"{l}'" if l in x.basis else l for l in y.basis)
    return LieAlgebra(name or f"{x.name}+{y.name}", basis, st, _block(x.metric(), y.metric()))


def so3() -> LieAlgebra:
    return so3_like(EUCLID, "so3")


def so21() -> LieAlgebra:
    return so3_like(MINKOWSKI, "so21")


def iso3() -> LieAlgebra:
    return iso_like(EUCLID, "iso3")


def iso21() -> LieAlgebra:
    return iso_like(MINKOWSKI, "iso21")


def so21xso21() -> LieAlgebra:
    return direct_sum(so21(), so21(), "so21xso21")


BUILTINS = {
    "so3": so3,
    "so21": so21,
    "iso3": iso3,
    "iso21": iso21,
    "so21xso21": so21xso21,
}


def builtin(name: str) -> LieAlgebra:
    """Builtin by name; ``abelianN`` and ``+``-joined direct sums are accepted."""
    parts = name.split("+")
    if len(parts) > 1:
        alg = builtin(parts[0])
        for p in parts[1:]:
            alg = direct_sum(alg, builtin(p))
        return LieAlgebra(name, alg.basis, alg.structure, alg.metric_for_indices)
    m = re.fullmatch(r"abelian(\d+)", name)
    if m:
        return abelian(int(m.group(1)))
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin algebra {name!r}") from None


def default_split(alg: LieAlgebra) -> SemidirectSplit | None:
    """Levi-type split for the builtin shapes: semisimple blocks to K, the rest to J.

    Only block structure is inspected (connected components of the bracket
    graph); each block goes to K when its Killing form is nondegenerate.
    """
    n = alg.dim
    if alg.name.startswith(("iso3", "iso21")) and n == 6:
        return SemidirectSplit((0, 1, 2), (3, 4, 5), True)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for (a, b), vec in alg.structure.items():
        for c in (b, *vec):
            parent[find(a)] = find(c)
    blocks: dict[int, list[int]] = {}
    for i in range(n):
        blocks.setdefault(find(i), []).append(i)
    K, J = [], []
    for members in blocks.values():
        sub = alg.subalgebra_constants(members)
        if killing_form(sub).determinant() != 0:
            K.extend(members)
        else:
            J.extend(members)
    K.sort()
    J.sort()
    ab = all(not alg.bracket(a, b) for a, b in combinations(J, 2))
    split = SemidirectSplit(tuple(K), tuple(J), ab)
    try:
        verify_semidirect(alg, split)
    except SplitError:
        return None
    return split


def deform_iso21(lam, mu) -> tuple[LieAlgebra, BilinearForm]:
    """Deformed iso(2,1) constants and the metric ``Omega0 + mu diag(g, lam g)``."""
    lam, mu = _frac(lam), _frac(mu)
    alg = iso_like(MINKOWSKI, f"iso21[lambda={lam},mu={mu}]", lam)
    g = _diag(MINKOWSKI)
    z = Fraction(0)
    m = [[z] * 6 for _ in range(6)]
    for a in range(3):
        m[a][a + 3] = m[a + 3][a] = g[a][a]
        m[a][a] += mu * g[a][a]
        m[a + 3][a + 3] += mu * lam * g[a][a]
    return alg, BilinearForm(tuple(tuple(r) for r in m))


def omega0_iso21() -> BilinearForm:
    return deform_iso21(0, 0)[1]


# ---------------------------------------------------------------- JSON files


def to_json(alg: LieAlgebra) -> dict:
    entries = []
    for (a, b), vec in sorted(alg.structure.items()):
        for c, v in sorted(vec.items()):
            entries.append([a, b, c, str(v)])
    out = {"name": alg.name, "basis": list(alg.basis), "structure": entries}
    if alg.metric_for_indices is not None:
        out["metric"] = [[str(x) for x in row] for row in alg.metric_for_indices]
    return out


def _parse_rational(x, where: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise AlgebraParseError("expected a rational as 'p/q' string or integer", where)
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise AlgebraParseError(f"bad rational {x!r}", where) from None


def from_json(data) -> LieAlgebra:
    if not isinstance(data, dict):
        raise AlgebraParseError("top level must be an object")
    for key in ("name", "basis", "structure"):
        if key not in data:
            raise AlgebraParseError("missing field", key)
    name = data["name"]
    if not isinstance(name, str):
        raise AlgebraParseError("must be a string", "name")
    basis = data["basis"]
    if not isinstance(basis, list) or not basis or not all(isinstance(b, str) for b in basis):
        raise AlgebraParseError("must be a non-empty list of strings", "basis")
    if len(set(basis)) != len(basis):
        raise AlgebraParseError("labels must be unique", "basis")
    n = len(basis)
    st: dict[tuple[int, int], dict[int, Fraction]] = {}
    seen: dict[tuple[int, int, int], tuple[int, int]] = {}
    entries = data["structure"]
    if not isinstance(entries, list):
        raise AlgebraParseError("must be a list", "structure")
    for k, e in enumerate(entries):
        where = f"structure[{k}]"
        if not isinstance(e, list) or len(e) != 4:
            raise AlgebraParseError("entry must be [a, b, c, 'p/q']", where)
        a, b, c = e[:3]
        for j, idx in enumerate((a, b, c)):
            if isinstance(idx, bool) or not isinstance(idx, int) or not 0 <= idx < n:
                raise AlgebraParseError(f"index must be an integer in [0, {n})", f"{where}[{j}]")
        v = _parse_rational(e[3], f"{where}[3]")
        key = (min(a, b), max(a, b), c)
        if key in seen:
            prev = seen[key]
            what = "duplicate entry" if prev == (a, b) else f"both ({a},{b}) and ({b},{a}) given"
            raise AlgebraParseError(what, where)
        seen[key] = (a, b)
        if a > b:
            a, b, v = b, a, -v
        st.setdefault((a, b), {})[c] = v
    metric = None
    if data.get("metric") is not None:
        rows = data["metric"]
        if not isinstance(rows, list) or len(rows) != n:
            raise AlgebraParseError(f"must be a {n}x{n} matrix", "metric")
        metric = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n:
                raise AlgebraParseError(f"row must have {n} entries", f"metric[{i}]")
            metric.append(tuple(_parse_rational(x, f"metric[{i}][{j}]") for j, x in enumerate(row)))
        for i in range(n):
            for j in range(i):
                if metric[i][j] != metric[j][i]:
                    raise AlgebraParseError("metric must be symmetric", f"metric[{i}][{j}]")
    return LieAlgebra(name, tuple(basis), st, tuple(metric) if metric else None)


def loads(text: str) -> LieAlgebra:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlgebraParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return from_json(data)


def load(path) -> LieAlgebra:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
