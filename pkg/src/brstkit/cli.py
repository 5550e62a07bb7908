"""Command-line entry point.

Every subcommand renders its result to bytes once; identical inputs give
identical bytes, whether the result came from a cold run or the cache.
Errors go to stderr as one JSON object, with exit code 2 for unreadable
input, 3 for mathematically invalid input and 4 for bound or size limits.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__, descent, hs, liealg
from .cohom import cohomology, cohomology_dimension
from .deriv import OPERATORS, SchemeError, build
from .gca import DEFAULT_MAX_SLICE, SCHEMES, GeneratorTable, SliceError, SliceSpec

log = logging.getLogger("brstkit")

EXIT_PARSE, EXIT_INVALID, EXIT_RESOURCE = 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, where: str = ""):
        super().__init__(message)
        self.code, self.kind, self.where = code, kind, where

    def to_json(self) -> dict:
        out = {"error": self.kind, "message": str(self)}
        if self.where:
            out["where"] = self.where
        return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would print usage text instead
        raise CliError(EXIT_PARSE, "usage", message)


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


# ---------------------------------------------------------------- inputs


def parse_split(text: str, n: int) -> liealg.SemidirectSplit:
    """``K=0,1,2;J=3,4,5`` (either side may be empty)."""
    parts = {}
    for chunk in text.split(";"):
        key, eq, vals = chunk.partition("=")
        key = key.strip()
        if not eq or key not in ("K", "J") or key in parts:
            raise CliError(EXIT_PARSE, "split", f"cannot read split {text!r}", "--split")
        try:
            parts[key] = tuple(int(v) for v in vals.split(",") if v.strip())
        except ValueError:
            raise CliError(EXIT_PARSE, "split", f"non-integer index in {chunk!r}", "--split") from None
    K, J = parts.get("K", ()), parts.get("J", ())
    if "J" not in parts:
        J = tuple(i for i in range(n) if i not in K)
    if "K" not in parts:
        K = tuple(i for i in range(n) if i not in J)
    return liealg.SemidirectSplit(K, J)


def parse_slice(text: str) -> SliceSpec:
    """``ghost=3,curvature=0`` style targets."""
    targets = {}
    for chunk in text.split(","):
        key, eq, val = chunk.partition("=")
        try:
            targets[key.strip()] = int(val)
        except ValueError:
            raise CliError(EXIT_PARSE, "slice", f"cannot read slice target {chunk!r}", "--slice") from None
        if not eq:
            raise CliError(EXIT_PARSE, "slice", f"cannot read slice target {chunk!r}", "--slice")
    return SliceSpec.from_dict(targets)


def load_algebra(args) -> liealg.LieAlgebra:
    if args.spec_file:
        try:
            return liealg.load(args.spec_file)
        except liealg.AlgebraParseError as exc:
            raise CliError(EXIT_PARSE, "algebra", str(exc), exc.where or args.spec_file) from None
        except OSError as exc:
            raise CliError(EXIT_PARSE, "algebra", exc.strerror or str(exc), args.spec_file) from None
    try:
        return liealg.builtin(args.algebra)
    except KeyError as exc:
        raise CliError(EXIT_PARSE, "algebra", exc.args[0], "--algebra") from None


def require_valid(alg: liealg.LieAlgebra) -> None:
    bad = liealg.validate(alg)
    if bad:
        raise CliError(EXIT_INVALID, "jacobi", f"{len(bad)} violations, first: {bad[0]}", alg.name)


def resolve_split(args, alg) -> liealg.SemidirectSplit:
    if args.split:
        split = parse_split(args.split, alg.dim)
        abelian = all(not alg.bracket(a, b) for a in split.ideal_indices for b in split.ideal_indices)
        split = liealg.SemidirectSplit(split.subalg_indices, split.ideal_indices, abelian)
    else:
        split = liealg.default_split(alg)
        if split is None:
            raise CliError(EXIT_INVALID, "split", f"no Levi-type split found for {alg.name}; pass --split", "--split")
    try:
        liealg.verify_semidirect(alg, split)
    except liealg.SplitError as exc:
        raise CliError(EXIT_INVALID, "split", str(exc), "--split") from None
    return split


def check_bounds(args) -> None:
    for flag in ("max_curv_degree", "max_ghost", "max_slice", "jobs"):
        v = getattr(args, flag, None)
        if v is not None and v <= 0:
            raise CliError(EXIT_RESOURCE, "bounds", f"--{flag.replace('_', '-')} must be positive", flag)


# ---------------------------------------------------------------- cache


def cache_key(payload: dict) -> str:
    return hashlib.sha256(canonical(dict(payload, version=__version__)).encode()).hexdigest()


def cache_get(cache_dir: str | None, key: str) -> bytes | None:
    if not cache_dir:
        return None
    path = os.path.join(cache_dir, key)
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError:
        return None


def cache_put(cache_dir: str | None, key: str, data: bytes) -> None:
    if not cache_dir:
        return
    os.makedirs(cache_dir, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=cache_dir, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, os.path.join(cache_dir, key))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- rendering


def grid_text(grid: list[list], row_name: str, col_name: str) -> str:
    head = [row_name] + [f"{col_name}={j}" for j in range(len(grid[0]) if grid else 0)]
    body = [[str(i)] + [str(v) for v in row] for i, row in enumerate(grid)]
    widths = [max(len(r[k]) for r in [head] + body) for k in range(len(head))]
    return "\n".join("  ".join(s.rjust(w) for s, w in zip(r, widths)) for r in [head] + body) + "\n"


def emit(result: dict, fmt: str, text) -> bytes:
    if fmt == "json":
        return (canonical(result) + "\n").encode()
    return text(result).encode()


# ---------------------------------------------------------------- subcommands


def cmd_validate(args, alg):
    bad = liealg.validate(alg)
    result = {"algebra": alg.name, "dim": alg.dim, "valid": not bad, "violations": [str(v) for v in bad]}

    def text(r):
        lines = [f"{r['algebra']}: {'valid' if r['valid'] else 'INVALID'} (dim {r['dim']})"]
        return "\n".join(lines + [f"  {v}" for v in r["violations"]]) + "\n"

    return result, text


def cmd_killing(args, alg):
    require_valid(alg)
    kf = liealg.killing_form(alg)
    result = {
        "algebra": alg.name,
        "matrix": [[str(x) for x in row] for row in kf.matrix],
        "rank": kf.rank(),
        "determinant": str(kf.determinant()),
    }

    def text(r):
        return grid_text(r["matrix"], "row", "col") + f"rank {r['rank']}, determinant {r['determinant']}\n"

    return result, text


def _table(args, alg) -> GeneratorTable:
    split = resolve_split(args, alg) if args.scheme.startswith("split") else None
    try:
        return GeneratorTable.build(alg, args.scheme, split)
    except ValueError as exc:
        raise CliError(EXIT_INVALID, "scheme", str(exc), "--scheme") from None


def _derivation(args, table):
    try:
        return build(args.derivation, table)
    except (SchemeError, KeyError, ValueError) as exc:
        raise CliError(EXIT_INVALID, "derivation", str(exc), "--derivation") from None


def cmd_derivation(args, alg):
    require_valid(alg)
    d = _derivation(args, _table(args, alg))
    result = {"derivation": d.name, "images": [[g, img] for g, img in d.image_table()]}

    def text(r):
        return "".join(f"{r['derivation']}({g}) = {img}\n" for g, img in r["images"])

    return result, text


def cmd_cohomology(args, alg):
    require_valid(alg)
    table = _table(args, alg)
    d = _derivation(args, table)
    if args.slice:
        h = cohomology(d, parse_slice(args.slice), args.max_slice)
        result = h.to_json()

        def text(r):
            return f"dim {r['dim']}\n" + "".join(f"  {x}\n" for x in r["representatives"])

        return result, text
    top_g = min(args.max_ghost or 2 * alg.dim, 2 * alg.dim)
    top_d = args.max_curv_degree if table.has_kind("curvature") else 0
    grid = [
        [cohomology_dimension(d, {"ghost": g, "curvature": k} if table.has_kind("curvature") else {"ghost": g}, args.max_slice) for k in range(top_d + 1)]
        for g in range(top_g + 1)
    ]
    result = {"derivation": d.name, "scheme": args.scheme, "dims": grid}
    return result, lambda r: grid_text(r["dims"], "ghost", "deg")


def _direct_job(job):
    alg_json, split, module, g, k, max_size = job
    alg = liealg.from_json(alg_json)
    table = GeneratorTable.build(alg, "split_semidirect", liealg.SemidirectSplit(*split))
    return cohomology_dimension(build("gammaS", table), {"ghost": g, "curvature": k}, max_size)


def cmd_hs_table(args, alg):
    require_valid(alg)
    split = resolve_split(args, alg)
    top = 0 if args.module == "trivial" else args.max_curv_degree
    dec = hs.decompose(alg, split, args.module, top, args.max_slice)
    jobs = [(liealg.to_json(alg), (split.subalg_indices, split.ideal_indices, split.abelian_ideal), args.module, g, k, args.max_slice)
            for g in range(alg.dim + 1) for k in range(top + 1)]
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            direct = list(pool.map(_direct_job, jobs))
    else:
        direct = [_direct_job(j) for j in jobs]
    assembled = dec.dims()
    grid = [[assembled.get((g, k), 0) for k in range(top + 1)] for g in range(alg.dim + 1)]
    direct_grid = [direct[g * (top + 1):(g + 1) * (top + 1)] for g in range(alg.dim + 1)]
    result = {
        "algebra": alg.name,
        "module": args.module,
        "dims": grid,
        "ghost_dims": [sum(row) for row in grid],
        "crosscheck": grid == direct_grid,
        "relative": hs.table_one(dec.relative_part),
    }
    if args.representatives:
        result["representatives"] = {f"{g},{k}": [str(x) for x in v] for (g, k), v in sorted(dec.assembled.items())}

    def text(r):
        out = f"{r['algebra']} ({r['module']} module), crosscheck {'ok' if r['crosscheck'] else 'FAILED'}\n"
        out += grid_text(r["dims"], "ghost", "deg")
        out += "relative part:\n" + grid_text(r["relative"], "gh_C", "deg")
        for key, reps in sorted(r.get("representatives", {}).items()):
            out += "".join(f"[{key}] {x}\n" for x in reps)
        return out

    return result, text


def cmd_descent(args, alg):
    require_valid(alg)
    split = resolve_split(args, alg)
    ctx = descent.DescentContext(alg, split, args.max_curv_degree, args.max_slice)
    cls = descent.classify(alg, split, args.max_curv_degree, ctx)
    if args.action == "classify":
        entries = cls.e2 + cls.f1 + cls.d1f1
        result = {"classes": [{"kind": e.label(), "ghost": e.ghost, "degree": e.degree, "element": str(e.element)} for e in entries]}

        def text(r):
            return "".join(f"{c['kind']:8} gh={c['ghost']} deg={c['degree']}  {c['element']}\n" for c in r["classes"])

        return result, text
    table = descent.build_table(alg, split, args.max_curv_degree, ctx, cls)
    return table.to_json(), lambda r: table.to_text(args.verbose > 0)


def cmd_transgress(args, alg):
    require_valid(alg)
    split = resolve_split(args, alg)
    full = GeneratorTable.build(alg, "split_full", split)
    poly = descent.polynomial_table(full)
    prims = hs.primitives(alg, table=poly)
    d = build("d", full)
    chains = []
    for theta in prims.primitives:
        chain = descent.transgress(theta, full)
        image = descent.project(d.apply(chain.rungs[-1]), poly)
        chains.append({"primitive": str(theta), "rungs": [str(r) for r in chain.rungs], "image": str(image)})
    result = {"algebra": alg.name, "chains": chains}

    def text(r):
        out = ""
        for c in r["chains"]:
            out += f"primitive {c['primitive']}\n"
            out += "".join(f"  rung {k}: {x}\n" for k, x in enumerate(c["rungs"]))
            out += f"  transgresses to {c['image']}\n"
        return out

    return result, text


def cmd_deform_check(args, alg):
    lam, mu = Fraction(args.lam), Fraction(args.mu)
    dalg, omega = liealg.deform_iso21(lam, mu)
    inv, witness = liealg.check_invariant_metric(dalg, omega)
    result = {
        "lambda": str(lam),
        "mu": str(mu),
        "jacobi_valid": liealg.is_valid(dalg),
        "killing_rank": liealg.killing_form(dalg).rank(),
        "metric_invariant": inv,
        "metric_nondegenerate": omega.is_nondegenerate(),
        "metric_determinant": str(omega.determinant()),
    }
    if witness:
        result["invariance_witness"] = list(witness)

    def text(r):
        return "".join(f"{k}: {v}\n" for k, v in sorted(r.items()))

    return result, text


COMMANDS = {
    "validate": cmd_validate,
    "killing": cmd_killing,
    "derivation": cmd_derivation,
    "cohomology": cmd_cohomology,
    "hs-table": cmd_hs_table,
    "descent": cmd_descent,
    "transgress": cmd_transgress,
    "deform-check": cmd_deform_check,
}


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--algebra", default="iso21", help="builtin name, abelianN, or a+b direct sum")
    src.add_argument("--spec-file", help="JSON file with basis and structure constants")
    common.add_argument("--split", help="index sets, e.g. 'K=0,1,2;J=3,4,5'")
    common.add_argument("--scheme", default="small_FC", choices=SCHEMES)
    common.add_argument("--max-curv-degree", type=int, default=4)
    common.add_argument("--max-ghost", type=int)
    common.add_argument("--max-slice", type=int, default=DEFAULT_MAX_SLICE)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--cache-dir", default=os.environ.get("BRST_CACHE_DIR"))
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--verbose", "-v", action="count", default=0)

    p = _Parser(prog="brstkit", description="Lie algebra and small-algebra BRST cohomology")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="Jacobi identity and antisymmetry")
    sub.add_parser("killing", parents=[common], help="Killing form, rank and determinant")
    dp = sub.add_parser("derivation", parents=[common], help="generator-image table of an operator")
    dp.add_argument("--derivation", default="gamma", help=f"one of {sorted(OPERATORS)} or rhoT_e:A")
    cp = sub.add_parser("cohomology", parents=[common], help="cohomology of an operator on slices")
    cp.add_argument("--derivation", default="gammaS")
    cp.add_argument("--slice", help="exact targets, e.g. 'ghost=3,curvature=0'")
    hp = sub.add_parser("hs-table", parents=[common], help="Hochschild-Serre dimensions")
    hp.add_argument("--module", choices=hs.MODULES, default="symmetric")
    hp.add_argument("--representatives", action="store_true")
    ep = sub.add_parser("descent", parents=[common], help="descent classification and table")
    ep.add_argument("action", choices=("table", "classify"))
    sub.add_parser("transgress", parents=[common], help="transgression chains of the primitives")
    fp = sub.add_parser("deform-check", parents=[common], help="deformed iso(2,1) constants and metric")
    fp.add_argument("--lam", default="1")
    fp.add_argument("--mu", default="0")
    return p


def run(argv: list[str] | None = None) -> tuple[int, bytes, bytes]:
    """Returns ``(exit code, stdout bytes, stderr bytes)``."""
    try:
        args = make_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.WARNING)
        check_bounds(args)
        alg = load_algebra(args)
        payload = {
            "algebra": alg.canonical_json(),
            "command": args.command,
            "action": getattr(args, "action", None),
            "scheme": args.scheme,
            "split": args.split,
            "bounds": [args.max_curv_degree, args.max_ghost, args.max_slice],
            "format": args.format,
            "verbose": args.verbose > 0,
            "extra": {k: getattr(args, k, None) for k in ("derivation", "slice", "module", "representatives", "lam", "mu")},
        }
        key = cache_key(payload)
        hit = cache_get(args.cache_dir, key)
        if hit is not None:
            log.debug("cache hit %s", key)
            return 0, hit, b""
        result, text = COMMANDS[args.command](args, alg)
        out = emit(result, args.format, text)
        if args.command == "validate" and not result["valid"]:
            err = CliError(EXIT_INVALID, "jacobi", f"{len(result['violations'])} violations", alg.name)
            return err.code, out, (canonical(err.to_json()) + "\n").encode()
        cache_put(args.cache_dir, key, out)
        return 0, out, b""
    except CliError as exc:
        return exc.code, b"", (canonical(exc.to_json()) + "\n").encode()
    except SliceError as exc:
        return EXIT_RESOURCE, b"", (canonical({"error": "slice", "message": str(exc)}) + "\n").encode()
    except (liealg.SplitError, hs.NotSemisimple, descent.DescentError) as exc:
        return EXIT_INVALID, b"", (canonical({"error": "invalid", "message": str(exc)}) + "\n").encode()
    except ValueError as exc:
        return EXIT_PARSE, b"", (canonical({"error": "value", "message": str(exc)}) + "\n").encode()


def main(argv: list[str] | None = None) -> int:
    code, out, err = run(argv)
    sys.stdout.buffer.write(out)
    sys.stdout.flush()
    sys.stderr.buffer.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
