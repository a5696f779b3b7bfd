"""Command-line front end.

    interlace forward     PROBLEM.json
    interlace invert      PROBLEM.json [--method closed|continuation|both]
    interlace preimages   PROBLEM.json [--limit N] [--samples N] [--seed S]
    interlace crease-demo --lambda A B [--samples N]
    interlace verify      PROBLEM.json [--trials N] [--seed S]

Problem files are UTF-8 JSON; complex numbers are ``[re, im]`` pairs.
Output is JSON (CSV for crease-demo) with floats written to 17
significant digits, so identical inputs give byte-identical output.

Exit codes: 0 ok, 2 malformed input, 3 numerical failure, 4 rejected
certificate or failed property, 5 target does not interlace.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .core import (
    BORDERED,
    MODES,
    RANK_ONE,
    TolerancePolicy,
    as_spectrum,
    check_interlacing_bordered,
    check_interlacing_rank_one,
    classify_faces,
    face_image_bordered,
    face_image_rank_one,
    spread,
)
from .errors import InputError, NotInterlacing, NumericalError
from .forward import (
    check_slice_identities,
    forward,
    forward_rank_one,
    jacobian_F,
    jacobian_G,
)
from .inverse import (
    ContinuationOptions,
    certify,
    invert_bordered_closed,
    invert_bordered_continuation,
    invert_rank_one_closed,
    invert_rank_one_continuation,
)
from .preimage import (
    PhaseAssignment,
    enumerate_real_preimages,
    orthant_solution,
    preimage_count,
    sample_complex_preimage,
    sign_patterns,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERIC = 3
EXIT_REJECTED = 4
EXIT_NOT_INTERLACING = 5


class SchemaError(InputError):
    pass


# -- serialization ------------------------------------------------------------

def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError("refusing to serialize a non-finite number")
    if x == 0:
        return "0"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with fixed 17-significant-digit floats."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (bool, int, float, np.bool_, np.integer, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{_num(obj.real)}, {_num(obj.imag)}]"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _vec_out(z):
    z = np.asarray(z)
    if np.iscomplexobj(z):
        return [[float(x.real), float(x.imag)] for x in z]
    return [float(x) for x in z]


# -- problem files ------------------------------------------------------------

_OPTION_KEYS = {f.name for f in fields(TolerancePolicy)} | {f.name for f in fields(ContinuationOptions)}


@dataclass
class ProblemFile:
    mode: str
    field: str
    lam: list
    mu: list | None = None
    v: np.ndarray | None = None
    c: float | None = None
    basis: np.ndarray | None = None
    options: dict = field(default_factory=dict)

    def tolerances(self, tol_override=None) -> TolerancePolicy:
        kw = {k: float(v) for k, v in self.options.items() if k in {f.name for f in fields(TolerancePolicy)}}
        if tol_override is not None:
            kw["tol_res"] = tol_override
        return TolerancePolicy(**kw)

    def continuation(self) -> ContinuationOptions:
        names = {f.name for f in fields(ContinuationOptions)}
        kw = {k: v for k, v in self.options.items() if k in names}
        for k in ("max_steps", "newton_max_iter"):
            if k in kw:
                kw[k] = int(kw[k])
        return ContinuationOptions(**kw)


def _real(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise SchemaError(f"{what} must be a finite number")
    return float(x)


def _scalar(x, fld, what):
    if fld == "complex" and isinstance(x, list):
        if len(x) != 2:
            raise SchemaError(f"{what} must be a [re, im] pair")
        return complex(_real(x[0], what), _real(x[1], what))
    return _real(x, what)


def _real_list(x, what):
    if not isinstance(x, list) or not x:
        raise SchemaError(f"{what} must be a nonempty list of numbers")
    return [_real(e, f"{what}[{i}]") for i, e in enumerate(x)]


def _field_list(x, fld, what):
    if not isinstance(x, list) or not x:
        raise SchemaError(f"{what} must be a nonempty list")
    vals = [_scalar(e, fld, f"{what}[{i}]") for i, e in enumerate(x)]
    return np.array(vals, dtype=complex if fld == "complex" else float)


def parse_problem(doc) -> ProblemFile:
    if not isinstance(doc, dict):
        raise SchemaError("problem must be a JSON object")
    known = {"mode", "field", "lambda", "mu", "v", "c", "basis", "options"}
    extra = set(doc) - known
    if extra:
        raise SchemaError(f"unknown keys: {sorted(extra)}")
    mode = doc.get("mode", RANK_ONE)
    if mode not in MODES:
        raise SchemaError(f"mode must be one of {MODES}")
    fld = doc.get("field", "real")
    if fld not in ("real", "complex"):
        raise SchemaError("field must be 'real' or 'complex'")
    if "lambda" not in doc:
        raise SchemaError("lambda is required")
    lam = _real_list(doc["lambda"], "lambda")
    n = len(lam)
    mu = v = c = basis = None
    if "mu" in doc and ("v" in doc or "c" in doc):
        raise SchemaError("give either mu (inverse problem) or v/c (forward problem), not both")
    if "mu" in doc:
        mu = _real_list(doc["mu"], "mu")
        want = n + (mode == BORDERED)
        if len(mu) != want:
            raise SchemaError(f"mu must have {want} entries for mode {mode}")
    if "v" in doc:
        v = _field_list(doc["v"], fld, "v")
        if v.size != n:
            raise SchemaError(f"v must have {n} entries")
        if mode == BORDERED and "c" not in doc:
            raise SchemaError("bordered forward problems need c")
    if "c" in doc:
        if mode != BORDERED:
            raise SchemaError("c is only meaningful in bordered mode")
        if "v" not in doc:
            raise SchemaError("c given without v")
        c = _real(doc["c"], "c")
    if "basis" in doc:
        rows = doc["basis"]
        if not isinstance(rows, list) or len(rows) != n:
            raise SchemaError(f"basis must be a {n}x{n} matrix")
        basis = np.array([_field_list(r, fld, "basis row") for r in rows])
        if basis.shape != (n, n):
            raise SchemaError(f"basis must be a {n}x{n} matrix")
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise SchemaError("options must be an object")
    bad = set(options) - _OPTION_KEYS
    if bad:
        raise SchemaError(f"unknown options: {sorted(bad)}")
    for k, val in options.items():
        _real(val, f"options.{k}")
    return ProblemFile(mode, fld, lam, mu, v, c, basis, dict(options))


def load_problem(path: str) -> ProblemFile:
    try:
        if path == "-":
            doc = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read problem file: {exc}") from exc
    return parse_problem(doc)


# -- commands -----------------------------------------------------------------

def cmd_forward(prob: ProblemFile, args) -> tuple[dict, int]:
    if prob.v is None:
        raise SchemaError("forward needs v")
    tol = prob.tolerances(args.tol)
    lam = as_spectrum(prob.lam, strict=True, tol=tol)
    mu = forward(lam, prob.v, prob.c, prob.mode, prob.basis, tol).values
    report = check_slice_identities(lam, prob.v, prob.c, mode=prob.mode, mu=mu, basis=prob.basis, tol=tol)
    faces = classify_faces(lam, mu, prob.mode, tol)
    out = {
        "mode": prob.mode,
        "field": prob.field,
        "lambda": lam.values,
        "mu": mu,
        "slice_residuals": report.residuals,
        "face_profile": faces.as_dict(),
    }
    return out, EXIT_OK


def _rank_one_block(lam, mu, sol, cert, basis):
    block = {"v": _vec_out(basis @ sol.p if basis is not None else sol.p)}
    if basis is not None:
        block["p"] = _vec_out(sol.p)
    block["certificate"] = cert.as_dict()
    return block


def _bordered_block(lam, mu, sol, cert, basis):
    p = sol.v.entries
    block = {"c": sol.c, "v": _vec_out(basis @ p if basis is not None else p)}
    if basis is not None:
        block["p"] = _vec_out(p)
    block["certificate"] = cert.as_dict()
    return block


def cmd_invert(prob: ProblemFile, args) -> tuple[dict, int]:
    if prob.mu is None:
        raise SchemaError("invert needs mu")
    tol = prob.tolerances(args.tol)
    lam = as_spectrum(prob.lam, strict=True, tol=tol)
    opts = prob.continuation()
    method = args.method
    out = {"mode": prob.mode, "field": prob.field, "lambda": lam.values, "mu": prob.mu, "method": method}
    runs = {}
    if prob.mode == RANK_ONE:
        if method in ("closed", "both"):
            sol = invert_rank_one_closed(lam, prob.mu, tol=tol)
            runs["closed"] = (sol, certify(lam, prob.mu, sol, RANK_ONE, "closed_form", tol))
        if method in ("continuation", "both"):
            runs["continuation"] = invert_rank_one_continuation(lam, prob.mu, opts, tol=tol)
        block = _rank_one_block
    else:
        if method in ("closed", "both"):
            sol = invert_bordered_closed(lam, prob.mu, tol=tol)
            runs["closed"] = (sol, certify(lam, prob.mu, sol, BORDERED, "closed_form", tol))
        if method in ("continuation", "both"):
            runs["continuation"] = invert_bordered_continuation(lam, prob.mu, opts, tol=tol)
        block = _bordered_block
    first = next(iter(runs))
    out.update(block(lam, prob.mu, *runs[first], prob.basis))
    if len(runs) == 2:
        out["continuation"] = block(lam, prob.mu, *runs["continuation"], prob.basis)
        a, b = (runs[k][0] for k in ("closed", "continuation"))
        if prob.mode == RANK_ONE:
            gap = float(np.abs(a.p - b.p).max())
        else:
            gap = max(float(np.abs(a.v.entries - b.v.entries).max()), abs(a.c - b.c))
        out["agreement"] = gap
    accepted = all(cert.accepting for _, cert in runs.values())
    return out, EXIT_OK if accepted else EXIT_REJECTED


def cmd_preimages(prob: ProblemFile, args) -> tuple[dict, int]:
    if prob.mu is None:
        raise SchemaError("preimages needs mu")
    tol = prob.tolerances(args.tol)
    lam = as_spectrum(prob.lam, strict=True, tol=tol)
    count = preimage_count(lam, prob.mu, prob.field, prob.mode, tol)
    p, c = orthant_solution(lam, prob.mu, prob.mode, tol)
    q = prob.basis

    def std(z):
        return _vec_out(q @ z if q is not None else z)

    out = {"mode": prob.mode, "field": prob.field, "lambda": lam.values, "mu": prob.mu}
    out.update(count.as_dict())
    if c is not None:
        out["c"] = c
    if prob.field == "real":
        vecs = enumerate_real_preimages(lam, prob.mu, prob.mode, limit=args.limit, tol=tol)
        pats = sign_patterns(p)
        out["preimages"] = [{"signs": s.label(), "v": std(z.entries)} for s, z in zip(pats, vecs)]
        out["truncated"] = len(vecs) < count.count
    else:
        out["representative"] = std(p.astype(complex))
        rng = np.random.default_rng(args.seed)
        samples = []
        for _ in range(args.samples):
            angles = rng.uniform(0.0, 2 * np.pi, count.torus_dim)
            phases = PhaseAssignment.for_support(p, angles)
            z = sample_complex_preimage(lam, prob.mu, phases, prob.mode, tol).entries
            samples.append({"thetas": [t for t in phases.thetas if t is not None], "v": std(z)})
        out["phase_samples"] = samples
    return out, EXIT_OK


def crease_rows(lam, samples: int, rays: int = 5) -> list[tuple[str, float, float]]:
    """Images of the two boundary rays and of interior rays for n = 2.

    Radii run over ``[0, 2 sqrt(lam[1] - lam[0])]``, so with an odd sample
    count the crease corner ``(lam[1], lam[1])`` is hit exactly.
    """
    lam = as_spectrum(lam, strict=True)
    if len(lam) != 2:
        raise SchemaError("crease-demo needs exactly two base eigenvalues")
    if samples < 2:
        raise SchemaError("need at least two samples")
    gap = lam[1] - lam[0]
    radii = np.linspace(0.0, 2.0 * math.sqrt(gap), samples)
    rows = []
    branches = [("E1", 0.0, 1.0), ("E2", 1.0, 0.0)]
    for k in range(1, rays + 1):
        phi = 0.5 * math.pi * k / (rays + 1)
        branches.append((f"interior_{k}", math.cos(phi), math.sin(phi)))
    for name, cx, cy in branches:
        for r in radii:
            mu = forward_rank_one(lam, [r * cx, r * cy]).values
            rows.append((name, float(mu[0]), float(mu[1])))
    return rows


def _rand_v(rng, n, scale, field="real"):
    v = rng.standard_normal(n) * scale
    if field == "complex":
        v = v * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    return v


def verify_suite(lam, mode: str, trials: int, seed: int, tol: TolerancePolicy) -> dict:
    """Randomized checks of the five topological hypotheses behind bijectivity."""
    lam = as_spectrum(lam, strict=True, tol=tol)
    lv = lam.values
    n = lv.size
    rng = np.random.default_rng(seed)
    sc = spread(lv)
    root = math.sqrt(sc)
    eps = tol.face_tol(lv)
    tally = {h: [0, 0] for h in ("H1", "H2", "H3", "H4", "H5")}

    def mark(h, ok):
        tally[h][0 if ok else 1] += 1

    bordered = mode == BORDERED
    check = check_interlacing_bordered if bordered else check_interlacing_rank_one
    face_image = face_image_bordered if bordered else face_image_rank_one

    def fwd(v, c):
        return forward(lam, v, c, mode, tol=tol).values

    # H3: interior witness, all-ones border at small amplitude
    c_w = lv[-1] + sc
    mu = fwd(np.full(n, 1e-2 * root), c_w if bordered else None)
    lower, upper = _box(lv, mode)
    mark("H3", bool(np.all(mu > lower) and np.all(mu < upper)))

    for _ in range(trials):
        c = float(rng.normal(lv.mean(), sc)) if bordered else None
        # H1: growth along rays, checked through the trace identities
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        ok = True
        for r in (1.0, 10.0, 100.0):
            v = r * root * u
            mu = fwd(v, c)
            rep = check_slice_identities(lam, v, c, mode=mode, mu=mu, tol=tol)
            ok &= rep.ok(max(tol.tol_res, 1e-12 * r * r))
            # the squared radius read back from mu grows without bound with r
            if bordered:
                r2 = 0.5 * (np.sum(mu**2) - np.sum(lv**2) - c * c)
                scale = np.sum(mu**2) + np.sum(lv**2) + c * c
            else:
                r2 = mu.sum() - lv.sum()
                scale = np.abs(mu).sum() + np.abs(lv).sum()
            ok &= abs(r2 - v @ v) <= 1e-10 * scale
        mark("H1", ok)

        # H2: invertible Jacobian at an interior point
        v = np.abs(_rand_v(rng, n, root)) + 1e-3 * root
        try:
            jac = jacobian_G(lam, v, c, tol) if bordered else jacobian_F(lam, v, tol)
            sv = np.linalg.svd(jac.entries, compute_uv=False)
            mark("H2", bool(np.all(np.isfinite(sv)) and sv[-1] > 1e-14 * sv[0]))
        except InputError:
            mark("H2", False)

        # H5: interior points land strictly inside the box, and interlace
        mu = fwd(v, c)
        mark("H5", bool(check(lv, mu) and np.all(mu > lower) and np.all(mu < upper)))

        # H4: a zero coordinate sends the image onto the face image
        i = int(rng.integers(n))
        vb = _rand_v(rng, n, root)
        vb[i] = 0.0
        mu = fwd(vb, c)
        on_face = np.min(np.abs(mu - lv[i])) <= eps and face_image(lv, i).contains(mu, eps)
        mark("H4", bool(on_face and check(lv, mu)))

    return {h: {"passed": p, "failed": f} for h, (p, f) in tally.items()}


def _box(lv, mode):
    from .core import box_bounds

    return box_bounds(lv, mode)


def cmd_verify(prob: ProblemFile, args) -> tuple[dict, int]:
    tol = prob.tolerances(args.tol)
    lam = as_spectrum(prob.lam, strict=True, tol=tol)
    modes = [prob.mode] if args.mode is None else ([RANK_ONE, BORDERED] if args.mode == "both" else [args.mode])
    report = {}
    failed = 0
    for m in modes:
        res = verify_suite(lam, m, args.trials, args.seed, tol)
        failed += sum(r["failed"] for r in res.values())
        report[m] = res
    out = {"lambda": lam.values, "trials": args.trials, "seed": args.seed, "hypotheses": report, "ok": failed == 0}
    return out, EXIT_OK if failed == 0 else EXIT_REJECTED


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="interlace", description="Spectral interlacing maps and their inverses.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_file(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("problem", help="problem JSON file, or - for stdin")
        p.add_argument("--tol", type=float, default=None, help="override the residual tolerance tol_res")
        p.add_argument("-o", "--output", default=None, help="write the result here instead of stdout")
        return p

    with_file("forward", "spectrum of S + vv* or of the bordered matrix")
    p = with_file("invert", "recover v (and c) from an interlacing target")
    p.add_argument("--method", choices=("closed", "continuation", "both"), default="closed")
    p = with_file("preimages", "all real preimages, or the complex phase torus")
    p.add_argument("--limit", type=int, default=1024, help="cap on enumerated real preimages")
    p.add_argument("--samples", type=int, default=0, help="complex phase samples to draw")
    p.add_argument("--seed", type=int, default=0)
    p = with_file("verify", "randomized property suite")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=(RANK_ONE, BORDERED, "both"), default=None,
                   help="default: the file's mode")

    p = sub.add_parser("crease-demo", help="CSV polylines of the n = 2 rank-one map")
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", required=True)
    p.add_argument("--samples", type=int, default=21)
    p.add_argument("-o", "--output", default=None)
    return ap


_COMMANDS = {
    "forward": cmd_forward,
    "invert": cmd_invert,
    "preimages": cmd_preimages,
    "verify": cmd_verify,
}


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "crease-demo":
            rows = crease_rows(args.lam, args.samples)
            text = "branch,x,y\n" + "".join(f"{b},{_num(x)},{_num(y)}\n" for b, x, y in rows)
            _emit(text, args.output)
            return EXIT_OK
        prob = load_problem(args.problem)
        out, code = _COMMANDS[args.command](prob, args)
        _emit(dumps(out) + "\n", args.output)
        return code
    except NotInterlacing as exc:
        print(f"error: not interlacing: {exc.violation}", file=sys.stderr)
        return EXIT_NOT_INTERLACING
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
