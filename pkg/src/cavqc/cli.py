"""Command-line front end.

Exit codes: 0 pass, 1 mathematical-claim violation, 2 usage / config error,
3 runtime, admissibility or hypothesis-check failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import critload2d, critload3d, fields, radial, svcalc, volumetric, zhang
from .config import ConfigError, config_hash, file_digest, load_field, load_material
from .parallel import ordered_map
from .report import emit, render_csv

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

KAPPA_MODES = {"lower": critload3d.KAPPA_LOWER, "numeric": critload3d.KAPPA_NUMERIC}
POINTWISE_NOTE = "counterexamples show pointwise negativity of the decomposition term only, not failure of the energy inequality"


class UsageError(Exception):
    pass


RUNTIME_ERRORS = (
    fields.AdmissibilityError,
    fields.DegeneratePathError,
    critload2d.BracketError,
    critload2d.ConditionNotStrict,
    radial.BracketError,
    radial.NonpositiveDeterminant,
    volumetric.DomainError,
    svcalc.DegenerateDenominator,
)


def _pair(text: str):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected 'lo,hi', got {text!r}") from exc
    if not (0 < lo < hi and math.isfinite(hi)):
        raise UsageError(f"bad bracket {text!r}")
    return lo, hi


def _hash(args, extra=()):
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in ("workers", "output", "func")}
    digests = []
    for key in ("material", "field"):
        val = opts.get(key)
        for p in (val if isinstance(val, list) else [val] if val else []):
            if Path(p).is_file():
                digests.append(file_digest(p))
    return config_hash(opts, digests, list(extra))


def _check_law(material):
    rep = volumetric.check_hypotheses(material.law)
    if not rep.ok:
        for f in rep.failures:
            print(f"hypothesis check failed: {f}", file=sys.stderr)
        return False
    return True


def _material(args, dim: int, q=None, gamma=None):
    if getattr(args, "material", None):
        mat = load_material(args.material)
        if mat.dim != dim:
            raise UsageError(f"material file has dim={mat.dim}, expected {dim}")
        if q is not None and q != mat.q:
            mat = volumetric.Material2D(q, mat.law) if dim == 2 else volumetric.Material3D(q, mat.gamma, mat.law, mat.Z, mat.z_spec)
        return mat
    law = volumetric.quad_log(1.0, 2.0)
    if dim == 2:
        return volumetric.Material2D(1.5 if q is None else q, law)
    return volumetric.Material3D(2.5 if q is None else q, 1.0 if gamma is None else gamma, law)


def _lambda_star(material, constants="stated", kappa=critload3d.KAPPA_LOWER, bracket=(1e-3, 10.0)):
    if material.dim == 2:
        return critload2d.critical_load_2d(material, bracket, constants).lam_star
    return critload3d.critical_load_3d(material, bracket, kappa).lam_star


# --- subcommands -----------------------------------------------------------------

def cmd_critical_load(args) -> int:
    mat = load_material(args.material)
    if mat.dim != args.dim:
        raise UsageError(f"material file has dim={mat.dim}, --dim is {args.dim}")
    if not _check_law(mat):
        return EXIT_RUNTIME
    lo, hi = _pair(args.bracket)
    scan = list(np.linspace(lo, hi, args.points))
    if args.dim == 2:
        cl = critload2d.critical_load_2d(mat, (lo, hi), args.constants)
        lams = sorted(set(scan + [cl.lam_star]))
        rows = [critload2d.check_sufficient_2d(x, mat, args.constants).row() for x in lams]
        comments = [f"lambda_star={cl.lam_star!r}", f"monotone={cl.monotone}", f"conservative={cl.conservative}",
                    f"never_violated={cl.never_violated}", f"constants={args.constants}"]
        cols = critload2d.CSV_COLUMNS
    else:
        mode = KAPPA_MODES[args.kappa]
        cl = critload3d.critical_load_3d(mat, (lo, hi), mode)
        lams = sorted(set(scan + [cl.lam_star]))
        rows = [critload3d.check_sufficient_3d(x, mat, mode).row() for x in lams]
        comments = [f"lambda_star={cl.lam_star!r}", f"binding={cl.binding}", f"lambda_main={cl.main.lam_star!r}",
                    f"lambda_gamma={cl.gamma.lam_star!r}", f"kappa={mode}",
                    f"conservative={cl.main.conservative or cl.gamma.conservative}"]
        cols = critload3d.CSV_COLUMNS
    emit(render_csv(cols, rows, _hash(args), comments), args.output)
    print(f"lambda_star = {cl.lam_star:.10f}", file=sys.stderr)
    return EXIT_OK


def _verify_zhang(args, rng):
    q = args.q
    if q is None or not 1.0 < q < 2.0:
        raise UsageError("zhang needs --q in (1, 2)")
    factor = critload2d.lemma_factor(q, args.constants)
    res, A, B = zhang.sample_zhang(q, args.samples or 100000, rng, factor=factor)
    ok = res >= -1e-12
    row = {"lemma": "zhang", "q": q, "samples": args.samples or 100000, "min_residual": res, "pass": ok}
    comments = [f"constants={args.constants}"]
    if not ok:
        comments.append(f"worst A={np.round(A, 12).tolist()} B={np.round(B, 12).tolist()}")
    return ["lemma", "q", "samples", "min_residual", "pass"], [row], comments, ok


def _verify_lesperanza(args, rng):
    q = args.q
    if q is None or not 1.0 < q < 2.0:
        raise UsageError("lesperanza needs --q in (1, 2)")
    mat = _material(args, 2, q)
    lam = args.lam if args.lam is not None else _lambda_star(mat, args.constants)
    rep = critload2d.check_sufficient_2d(lam, mat, args.constants)
    n = args.grid
    cert = critload2d.grid_verify_g1(lam, mat, n, n, constants=args.constants, workers=args.workers)
    Y = rep.hprime_at_lambda_sq
    applicable = Y > 0 and rep.satisfied
    ce = None
    if applicable:
        ok = cert.certified
        expected = False
    else:
        ok = True
        ce = critload2d.counterexample_2d(lam, mat, args.constants) if Y > 0 else cert.counterexample
        if ce is None:
            ce = cert.counterexample
        expected = ce is not None
    row = {
        "lemma": "lesperanza", "q": q, "lambda": lam, "hprime": Y, "condition_satisfied": rep.satisfied,
        "lemma_applicable": applicable, "grid_min": cert.min_value, "tail_certified": cert.tail_certified,
        "expected_violation": expected,
        "counterexample_l1": None if ce is None else float(ce[0]),
        "counterexample_l2": None if ce is None else float(ce[1]),
        "pass": ok,
    }
    cols = list(row)
    return cols, [row], [POINTWISE_NOTE, f"constants={args.constants}"], ok


def _verify_lesperanza2(args, rng):
    q = args.q
    if q is None or not 2.0 < q < 3.0:
        raise UsageError("lesperanza2 needs --q in (2, 3)")
    mat = _material(args, 3, q, args.gamma)
    mode = KAPPA_MODES[args.kappa]
    lam = args.lam if args.lam is not None else _lambda_star(mat, kappa=mode)
    rep = critload3d.check_sufficient_3d(lam, mat, mode)
    cert = critload3d.grid_verify_f(lam, mat, kappa_mode=mode, workers=args.workers)
    Y = rep.hprime_at_lambda_cubed
    applicable = Y > 0 and rep.satisfied
    ce = None
    if applicable:
        ok, expected = cert.certified, False
    else:
        ok = True
        ce = critload3d.counterexample_f1(lam, mat, mode)
        if ce is None and cert.min_f1 < 0:
            ce = cert.argmin_f1
        if ce is None and cert.min_f2 < 0:
            ce = cert.argmin_f2
        expected = ce is not None
    row = {
        "lemma": "lesperanza2", "q": q, "gamma": mat.gamma, "lambda": lam, "hprime": Y,
        "kappa_used": rep.kappa_used, "kappa_provenance": mode, "main_holds": rep.main_holds,
        "gamma_holds": rep.gamma_holds, "lemma_applicable": applicable, "min_f1": cert.min_f1,
        "min_f2": cert.min_f2, "tail_certified": cert.tail_certified, "expected_violation": expected,
        "counterexample": None if ce is None else " ".join(repr(float(v)) for v in ce),
        "pass": ok,
    }
    return list(row), [row], [POINTWISE_NOTE], ok


def _verify_excess(args, rng):
    n = args.samples or 10000
    worst, count = fields.sample_excess_identity(n, rng)
    ok = worst <= 1e-7
    row = {"lemma": "excess", "samples": count, "max_residual": worst, "pass": ok}
    return list(row), [row], [], ok


def _verify_trace(args, rng):
    n = args.samples or 10000
    M = rng.normal(size=(n, 2, 2)) * np.exp(rng.uniform(-2, 2, size=(n, 1, 1)))
    sv = svcalc.singular_values(M)
    gap = svcalc.tr(M) - sv.sum(axis=-1)
    worst = float(np.max(gap / (1.0 + svcalc.frob(M))))
    lam = args.lam if args.lam is not None else 1.0
    corpus = fields.standard_corpus(lam, rng, count=5, resolution=16)
    deficits = [fields.trace_integral(f) - 2.0 * lam for f in corpus]
    ok = worst <= 1e-12 and min(deficits) >= -1e-10
    row = {"lemma": "trace", "samples": n, "max_pointwise_gap": worst, "min_integral_excess": min(deficits), "pass": ok}
    return list(row), [row], [], ok


VERIFIERS = {
    "zhang": _verify_zhang,
    "lesperanza": _verify_lesperanza,
    "lesperanza2": _verify_lesperanza2,
    "excess": _verify_excess,
    "trace": _verify_trace,
}


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    cols, rows, comments, ok = VERIFIERS[args.lemma](args, rng)
    emit(render_csv(cols, rows, _hash(args), comments), args.output)
    return EXIT_OK if ok else EXIT_VIOLATION


def _q_grid(text: str):
    try:
        start, stop, step = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected 'start,stop,step', got {text!r}") from exc
    if step <= 0 or stop < start:
        raise UsageError("bad q grid")
    n = int(round((stop - start) / step)) + 1
    qs = [round(start + i * step, 12) for i in range(n)]
    if any(not 2.0 < q < 3.0 for q in qs):
        raise UsageError("q grid must lie inside (2, 3)")
    return qs


def cmd_kappa(args) -> int:
    qs = _q_grid(args.q_grid)
    ests = ordered_map(zhang.kappa_estimate, qs, args.workers)
    rows = [{"q": e.q, "lower": e.lower, "numeric": e.numeric, "upper": e.upper, "affine": e.affine,
             "abs_err": e.affine_error} for e in ests]
    ok = all(e.affine_error <= 0.025 and e.in_bracket for e in ests)
    emit(render_csv(["q", "lower", "numeric", "upper", "affine", "abs_err"], rows, _hash(args)), args.output)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_cavitation(args) -> int:
    mat = load_material(args.material)
    if mat.dim != args.dim:
        raise UsageError(f"material file has dim={mat.dim}, --dim is {args.dim}")
    if not _check_law(mat):
        return EXIT_RUNTIME
    lo, hi = _pair(args.bracket)
    lam_star = _lambda_star(mat, bracket=(1e-3, hi))
    load = radial.empirical_critical_load(mat, args.dim, (lo, hi))
    lams = sorted(set(list(np.linspace(lo, hi, args.points)) + [load.lam_cav]))
    rows = [r.row() for r in ordered_map(lambda x: radial.minimize_trial_family(x, mat, args.dim), lams, args.workers)]
    ok = load.lam_cav >= lam_star
    comments = [f"lambda_star={lam_star!r}", f"lambda_cav={load.lam_cav!r} (upper bound)",
                f"bracket_error={load.bracket_error!r}", f"uncertainty_band=[{lam_star!r}, {load.lam_cav!r}]"]
    emit(render_csv(radial.CSV_COLUMNS, rows, _hash(args), comments), args.output)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_conjecture(args) -> int:
    rng = np.random.default_rng(args.seed)
    rep = critload3d.conjecture_probe(args.lam, args.trials, rng, workers=args.workers)
    rows = [{"trial": i, "family": s.family, "amp": s.amp, "freq": " ".join(map(str, s.freq)),
             "vector": " ".join(repr(v) for v in s.vector), "integral": float(v)}
            for i, (s, v) in enumerate(zip(rep.specs, rep.values))]
    counts, edges = rep.histogram
    comments = [f"min={rep.min_value!r}", f"mean={rep.mean_value!r}", f"argmin_trial={rep.argmin_trial}",
                f"histogram_counts={counts}", f"histogram_edges={[float(e) for e in edges]}",
                "evidence only; a nonnegative minimum proves nothing"]
    emit(render_csv(["trial", "family", "amp", "freq", "vector", "integral"], rows, _hash(args), comments), args.output)
    if rep.counterexample_candidate:
        s = rep.specs[rep.argmin_trial]
        artifact = Path(args.output + ".counterexample.json" if args.output else "conjecture_counterexample.json")
        artifact.write_text(json.dumps({"lambda": args.lam, "integral": rep.min_value, "family": s.family,
                                        "amp": s.amp, "freq": list(s.freq), "vector": list(s.vector)}, indent=2))
        print(f"counterexample candidate written to {artifact}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


FIELD_FLAGS = ["chain_upper_ok", "chain_lower_ok", "excess_ok", "null_lagrangian_ok", "c0_applicable", "c0_ok"]


def _field_row(name, fld, mat, constants):
    nl = fields.null_lagrangian_check(fld)
    base = {"name": name, "family": fld.spec.family if fld.spec else "none",
            "amp": fld.spec.amp if fld.spec else 0.0, "lambda": fld.lam, "resolution": fld.resolution}
    if fld.dim == 2:
        rep = fields.decomposition_check_2d(fld, mat, constants)
        row = {**base, **rep.row(), "chain_upper_ok": rep.chain_upper_ok, "chain_lower_ok": rep.chain_lower_ok,
               "excess_ok": rep.excess_ok, "null_lagrangian_ok": nl.ok(), "c0_applicable": rep.c0 is not None,
               "c0_ok": rep.c0_ok if rep.c0 is not None else None}
        ok = rep.chain_upper_ok and rep.chain_lower_ok and rep.excess_ok and nl.ok() and (rep.c0 is None or rep.c0_ok)
    else:
        I_u = fields.energy(fld, mat)
        I_l = fields.homogeneous_energy(fld, mat)
        row = {**base, "I_u": I_u, "I_ulambda": I_l, "delta": I_u - I_l, "lhs_rig": fields.lhs_rig_3d(fld, mat.q),
               "jacobian_deficit": fields.jacobian_deficit(fld), "null_lagrangian_ok": nl.ok()}
        ok = nl.ok()
    return row, ok


def cmd_field_check(args) -> int:
    items = []
    for path in args.field or []:
        spec, lam, res, dim = load_field(path)
        items.append((Path(path).name, spec, lam, res, dim))
    dims = {it[4] for it in items} or {2}
    if len(dims) > 1:
        raise UsageError("all field files must share one dimension")
    dim = dims.pop()
    mat = _material(args, dim)
    if args.corpus:
        if dim != 2:
            raise UsageError("the standard corpus is two-dimensional")
        lam = args.lambda_factor * _lambda_star(mat, args.constants)
        rng = np.random.default_rng(args.seed)
        corpus = fields.standard_corpus(lam, rng, args.count, args.resolution)
        for i, f in enumerate(corpus):
            items.append((f"corpus_{i:02d}", f.spec, f.lam, f.resolution, 2))
    if not items:
        raise UsageError("give --field files and/or --corpus")

    def run(it):
        name, spec, lam, res, d = it
        return _field_row(name, fields.make_field(spec, lam, res, d), mat, args.constants)

    results = ordered_map(run, items, args.workers)
    rows = [r for r, _ in results]
    ok = all(o for _, o in results)
    cols = ["name", "family", "amp", "lambda", "resolution"] + fields.CSV_COLUMNS + FIELD_FLAGS if dim == 2 else \
        ["name", "family", "amp", "lambda", "resolution", "I_u", "I_ulambda", "delta", "lhs_rig", "jacobian_deficit",
         "null_lagrangian_ok"]
    emit(render_csv(cols, rows, _hash(args), [f"constants={args.constants}"]), args.output)
    return EXIT_OK if ok else EXIT_VIOLATION


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", default=None, help="CSV path (default: stdout)")

    p = argparse.ArgumentParser(prog="cavqc", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("critical-load", parents=[common], help="largest load satisfying the sufficient condition")
    s.add_argument("--dim", type=int, choices=(2, 3), required=True)
    s.add_argument("--material", required=True)
    s.add_argument("--kappa", choices=sorted(KAPPA_MODES), default="lower")
    s.add_argument("--bracket", default="0.001,10")
    s.add_argument("--points", type=int, default=21, help="scan rows in the criterion table")
    s.add_argument("--constants", choices=("stated", "corrected"), default="stated")
    s.set_defaults(func=cmd_critical_load)

    s = sub.add_parser("verify", parents=[common], help="brute-force certification of one inequality")
    s.add_argument("--lemma", choices=sorted(VERIFIERS), required=True)
    s.add_argument("--q", type=float, default=None)
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--samples", type=int, default=None)
    s.add_argument("--grid", type=int, default=1000, help="polar grid size per axis (lesperanza)")
    s.add_argument("--gamma", type=float, default=None)
    s.add_argument("--material", default=None)
    s.add_argument("--kappa", choices=sorted(KAPPA_MODES), default="lower")
    s.add_argument("--constants", choices=("stated", "corrected"), default="stated")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("kappa", parents=[common], help="numeric kappa against its bracket and affine fit")
    s.add_argument("--q-grid", dest="q_grid", default="2.05,2.95,0.05")
    s.set_defaults(func=cmd_kappa)

    s = sub.add_parser("cavitation", parents=[common], help="radial trial-family cavitation load")
    s.add_argument("--material", required=True)
    s.add_argument("--dim", type=int, choices=(2, 3), required=True)
    s.add_argument("--bracket", default="1,20")
    s.add_argument("--points", type=int, default=11)
    s.set_defaults(func=cmd_cavitation)

    s = sub.add_parser("conjecture", parents=[common], help="random probe of the 3D quasiconvexity conjecture")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.set_defaults(func=cmd_conjecture)

    s = sub.add_parser("field-check", parents=[common], help="energy chain inequalities on synthetic fields")
    s.add_argument("--field", action="append", help="field file (repeatable)")
    s.add_argument("--material", default=None)
    s.add_argument("--corpus", action="store_true", help="add the seeded standard corpus")
    s.add_argument("--count", type=int, default=20)
    s.add_argument("--resolution", type=int, default=32)
    s.add_argument("--lambda-factor", dest="lambda_factor", type=float, default=0.9)
    s.add_argument("--constants", choices=("stated", "corrected"), default="stated")
    s.set_defaults(func=cmd_field_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
