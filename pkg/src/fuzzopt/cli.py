"""``fuzzopt`` command-line front end.

Exit codes: 0 success, 1 domain error (infeasible point, no certificate,
empty bias, ...), 2 input error (bad JSON, schema violation, bad flags).
Errors are written to stderr as a JSON object.
"""
import argparse
import json
import sys

import jsonschema
import numpy as np

from fuzzopt import config, reproduce, schemas
from fuzzopt.calculus import expr_from_json
from fuzzopt.cones import Box, FuzzyConstrained, intersection_empty_sampled
from fuzzopt.core import (
    NotAFuzzyNumber, as_fuzzy_number, check_grid, compare, cut_table, cuts_csv, gh_difference,
    number_from_json, number_to_json, uniform_grid,
)
from fuzzopt.gordan import gordan_matrix_decide, gordan_vector_decide
from fuzzopt.core import FuzzyMatrix
from fuzzopt.optimality import (
    FuzzyProblem, InfeasiblePoint, NoCertificate, fritz_john_find, fritz_john_verify, kkt_find,
    kkt_verify,
)
from fuzzopt.svm import (
    EmptyBias, EmptyIntersection, FuzzyDataset, NoSeparator, PreconditionError, svm_solve, svm_verify,
)

DOMAIN_ERRORS = (InfeasiblePoint, NoCertificate, EmptyBias, EmptyIntersection, NoSeparator,
                 PreconditionError, NotAFuzzyNumber)


class InputError(Exception):
    def __init__(self, message, **info):
        super().__init__(message)
        self.info = info


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------

def _load(text_or_path, schema, what):
    """Parse inline JSON or a JSON file and validate it against ``schema``."""
    src = text_or_path.strip()
    if src[:1] in "{[" or src.lstrip("-").replace(".", "", 1).isdigit():
        origin, raw = "<inline>", src
    else:
        origin = src
        try:
            with open(src, encoding="utf-8") as fh:
                raw = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {what}: {exc.strerror}", path=src) from None
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {what}: {exc.msg}", source=origin,
                         line=exc.lineno, column=exc.colno, position=exc.pos) from None
    try:
        schemas.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        raise InputError(f"{what} does not match the schema: {exc.message}", source=origin,
                         field="/" + "/".join(str(p) for p in exc.absolute_path)) from None
    return obj


def _point(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"cannot parse point {text!r}; expected comma-separated numbers") from None


def _floats(text):
    return None if text is None else _point(text)


# ---------------------------------------------------------------------------
# subcommands; each returns (json payload, csv text or None)
# ---------------------------------------------------------------------------

def cmd_cuts(a):
    m = number_from_json(_load(a.number, schemas.NUMBER, "number"))
    levels = uniform_grid(a.levels) if a.levels else check_grid(m)
    rows = cut_table(m, levels)
    return {"number": number_to_json(m), "cuts": [[r, lo, hi] for r, lo, hi in rows]}, cuts_csv(m, levels)


def cmd_gh(a):
    m = number_from_json(_load(a.m, schemas.NUMBER, "m"))
    l = number_from_json(_load(a.l, schemas.NUMBER, "l"))
    f = gh_difference(m, l)
    lv = check_grid(f)
    try:
        fn = number_to_json(as_fuzzy_number(f, tol=config.TOL))
    except NotAFuzzyNumber:
        fn = None
    payload = {"cuts": [[r, lo, hi] for r, lo, hi in cut_table(f, lv)], "fuzzy_number": fn}
    return payload, cuts_csv(f, lv)


def cmd_compare(a):
    m = number_from_json(_load(a.m, schemas.NUMBER, "m"))
    l = number_from_json(_load(a.l, schemas.NUMBER, "l"))
    r = compare(m, l)
    return {"weak_all": r.weak_all, "strict_some": r.strict_some, "strict_all": r.strict_all,
            "preceq": r.preceq}, None


def cmd_cones(a):
    obj = _load(a.problem, schemas.PROBLEM, "problem")
    e = expr_from_json(obj["objective"])
    if "box" in obj:
        feas = Box(obj["box"]["lo"], obj["box"]["hi"])
    elif obj.get("constraints"):
        feas = FuzzyConstrained(tuple(expr_from_json(c) for c in obj["constraints"]))
    else:
        feas = None
    rep = intersection_empty_sampled(e, feas, _point(a.point), trials=a.trials, seed=config.SEED)
    return rep.to_json(), None


def cmd_gordan(a):
    obj = _load(a.input, schemas.GORDAN, "input")
    if "vector" in obj:
        v = gordan_vector_decide(tuple(number_from_json(m) for m in obj["vector"]), tol=config.TOL)
    else:
        M = FuzzyMatrix([[number_from_json(m) for m in row] for row in obj["matrix"]])
        v = gordan_matrix_decide(M, tol=config.TOL)
    return v.to_json(), None


def _problem(a):
    return FuzzyProblem.from_json(_load(a.problem, schemas.PROBLEM, "problem"))


def cmd_fj(a):
    p = _problem(a)
    x = _point(a.point)
    mult = _floats(a.multipliers)
    if mult is None:
        cert = fritz_john_find(p, x)
        rep = fritz_john_verify(p, x, cert.kappa0, cert.kappas)
        return {"certificate": cert.to_json(), "verification": rep.to_json()}, None
    if mult.size != len(p.constraints) + 1:
        raise InputError("fj needs kappa0 followed by one multiplier per constraint")
    return {"verification": fritz_john_verify(p, x, mult[0], mult[1:]).to_json()}, None


def cmd_kkt(a):
    p = _problem(a)
    x = _point(a.point)
    mult = _floats(a.multipliers)
    if mult is None:
        cert = kkt_find(p, x)
        rep = kkt_verify(p, x, cert.kappas)
        return {"certificate": cert.to_json(), "verification": rep.to_json()}, None
    if mult.size != len(p.constraints):
        raise InputError("kkt needs one multiplier per constraint")
    return {"verification": kkt_verify(p, x, mult).to_json()}, None


def cmd_svm(a):
    d = FuzzyDataset.from_json(_load(a.data, schemas.DATASET, "data"))
    sol = svm_solve(d, max_support=a.max_support, threads=a.threads)
    out = sol.to_json()
    out["verification"] = svm_verify(d, sol.lam, sol.ell_star, sol.kappas, sol.support, sol.bias.rho_max)
    return out, sol.bias.to_csv()


def cmd_reproduce(a):
    try:
        checks = reproduce.run(a.example)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    for c in checks:
        print(c.line(), file=sys.stderr if a.out is None and a.json else sys.stdout)
    payload = {"example": a.example, "passed": all(c.ok for c in checks),
               "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks]}
    return payload, None


COMMANDS = {
    "cuts": cmd_cuts, "gh": cmd_gh, "compare": cmd_compare, "cones": cmd_cones,
    "gordan": cmd_gordan, "fj": cmd_fj, "kkt": cmd_kkt, "svm": cmd_svm, "reproduce": cmd_reproduce,
}


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=None, help="uniform grid levels (default 11)")
    common.add_argument("--tol", type=float, default=None, help="comparison tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=None, help="sampling seed (default 42)")
    common.add_argument("--emit-csv", action="store_true", help="write the rho,lo,hi table instead of JSON")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for svm candidates")

    p = argparse.ArgumentParser(prog="fuzzopt", description="Fuzzy optimization toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("cuts", parents=[common], help="level cuts of a fuzzy number")
    s.add_argument("--number", required=True, help="fuzzy number JSON or file")
    s.add_argument("--levels", type=int, default=None, help="uniform levels instead of the check grid")

    s = sub.add_parser("gh", parents=[common], help="gH-difference m ⊖ l")
    s.add_argument("--m", required=True)
    s.add_argument("--l", required=True)

    s = sub.add_parser("compare", parents=[common], help="LU orderings of m against l")
    s.add_argument("--m", required=True)
    s.add_argument("--l", default="0")

    s = sub.add_parser("cones", parents=[common], help="sampled descent/feasible cone intersection")
    s.add_argument("--problem", required=True, help="objective plus box or constraints")
    s.add_argument("--point", required=True, help="comma-separated coordinates")
    s.add_argument("--trials", type=int, default=10_000)

    s = sub.add_parser("gordan", parents=[common], help="Gordan alternative verdict")
    s.add_argument("--input", required=True, help='{"vector": [...]} or {"matrix": [[...]]}')

    for name, text in (("fj", "kappa0,kappa1,..."), ("kkt", "kappa1,kappa2,...")):
        s = sub.add_parser(name, parents=[common], help=f"{name.upper()} multiplier search or verification")
        s.add_argument("--problem", required=True)
        s.add_argument("--point", required=True)
        s.add_argument("--multipliers", default=None, help=f"verify these ({text}) instead of searching")

    s = sub.add_parser("svm", parents=[common], help="hard-margin SVM on fuzzy data")
    s.add_argument("--data", required=True)
    s.add_argument("--max-support", type=int, default=4)

    s = sub.add_parser("reproduce", parents=[common], help="re-run a bundled worked example")
    s.add_argument("example", help=", ".join(reproduce.EXAMPLES))
    s.add_argument("--json", action="store_true", help="also print the JSON report")
    return p


def _apply_config(a):
    if a.grid is not None:
        if a.grid < 2:
            raise InputError("--grid must be at least 2")
        config.GRID_LEVELS = a.grid
    if a.tol is not None:
        if not a.tol > 0:
            raise InputError("--tol must be positive")
        config.TOL = a.tol
    if a.seed is not None:
        config.SEED = a.seed
    if a.threads < 1:
        raise InputError("--threads must be at least 1")


def _fail(code, kind, message, **info):
    err = {"schema": config.SCHEMA, "error": {"kind": kind, "message": message, **info}}
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return code


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None):
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    saved = (config.GRID_LEVELS, config.TOL, config.SEED)
    try:
        _apply_config(a)
        payload, csv = COMMANDS[a.command](a)
        if a.emit_csv:
            if csv is None:
                raise InputError(f"{a.command} has no CSV form")
            _emit(csv, a.out)
        elif a.command != "reproduce" or a.json or a.out:
            _emit(json.dumps({"schema": config.SCHEMA, "command": a.command, "result": payload},
                             sort_keys=True, indent=2) + "\n", a.out)
        if a.command == "reproduce" and not payload["passed"]:
            return 1
        return 0
    except InputError as exc:
        return _fail(2, "input", str(exc), **exc.info)
    except DOMAIN_ERRORS as exc:
        return _fail(1, type(exc).__name__, str(exc))
    except ValueError as exc:
        return _fail(2, "input", str(exc))
    finally:
        config.GRID_LEVELS, config.TOL, config.SEED = saved


if __name__ == "__main__":
    sys.exit(main())
