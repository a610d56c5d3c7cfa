"""Command-line front end.

Jobs arrive as a small JSON document (matrix rows, parameter as "p/q"
strings, command options) plus flags; reports leave as human-readable text
or as canonical machine JSON in which every rational is a "p/q" string and
every index is 1-based.  Machine output is deterministic byte for byte and
embeds the parsed job, so a report can be re-run from itself.

Exit codes: 1 for user-level errors (bad parameters, degenerate inputs,
failed preconditions), 2 for input that does not parse, 3 for internal
consistency failures.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import geom, intlin, logseries, series, system, weyl
from .errors import (
    ConfigurationError,
    GkzError,
    InternalConsistencyError,
)

EXIT_USER = 1
EXIT_PARSE = 2
EXIT_INTERNAL = 3


class ParseFailure(Exception):
    pass


def _frac(x) -> str:
    return str(Fraction(x))


def _parse_frac(x) -> Fraction:
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseFailure(f"not a rational: {x!r}")
    raise ParseFailure(f"rationals must be integers or 'p/q' strings, got {x!r}")


def _parse_int_list(text: str, label: str) -> list:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ParseFailure(f"{label} must be a comma-separated integer list")


def _parse_frac_list(text: str, label: str) -> list:
    try:
        return [Fraction(t) for t in text.replace(",", " ").split()]
    except (ValueError, ZeroDivisionError):
        raise ParseFailure(f"{label} must be a comma-separated list of rationals")


def _load_job(args) -> dict:
    if not args.input:
        raise ParseFailure("--input FILE is required")
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ParseFailure(f"cannot read input: {e}")
    except json.JSONDecodeError as e:
        raise ParseFailure(f"input is not valid JSON: {e}")
    if not isinstance(doc, dict):
        raise ParseFailure("input document must be a JSON object")
    if "A" not in doc or "alpha" not in doc:
        raise ParseFailure("input document needs 'A' (matrix rows) and 'alpha'")
    rows = doc["A"]
    if (
        not isinstance(rows, list)
        or not rows
        or not all(isinstance(r, list) and r for r in rows)
        or any(len(r) != len(rows[0]) for r in rows)
        or not all(isinstance(x, int) for r in rows for x in r)
    ):
        raise ParseFailure("'A' must be a non-ragged matrix of integers (rows)")
    alpha = doc["alpha"]
    if not isinstance(alpha, list) or len(alpha) != len(rows):
        raise ParseFailure("'alpha' must list one rational per matrix row")
    job = {
        "command": args.command,
        "A": [list(r) for r in rows],
        "alpha": [_frac(_parse_frac(x)) for x in alpha],
    }
    # options: flags override document fields
    def opt(name, flag, parser):
        v = flag if flag is not None else doc.get(name)
        if v is not None:
            job[name] = parser(v)

    opt("heights", args.heights, lambda v: [
        _frac(x) for x in (_parse_frac_list(v, "heights") if isinstance(v, str) else [Fraction(str(t)) for t in v])
    ])
    opt("rho", args.rho, lambda v: [
        int(x) for x in (_parse_int_list(v, "rho") if isinstance(v, str) else v)
    ])
    opt("face", args.face, lambda v: v if isinstance(v, str) else ",".join(str(x) for x in v))
    opt("index", args.index, int)
    opt("eps_order", args.eps_order, int)
    job["truncation"] = int(
        args.truncation if args.truncation is not None else doc.get("truncation", 8)
    )
    if args.seed is not None:
        job["seed"] = int(args.seed)
    elif "seed" in doc:
        job["seed"] = int(doc["seed"])
    return job


def _build(job):
    cols = intlin.transpose(intlin.mat(job["A"]))
    cfg = geom.point_config(cols)
    alpha = [Fraction(a) for a in job["alpha"]]
    return system.build_system(cfg, alpha)


def _triangulation(job, sys_):
    cfg = sys_.cfg
    if "heights" in job:
        return geom.regular_triangulation(cfg, [Fraction(h) for h in job["heights"]])
    if "rho" in job:
        return geom.triangulation_from_direction(cfg, job["rho"], lattice=sys_.lattice)
    if "seed" in job:
        rng = random.Random(job["seed"])
        for _ in range(64):
            hts = [Fraction(rng.randrange(0, 10**6), 997) for _ in range(cfg.N)]
            try:
                return geom.regular_triangulation(cfg, hts)
            except geom.GenericityError:
                continue
        raise InternalConsistencyError("seeded height search failed 64 draws")
    return geom.some_regular_triangulation(cfg)


def _series_doc(s) -> dict:
    terms = []
    for l in sorted(s.terms, key=lambda l: (series.h_degree(l), l)):
        terms.append({"l": list(l), "coefficient": _frac(s.terms[l])})
    return {
        "type": "series",
        "gamma": [_frac(g) for g in s.gamma],
        "sector": [i + 1 for i in s.sector],
        "truncation": s.truncation,
        "terms": terms,
    }


def _log_series_doc(s) -> dict:
    terms = []
    for l in sorted(s.terms, key=lambda l: (series.h_degree(l), l)):
        poly = s.terms[l]
        parts = [
            {"log_powers": list(mono), "coefficient": _frac(c)}
            for mono, c in sorted(poly.items())
            if c != 0
        ]
        terms.append({"l": list(l), "log_poly": parts})
    return {
        "type": "log_series",
        "gamma": [_frac(g) for g in s.gamma],
        "weight": s.weight,
        "truncation": s.truncation,
        "terms": terms,
    }


def _solution_doc(s) -> dict:
    if isinstance(s, logseries.LogSeries):
        return _log_series_doc(s)
    return _series_doc(s)


def cmd_analyze(job) -> dict:
    sys_ = _build(job)
    cfg = sys_.cfg
    rk = system.rank(sys_)
    res = system.is_nonresonant(sys_)
    apex = geom.is_pyramid(cfg)
    out = {
        "columns": [list(c) for c in cfg.columns],
        "homogeneity_form": list(cfg.h),
        "lattice_basis": [list(b) for b in sys_.lattice.vectors],
        "facets": [list(f) for f in sys_.facets],
        "volume": geom.normalized_volume(cfg),
        "rank": rk.rank,
        "rank_warnings": list(rk.warnings),
        "nonresonant": res.nonresonant,
        "integral_facets": [
            {"form": list(f), "value": v} for f, v in res.integral_facets
        ],
        "pyramid_apex": apex + 1 if apex is not None else None,
    }
    if not res.nonresonant:
        out["hint"] = (
            "parameter is resonant; the 'restrict' command restricts to an "
            "integral facet"
        )
    return out


def cmd_triangulate(job) -> dict:
    sys_ = _build(job)
    T = _triangulation(job, sys_)
    simplices = []
    for J in T.simplices:
        simplices.append(
            {
                "columns": [j + 1 for j in J],
                "volume": geom.normalized_volume(sys_.cfg, J),
            }
        )
    return {
        "heights": [_frac(h) for h in T.heights],
        "simplices": simplices,
        "total_volume": geom.normalized_volume(sys_.cfg),
    }


def cmd_series(job) -> dict:
    sys_ = _build(job)
    T = _triangulation(job, sys_)
    basis = series.basis_for_triangulation(sys_, T, job["truncation"])
    return {
        "triangulation": [[j + 1 for j in J] for J in T.simplices],
        "count": len(basis),
        "solutions": [_series_doc(s) for s in basis],
    }


def cmd_logbasis(job) -> dict:
    sys_ = _build(job)
    T = _triangulation(job, sys_)
    basis = logseries.full_basis(sys_, T, job["truncation"])
    return {
        "triangulation": [[j + 1 for j in J] for J in T.simplices],
        "count": len(basis),
        "log_count": sum(1 for s in basis if s.weight > 0),
        "solutions": [_solution_doc(s) for s in basis],
    }


def cmd_verify(job) -> dict:
    sys_ = _build(job)
    T = _triangulation(job, sys_)
    rep = system.is_T_nonresonant(sys_, T)
    if rep.nonresonant:
        basis = series.basis_for_triangulation(sys_, T, job["truncation"])
    else:
        basis = logseries.full_basis(sys_, T, job["truncation"])
    checks = []
    all_zero = True
    for idx, label, ok in weyl.annihilation_report(sys_, basis):
        checks.append(
            {"solution": idx + 1, "operator": label, "residual": "0" if ok else "nonzero"}
        )
        all_zero = all_zero and ok
    if not all_zero:
        raise InternalConsistencyError("an emitted solution is not annihilated")
    return {"count": len(basis), "all_zero": all_zero, "checks": checks}


def cmd_contiguity(job) -> dict:
    sys_ = _build(job)
    if "index" not in job:
        raise ParseFailure("contiguity needs --index (1-based variable index)")
    i = job["index"] - 1
    if not 0 <= i < sys_.cfg.N:
        raise ParseFailure(f"--index must be between 1 and {sys_.cfg.N}")
    result = weyl.contiguity_inverse(sys_, i, truncation=job["truncation"])
    op_terms = [
        {
            "v_exponents": list(m),
            "d_exponents": list(u),
            "coefficient": _frac(q),
        }
        for (m, u), q in sorted(result.operator.terms.items())
    ]
    return {
        "index": job["index"],
        "operator": op_terms,
        "rounds": result.rounds,
        "certificate_window": result.certificate_window,
        "basis_size": result.basis_size,
    }


def cmd_restrict(job) -> dict:
    sys_ = _build(job)
    if "face" not in job:
        raise ParseFailure("restrict needs --face (facet number or form)")
    sel = job["face"]
    parts = _parse_int_list(sel, "face")
    if len(parts) == 1:
        k = parts[0] - 1
        if not 0 <= k < len(sys_.facets):
            raise ParseFailure(f"--face must be between 1 and {len(sys_.facets)}")
        form = sys_.facets[k]
    elif len(parts) == sys_.cfg.r:
        form = tuple(parts)
    else:
        raise ParseFailure("--face must be one facet number or a full form")
    fr = system.face_restrict(sys_, form)
    return {
        "form": list(fr.form),
        "columns_kept": [j + 1 for j in fr.columns_kept],
        "transform_rows": [[_frac(x) for x in row] for row in fr.transform],
        "restricted_A": [list(r) for r in intlin.transpose(fr.system.cfg.columns)],
        "beta": [_frac(a) for a in fr.system.alpha],
        "restricted_volume": geom.normalized_volume(fr.system.cfg),
    }


COMMANDS = {
    "analyze": cmd_analyze,
    "triangulate": cmd_triangulate,
    "series": cmd_series,
    "logbasis": cmd_logbasis,
    "verify": cmd_verify,
    "contiguity": cmd_contiguity,
    "restrict": cmd_restrict,
}


def _flat_list(v) -> bool:
    return isinstance(v, list) and all(
        not isinstance(x, (dict, list)) for x in v
    )


def _human(doc, indent=0) -> str:
    pad = "  " * indent
    if isinstance(doc, dict):
        lines = []
        for k, v in doc.items():
            if _flat_list(v):
                body = ", ".join(_human_scalar(x) for x in v)
                lines.append(f"{pad}{k}: [{body}]")
            elif isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_human(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_human_scalar(v)}")
        return "\n".join(lines)
    if isinstance(doc, list):
        lines = []
        for v in doc:
            if _flat_list(v):
                body = ", ".join(_human_scalar(x) for x in v)
                lines.append(f"{pad}- [{body}]")
            elif isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(_human(v, indent + 1))
            else:
                lines.append(f"{pad}- {_human_scalar(v)}")
        return "\n".join(lines)
    return f"{pad}{_human_scalar(doc)}"


def _human_scalar(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, list):
        return "[]"
    if isinstance(v, dict):
        return "{}"
    return str(v)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="gkz",
        description="Exact-arithmetic toolkit for A-hypergeometric systems",
    )
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--input", help="JSON job document")
    ap.add_argument("--truncation", type=int, default=None)
    ap.add_argument("--eps-order", dest="eps_order", type=int, default=None)
    ap.add_argument("--heights", default=None, help="comma-separated rationals")
    ap.add_argument("--rho", default=None, help="comma-separated integers")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--index", type=int, default=None, help="1-based variable index")
    ap.add_argument("--face", default=None, help="facet number or comma form")
    ap.add_argument("--format", choices=("human", "machine"), default="human")
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code not in (0, None) else 0
    try:
        job = _load_job(args)
        result = COMMANDS[args.command](job)
    except ParseFailure as e:
        print(f"error[parse]: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigurationError as e:
        # the message already names the violated condition
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USER
    except InternalConsistencyError as e:
        print(f"error[internal]: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except GkzError as e:
        print(f"error[{type(e).__name__}]: {e}", file=sys.stderr)
        return EXIT_USER
    if args.format == "machine":
        print(json.dumps({"job": job, "result": result}, sort_keys=True, separators=(",", ":")))
    else:
        print(_human(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
