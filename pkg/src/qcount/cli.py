"""Command-line surface: one job per process, one deterministic report.

Every subcommand validates its arguments into a JobSpec, makes exactly
one library call, and prints the result as JSON (sorted keys) or CSV.
Exactness survives the wire: fractions render as "num/den" strings and
cyclotomic values as coordinate arrays tagged with their prime.

Exit status: 0 pass, 1 a verdict failed, 2 bad usage, 3 budget exceeded.
The cache directory is --cache, else $QCOUNT_CACHE, else no cache at
all; --no-cache wins over both.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from qcount.cm import m0_count, partition_count, sigma_set, snakes
from qcount.ff import CycloInt, CycloRational, extension_of, field_for_q
from qcount.kac import kac_poly, positivity_check
from qcount.moment import ai_vs_fiber_check
from qcount.orbits import (
    DEFAULT_BUDGET,
    BudgetError,
    count_bundle,
    counts_over_extension,
    quiver_hash,
)
from qcount.pleth import dilog_check, hua_check
from qcount.quiver import Potential, parse_quiver


@dataclass
class JobSpec:
    command: str
    quiver_path: str = None
    dim: tuple = None
    q: int = None
    ext: int = 1
    cutoff: int = None
    potential: str = None
    eta: tuple = None
    n: int = None
    samples: tuple = None
    holdout: int = None
    framed: int = 0
    fmt: str = "json"
    threads: int = 1
    budget: int = DEFAULT_BUDGET
    cache_dir: str = None
    no_diamond: bool = False


# ----------------------------------------------------------------- rendering


def _frac(x):
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _jsonify(value):
    """Exact JSON image of a report value."""
    if isinstance(value, (CycloInt, CycloRational)):
        coords = []
        for c in value.coords:
            c = Fraction(c)
            coords.append(int(c) if c.denominator == 1 else _frac(c))
        return {"p": value.p, "coords": coords}
    if isinstance(value, Fraction):
        return _frac(value)
    if isinstance(value, int):
        return value
    return str(value)


def _emit(payload, header, rows, fmt):
    if fmt == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------- validation


def _csv_ints(text, what):
    try:
        return tuple(int(piece) for piece in text.split(","))
    except ValueError:
        raise ValueError(f"{what} must be comma-separated integers, got {text!r}")


def _field(job):
    base = field_for_q(job.q)
    if job.ext < 1:
        raise ValueError("extension degree must be >= 1")
    return base if job.ext == 1 else extension_of(base, job.ext)


def _read_quiver(job):
    with open(job.quiver_path) as fh:
        return parse_quiver(fh.read())


def _resolve_potential(spec, quiver, file_potential):
    """A potential reference: None, 'file', '0', or an inline term sum."""
    if spec is None:
        return file_potential
    if spec == "file":
        if file_potential is None:
            raise ValueError("the quiver file declares no potential")
        return file_potential
    if spec in ("0", "zero", "none"):
        return Potential.zero(quiver)
    terms = []
    for piece in spec.split("+"):
        piece = piece.strip()
        if not piece:
            continue
        if "*" in piece:
            coeff, _, cycle = piece.partition("*")
            coeff = int(coeff.strip())
        else:
            coeff, cycle = 1, piece
        terms.append((coeff, tuple(w.strip() for w in cycle.strip().split("."))))
    return Potential(quiver, terms)


# ------------------------------------------------------------------ commands


def _cmd_count(job):
    quiver, _, _ = _read_quiver(job)
    dim = quiver.check_dim(job.dim)
    bundle = counts_over_extension(
        quiver, dim, field_for_q(job.q), job.ext,
        budget=job.budget, cache_dir=job.cache_dir,
    )
    classes = [
        {
            "tag": r.tag,
            "orbit_size": r.orbit_size,
            "aut_order": r.aut_order,
            "mats": {a: m.tolist() for a, m in r.representative.mats.items()},
        }
        for r in bundle.reports
    ]
    payload = {
        "command": "count",
        "quiver": quiver_hash(quiver)[:16],
        "q": bundle.q,
        "v": list(bundle.v),
        "n_points": bundle.n_points,
        "n_iso": bundle.n_iso,
        "stacky": _frac(bundle.stacky),
        "n_ai": bundle.n_ai,
        "classes": classes,
    }
    rows = [
        (i, c["tag"], c["orbit_size"], c["aut_order"])
        for i, c in enumerate(classes)
    ]
    return payload, ("class", "tag", "orbit_size", "aut_order"), rows, True


def _check_payload(report, extra=None):
    payload = {
        "command": report.name,
        "params": report.params,
        "passed": report.passed,
        "entries": [
            {"v": list(e.v), "m": e.m, "lhs": _jsonify(e.lhs),
             "rhs": _jsonify(e.rhs), "ok": e.ok}
            for e in report.entries
        ],
    }
    if extra:
        payload.update(extra)
    rows = [
        (",".join(map(str, e.v)), e.m, str(e.lhs), str(e.rhs), e.ok)
        for e in report.entries
    ]
    return payload, ("v", "m", "lhs", "rhs", "ok"), rows, report.passed


def _cmd_hua(job):
    quiver, _, file_potential = _read_quiver(job)
    potential = _resolve_potential(job.potential, quiver, file_potential)
    report = hua_check(
        quiver, _field(job), job.cutoff,
        potential=potential, budget=job.budget, cache_dir=job.cache_dir,
    )
    return _check_payload(report)


def _cmd_dilog(job):
    return _check_payload(dilog_check(job.cutoff))


def _cmd_moment(job):
    quiver, _, _ = _read_quiver(job)
    dim = quiver.check_dim(job.dim)
    field = _field(job)
    if job.eta is None:
        raise ValueError("moment-check needs --eta, one scalar per vertex")
    header = ("q", "v", "eta", "n_ai", "half_dim", "lhs", "m_o", "fiber_points",
              "diamond", "passed")
    try:
        r = ai_vs_fiber_check(
            quiver, dim, field, job.eta,
            budget=job.budget, require_diamond=not job.no_diamond,
        )
    except AssertionError as err:
        payload = {
            "command": "moment-check", "q": field.q, "v": list(dim),
            "eta": list(job.eta), "passed": False, "detail": str(err),
        }
        return payload, header, [], False
    lhs = r.n_ai * r.q**r.half_dim
    payload = {
        "command": "moment-check",
        "q": r.q,
        "v": list(r.v),
        "eta": list(r.eta),
        "n_ai": r.n_ai,
        "half_dim": r.half_dim,
        "lhs": lhs,
        "m_o": _frac(r.m_o),
        "fiber_points": r.fiber_points,
        "diamond": r.diamond,
        "passed": r.passed,
    }
    row = (r.q, ",".join(map(str, r.v)), ",".join(map(str, r.eta)), r.n_ai,
           r.half_dim, lhs, _frac(r.m_o), r.fiber_points, r.diamond, r.passed)
    return payload, header, [row], r.passed


def _cmd_cells(job):
    field = field_for_q(job.q)
    header = ("n", "q", "n_points", "indec_points", "cells", "expected", "passed")
    try:
        r = m0_count(job.n, field, budget=job.budget)
    except AssertionError as err:
        payload = {"command": "cm-cells", "n": job.n, "q": field.q,
                   "passed": False, "detail": str(err)}
        return payload, header, [], False
    payload = {
        "command": "cm-cells",
        "n": r.n,
        "q": r.q,
        "n_points": r.n_points,
        "indec_points": r.indec_points,
        "cells": _frac(r.cells),
        "expected": r.expected,
        "passed": True,
    }
    row = (r.n, r.q, r.n_points, r.indec_points, _frac(r.cells), r.expected, True)
    return payload, header, [row], True


def _cmd_sigma(job):
    pairs = sigma_set(job.n)
    expected = partition_count(job.n)
    payload = {
        "command": "sigma",
        "n": job.n,
        "count": len(pairs),
        "partitions": expected,
        "pairs": [[list(lam), list(mu)] for lam, mu in pairs],
        "passed": len(pairs) == expected,
    }
    rows = [(",".join(map(str, lam)), ",".join(map(str, mu))) for lam, mu in pairs]
    return payload, ("lambda", "mu"), rows, payload["passed"]


def _cmd_snakes(job):
    r = snakes(job.n, job.dim, framed=job.framed)
    payload = {
        "command": "snakes",
        "n": r.n,
        "v": list(r.v),
        "n_collections": len(r.collections),
        "n_diagrams": len(r.diagrams),
        "collections": [[list(s) for s in coll] for coll in r.collections],
        "diagrams": [list(d) for d in r.diagrams],
        "passed": r.passed,
    }
    rows = [
        (" ".join(f"{ln}:{mk}" for ln, mk in coll), ",".join(map(str, diagram)))
        for coll, diagram in r.table
    ]
    return payload, ("collection", "diagram"), rows, r.passed


def _cmd_kac(job):
    quiver, _, _ = _read_quiver(job)
    dim = quiver.check_dim(job.dim)
    k = kac_poly(quiver, dim, job.samples, budget=job.budget, cache_dir=job.cache_dir)
    ok, offenders = positivity_check(k)
    passed = ok
    holdout = None
    if job.holdout is not None:
        bundle = count_bundle(
            quiver, dim, field_for_q(job.holdout),
            budget=job.budget, cache_dir=job.cache_dir,
        )
        predicted = k.evaluate(job.holdout)
        holdout = {
            "q": job.holdout,
            "predicted": predicted,
            "counted": bundle.n_ai,
            "ok": predicted == bundle.n_ai,
        }
        passed = passed and holdout["ok"]
    payload = {
        "command": "kac",
        "quiver": k.quiver[:16],
        "v": list(k.v),
        "coeffs": list(k.coeffs),
        "degree": k.degree,
        "monic": bool(k.coeffs) and k.coeffs[-1] == 1,
        "samples": list(k.samples),
        "positivity": {"ok": ok, "offenders": [list(o) for o in offenders]},
        "holdout": holdout,
        "passed": passed,
    }
    rows = [(i, c) for i, c in enumerate(k.coeffs)]
    return payload, ("power", "coeff"), rows, passed


_HANDLERS = {
    "count": _cmd_count,
    "hua": _cmd_hua,
    "dilog": _cmd_dilog,
    "moment-check": _cmd_moment,
    "cm-cells": _cmd_cells,
    "sigma": _cmd_sigma,
    "snakes": _cmd_snakes,
    "kac": _cmd_kac,
}


# -------------------------------------------------------------------- parser


def _add_output(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, metavar="OPS")
    p.add_argument("--threads", type=int, default=1, metavar="N")


def _add_cache(p):
    p.add_argument("--cache", metavar="DIR")
    p.add_argument("--no-cache", action="store_true")


def _add_field_args(p, dim=True):
    p.add_argument("--quiver", required=True, metavar="FILE")
    if dim:
        p.add_argument("--dim", required=True, metavar="CSV")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--ext", type=int, default=1, metavar="N")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="qcount",
        description="Count quiver representations over finite fields and "
        "check the identities those counts satisfy.",
    )
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("count", help="points, classes, stacky and AI counts")
    _add_field_args(p)
    _add_output(p)
    _add_cache(p)

    p = sub.add_parser("hua", help="class series = Exp(AI series), to a cutoff")
    _add_field_args(p, dim=False)
    p.add_argument("--cutoff", type=int, required=True, metavar="N")
    p.add_argument("--potential", metavar="REF",
                   help="'file', '0', or terms like '1 * l.l + -1 * a.b'")
    _add_output(p)
    _add_cache(p)

    p = sub.add_parser("dilog", help="quantum dilogarithm identity in s = q^(1/2)")
    p.add_argument("--cutoff", type=int, default=6, metavar="N")
    _add_output(p)

    p = sub.add_parser("moment-check", help="AI count against the eta-fiber count")
    _add_field_args(p)
    p.add_argument("--eta", required=True, metavar="CSV")
    p.add_argument("--no-diamond", action="store_true",
                   help="skip the genericity gate on eta")
    _add_output(p)

    p = sub.add_parser("cm-cells", help="fiber cell count p(n) * q^n over F_q")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    _add_output(p)

    p = sub.add_parser("sigma", help="strict partition pairs against p(n)")
    p.add_argument("--n", type=int, required=True)
    _add_output(p)

    p = sub.add_parser("snakes", help="snake collections against colored diagrams")
    p.add_argument("--n", type=int, required=True, help="cycle length (color count)")
    p.add_argument("--dim", required=True, metavar="CSV")
    p.add_argument("--framed", type=int, default=0, metavar="K")
    _add_output(p)

    p = sub.add_parser("kac", help="interpolated AI-count polynomial")
    p.add_argument("--quiver", required=True, metavar="FILE")
    p.add_argument("--dim", required=True, metavar="CSV")
    p.add_argument("--samples", required=True, metavar="CSV",
                   help="prime powers to count over")
    p.add_argument("--holdout", type=int, metavar="Q",
                   help="verify the polynomial at one more prime power")
    _add_output(p)
    _add_cache(p)

    return ap


def _job_from_args(args):
    job = JobSpec(command=args.command)
    job.fmt = getattr(args, "format", "json")
    job.budget = getattr(args, "budget", DEFAULT_BUDGET)
    job.threads = getattr(args, "threads", 1)
    if job.budget < 1:
        raise ValueError("budget must be >= 1")
    if job.threads < 1:
        raise ValueError("threads must be >= 1")
    if getattr(args, "no_cache", False):
        job.cache_dir = None
    elif getattr(args, "cache", None):
        job.cache_dir = args.cache
    else:
        job.cache_dir = os.environ.get("QCOUNT_CACHE") or None
    job.quiver_path = getattr(args, "quiver", None)
    if getattr(args, "dim", None) is not None:
        job.dim = _csv_ints(args.dim, "--dim")
    job.q = getattr(args, "q", None)
    job.ext = getattr(args, "ext", 1)
    job.cutoff = getattr(args, "cutoff", None)
    job.potential = getattr(args, "potential", None)
    if getattr(args, "eta", None) is not None:
        job.eta = _csv_ints(args.eta, "--eta")
    job.n = getattr(args, "n", None)
    if getattr(args, "samples", None) is not None:
        job.samples = _csv_ints(args.samples, "--samples")
    job.holdout = getattr(args, "holdout", None)
    job.framed = getattr(args, "framed", 0)
    job.no_diamond = getattr(args, "no_diamond", False)
    return job


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        job = _job_from_args(args)
        payload, header, rows, passed = _HANDLERS[job.command](job)
    except BudgetError as err:
        print(f"qcount: {err}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as err:
        print(f"qcount: {err}", file=sys.stderr)
        return 2
    _emit(payload, header, rows, job.fmt)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
