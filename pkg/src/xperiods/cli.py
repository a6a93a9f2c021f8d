"""Command line interface: ``xp <group> <command> [options]``.

Every command prints an envelope ``{schema, status, payload, diagnostics}``.
Exit codes: 0 ok, 2 rejected input, 3 numerical failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import XpError

SCHEMA = "xp/1"
EXIT_OK, EXIT_REJECTED, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _load_json(text):
    """Literal JSON, ``@file`` or a path to an existing file."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    return json.loads(text)


def _split_points(text):
    if text is None or text.strip() == "":
        return []
    return [t.strip() for t in text.split(",") if t.strip()]


def _cjson(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


# ---------------------------------------------------------------------------
# handlers return (status, payload, diagnostics)
# ---------------------------------------------------------------------------

def _period_eval(a):
    from .periods import integrate_path

    val = integrate_path(a.f, a.omega, a.path, a.tol, force=a.force)
    status = "ok" if val.converged else "rejected"
    return status, val.to_json(), val.diagnostics


def _period_matrix(a):
    from .periods import gamma_closed_form, period_matrix

    pm = period_matrix(a.n, a.tol)
    ref = np.array([[gamma_closed_form(a.n, j, m) for j in range(a.n)] for m in range(a.n)])
    rel = float(np.max(np.abs(pm.values - ref) / np.abs(ref)))
    payload = {
        "n": a.n,
        "entries": [[_cjson(x) for x in row] for row in pm.values],
        "abs_err": pm.errors.tolist(),
        "det": _cjson(pm.det),
        "cond": pm.cond,
        "max_rel_dev_closed_form": rel,
    }
    return "ok", payload, []


def _curve_spec(a):
    from .blowup import INF, CurveSpec

    if a.curve and a.curve.upper() != "A1":
        obj = _load_json(a.curve)
        if a.f:
            obj["f"] = a.f
        return CurveSpec.from_json(obj)
    punct = _split_points(a.punctures) if a.punctures else [INF]
    return CurveSpec(tuple(punct), tuple(_split_points(a.marked)), a.f)


def _homology_rd(a):
    from .blowup import build_rd_model, classify_punctures, rd_generators
    from .chains import homology_ranks
    from .errors import UnsupportedShape

    spec = _curve_spec(a)
    model = build_rd_model(spec)
    ranks = homology_ranks(model.chain_complex("bcirc"))
    sharp = homology_ranks(model.chain_complex("bsharp"))
    zf, zinf = classify_punctures(spec)
    diags = []
    try:
        gens = [_cjson(g) for g in rd_generators(spec)]
    except UnsupportedShape as exc:
        gens = []
        diags.append(str(exc))
    payload = {
        "rank": ranks[1],
        "ranks": ranks,
        "ranks_bsharp": sharp,
        "generators": gens,
        "poles": [{"at": str(p.location), "order": p.order} for p in zinf],
        "finite_punctures": [str(p.location) for p in zf],
        "boundary_arcs": model.n_arcs,
        "euler_characteristic": model.euler_characteristic(),
    }
    return "ok", payload, diags


def _homology_chain(a):
    from .chains import ChainComplexQ, homology_ranks, simplicial_chain_complex
    from .simplex import GeomComplex

    obj = _load_json(a.input)
    if "dims" in obj:
        C = ChainComplexQ.from_json(obj)
    else:
        K = GeomComplex.from_json(obj)
        sub = _load_json(a.sub) if a.sub else []
        if isinstance(sub, list):
            # index lists refer to the vertices of --in
            sub = {"ambient": obj.get("ambient"), "vertices": obj["vertices"], "simplices": sub}
        L = GeomComplex.from_json(sub)
        C = simplicial_chain_complex(K, L)
    return "ok", {"ranks": homology_ranks(C), "dims": C.dims}, []


def _derham(a):
    from .algebra import parse_constant
    from .derham import h1_basis, h1_rank

    Y = _split_points(a.marked)
    Yq = [parse_constant(y, exact=True) for y in Y]
    rank = h1_rank(a.f, Yq, a.N)
    basis = h1_basis(a.f, Yq, a.N)
    payload = {"rank": rank,
               "basis": [{"form": str(c.form), "values": [str(v) for v in c.values]} for c in basis]}
    return "ok", payload, []


def _complex_core(a):
    from .simplex import GeomComplex, barycentric_subdivision, closed_core

    K = GeomComplex.from_json(_load_json(a.input))
    return "ok", closed_core(barycentric_subdivision(K)).to_json(), []


def _complex_subdivide(a):
    from .simplex import GeomComplex, barycentric_subdivision

    K = GeomComplex.from_json(_load_json(a.input))
    return "ok", barycentric_subdivision(K).to_json(), []


def _volume_represent(a):
    from .volume import DensityDomain, represent_volume

    D = DensityDomain.from_json(_load_json(a.domain), a.density)
    rep = represent_volume(D)
    payload = {"value": rep.value, "abs_err": rep.abs_err,
               "U_plus": rep.U_plus.describe(), "U_minus": rep.U_minus.describe()}
    return "ok", payload, []


def _volume_combine(a):
    from .semialg import SignConditionRegion
    from .volume import combine_signed_volumes

    spec = _load_json(a.spec)
    items = [(int(it["sign"]), SignConditionRegion.from_json(it["region"])) for it in spec["items"]]
    res = combine_signed_volumes(items, Fraction(a.eps))
    payload = {"volume": res.volume, "lower": res.lower, "upper": res.upper,
               "error_bound": res.error_bound, "global_sign": res.global_sign,
               "counts": res.counts, "removed_cells": res.removed_cells,
               "certified": res.certified,
               "translates": [{"sign": s, "region": r} for s, r in res.translates]}
    return "ok", payload, res.diagnostics


def _check_stokes(a, rng):
    from .periods import stokes_residual

    if a.random:
        from .periods import random_stokes_instance

        rows = []
        for _ in range(a.random):
            verts, omega, f = random_stokes_instance(rng)
            rows.append({"f": str(f), "omega": str(omega), "residual": stokes_residual(verts, omega, f)})
        worst = max(r["residual"] for r in rows)
        return "ok", {"count": len(rows), "max_residual": worst, "instances": rows}, []
    if not (a.f and a.omega and a.simplex):
        raise UsageError("check stokes needs --f, --omega and --simplex (or --random N)")
    from .periods import parse_point

    verts = [complex(parse_point(p)) for p in a.simplex.split(";")]
    return "ok", {"residual": stokes_residual(verts, a.omega, a.f)}, []


def _check_proper(a):
    from .algebra import parse_ratfunc
    from .periods import PathSpec, properness_check

    v = properness_check(parse_ratfunc(a.f), PathSpec.parse(a.path))
    payload = {"verdict": v.kind, "reason": v.reason,
               "strip": None if v.strip is None else {"r": v.strip.r, "s": v.strip.s}}
    return ("ok" if v.ok else "rejected"), payload, v.diagnostics


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p, default):
    # accepted both before and after the subcommand
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default=default,
                     help="JSON output (default)")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", default=default,
                     help="CSV key,value output")
    p.add_argument("--seed", type=int, default=default, help="seed for randomised suites")


def build_parser():
    p = _Parser(prog="xp", description="Exponential periods, rapid decay models and definable volumes.")
    p.add_argument("--version", action="version", version=f"xp {__version__}")
    _add_common(p, argparse.SUPPRESS)
    common = _Parser(add_help=False)
    _add_common(common, argparse.SUPPRESS)
    groups = p.add_subparsers(dest="group", parser_class=_Parser)

    period = groups.add_parser("period").add_subparsers(dest="cmd", parser_class=_Parser)
    ev = period.add_parser("eval", parents=[common], help="integrate exp(-f) omega over a path")
    ev.add_argument("--f", required=True)
    ev.add_argument("--omega", required=True)
    ev.add_argument("--path", required=True, help="ray:BASE:DIR | segment:A:B | polyline:P;Q;.. | param:E1,..:LO:HI")
    ev.add_argument("--tol", type=float, default=1e-10)
    ev.add_argument("--force", action="store_true", help="evaluate even if the path is rejected")
    ev.set_defaults(handler=_period_eval)
    mx = period.add_parser("matrix", parents=[common], help="period matrix of (A^1, {0}, z^n)")
    mx.add_argument("--n", type=int, required=True)
    mx.add_argument("--tol", type=float, default=1e-12)
    mx.set_defaults(handler=_period_matrix)

    hom = groups.add_parser("homology").add_subparsers(dest="cmd", parser_class=_Parser)
    rd = hom.add_parser("rd", parents=[common], help="rapid decay homology of a genus-0 curve")
    rd.add_argument("--curve", default="A1", help="A1 or a curve JSON")
    rd.add_argument("--punctures", default=None)
    rd.add_argument("--marked", default="")
    rd.add_argument("--f", default=None)
    rd.set_defaults(handler=_homology_rd)
    ch = hom.add_parser("chain", parents=[common], help="homology of a complex (JSON)")
    ch.add_argument("--in", dest="input", required=True)
    ch.add_argument("--sub", default=None)
    ch.set_defaults(handler=_homology_chain)

    dr = groups.add_parser("derham", parents=[common], help="twisted de Rham H^1 of (A^1, Y, f)")
    dr.add_argument("--f", required=True)
    dr.add_argument("--marked", default="")
    dr.add_argument("--N", type=int, default=None)
    dr.set_defaults(handler=_derham)

    cx = groups.add_parser("complex").add_subparsers(dest="cmd", parser_class=_Parser)
    core = cx.add_parser("core", parents=[common], help="closed core of the barycentric subdivision")
    core.add_argument("--in", dest="input", required=True)
    core.set_defaults(handler=_complex_core)
    sub = cx.add_parser("subdivide", parents=[common], help="barycentric subdivision")
    sub.add_argument("--in", dest="input", required=True)
    sub.set_defaults(handler=_complex_subdivide)

    vol = groups.add_parser("volume").add_subparsers(dest="cmd", parser_class=_Parser)
    rep = vol.add_parser("represent", parents=[common])
    rep.add_argument("--domain", required=True)
    rep.add_argument("--density", default=None)
    rep.set_defaults(handler=_volume_represent)
    comb = vol.add_parser("combine", parents=[common])
    comb.add_argument("--spec", required=True)
    comb.add_argument("--eps", default="1/64")
    comb.set_defaults(handler=_volume_combine)

    chk = groups.add_parser("check").add_subparsers(dest="cmd", parser_class=_Parser)
    st = chk.add_parser("stokes", parents=[common])
    st.add_argument("--f", default=None)
    st.add_argument("--omega", default=None)
    st.add_argument("--simplex", default=None, help="three points separated by ';'")
    st.add_argument("--random", type=int, default=0, help="run N random instances")
    st.set_defaults(handler=_check_stokes)
    pr = chk.add_parser("proper", parents=[common])
    pr.add_argument("--f", required=True)
    pr.add_argument("--path", required=True)
    pr.set_defaults(handler=_check_proper)
    return p


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix.rstrip("."), obj


def render(envelope, fmt):
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["key", "value"])
        for k, v in _flatten(envelope):
            w.writerow([k, v])
        return buf.getvalue().rstrip("\n")
    return json.dumps(envelope, indent=2, default=str)


def run(argv=None):
    """Parse and dispatch; returns (exit_code, envelope)."""
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "handler", None):
            raise UsageError("missing command; see xp --help")
    except UsageError as exc:
        return EXIT_USAGE, {"schema": SCHEMA, "status": "error", "payload": None,
                            "diagnostics": [str(exc)]}, "json"
    fmt = getattr(args, "fmt", None) or "json"
    seed = getattr(args, "seed", 0)
    rng = random.Random(seed)
    np.random.seed(seed % 2 ** 32)
    try:
        if args.handler is _check_stokes:
            status, payload, diags = args.handler(args, rng)
        else:
            status, payload, diags = args.handler(args)
        code = EXIT_OK if status == "ok" else EXIT_REJECTED
    except UsageError as exc:
        return EXIT_USAGE, {"schema": SCHEMA, "status": "error", "payload": None,
                            "diagnostics": [str(exc)]}, fmt
    except XpError as exc:
        code = exc.exit_code
        status = "rejected" if code == EXIT_REJECTED else "error"
        payload, diags = None, [f"{type(exc).__name__}: {exc}"]
    except (ValueError, KeyError, IndexError, TypeError, FileNotFoundError) as exc:
        code, status = EXIT_USAGE, "error"
        payload, diags = None, [f"{type(exc).__name__}: {exc}"]
    env = {"schema": SCHEMA, "status": status, "payload": payload, "diagnostics": list(diags)}
    return code, env, fmt


def main(argv=None):
    code, env, fmt = run(argv)
    print(render(env, fmt))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
