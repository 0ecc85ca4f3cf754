"""Command line front end.

    pntwist check-pn FILE [--dump-matrices]
    pntwist ptwist FILE [--verify-pff] [--verify-unit] [--segal] [--dump-matrices]
    pntwist companion check FILE
    pntwist companion sweep --dims 2..6 --count 500 --seed 7 --field 65521
    pntwist tta FILE --sigma NAME --n N [--compare NAME --f NAME --beta NAME]
    pntwist conjecture FILE              experimental tta comparison, exit 0 unless input error
    pntwist example NAME [ARGS...]      write a shipped instance as JSON

Exit codes: 0 Pass, 1 Fail, 2 Indeterminate, 3 input error.  Reports go to
stdout as JSON; diagnostics go to stderr.  PNTWIST_WORKERS sets the number
of processes used by companion sweep.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import companion, io, pnfun
from .dga import InvalidStructure, NotProjective, cohomology_dims
from .exact import Field, NoSolution

EXIT = {pnfun.PASS: 0, pnfun.FAIL: 1, pnfun.INDETERMINATE: 2}
INPUT_ERROR = 3


class UsageError(Exception):
    pass


def _emit(report, out):
    out.write(io.dumps(report))


def _worst(verdicts):
    if any(v == pnfun.FAIL for v in verdicts):
        return pnfun.FAIL
    if any(v == pnfun.INDETERMINATE for v in verdicts):
        return pnfun.INDETERMINATE
    return pnfun.PASS


def cmd_check_pn(args, out):
    inst = io.load_instance(args.file)
    Fd, S = inst.functor(), inst.structure()
    rng = np.random.default_rng(inst.seed)
    rep = pnfun.check_pn(Fd, S, rng=rng)
    _emit({"command": "check-pn", "file": os.path.basename(args.file), "n": S.n,
           "report": rep.to_dict(args.dump_matrices)}, out)
    return EXIT[rep.verdict]


def cmd_ptwist(args, out):
    inst = io.load_instance(args.file)
    Fd, S = inst.functor(), inst.structure()
    rng = np.random.default_rng(inst.seed)
    tw = pnfun.p_twist(Fd, S)
    res = {"command": "ptwist", "file": os.path.basename(args.file),
           "P_cohomology": cohomology_dims(tw.total), "P_dim": tw.total.dim, "lift": pnfun.lift_record(S)}
    if args.dump_matrices:
        res["psi"] = io.map_to_json(tw.psi)
        res["xi"] = io.map_to_json(tw.xi)
        res["P_differential"] = io.matrix_to_json(Fd.field, tw.total.d)
    verdicts = []
    if args.verify_pff:
        r = pnfun.verify_pff(Fd, S, rng=rng)
        res["pff"] = r.to_dict(args.dump_matrices)
        verdicts.append(r.verdict)
    if args.verify_unit:
        r = pnfun.verify_pp_unit(Fd, S)
        res["pp_unit"] = r.to_dict(args.dump_matrices)
        verdicts.append(r.verdict)
    if args.segal:
        try:
            r = pnfun.segal_lift(Fd, S, rng=rng)
        except pnfun.PreconditionError as e:
            raise UsageError(f"--segal: {e}") from None
        res["segal"] = r.to_dict(args.dump_matrices)
        verdicts.append(r.verdict)
    v = _worst(verdicts)
    res["verdict"] = v
    _emit(res, out)
    return EXIT[v]


def cmd_conjecture(args, out):
    inst = io.load_instance(args.file)
    Fd, S = inst.functor(), inst.structure()
    rep = pnfun.tta_conjecture(Fd, S, rng=np.random.default_rng(inst.seed))
    _emit({"command": "conjecture", "file": os.path.basename(args.file), "n": S.n,
           "report": rep.to_dict(args.dump_matrices)}, out)
    # the statement is open: any verdict is a result, not an error
    return 0


def _fields(spec):
    return [Field(int(x)) for x in str(spec).split(",") if x]


def _sweep_chunk(job):
    dims, count, seed, chars, families, corrupt, ids = job
    oracle = _corrupted_oracle if corrupt else None
    return companion.sweep(dims, count, seed, [Field(c) for c in chars], families, oracle=oracle, ids=ids)


def run_sweep(dims, count, seed, fields, families=None, corrupt=False, workers=None):
    """companion.sweep, split over PNTWIST_WORKERS processes; results are
    sorted by instance id, so the output does not depend on the split."""
    workers = workers or int(os.environ.get("PNTWIST_WORKERS", "1") or 1)
    chars = [f.char for f in fields]
    if workers <= 1 or count < 2 * workers:
        return _sweep_chunk((dims, count, seed, chars, families, corrupt, None))
    from concurrent.futures import ProcessPoolExecutor
    jobs = [(dims, count, seed, chars, families, corrupt, list(range(w, count, workers))) for w in range(workers)]
    with ProcessPoolExecutor(workers) as ex:
        parts = list(ex.map(_sweep_chunk, jobs))
    return sorted((r for part in parts for r in part), key=lambda r: r["id"])


def _corrupted_oracle(inst):
    # test-only: claims every algebra of dimension 3 is monogenic
    return True if inst.n == 3 else companion.is_monogenic(inst)


def cmd_companion(args, out):
    if args.action == "check":
        inst = io.load_instance(args.file)
        spec = inst.raw.get("companion") or {}
        try:
            Q = inst.algebras[spec["algebra"]]
            h = io.matrix_from_json(inst.field, spec["h"], (Q.dim,), "companion.h")
            ai = companion.AlgebraInstance(Q, h)
        except KeyError as e:
            raise io.InstanceError(f"companion: missing {e}") from None
        except ValueError as e:
            raise io.InstanceError(f"companion: {e}") from None
        r = companion.verify_theorem(ai, _corrupted_oracle if args.corrupt_oracle else None)
        v = pnfun.PASS if r["agrees"] else pnfun.FAIL
        _emit({"command": "companion check", "file": os.path.basename(args.file), "verdict": v,
               "kernel_dim": r["kernel_dim"], "n": r["n"], "monogenic": r["monogenic"], "agrees": r["agrees"]}, out)
        return EXIT[v]
    dims = companion.parse_dims(args.dims)
    fields = _fields(args.field)
    fams = args.families.split(",") if args.families else None
    if fams:
        bad = [f for f in fams if f not in companion.FAMILIES]
        if bad:
            raise UsageError(f"unknown families {bad}")
    results = run_sweep(dims, args.count, args.seed, fields, fams, corrupt=args.corrupt_oracle)
    summ = companion.summarize(results)
    rep = {"command": "companion sweep", "dims": dims, "fields": [str(f) for f in fields],
           "seed": args.seed, "summary": summ}
    bad = [r for r in results if not r["agrees"]]
    if bad:
        rep["counterexamples"] = [_counterexample(r) for r in bad]
    v = pnfun.PASS if not bad else pnfun.FAIL
    rep["verdict"] = v
    _emit(rep, out)
    return EXIT[v]


def _counterexample(r):
    inst = r["instance"]
    F = inst.field
    return {"id": r["id"], "family": r["family"], "field": r["field"], "seed": r["seed"],
            "kernel_dim": r["kernel_dim"], "monogenic": r["monogenic"],
            "algebra": io.algebra_to_json(inst.Q), "h": io.matrix_to_json(F, inst.h)}


def cmd_tta(args, out):
    from .dga import BimoduleMap, identity_map, is_quasi_iso
    from .twisted import TTA, diagonal, tta_compare
    if args.n < 1:
        raise UsageError("n must be at least 1")
    inst = io.load_instance(args.file)
    spec = inst.raw.get("tta") or {}
    try:
        H = inst.bimodules[spec.get("H", "H")]
    except KeyError as e:
        raise io.InstanceError(f"tta: unknown bimodule {e}") from None
    F = inst.field
    Ad = diagonal(H.left)

    def get_map(name, src, tgt, deg):
        try:
            data = spec["maps"][name]
        except (KeyError, TypeError):
            raise io.InstanceError(f"tta.maps: {name!r} missing") from None
        f = io.map_from_json(F, data, src, tgt, f"tta.maps.{name}")
        if f.degree != deg:
            raise io.InstanceError(f"tta.maps.{name}: degree must be {deg}")
        return f

    sigma = get_map(args.sigma, H, Ad, 1)
    try:
        T = TTA(H, sigma, args.n)
    except InvalidStructure as e:
        raise io.InstanceError(f"tta: {e}") from None
    res = {"command": "tta", "n": args.n, "dim": T.Qn.dim, "Q_cohomology": cohomology_dims(T.Qn),
           "sigma_zero": bool(F.is_zero(sigma.matrix)),
           "zero_differential": bool(F.is_zero(T.Qn.d))}
    v = pnfun.PASS
    if args.compare:
        sigma2 = get_map(args.compare, H, Ad, 1)
        f = get_map(args.f, H, H, 0) if args.f else identity_map(H)
        beta = get_map(args.beta, H, Ad, 0) if args.beta else BimoduleMap(H, Ad, 0, F.zeros((Ad.dim, H.dim)))
        T2 = TTA(H, sigma2, args.n)
        try:
            iota = tta_compare(T, T2, f, beta)
        except InvalidStructure as e:
            raise io.InstanceError(f"tta --compare: {e}") from None
        closed = iota.is_closed()
        qi = closed and is_quasi_iso(iota)
        unit = bool(np.array_equal((iota @ T.iota()).matrix, T2.iota().matrix))
        res["compare"] = {"closed": bool(closed), "quasi_iso": bool(qi), "unit_intertwined": unit}
        v = pnfun.PASS if closed and qi and unit else pnfun.FAIL
    res["verdict"] = v
    _emit(res, out)
    return EXIT[v]


def cmd_example(args, out):
    from . import examples as ex
    name, vals = args.name, [int(x) for x in args.args]
    F = Field(args.field)
    if name == "pn_object":
        Fd, S = ex.pn_object(*(vals or [2, 2]), field=F)
        data = io.functor_instance(Fd, S, seed=args.seed)
    elif name == "spherical":
        data = io.functor_instance(ex.spherical_object(*(vals or [1]), field=F), "p1", seed=args.seed)
    elif name == "perturbed":
        Fd, S = ex.perturbed_object(F)
        data = io.functor_instance(Fd, S, seed=args.seed)
    else:
        raise UsageError(f"unknown example {name!r}")
    out.write(io.dumps(data))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="pntwist", description="Checks for P^n-functors given by DG bimodule kernels.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check-pn", help="run the P^n checks on an instance")
    c.add_argument("file")
    c.add_argument("--dump-matrices", action="store_true")
    c.set_defaults(func=cmd_check_pn)

    c = sub.add_parser("ptwist", help="build the P-twist and verify its properties")
    c.add_argument("file")
    c.add_argument("--verify-pff", action="store_true")
    c.add_argument("--verify-unit", action="store_true")
    c.add_argument("--segal", action="store_true")
    c.add_argument("--dump-matrices", action="store_true")
    c.set_defaults(func=cmd_ptwist)

    c = sub.add_parser("conjecture", help="compare Q_n with the truncated twisted tensor algebra (experimental)")
    c.add_argument("file")
    c.add_argument("--dump-matrices", action="store_true")
    c.set_defaults(func=cmd_conjecture)

    c = sub.add_parser("companion", help="kernel dimension of the commutator map")
    csub = c.add_subparsers(dest="action", required=True)
    cc = csub.add_parser("check")
    cc.add_argument("file")
    cc.add_argument("--corrupt-oracle", action="store_true", help=argparse.SUPPRESS)
    cs = csub.add_parser("sweep")
    cs.add_argument("--dims", default="2..6")
    cs.add_argument("--families", default=None)
    cs.add_argument("--count", type=int, default=500)
    cs.add_argument("--seed", type=int, default=0)
    cs.add_argument("--field", default="65521", help="comma separated characteristics, 0 for Q")
    cs.add_argument("--corrupt-oracle", action="store_true", help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_companion)

    c = sub.add_parser("tta", help="build a truncated twisted tensor algebra")
    c.add_argument("file")
    c.add_argument("--sigma", default="sigma")
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--compare", default=None)
    c.add_argument("--f", default=None)
    c.add_argument("--beta", default=None)
    c.set_defaults(func=cmd_tta)

    c = sub.add_parser("example", help="write a shipped instance as JSON")
    c.add_argument("name", choices=["pn_object", "spherical", "perturbed"])
    c.add_argument("args", nargs="*")
    c.add_argument("--field", type=int, default=65521)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_example)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return INPUT_ERROR if e.code else 0
    try:
        return args.func(args, out)
    except (io.InstanceError, UsageError, NotProjective, NoSolution) as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    except InvalidStructure as e:
        print(f"error: invalid structure: {e}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
