"""Command-line front end: membership, rank-info, decompose, vandermonde, bench.

Exit codes: 0 success, 1 method-level failure (non-member, no decomposition),
2 usage or input error. Tensor arguments may name a shipped fixture as
``@name``; its variety is then used unless one is given explicitly.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, fixtures
from .decompose import SolverConfig, decompose
from .genpoly import parameterize_G, residual_system
from .io import (
    FormatError,
    decomposition_to_json,
    load_json,
    load_tensor,
    load_variety,
    multiway_from_json,
    save_json,
)
from .tensor import flattening_ranks, max_flattening_rank, norm
from .variety import VarietySpec, estimate_dimX, exp_grank, hilbert_value, membership

SEED_ENV = "XDECOMP_SEED"


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    inputs: list
    config: dict
    seed: int | None
    versions: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @classmethod
    def start(cls, command, inputs, config, seed):
        import scipy

        versions = {"xdecomp": __version__, "python": platform.python_version(),
                    "numpy": np.__version__, "scipy": scipy.__version__}
        return cls(command, [str(p) for p in inputs if p is not None], config, seed, versions)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}")


def _tensor_and_variety(tensor_arg: str, variety_arg: str | None, required: bool = False):
    if tensor_arg.startswith("@"):
        name = tensor_arg[1:]
        try:
            A = fixtures.load_tensor(name)
            X = load_variety(variety_arg) if variety_arg else fixtures.load_variety(name)
        except KeyError as exc:
            raise UsageError(str(exc.args[0]))
        return A, X
    A = load_tensor(tensor_arg)
    if variety_arg:
        X = load_variety(variety_arg)
    elif required:
        raise UsageError("a variety file is required")
    else:
        X = VarietySpec.full_space(A.n)
    if X.n != A.n:
        raise UsageError(f"tensor has n={A.n} but variety has n={X.n}")
    return A, X


def _emit(obj, out: str | None):
    if out:
        save_json(obj, out)
    else:
        print(json.dumps(obj, indent=1))


def _c(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


# commands ---------------------------------------------------------------------

def cmd_membership(args) -> int:
    man = RunManifest.start("membership", [args.tensor, args.variety], {"tol": args.tol}, None)
    t0 = time.perf_counter()
    A, X = _tensor_and_variety(args.tensor, args.variety, required=True)
    rep = membership(A, X, tol=args.tol)
    man.wall_time = time.perf_counter() - t0
    out = {"member": bool(rep.member), "worst_violation": float(rep.worst_violation), "checks": rep.checks,
           "manifest": asdict(man)}
    if rep.violating is not None:
        t, beta = rep.violating
        out["violating"] = {"generator": t, "multiplier": list(beta)}
        print(f"not a member: generator {t} times x^{list(beta)} pairs to a nonzero value", file=sys.stderr)
    _emit(out, args.out)
    return 0 if rep.member else 1


def cmd_rank_info(args) -> int:
    man = RunManifest.start("rank-info", [args.tensor, args.variety], {"tol": args.tol}, None)
    t0 = time.perf_counter()
    A, X = _tensor_and_variety(args.tensor, args.variety)
    ranks = flattening_ranks(A, args.tol)
    dim = X.dimX if X.dimX is not None else estimate_dimX(X)
    out = {
        "flattening_ranks": {str(k): v for k, v in ranks.items()},
        "max_flattening_rank": max_flattening_rank(A, args.tol),
        "hilbert_value": hilbert_value(X, A.d),
        "dimX": dim,
        "exp_grank": exp_grank(VarietySpec(X.n, X.generators_h, dimX=dim), A.d),
        "norm_hilbert_schmidt": norm(A, "hilbert_schmidt"),
        "norm_coefficient": norm(A, "coefficient"),
    }
    man.wall_time = time.perf_counter() - t0
    out["manifest"] = asdict(man)
    _emit(out, args.out)
    return 0


def _solver_config(args, seed) -> SolverConfig:
    kw = dict(restarts=args.restarts, seed=seed, generic_change=not args.no_generic_change)
    if args.tol is not None:
        kw["rel_tol"] = args.tol
    if args.rank is not None:
        kw.update(rank_min=args.rank, rank_max=args.rank, escalate=False)
    elif args.max_rank is not None:
        kw["rank_max"] = args.max_rank
    return SolverConfig(**kw)


def _dump_residuals(A, X, res, path):
    att = next((a for a in reversed(res.trace) if a.rank == res.rank_used and a.B0), None)
    if att is None:
        return
    fam = parameterize_G(A, [tuple(b) for b in att.B0])
    rs = residual_system(A, X, fam)
    save_json({"rank": res.rank_used, "B0": att.B0, "m": rs.m,
               "residuals": [{"kind": k, "label": str(lab), "poly": p.to_json()}
                             for k, lab, p in zip(rs.kinds, rs.labels, rs.polys)]}, path)


def cmd_decompose(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = _solver_config(args, seed)
    man = RunManifest.start("decompose", [args.tensor, args.variety],
                            {k: v for k, v in asdict(cfg).items()}, seed)
    t0 = time.perf_counter()
    A, X = _tensor_and_variety(args.tensor, args.variety)
    res = decompose(A, X, cfg)
    man.wall_time = time.perf_counter() - t0
    trace = [{k: v for k, v in asdict(a).items()} for a in res.trace]
    if res.decomposition is not None:
        out = decomposition_to_json(res, seed)
    else:
        out = {"rank": None, "seed": seed}
    out.update(success=bool(res.success), trace=trace, manifest=asdict(man))
    if not res.success:
        note = "no decomposition found"
        if not cfg.escalate:
            note += f" at rank {args.rank} (escalation disabled)"
        out["note"] = note
        print(note, file=sys.stderr)
    if args.dump_residuals:
        _dump_residuals(A, X, res, args.dump_residuals)
    _emit(out, args.out)
    return 0 if res.success else 1


def _vdecomp_json(V, rel_error) -> dict:
    return {"rank": V.rank, "d": V.d, "weights": [_c(w) for w in V.weights],
            "pairs": [[[_c(a), _c(b)] for a, b in term] for term in V.pairs], "rel_error": rel_error}


def cmd_vandermonde(args) -> int:
    from .vandermonde import default_nodes, relative_error, vandermonde_oracle, vdecompose

    seed = args.seed if args.seed is not None else _default_seed()
    man = RunManifest.start("vandermonde", [args.multiway],
                            {"rank": args.rank, "oracle": args.oracle, "nodes": args.nodes,
                             "restarts": args.restarts}, seed)
    t0 = time.perf_counter()
    T = multiway_from_json(load_json(args.multiway))
    if args.oracle:
        d = T.shape[0] - 1
        nodes = default_nodes(d) if args.nodes == "unit" else np.arange(d + 1, dtype=float)
        V = vandermonde_oracle(T, nodes)
        out, ok = _vdecomp_json(V, relative_error(T, V)), True
    else:
        kw = dict(restarts=args.restarts, seed=seed)
        if args.rank is not None:
            kw.update(rank_min=args.rank, rank_max=args.rank, escalate=False)
        res = vdecompose(T, SolverConfig(**kw))
        ok = res.success
        out = _vdecomp_json(res.decomposition, res.rel_error) if res.decomposition is not None else {}
        out["consistency"] = res.consistency
        if not ok:
            out["note"] = "no decomposition found" + (" (escalation disabled)" if args.rank is not None else "")
    man.wall_time = time.perf_counter() - t0
    out.update(success=ok, manifest=asdict(man))
    _emit(out, args.out)
    return 0 if ok else 1


def cmd_bench(args) -> int:
    from .vandermonde import bench

    seed = args.seed if args.seed is not None else _default_seed()
    rows = bench(args.k, args.d, args.r, args.trials, seed=seed, cfg=SolverConfig(restarts=args.restarts))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["k", "n", "d", "r", "time", "rel_error"])
        for row in rows:
            w.writerow([row.k, row.n, row.d, row.r, f"{row.time:.3f}", f"{row.rel_error:.3e}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0 if all(row.success for row in rows) else 1


# parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xdecomp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("membership", help="test whether a tensor lies in S^d(X)")
    s.add_argument("tensor")
    s.add_argument("variety", nargs="?")
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--out")
    s.set_defaults(func=cmd_membership)

    s = sub.add_parser("rank-info", help="flattening ranks, Hilbert value and expected generic rank")
    s.add_argument("tensor")
    s.add_argument("variety", nargs="?")
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--out")
    s.set_defaults(func=cmd_rank_info)

    s = sub.add_parser("decompose", help="symmetric decomposition with points on X")
    s.add_argument("tensor")
    s.add_argument("variety", nargs="?")
    s.add_argument("--rank", type=int, help="try this rank only (no escalation)")
    s.add_argument("--max-rank", type=int)
    s.add_argument("--restarts", type=int, default=50)
    s.add_argument("--seed", type=int)
    s.add_argument("--tol", type=float, help="relative error accepted as success")
    s.add_argument("--no-generic-change", action="store_true")
    s.add_argument("--dump-residuals", metavar="FILE")
    s.add_argument("--out")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("vandermonde", help="Vandermonde decomposition of a multiway array")
    s.add_argument("multiway")
    s.add_argument("--rank", type=int)
    s.add_argument("--restarts", type=int, default=50)
    s.add_argument("--seed", type=int)
    s.add_argument("--oracle", action="store_true", help="inverse-Vandermonde expansion, (d+1)^k terms")
    s.add_argument("--nodes", choices=["unit", "real"], default="unit")
    s.add_argument("--out")
    s.set_defaults(func=cmd_vandermonde)

    s = sub.add_parser("bench", help="planted Vandermonde instances on the Segre variety, CSV out")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--trials", type=int, default=5)
    s.add_argument("--restarts", type=int, default=50)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
