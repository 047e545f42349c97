"""JSON formats for tensors, varieties, multiway arrays and decompositions."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .poly import Poly
from .tensor import SymTensor
from .variety import VarietySpec


class FormatError(ValueError):
    pass


def _num(re, im=0.0) -> complex:
    return complex(float(re), float(im))


def tensor_to_json(A: SymTensor) -> dict:
    entries = []
    for alpha, a in zip(A.labels, A.data):
        if a != 0:
            entries.append({"alpha": list(alpha), "re": float(a.real), "im": float(a.imag)})
    return {"n": A.n, "d": A.d, "entries": entries}


def tensor_from_json(obj: dict) -> SymTensor:
    try:
        n, d = int(obj["n"]), int(obj["d"])
        seen: dict = {}
        for e in obj["entries"]:
            alpha = tuple(int(a) for a in e["alpha"])
            if len(alpha) != n or sum(alpha) > d or min(alpha, default=0) < 0:
                raise FormatError(f"label {list(alpha)} is not in N^{n}_{d}")
            if alpha in seen:
                raise FormatError(f"duplicate label {list(alpha)}")
            seen[alpha] = _num(e.get("re", 0.0), e.get("im", 0.0))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed tensor JSON: {exc}") from exc
    return SymTensor.from_entries(n, d, seen)


def variety_to_json(X: VarietySpec) -> dict:
    out = {"n": X.n, "generators": [h.to_json() for h in X.generators_h]}
    if X.dimX is not None:
        out["dimX"] = X.dimX
    if X.witness is not None:
        out["witness"] = [[complex(z).real, complex(z).imag] for z in X.witness]
    if X.name:
        out["name"] = X.name
    return out


def variety_from_json(obj: dict) -> VarietySpec:
    try:
        n = int(obj["n"])
        gens = tuple(Poly.from_json(g, exact=True) for g in obj.get("generators", []))
        witness = obj.get("witness")
        if witness is not None:
            witness = tuple(_num(*z) for z in witness)
        return VarietySpec(n, gens, dimX=obj.get("dimX"), witness=witness, name=obj.get("name", ""))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed variety JSON: {exc}") from exc


def multiway_to_json(T: np.ndarray) -> dict:
    k, d = T.ndim, T.shape[0] - 1
    flat = T.reshape(-1)
    return {"k": k, "d": d, "entries": [[float(z.real), float(z.imag)] for z in flat]}


def multiway_from_json(obj: dict) -> np.ndarray:
    try:
        k, d = int(obj["k"]), int(obj["d"])
        vals = np.array([_num(*z) for z in obj["entries"]], dtype=complex)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed multiway JSON: {exc}") from exc
    if vals.size != (d + 1) ** k:
        raise FormatError(f"expected {(d + 1) ** k} entries, got {vals.size}")
    return vals.reshape((d + 1,) * k)


def decomposition_to_json(result, seed: int | None = None) -> dict:
    D = result.decomposition
    out = {
        "rank": int(D.rank),
        "lambdas": [[float(z.real), float(z.imag)] for z in D.weights],
        "points": [[[float(z.real), float(z.imag)] for z in v] for v in D.points],
        "abs_error": float(result.abs_error),
        "rel_error": float(result.rel_error),
        "variety_violation": float(result.on_variety_violation),
        "seed": seed,
    }
    if np.any(D.leads != 1):
        out["leads"] = [[float(z.real), float(z.imag)] for z in D.leads]
    return out


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def load_tensor(path) -> SymTensor:
    return tensor_from_json(load_json(path))


def load_variety(path) -> VarietySpec:
    return variety_from_json(load_json(path))


def save_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")
