"""Worked-example tensors and varieties shipped with the package."""

from __future__ import annotations

import json
from importlib import resources

from .io import tensor_from_json, variety_from_json
from .tensor import SymTensor
from .variety import VarietySpec


def _dir():
    return resources.files("xdecomp") / "data"


def names() -> list[str]:
    return sorted(p.name[: -len(".tensor.json")] for p in _dir().iterdir() if p.name.endswith(".tensor.json"))


def path(name: str, kind: str = "tensor"):
    p = _dir() / f"{name}.{kind}.json"
    if not p.is_file():
        raise KeyError(f"no {kind} fixture named {name!r}; available: {', '.join(names())}")
    return p


def load_tensor(name: str) -> SymTensor:
    return tensor_from_json(json.loads(path(name, "tensor").read_text()))


def load_variety(name: str) -> VarietySpec:
    return variety_from_json(json.loads(path(name, "variety").read_text()))


def load(name: str) -> tuple[SymTensor, VarietySpec]:
    return load_tensor(name), load_variety(name)
