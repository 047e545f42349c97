"""Varieties given by homogeneous equations, and what the decomposition needs from them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .poly import Poly
from .tensor import SymTensor, compositions, monomial_index, monomials, norm


class SamplingError(RuntimeError):
    pass


class BasisSelectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class VarietySpec:
    """X = {x in C^{n+1}: h_i(x) = 0} and its affine chart Y = {y: h_i(1, y) = 0}."""

    n: int
    generators_h: tuple[Poly, ...] = ()
    dimX: int | None = None
    witness: tuple | None = None
    name: str = ""
    generators_g: tuple[Poly, ...] = field(init=False, repr=False)

    def __post_init__(self):
        gens = []
        for h in self.generators_h:
            if h.nvars != self.n + 1:
                raise ValueError(f"generator has {h.nvars} variables, expected {self.n + 1}")
            if h.is_zero():
                continue
            if not h.is_homogeneous():
                raise ValueError(f"generator {h} is not homogeneous")
            gens.append(h)
        gens.sort(key=lambda h: h.degree())
        object.__setattr__(self, "generators_h", tuple(gens))
        object.__setattr__(self, "generators_g", tuple(h.dehomogenize() for h in gens))

    @classmethod
    def full_space(cls, n: int) -> "VarietySpec":
        return cls(n, (), dimX=n + 1, name="full space")

    @classmethod
    def from_affine(cls, n: int, generators_g: Sequence[Poly], **kw) -> "VarietySpec":
        """Homogenize affine generators of Y (each to its own degree)."""
        return cls(n, tuple(g.homogenize() for g in generators_g), **kw)

    @property
    def degrees(self) -> list[int]:
        return [h.degree() for h in self.generators_h]

    @property
    def max_generator_degree(self) -> int:
        return max(self.degrees, default=0)

    def affine_violation(self, y) -> float:
        """max_i |g_i(y)| / (1 + ||y||^deg g_i), coefficient-normalized."""
        y = np.asarray(y, dtype=complex)
        ny = np.linalg.norm(y)
        worst = 0.0
        for g in self.generators_g:
            val = abs(complex(g.eval(y))) / max(g.max_abs_coeff(), 1e-300)
            worst = max(worst, val / (1.0 + ny ** g.degree()))
        return worst

    def abs_violation(self, y) -> float:
        """max_i |g_i(y)|, unscaled."""
        y = np.asarray(y, dtype=complex)
        return max((abs(complex(g.eval(y))) for g in self.generators_g), default=0.0)


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    worst_violation: float
    violating: tuple[int, tuple[int, ...]] | None = None
    checks: int = 0

    def __bool__(self):
        return self.member


def _pairing_rows(X: VarietySpec, d: int):
    """Yield (t, beta, {affine label: coefficient}) for every f_t * x^beta of degree d."""
    for t, h in enumerate(X.generators_h):
        dt = h.degree()
        if dt > d:
            continue
        for beta in sorted(compositions(X.n + 1, d - dt), reverse=True):
            row: dict = {}
            for e, c in h.terms.items():
                lab = tuple(a + b for a, b in zip(e, beta))[1:]
                row[lab] = row.get(lab, 0) + c
            yield t, beta, row


def membership(A: SymTensor, X: VarietySpec, tol: float = 1e-8) -> MembershipReport:
    """Decide A in S^d(X) by pairing A with every degree-d multiple f_t * x^beta of the generators."""
    if A.n != X.n:
        raise ValueError("tensor and variety live in different spaces")
    idx = monomial_index(A.n, A.d)
    scale = 1.0 + norm(A)
    worst, where, count = 0.0, None, 0
    for t, beta, row in _pairing_rows(X, A.d):
        val = sum(complex(c) * A.data[idx[lab]] for lab, c in row.items())
        cmax = X.generators_h[t].max_abs_coeff()
        v = abs(val) / (cmax * scale)
        count += 1
        if v > worst:
            worst = v
            if v > tol and where is None:
                where = (t, beta)
    return MembershipReport(worst <= tol, worst, where if worst > tol else None, count)


def macaulay_matrix(X: VarietySpec, d: int) -> np.ndarray:
    """Rows: coefficient vectors of f_t * x^beta over the degree-d monomials."""
    idx = monomial_index(X.n, d)
    rows = []
    for t, beta, row in _pairing_rows(X, d):
        v = np.zeros(len(idx), dtype=complex)
        for lab, c in row.items():
            v[idx[lab]] += complex(c)
        rows.append(v / np.linalg.norm(v))
    if not rows:
        return np.zeros((0, len(idx)), dtype=complex)
    return np.array(rows)


def ideal_dim_at_degree(X: VarietySpec, d: int, tol: float = 1e-10) -> int:
    M = macaulay_matrix(X, d)
    if M.shape[0] == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def hilbert_value(X: VarietySpec, d: int, tol: float = 1e-10) -> int:
    return math.comb(X.n + d, d) - ideal_dim_at_degree(X, d, tol)


def estimate_dimX(X: VarietySpec, witness=None, tol: float = 1e-8) -> int:
    """n + 1 minus the Jacobian rank of the generators at a point of X.

    The witness may be homogeneous (length n+1) or affine (length n, x_0 = 1).
    """
    if not X.generators_h:
        return X.n + 1
    if witness is None:
        witness = X.witness
    if witness is None:
        y = sample_Y(X, 1, seed=12345)[0]
        witness = np.concatenate([[1.0], y])
    u = np.asarray(witness, dtype=complex).reshape(-1)
    if u.size == X.n:
        u = np.concatenate([[1.0], u])
    if u.size != X.n + 1:
        raise ValueError("witness has the wrong length")
    nu = np.linalg.norm(u)
    for h in X.generators_h:
        res = abs(complex(h.eval(u))) / (h.max_abs_coeff() * max(1.0, nu) ** h.degree())
        if res > 1e-8:
            raise ValueError(f"witness is not on X (residual {res:.3g})")
    J = np.array([[complex(g.eval(u)) for g in h.gradient()] for h in X.generators_h])
    J = J / np.maximum(np.linalg.norm(J, axis=1, keepdims=True), 1e-300)
    s = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(s > tol * max(s[0], 1e-300))) if s[0] > 1e-12 else 0
    return X.n + 1 - rank


def exp_grank(X: VarietySpec, d: int) -> int:
    """ceil(h(d) / dim X)."""
    dim = X.dimX if X.dimX is not None else estimate_dimX(X)
    if not dim:
        raise ValueError("dim X is zero; expected rank is undefined")
    return math.ceil(hilbert_value(X, d) / dim)


# sampling Y -------------------------------------------------------------

def _jacobian_funcs(gens: Sequence[Poly]):
    grads = [g.gradient() for g in gens]

    def F(y):
        return np.array([complex(g.eval(y)) for g in gens])

    def J(y):
        return np.array([[complex(p.eval(y)) for p in row] for row in grads]).reshape(len(gens), -1)

    return F, J


def _newton(F, J, y0, max_iter=100, tol=1e-14):
    y = y0.copy()
    f = F(y)
    fn = np.linalg.norm(f)
    for _ in range(max_iter):
        if fn <= tol * (1 + np.linalg.norm(y)):
            return y, fn
        step = np.linalg.lstsq(J(y), -f, rcond=None)[0]
        t = 1.0
        while t > 1e-6:
            y_new = y + t * step
            f_new = F(y_new)
            if np.linalg.norm(f_new) < fn:
                break
            t /= 2
        else:
            return y, fn
        y, f, fn = y_new, f_new, np.linalg.norm(f_new)
    return y, fn


def sample_Y(X: VarietySpec, count: int, seed: int = 0, max_retries: int = 50) -> np.ndarray:
    """Random complex points of Y, obtained from Newton on slices of Y by random affine planes."""
    rng = np.random.default_rng(seed)
    n = X.n
    if not X.generators_g:
        return (rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))) / np.sqrt(2)
    F0, J0 = _jacobian_funcs(X.generators_g)
    out = []
    failures, worst = 0, 0.0
    slice_dim = None
    while len(out) < count:
        y0 = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        if slice_dim is None:
            # local dimension of Y from a first point reached by minimum-norm Newton
            y, res = _newton(F0, J0, y0)
            if X.affine_violation(y) > 1e-12:
                failures += 1
                worst = max(worst, X.affine_violation(y))
                if failures > max_retries:
                    raise SamplingError(f"could not reach Y (worst residual {worst:.3g})")
                continue
            Jy = J0(y)
            s = np.linalg.svd(Jy, compute_uv=False)
            slice_dim = n - int(np.sum(s > 1e-8 * s[0])) if s.size and s[0] > 0 else n
        L = (rng.standard_normal((slice_dim, n)) + 1j * rng.standard_normal((slice_dim, n))) / np.sqrt(n)
        c = L @ y0

        def F(y, L=L, c=c):
            return np.concatenate([F0(y), L @ y - c])

        def J(y, L=L):
            return np.vstack([J0(y), L])

        y, _ = _newton(F, J, y0)
        v = X.affine_violation(y)
        if v <= 1e-12 and np.all(np.isfinite(y)):
            out.append(y)
        else:
            failures += 1
            worst = max(worst, v)
            if failures > max_retries * max(count, 1):
                raise SamplingError(f"sampling Y failed (worst residual {worst:.3g})")
    return np.array(out)


def _degree_cap(n: int, r: int) -> int:
    D = 0
    while math.comb(n + D, D) < 3 * r:
        D += 1
    return D


def evaluation_columns(points: np.ndarray, exps: Sequence[Sequence[int]]) -> np.ndarray:
    E = np.array(exps, dtype=int).reshape(len(exps), points.shape[1])
    return np.prod(points[:, None, :] ** E[None, :, :], axis=2)


def select_B0(X: VarietySpec, r: int, seed: int = 0, tol: float = 1e-8, points=None) -> list[tuple[int, ...]]:
    """First r monomials (graded order) whose images in C[Y] are linearly independent.

    Independence is tested by evaluation on max(5r, 40) sampled points of Y.
    """
    if r < 1:
        raise ValueError("r must be positive")
    n = X.n
    D = _degree_cap(n, r)
    if not X.generators_g:
        return list(monomials(n, D)[:r])
    if points is None:
        points = sample_Y(X, max(5 * r, 40), seed=seed)
    kept: list = []
    Q = np.zeros((points.shape[0], 0), dtype=complex)
    for alpha in monomials(n, D):
        col = evaluation_columns(points, [alpha])[:, 0]
        col = col / np.linalg.norm(col)
        resid = col - Q @ (Q.conj().T @ col)
        resid = resid - Q @ (Q.conj().T @ resid)
        nr = np.linalg.norm(resid)
        if nr > tol:
            kept.append(alpha)
            Q = np.hstack([Q, (resid / nr)[:, None]])
            if len(kept) == r:
                return kept
    raise BasisSelectionError(
        f"only {len(kept)} independent monomials of degree <= {D} on Y; r = {r} is too large"
    )
