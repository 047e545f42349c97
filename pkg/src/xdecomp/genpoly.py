"""Generating matrices, multiplication matrices and the residual system in w."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .poly import (
    BorderBasisCtx,
    Poly,
    border_sets,
    normal_form,
    normal_form_vector,
    param_affine,
    param_degree_bound_check,
)
from .tensor import MultiIndex, SymTensor, monomial_index, monomials
from .variety import VarietySpec


class InconsistentSystem(RuntimeError):
    """A column system A[A, alpha] c = b[A, alpha] has no solution; the rank r is too small."""

    def __init__(self, alpha, residual):
        super().__init__(f"linear system for border monomial {alpha} is inconsistent (residual {residual:.3g})")
        self.alpha = alpha
        self.residual = residual


def _ctx(B0) -> BorderBasisCtx:
    return B0 if isinstance(B0, BorderBasisCtx) else border_sets(B0)


def row_indices(A: SymTensor, alpha: MultiIndex, ctx: BorderBasisCtx) -> list[MultiIndex]:
    top = A.d - max(sum(alpha), ctx.maxdeg)
    if top < 0:
        return []
    return list(monomials(A.n, top))


def build_linear_system(A: SymTensor, alpha: MultiIndex, B0) -> tuple[np.ndarray, np.ndarray]:
    """(A[A, alpha], b[A, alpha]) with entries A_{beta+gamma} and A_{alpha+gamma}.

    Rows gamma run over |gamma| <= d - max(|alpha|, max deg B0) so every
    referenced entry exists.
    """
    ctx = _ctx(B0)
    alpha = tuple(alpha)
    if alpha not in ctx.db1_index:
        raise ValueError(f"{alpha} is not in the border of B0")
    rows = row_indices(A, alpha, ctx)
    if not rows:
        raise ValueError(f"no rows for border monomial {alpha}: r is too large for order {A.d}")
    idx = monomial_index(A.n, A.d)
    G = np.array(rows, dtype=int).reshape(len(rows), A.n)
    Bm = np.array(ctx.B0, dtype=int)
    cols = [[idx[tuple(g + b)] for b in Bm] for g in G]
    Amat = A.data[np.array(cols)]
    b = A.data[[idx[tuple(g + np.array(alpha))] for g in G]]
    return Amat, b


@dataclass
class GenMatrixFamily:
    """G(w) = C + N(w); column alpha is C[:, alpha] + N_alpha @ w[offset_alpha : offset_alpha + k_alpha]."""

    ctx: BorderBasisCtx
    C: np.ndarray
    N: list
    offsets: list = field(default_factory=list)

    def __post_init__(self):
        if not self.offsets:
            off, offs = 0, []
            for Na in self.N:
                offs.append(off)
                off += Na.shape[1]
            self.offsets = offs
        self.m = sum(Na.shape[1] for Na in self.N)

    @property
    def r(self) -> int:
        return self.ctx.r

    def evaluate(self, w=None) -> np.ndarray:
        G = np.array(self.C, dtype=complex)
        if self.m == 0:
            return G
        w = np.asarray(w, dtype=complex)
        for j, (Na, off) in enumerate(zip(self.N, self.offsets)):
            if Na.shape[1]:
                G[:, j] += Na @ w[off:off + Na.shape[1]]
        return G

    def project(self, G: np.ndarray) -> np.ndarray:
        """Least-squares w with G(w) closest to G, column by column."""
        w = np.zeros(self.m, dtype=complex)
        for j, (Na, off) in enumerate(zip(self.N, self.offsets)):
            k = Na.shape[1]
            if k:
                w[off:off + k] = np.linalg.lstsq(Na, G[:, j] - self.C[:, j], rcond=None)[0]
        return w

    def entries(self) -> list[list[Poly]]:
        """G(w) as an r x |dB1| nested list of affine polynomials in w."""
        out = [[None] * len(self.ctx.dB1) for _ in range(self.r)]
        for j, (Na, off) in enumerate(zip(self.N, self.offsets)):
            for s in range(self.r):
                coeffs = {off + k: Na[s, k] for k in range(Na.shape[1]) if Na[s, k] != 0}
                out[s][j] = param_affine(self.m, self.C[s, j], coeffs)
        return out


def parameterize_G(A: SymTensor, B0, tol: float = 1e-8, null_tol: float = 1e-10) -> GenMatrixFamily:
    """Solve every column system; minimum-norm particular solution plus orthonormal nullspace."""
    ctx = _ctx(B0)
    r = ctx.r
    C = np.zeros((r, len(ctx.dB1)), dtype=complex)
    N = []
    for j, alpha in enumerate(ctx.dB1):
        Amat, b = build_linear_system(A, alpha, ctx)
        U, s, Vh = np.linalg.svd(Amat)
        smax = s[0] if s.size else 0.0
        rank = int(np.sum(s > null_tol * smax)) if smax > 0 else 0
        coef = U[:, :rank].conj().T @ b
        c = Vh[:rank].conj().T @ (coef / s[:rank])
        res = np.linalg.norm(Amat @ c - b)
        if res > tol * (1.0 + np.linalg.norm(b)):
            raise InconsistentSystem(alpha, res / (1.0 + np.linalg.norm(b)))
        C[:, j] = c
        N.append(Vh[rank:].conj().T.copy())
    return GenMatrixFamily(ctx, C, N)


def interpolating_G(points: np.ndarray, ctx: BorderBasisCtx) -> np.ndarray:
    """The unique G whose generating polynomials vanish at r given points (invertible B0 evaluation)."""
    P = np.asarray(points, dtype=complex)
    V = np.prod(P[:, None, :] ** np.array(ctx.B0)[None], axis=2)          # r x r: V[j, s] = v_j^beta_s
    Wa = np.prod(P[:, None, :] ** np.array(ctx.dB1)[None], axis=2)       # r x |dB1|
    return np.linalg.solve(V, Wa)


def mult_matrices(G, ctx: BorderBasisCtx) -> list:
    """M_1..M_n for numeric G (arrays) or parameter-affine G (nested lists of Poly)."""
    if hasattr(G, "entries") and callable(G.entries):
        G = G.entries()
    numeric = isinstance(G, np.ndarray)
    r = ctx.r
    out = []
    for i in range(ctx.n):
        if numeric:
            M = np.zeros((r, r), dtype=complex)
        else:
            M = [[0] * r for _ in range(r)]
        for t, (kind, k) in enumerate(ctx.shift_table[i]):
            for s in range(r):
                if kind == "b":
                    val = 1 if s == k else 0
                else:
                    val = G[s, k] if numeric else G[s][k]
                if numeric:
                    M[s, t] = val
                else:
                    M[s][t] = val
        out.append(M)
    return out


def _matmul_poly(X, Y, r):
    out = [[0] * r for _ in range(r)]
    for s in range(r):
        for u in range(r):
            acc = 0
            for t in range(r):
                a, b = X[s][t], Y[t][u]
                if isinstance(a, Poly) and a.is_zero() or (not isinstance(a, Poly) and a == 0):
                    continue
                if isinstance(b, Poly) and b.is_zero() or (not isinstance(b, Poly) and b == 0):
                    continue
                if isinstance(a, Poly) and isinstance(b, Poly):
                    acc = acc + a * b
                elif isinstance(a, Poly):
                    acc = acc + a.scale(b)
                elif isinstance(b, Poly):
                    acc = acc + b.scale(a)
                else:
                    acc = acc + a * b
            out[s][u] = acc
    return out


def _as_poly(x, m: int) -> Poly:
    return x if isinstance(x, Poly) else Poly.constant(m, x)


class CompiledPolys:
    """Vectorized evaluation and Jacobian of a list of polynomials in m variables."""

    def __init__(self, polys: Sequence[Poly], m: int):
        self.m = m
        monos: dict = {}
        for p in polys:
            for e in p.terms:
                monos.setdefault(e, len(monos))
        self.E = np.array(list(monos), dtype=int).reshape(len(monos), m)
        self.coef = np.zeros((len(polys), len(monos)), dtype=complex)
        for i, p in enumerate(polys):
            for e, c in p.terms.items():
                self.coef[i, monos[e]] = complex(c)
        self.abscoef = np.abs(self.coef)
        self.maxdeg = int(self.E.sum(axis=1).max()) if len(monos) else 0

    def _powers(self, w):
        # P[k, p] = w_k ** p for p = 0..maxdeg
        P = np.ones((self.m, self.maxdeg + 1), dtype=complex)
        for p in range(1, self.maxdeg + 1):
            P[:, p] = P[:, p - 1] * w
        return P

    def monomials(self, w) -> np.ndarray:
        if self.m == 0:
            return np.ones(self.E.shape[0], dtype=complex)
        P = self._powers(np.asarray(w, dtype=complex))
        return np.prod(P[np.arange(self.m)[None, :], self.E], axis=1)

    def __call__(self, w) -> np.ndarray:
        return self.coef @ self.monomials(w)

    def magnitude(self, w) -> np.ndarray:
        """sum_u |c_u| |w^u| per polynomial: the scale against which cancellation is judged."""
        if self.m == 0:
            return self.abscoef.sum(axis=1)
        P = self._powers(np.abs(np.asarray(w, dtype=complex)))
        mon = np.prod(P[np.arange(self.m)[None, :], self.E], axis=1).real
        return self.abscoef @ mon

    def jacobian(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        npoly = self.coef.shape[0]
        if self.m == 0:
            return np.zeros((npoly, 0), dtype=complex)
        P = self._powers(w)
        ar = np.arange(self.m)[None, :]
        J = np.empty((npoly, self.m), dtype=complex)
        for k in range(self.m):
            Ek = self.E[:, k]
            mask = Ek > 0
            if not mask.any():
                J[:, k] = 0
                continue
            Em = self.E[mask].copy()
            Em[:, k] -= 1
            dm = Ek[mask] * np.prod(P[ar, Em], axis=1)
            J[:, k] = self.coef[:, mask] @ dm
        return J


@dataclass
class ResidualSystem:
    m: int
    polys: list
    kinds: list
    labels: list
    raw_nf: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        # each residual is scaled to unit coefficient norm for the least-squares solve
        scales = []
        for p in self.polys:
            s = np.sqrt(sum(abs(complex(c)) ** 2 for c in p.terms.values()))
            scales.append(s if s > 0 else 1.0)
        self.scales = np.array(scales)
        self.compiled = CompiledPolys(self.polys, self.m)

    def __len__(self):
        return len(self.polys)

    def evaluate(self, w=None) -> np.ndarray:
        return self.compiled(np.zeros(0) if w is None else w)

    def jacobian(self, w) -> np.ndarray:
        return self.compiled.jacobian(w)

    def scaled(self, w):
        return self.compiled(w) / self.scales

    def scaled_jacobian(self, w):
        return self.compiled.jacobian(w) / self.scales[:, None]

    def relative_residual(self, w=None) -> float:
        """max_j |F_j(w)| / (magnitude_j(w) + tiny): ~ machine precision at an exact zero."""
        if not self.polys:
            return 0.0
        w = np.zeros(0) if w is None else w
        F = np.abs(self.compiled(w))
        mag = self.compiled.magnitude(w)
        floor = 1e-8 * mag.max() + 1e-300
        return float(np.max(F / (mag + floor)))

    def degrees(self) -> list[int]:
        return [p.degree() for p in self.polys]


def residual_system(A: SymTensor, X: VarietySpec, family: GenMatrixFamily) -> ResidualSystem:
    """Commutator entries [M_i, M_j] (i < j) and B0-coefficients of NF(g_i; G(w)).

    Identically-zero residuals are dropped; duplicates (also up to sign) are merged.
    """
    ctx, m, r = family.ctx, family.m, family.r
    Gp = family.entries()
    Ms = mult_matrices(Gp, ctx)
    polys, kinds, labels = [], [], []
    for i in range(ctx.n):
        for j in range(i + 1, ctx.n):
            P = _matmul_poly(Ms[i], Ms[j], r)
            Q = _matmul_poly(Ms[j], Ms[i], r)
            for s in range(r):
                for u in range(r):
                    polys.append(_as_poly(P[s][u], m) - _as_poly(Q[s][u], m))
                    kinds.append("commutator")
                    labels.append((i, j, s, u))
    raw_nf = []
    for gi, g in enumerate(X.generators_g):
        nf = normal_form(g, Gp, ctx)
        for s, beta in enumerate(ctx.B0):
            p = _as_poly(nf.coeff(beta), m)
            raw_nf.append(p)
            polys.append(p)
            kinds.append("nf")
            labels.append((gi, beta))
    keep_p, keep_k, keep_l, seen = [], [], [], set()
    for p, k, lab in zip(polys, kinds, labels):
        if p.is_zero():
            continue
        key = frozenset(p.terms.items())
        if key in seen or frozenset((-p).terms.items()) in seen:
            continue
        seen.add(key)
        keep_p.append(p)
        keep_k.append(k)
        keep_l.append(lab)
    return ResidualSystem(m, keep_p, keep_k, keep_l, raw_nf)


def nf_degree_bounds(X: VarietySpec, ctx: BorderBasisCtx) -> list[int]:
    return [param_degree_bound_check(g, ctx) for g in X.generators_g]


def generating_residual(G: np.ndarray, ctx: BorderBasisCtx, X: VarietySpec) -> float:
    """Scale-free size of the commutators [M_i, M_j] and of NF(g_i; G) at a numeric G.

    Commutators are divided by ||M_i|| ||M_j||; a normal form reached after
    k reduction levels is divided by max|coeff g| (1 + max|G|)^k.
    """
    G = np.asarray(G, dtype=complex)
    Ms = mult_matrices(G, ctx)
    worst = 0.0
    for i in range(ctx.n):
        for j in range(i + 1, ctx.n):
            C = Ms[i] @ Ms[j] - Ms[j] @ Ms[i]
            den = np.linalg.norm(Ms[i]) * np.linalg.norm(Ms[j])
            if den > 0:
                worst = max(worst, float(np.abs(C).max() / den))
    gmax = 1.0 + (float(np.abs(G).max()) if G.size else 0.0)
    for g in X.generators_g:
        k = param_degree_bound_check(g, ctx)
        v = normal_form_vector(g, G, ctx)
        worst = max(worst, float(np.abs(v).max() / (g.max_abs_coeff() * gmax ** max(k, 1))))
    return worst
