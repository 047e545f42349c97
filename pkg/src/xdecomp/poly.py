"""Sparse multivariate polynomials, border sets and border-basis normal forms.

Coefficients may be any number type (int, Fraction, complex) or a
``Poly`` in a separate set of parameter variables; the latter is how
polynomials whose coefficients depend on the entries of a
parameterized generating matrix are represented.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .tensor import MultiIndex, order_key


def is_zero(c) -> bool:
    if isinstance(c, Poly):
        return c.is_zero()
    return c == 0


def _plain(c):
    """Convert numpy scalars to Python numbers so Fraction arithmetic stays exact."""
    if isinstance(c, np.generic):
        c = c.item()
    if isinstance(c, complex) and c.imag == 0:
        return c.real
    return c


class Poly:
    """Polynomial in ``nvars`` variables stored as {exponent tuple: coefficient}."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | None = None):
        self.nvars = int(nvars)
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars:
                raise ValueError(f"exponent {exp} has wrong length for {self.nvars} variables")
            c = _plain(c)
            if not is_zero(c):
                clean[exp] = c
        self.terms = clean

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int, c=1) -> "Poly":
        """c * (variable i), 0-based."""
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): c})

    @classmethod
    def monomial(cls, exp: Sequence[int], c=1) -> "Poly":
        return cls(len(exp), {tuple(exp): c})

    # basic queries ----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = {sum(e) for e in self.terms}
        if not degs:
            return True
        return len(degs) == 1 and (d is None or degs == {d})

    def coeff(self, exp) -> object:
        return self.terms.get(tuple(exp), 0)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: order_key(t[0]))

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return f"Poly({self.nvars}, 0)"
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(
                f"z{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exp) if e
            )
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return f"Poly({self.nvars}, " + " + ".join(parts) + ")"

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, numbers.Number):
            return (self - Poly.constant(self.nvars, other)).is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # arithmetic -------------------------------------------------------
    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        return Poly.constant(self.nvars, other)

    def __add__(self, other) -> "Poly":
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return self._lift(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        other = self._lift(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                p = c1 * c2
                out[e] = out[e] + p if e in out else p
        return Poly(self.nvars, out)

    def __rmul__(self, other) -> "Poly":
        return self.scale(other)

    def scale(self, c) -> "Poly":
        if is_zero(c):
            return Poly(self.nvars)
        return Poly(self.nvars, {e: c * v for e, v in self.terms.items()})

    def __pow__(self, k: int) -> "Poly":
        out = Poly.constant(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    # evaluation and variable maps ------------------------------------
    def __call__(self, point) -> object:
        return self.eval(point)

    def eval(self, point) -> object:
        point = list(point)
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        total = 0
        for exp, c in self.terms.items():
            m = 1
            for x, e in zip(point, exp):
                if e:
                    m = m * x**e
            total = total + c * m
        return total

    def map_coeffs(self, f) -> "Poly":
        return Poly(self.nvars, {e: f(c) for e, c in self.terms.items()})

    def specialize(self, w) -> "Poly":
        """Evaluate every parameter-polynomial coefficient at w."""
        return self.map_coeffs(lambda c: c.eval(w) if isinstance(c, Poly) else c)

    def dehomogenize(self) -> "Poly":
        """h(x_0, ..., x_n) -> h(1, y_1, ..., y_n)."""
        out: dict = {}
        for e, c in self.terms.items():
            k = e[1:]
            out[k] = out[k] + c if k in out else c
        return Poly(self.nvars - 1, out)

    def homogenize(self, d: int | None = None) -> "Poly":
        """Right inverse of dehomogenize: y^e -> x_0^(d-|e|) x^e."""
        if d is None:
            d = max(self.degree(), 0)
        if self.degree() > d:
            raise ValueError(f"degree {self.degree()} exceeds {d}")
        return Poly(self.nvars + 1, {(d - sum(e),) + e: c for e, c in self.terms.items()})

    def shift(self, exp: Sequence[int]) -> "Poly":
        """Multiply by the monomial x^exp."""
        return Poly(self.nvars, {tuple(a + b for a, b in zip(e, exp)): c for e, c in self.terms.items()})

    def linear_substitute(self, L: np.ndarray) -> "Poly":
        """p(L x): variable i becomes sum_j L[i, j] x_j."""
        L = np.asarray(L)
        lin = [Poly(self.nvars, {tuple(int(k == j) for k in range(self.nvars)): L[i, j]
                                 for j in range(self.nvars)}) for i in range(self.nvars)]
        out = Poly(self.nvars)
        for exp, c in self.terms.items():
            m = Poly.constant(self.nvars, c)
            for i, e in enumerate(exp):
                if e:
                    m = m * lin[i] ** e
            out = out + m
        return out

    def gradient(self) -> list["Poly"]:
        out = []
        for i in range(self.nvars):
            terms = {}
            for e, c in self.terms.items():
                if e[i]:
                    k = list(e)
                    k[i] -= 1
                    terms[tuple(k)] = c * e[i]
            out.append(Poly(self.nvars, terms))
        return out

    def max_abs_coeff(self) -> float:
        return max((abs(complex(c)) for c in self.terms.values()), default=0.0)

    # serialization ----------------------------------------------------
    def to_json(self) -> dict:
        terms = []
        for e, c in self.sorted_terms():
            c = complex(c)
            terms.append({"exp": list(e), "re": c.real, "im": c.imag})
        return {"nvars": self.nvars, "terms": terms}

    @classmethod
    def from_json(cls, obj: dict, exact: bool = False) -> "Poly":
        nvars = int(obj["nvars"])
        terms: dict = {}
        for t in obj["terms"]:
            exp = tuple(int(e) for e in t["exp"])
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} does not match nvars={nvars}")
            re, im = t.get("re", 0.0), t.get("im", 0.0)
            if exact and im == 0:
                c = Fraction(str(re)) if not isinstance(re, int) else re
            else:
                c = complex(re, im)
            terms[exp] = terms[exp] + c if exp in terms else c
        return cls(nvars, terms)


def param_affine(m: int, const, coeffs: Mapping[int, object]) -> Poly:
    """const + sum_k coeffs[k] * w_k as a Poly in m parameters."""
    terms = {(0,) * m: const}
    for k, c in coeffs.items():
        e = [0] * m
        e[k] = 1
        terms[tuple(e)] = c
    return Poly(m, terms)


def param_degree(p: Poly) -> int:
    """Largest parameter degree among the coefficients of a parameter-coefficient Poly."""
    deg = 0
    for c in p.terms.values():
        if isinstance(c, Poly):
            deg = max(deg, c.degree())
    return deg


# border sets ----------------------------------------------------------

@dataclass(frozen=True)
class BorderBasisCtx:
    """A monomial basis B0 together with its border dB1 = (B0 u y_1 B0 u ... u y_n B0) minus B0."""

    n: int
    B0: tuple[MultiIndex, ...]
    dB1: tuple[MultiIndex, ...]
    b0_index: dict = field(repr=False, compare=False)
    db1_index: dict = field(repr=False, compare=False)

    @property
    def r(self) -> int:
        return len(self.B0)

    @property
    def maxdeg(self) -> int:
        return max(sum(b) for b in self.B0)

    @cached_property
    def shift_table(self) -> list[list[tuple[str, int]]]:
        """shift_table[i][t] = ('b', s) if beta_t + e_i = beta_s, else ('c', column index)."""
        table = []
        for i in range(self.n):
            row = []
            for beta in self.B0:
                g = list(beta)
                g[i] += 1
                g = tuple(g)
                if g in self.b0_index:
                    row.append(("b", self.b0_index[g]))
                else:
                    row.append(("c", self.db1_index[g]))
            table.append(row)
        return table

    def depth(self, gamma: MultiIndex) -> int:
        """Smallest k with y^gamma in B_k."""
        return self._depth(tuple(gamma))

    @cached_property
    def _depth_memo(self) -> dict:
        memo = {b: 0 for b in self.B0}
        memo.update({a: 1 for a in self.dB1})
        return memo

    def _depth(self, gamma: MultiIndex) -> int:
        memo = self._depth_memo
        if gamma in memo:
            return memo[gamma]
        best = None
        for i, g in enumerate(gamma):
            if g:
                k = list(gamma)
                k[i] -= 1
                dk = self._depth(tuple(k))
                best = dk if best is None else min(best, dk)
        memo[gamma] = best + 1
        return best + 1

    def reduction_index(self, gamma: MultiIndex) -> int:
        """Smallest i with gamma - e_i one level closer to B0."""
        k = self.depth(gamma)
        for i, g in enumerate(gamma):
            if g:
                h = list(gamma)
                h[i] -= 1
                if self.depth(tuple(h)) == k - 1:
                    return i
        raise AssertionError("unreachable: depth recursion is inconsistent")


def border_sets(B0: Sequence[Sequence[int]], n: int | None = None) -> BorderBasisCtx:
    B0 = tuple(tuple(int(e) for e in b) for b in B0)
    if not B0:
        raise ValueError("B0 must be nonempty")
    n = len(B0[0]) if n is None else n
    if any(len(b) != n for b in B0):
        raise ValueError("B0 monomials have inconsistent lengths")
    if (0,) * n not in B0:
        raise ValueError("B0 must contain the constant monomial 1")
    if len(set(B0)) != len(B0):
        raise ValueError("B0 has repeated monomials")
    b0 = set(B0)
    border = set()
    for beta in B0:
        for i in range(n):
            g = list(beta)
            g[i] += 1
            g = tuple(g)
            if g not in b0:
                border.add(g)
    dB1 = tuple(sorted(border, key=order_key))
    return BorderBasisCtx(
        n=n,
        B0=B0,
        dB1=dB1,
        b0_index={b: i for i, b in enumerate(B0)},
        db1_index={a: i for i, a in enumerate(dB1)},
    )


# normal forms ---------------------------------------------------------

def _column_getter(G, ctx: BorderBasisCtx):
    """Uniform access col(j) -> sequence of r coefficients for border monomial j."""
    if hasattr(G, "entries") and callable(G.entries):  # GenMatrixFamily
        G = G.entries()
    if isinstance(G, np.ndarray):
        if G.shape != (ctx.r, len(ctx.dB1)):
            raise ValueError(f"G has shape {G.shape}, expected {(ctx.r, len(ctx.dB1))}")
        return lambda j: G[:, j]
    if isinstance(G, Mapping):
        def col(j):
            alpha = ctx.dB1[j]
            if alpha not in G:
                raise KeyError(f"G lacks a column for border monomial {alpha}")
            return G[alpha]
        return col
    rows = list(G)
    if len(rows) != ctx.r or any(len(row) != len(ctx.dB1) for row in rows):
        raise ValueError("G must be r x |dB1|")
    return lambda j: [rows[s][j] for s in range(ctx.r)]


class _Reducer:
    """Memoized reduction of monomials to coefficient vectors on B0."""

    def __init__(self, G, ctx: BorderBasisCtx):
        self.ctx = ctx
        self.col = _column_getter(G, ctx)
        self.numeric = isinstance(G, np.ndarray)
        self.memo: dict = {}
        r = ctx.r
        if self.numeric:
            for s, b in enumerate(ctx.B0):
                e = np.zeros(r, dtype=np.result_type(G.dtype, float))
                e[s] = 1
                self.memo[b] = e
            for j, a in enumerate(ctx.dB1):
                self.memo[a] = np.asarray(self.col(j))
        else:
            for s, b in enumerate(ctx.B0):
                self.memo[b] = [1 if t == s else 0 for t in range(r)]
            for j, a in enumerate(ctx.dB1):
                self.memo[a] = list(self.col(j))

    def reduce(self, gamma: MultiIndex):
        memo = self.memo
        if gamma in memo:
            return memo[gamma]
        ctx = self.ctx
        i = ctx.reduction_index(gamma)
        h = list(gamma)
        h[i] -= 1
        q = self.reduce(tuple(h))
        if self.numeric:
            out = np.zeros_like(q)
            for t, qt in enumerate(q):
                if qt != 0:
                    out = out + qt * self._image(i, t)
        else:
            out = [0] * ctx.r
            for t, qt in enumerate(q):
                if is_zero(qt):
                    continue
                img = self._image(i, t)
                for s in range(ctx.r):
                    if not is_zero(img[s]):
                        out[s] = out[s] + _mul(qt, img[s])
        memo[gamma] = out
        return out

    def _image(self, i: int, t: int):
        kind, k = self.ctx.shift_table[i][t]
        if kind == "b":
            return self.memo[self.ctx.B0[k]]
        return self.memo[self.ctx.dB1[k]]


def _mul(a, b):
    if isinstance(b, Poly) and not isinstance(a, Poly):
        return b.scale(a)
    return a * b


def normal_form(p: Poly, G, ctx: BorderBasisCtx) -> Poly:
    """NF(p; G): the remainder of p after border division by phi[G], supported on B0.

    ``G`` is an r x |dB1| numeric array, a nested r x |dB1| list whose
    entries may be parameter polynomials, a mapping from border monomial
    to column, or a ``GenMatrixFamily`` (reduced symbolically in w).
    The coefficients of p may themselves be parameter polynomials.
    """
    if p.nvars != ctx.n:
        raise ValueError(f"polynomial has {p.nvars} variables, basis expects {ctx.n}")
    red = _Reducer(G, ctx)
    acc = [0] * ctx.r
    for exp, c in p.terms.items():
        vec = red.reduce(exp)
        for s in range(ctx.r):
            v = vec[s]
            if not is_zero(v):
                acc[s] = acc[s] + _mul(c, v)
    return Poly(ctx.n, {b: acc[s] for s, b in enumerate(ctx.B0)})


def normal_form_vector(p: Poly, G: np.ndarray, ctx: BorderBasisCtx) -> np.ndarray:
    """Numeric NF(p; G) as a coefficient vector over B0."""
    red = _Reducer(np.asarray(G, dtype=complex), ctx)
    out = np.zeros(ctx.r, dtype=complex)
    for exp, c in p.terms.items():
        out += complex(c) * red.reduce(exp)
    return out


def param_degree_bound_check(p: Poly, ctx: BorderBasisCtx) -> int:
    """Smallest k with p in Span B_k; bounds the parameter degree of NF(p; G(w))."""
    return max((ctx.depth(e) for e in p.terms), default=0)
