"""Dense symmetric tensors in the affine multi-index labeling.

A tensor in S^d(C^{n+1}) is stored by its distinct entries A_alpha,
alpha in N^n with |alpha| <= d, where alpha records the exponents of
x_1..x_n and x_0 absorbs the remaining d - |alpha| factors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MultiIndex = tuple[int, ...]


def order_key(alpha: Sequence[int]) -> tuple:
    """Sort key of the graded order 1 < y_1 < ... < y_n < y_1^2 < y_1y_2 < y_2^2 < y_1y_3 < ...

    Degree first; within a degree the exponent vectors are compared
    lexicographically from the last variable backwards.
    """
    return (sum(alpha), tuple(reversed(alpha)))


def canonical_order(a: Sequence[int], b: Sequence[int]) -> int:
    """Three-way comparison: -1 if a precedes b, 0 if equal, 1 otherwise."""
    if len(a) != len(b):
        raise ValueError(f"multi-index lengths differ: {len(a)} vs {len(b)}")
    ka, kb = order_key(a), order_key(b)
    return (ka > kb) - (ka < kb)


def compositions(n: int, k: int) -> Iterable[MultiIndex]:
    """All alpha in N^n with |alpha| == k (unordered)."""
    if n == 0:
        if k == 0:
            yield ()
        return
    for first in range(k, -1, -1):
        for rest in compositions(n - 1, k - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def monomials(n: int, d: int) -> tuple[MultiIndex, ...]:
    """N^n_d in canonical order."""
    out = [a for k in range(d + 1) for a in compositions(n, k)]
    out.sort(key=order_key)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(n: int, d: int) -> dict[MultiIndex, int]:
    return {a: i for i, a in enumerate(monomials(n, d))}


def multinomial(d: int, alpha: Sequence[int]) -> int:
    """d! / ((d-|alpha|)! alpha_1! ... alpha_n!)."""
    out = math.factorial(d) // math.factorial(d - sum(alpha))
    for a in alpha:
        out //= math.factorial(a)
    return out


@lru_cache(maxsize=None)
def _multinomials(n: int, d: int) -> np.ndarray:
    return np.array([multinomial(d, a) for a in monomials(n, d)], dtype=float)


@lru_cache(maxsize=None)
def _exponent_matrix(n: int, d: int) -> np.ndarray:
    return np.array(monomials(n, d), dtype=int).reshape(-1, n)


def homogeneous_index(alpha: Sequence[int], d: int) -> MultiIndex:
    """(d - |alpha|, alpha_1, ..., alpha_n)."""
    return (d - sum(alpha),) + tuple(alpha)


def lex_homogeneous(n: int, d: int) -> list[MultiIndex]:
    """Affine labels listed in the lexicographic order of (alpha_0, ..., alpha_n)."""
    homs = sorted(compositions(n + 1, d), reverse=True)
    return [h[1:] for h in homs]


@dataclass(frozen=True)
class SymTensor:
    n: int
    d: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex).reshape(-1)
        if data.size != math.comb(self.n + self.d, self.d):
            raise ValueError(
                f"expected {math.comb(self.n + self.d, self.d)} entries, got {data.size}"
            )
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, n: int, d: int) -> "SymTensor":
        return cls(n, d, np.zeros(math.comb(n + d, d), dtype=complex))

    @classmethod
    def from_entries(cls, n: int, d: int, entries: dict) -> "SymTensor":
        """Build from {alpha: value}; missing labels are zero."""
        idx = monomial_index(n, d)
        data = np.zeros(len(idx), dtype=complex)
        for alpha, val in entries.items():
            alpha = tuple(int(a) for a in alpha)
            if alpha not in idx:
                raise ValueError(f"label {alpha} is not in N^{n}_{d}")
            data[idx[alpha]] = complex(val)
        return cls(n, d, data)

    @classmethod
    def from_list(cls, n: int, d: int, values: Sequence) -> "SymTensor":
        """Build from entries listed in canonical label order (A_0, A_{e_1}, ..., A_{e_n}, A_{2e_1}, ...)."""
        labels = monomials(n, d)
        if len(values) != len(labels):
            raise ValueError(f"expected {len(labels)} values, got {len(values)}")
        return cls(n, d, np.asarray(values, dtype=complex))

    @classmethod
    def from_homogeneous(cls, d: int, entries: dict) -> "SymTensor":
        """Build from {(alpha_0, ..., alpha_n): value} with |alpha| = d."""
        n = len(next(iter(entries))) - 1
        out = {}
        for h, v in entries.items():
            h = tuple(int(c) for c in h)
            if sum(h) != d:
                raise ValueError(f"homogeneous label {h} does not have degree {d}")
            out[h[1:]] = v
        return cls.from_entries(n, d, out)

    @classmethod
    def from_full(cls, full: np.ndarray) -> "SymTensor":
        """From a full (n+1)^d array; symmetry is not checked."""
        full = np.asarray(full)
        d = full.ndim
        n = full.shape[0] - 1
        entries = {}
        for alpha in monomials(n, d):
            idx = []
            for i, a in enumerate(homogeneous_index(alpha, d)):
                idx += [i] * a
            entries[alpha] = full[tuple(idx)]
        return cls.from_entries(n, d, entries)

    # access -----------------------------------------------------------
    @property
    def labels(self) -> tuple[MultiIndex, ...]:
        return monomials(self.n, self.d)

    def __getitem__(self, alpha) -> complex:
        return self.data[monomial_index(self.n, self.d)[tuple(alpha)]]

    def entry(self, alpha) -> complex:
        """Entry A_alpha, or 0 when |alpha| > d."""
        idx = monomial_index(self.n, self.d).get(tuple(alpha))
        return 0j if idx is None else self.data[idx]

    def full(self) -> np.ndarray:
        """The (n+1)^d array A_{i_1...i_d}."""
        idx = monomial_index(self.n, self.d)
        out = np.empty((self.n + 1,) * self.d, dtype=complex)
        for ii in itertools.product(range(self.n + 1), repeat=self.d):
            alpha = [0] * self.n
            for i in ii:
                if i:
                    alpha[i - 1] += 1
            out[ii] = self.data[idx[tuple(alpha)]]
        return out

    # arithmetic -------------------------------------------------------
    def _check(self, other: "SymTensor"):
        if (self.n, self.d) != (other.n, other.d):
            raise ValueError("tensor shapes differ")

    def __add__(self, other: "SymTensor") -> "SymTensor":
        self._check(other)
        return SymTensor(self.n, self.d, self.data + other.data)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        self._check(other)
        return SymTensor(self.n, self.d, self.data - other.data)

    def __mul__(self, c) -> "SymTensor":
        return SymTensor(self.n, self.d, self.data * c)

    __rmul__ = __mul__

    def __neg__(self) -> "SymTensor":
        return SymTensor(self.n, self.d, -self.data)


def from_poly(p, d: int | None = None) -> SymTensor:
    """Tensor of a form p in x_0..x_n (a Poly with n+1 variables)."""
    from .poly import Poly

    if not isinstance(p, Poly):
        raise TypeError("expected a Poly")
    n = p.nvars - 1
    if d is None:
        d = p.degree() if not p.is_zero() else 0
    entries = {}
    for exp, c in p.terms.items():
        if sum(exp) != d:
            raise ValueError(f"polynomial is not homogeneous of degree {d}")
        alpha = exp[1:]
        entries[alpha] = complex(c) / multinomial(d, alpha)
    return SymTensor.from_entries(n, d, entries)


def to_poly(A: SymTensor):
    """The form A(x) = sum_alpha multinomial * A_alpha * x_0^(d-|alpha|) x^alpha."""
    from .poly import Poly

    terms = {}
    for alpha, a, m in zip(A.labels, A.data, _multinomials(A.n, A.d)):
        if a != 0:
            c = m * a
            terms[homogeneous_index(alpha, A.d)] = c.real if c.imag == 0 else c
    return Poly(A.n + 1, terms)


def apolar_pair(p, A: SymTensor) -> complex:
    """<p, A> = sum_alpha p_alpha A_alpha for p in y_1..y_n of degree <= d."""
    if p.nvars != A.n:
        raise ValueError(f"polynomial has {p.nvars} variables, tensor expects {A.n}")
    idx = monomial_index(A.n, A.d)
    total = 0j
    for exp, c in p.terms.items():
        j = idx.get(exp)
        if j is None:
            raise ValueError(f"degree of monomial {exp} exceeds tensor order {A.d}")
        total += complex(c) * A.data[j]
    return total


def power_vector(v: np.ndarray, n: int, d: int, lead: complex = 1.0) -> np.ndarray:
    """Entries of (lead, v)^{(x)d} in the affine labeling."""
    v = np.asarray(v, dtype=complex)
    E = _exponent_matrix(n, d)
    out = np.prod(v[None, :] ** E, axis=1) if n else np.ones(1, dtype=complex)
    if lead != 1.0:
        out = out * lead ** (d - E.sum(axis=1))
    return out


def rank_one(lam: complex, v, d: int) -> SymTensor:
    """lam * (1, v)^{(x)d}."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    return SymTensor(v.size, d, lam * power_vector(v, v.size, d))


@dataclass(frozen=True)
class Decomposition:
    """Terms lam_j * (lead_j, v_j)^{(x)d}; lead_j = 1 unless a term sits at infinity."""

    d: int
    weights: np.ndarray
    points: np.ndarray
    leads: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex).reshape(-1)
        P = np.asarray(self.points, dtype=complex)
        if P.ndim == 1:
            P = P.reshape(w.size, -1)
        if P.shape[0] != w.size:
            raise ValueError("number of weights and points differ")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", P)
        leads = np.ones(w.size, dtype=complex) if self.leads is None else np.asarray(self.leads, dtype=complex)
        object.__setattr__(self, "leads", leads)

    @property
    def rank(self) -> int:
        return self.weights.size

    def reconstruct(self, n: int) -> SymTensor:
        if self.rank and self.points.shape[1] != n:
            raise ValueError(f"points have dimension {self.points.shape[1]}, expected {n}")
        data = np.zeros(math.comb(n + self.d, self.d), dtype=complex)
        for lam, v, l0 in zip(self.weights, self.points, self.leads):
            data += lam * power_vector(v, n, self.d, l0)
        return SymTensor(n, self.d, data)


def reconstruct(D: Decomposition, n: int, d: int | None = None) -> SymTensor:
    if d is not None and d != D.d:
        raise ValueError("order mismatch")
    return D.reconstruct(n)


def norm(A: SymTensor, kind: str = "hilbert_schmidt") -> float:
    """Hilbert-Schmidt norm over all (n+1)^d entries, or the coefficient norm.

    The coefficient norm is the 2-norm of the coefficient vector of A(x),
    i.e. sqrt(sum (multinomial * |A_alpha|)^2).
    """
    m = _multinomials(A.n, A.d)
    a2 = np.abs(A.data) ** 2
    if kind in ("hilbert_schmidt", "hs"):
        return float(np.sqrt(np.sum(m * a2)))
    if kind in ("coefficient", "coeff"):
        return float(np.sqrt(np.sum(m * m * a2)))
    raise ValueError(f"unknown norm kind {kind!r}")


def residual(A: SymTensor, D: Decomposition, kind: str = "hilbert_schmidt") -> tuple[float, float]:
    """(||A - reconstruct(D)||, relative error)."""
    diff = A - D.reconstruct(A.n)
    abs_err = norm(diff, kind)
    nA = norm(A, kind)
    return abs_err, abs_err / nA if nA > 0 else (0.0 if abs_err == 0 else math.inf)


def catalecticant(A: SymTensor, k: int) -> np.ndarray:
    """Flattening with rows gamma in N^n_k and columns delta in N^n_{d-k}."""
    if not 1 <= k <= A.d - 1:
        raise ValueError(f"k must be in 1..{A.d - 1}")
    rows = monomials(A.n, k)
    cols = monomials(A.n, A.d - k)
    idx = monomial_index(A.n, A.d)
    R = np.array(rows, dtype=int).reshape(len(rows), A.n)
    C = np.array(cols, dtype=int).reshape(len(cols), A.n)
    out = np.empty((len(rows), len(cols)), dtype=complex)
    for i, g in enumerate(R):
        out[i] = A.data[[idx[tuple(g + c)] for c in C]]
    return out


def numeric_rank(M: np.ndarray, tol: float = 1e-8) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def flattening_ranks(A: SymTensor, tol: float = 1e-8) -> dict[int, int]:
    return {k: numeric_rank(catalecticant(A, k), tol) for k in range(1, A.d)}


def max_flattening_rank(A: SymTensor, tol: float = 1e-8) -> int:
    ranks = flattening_ranks(A, tol)
    if not ranks:
        return int(np.any(A.data != 0))
    return max(ranks.values())


def transform(A: SymTensor, L: np.ndarray) -> SymTensor:
    """Apply L in every mode: sum lam u^{(x)d} maps to sum lam (L u)^{(x)d}."""
    L = np.asarray(L, dtype=complex)
    if L.shape != (A.n + 1, A.n + 1):
        raise ValueError(f"expected a {(A.n + 1, A.n + 1)} matrix")
    T = A.full()
    for _ in range(A.d):
        # contract the leading mode and append the image as the trailing mode
        T = np.tensordot(T, L, axes=([0], [1]))
    return SymTensor.from_full(T)
