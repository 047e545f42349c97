"""Vandermonde decompositions of multiway arrays through the Segre embedding.

A multiway array with k modes of size d+1 is a symmetric tensor of order d
on C^{2^k} supported on the cone over P^1 x ... x P^1. Coordinates of
C^{2^k} are indexed by nu in {0,1}^k through sum_s nu_s 2^(s-1), so the
coordinate of e_s is 2^(s-1) and x_{0...0} is the dehomogenizing one.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .decompose import DecompositionResult, SolverConfig, decompose
from .poly import Poly
from .tensor import SymTensor, homogeneous_index, monomials
from .variety import VarietySpec


def bits(t: int, k: int) -> tuple[int, ...]:
    return tuple((t >> s) & 1 for s in range(k))


def segre_variety(k: int) -> VarietySpec:
    """Binomials x_mu x_nu - x_eta x_theta with mu + nu = eta + theta as integer vectors."""
    if k < 2:
        raise ValueError("k must be at least 2")
    N = 2 ** k
    by_sum: dict = {}
    for a in range(N):
        for b in range(a, N):
            key = tuple(x + y for x, y in zip(bits(a, k), bits(b, k)))
            by_sum.setdefault(key, []).append((a, b))
    gens, seen = [], set()
    for pairs in by_sum.values():
        for (a, b), (c, e) in itertools.combinations(pairs, 2):
            p = Poly.monomial(_pair_exp(a, b, N)) - Poly.monomial(_pair_exp(c, e, N))
            key = frozenset(p.terms.items())
            neg = frozenset((m, -v) for m, v in p.terms.items())
            if key in seen or neg in seen:
                continue
            seen.add(key)
            gens.append(p)
    return VarietySpec(N - 1, tuple(gens), dimX=k + 1, name=f"Segre (P^1)^{k}")


def _pair_exp(a: int, b: int, N: int) -> tuple[int, ...]:
    e = [0] * N
    e[a] += 1
    e[b] += 1
    return tuple(e)


def mode_indices(alpha, k: int, d: int) -> tuple[int, ...]:
    """i_s = sum_nu alpha_nu nu_s for a homogeneous label alpha over {0,1}^k."""
    h = homogeneous_index(alpha, d)
    return tuple(sum(h[t] * ((t >> s) & 1) for t in range(2 ** k)) for s in range(k))


def embed(A: np.ndarray) -> SymTensor:
    """B_alpha = A_{i(alpha)}; B lies in S^d of the Segre cone by construction."""
    A = np.asarray(A, dtype=complex)
    k, d = A.ndim, A.shape[0] - 1
    if any(s != d + 1 for s in A.shape):
        raise ValueError("every mode must have the same size d+1")
    n = 2 ** k - 1
    data = np.array([A[mode_indices(alpha, k, d)] for alpha in monomials(n, d)], dtype=complex)
    return SymTensor(n, d, data)


def moment_vector(a: complex, b: complex, d: int) -> np.ndarray:
    """(a^d, a^(d-1) b, ..., b^d)."""
    i = np.arange(d + 1)
    return np.asarray(a, dtype=complex) ** (d - i) * np.asarray(b, dtype=complex) ** i


@dataclass(frozen=True)
class VandermondeDecomposition:
    """A = sum_j w_j (a_1j,b_1j)^{(x)d} (x) ... (x) (a_kj,b_kj)^{(x)d}; w_j multiplies mode 1."""

    d: int
    weights: np.ndarray
    pairs: np.ndarray  # shape (r, k, 2)

    @property
    def rank(self) -> int:
        return int(np.asarray(self.weights).size)

    @property
    def k(self) -> int:
        return int(self.pairs.shape[1])

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.d + 1,) * self.k, dtype=complex)
        for w, pr in zip(self.weights, self.pairs):
            T = w * moment_vector(pr[0, 0], pr[0, 1], self.d)
            for s in range(1, self.k):
                T = np.multiply.outer(T, moment_vector(pr[s, 0], pr[s, 1], self.d))
            out += T
        return out


def relative_error(A: np.ndarray, V: VandermondeDecomposition) -> float:
    nA = np.linalg.norm(A)
    err = np.linalg.norm(A - V.reconstruct())
    return float(err / nA) if nA > 0 else float(err)


def _factor(u: np.ndarray, k: int) -> tuple[complex, np.ndarray, float]:
    """Split u in C^{2^k} as c * (a_1,b_1) (x) ... (x) (a_k,b_k); returns (c, pairs, consistency)."""
    # u[t] with t = sum nu_s 2^(s-1); reshape so axis k-1-s is mode s
    T = u.reshape((2,) * k)
    pairs = np.empty((k, 2), dtype=complex)
    for s in range(k):
        M = np.moveaxis(T, k - 1 - s, 0).reshape(2, -1)
        U = np.linalg.svd(M)[0]
        p = U[:, 0]
        pairs[s] = p / p[0] if abs(p[0]) > 1e-12 * np.linalg.norm(p) else p / np.linalg.norm(p)
    prod = np.ones(1, dtype=complex)
    for s in range(k):
        prod = np.kron(pairs[s], prod)
    j = int(np.argmax(np.abs(prod)))
    c = u[j] / prod[j]
    scale = max(np.linalg.norm(u), 1e-300)
    return c, pairs, float(np.linalg.norm(u - c * prod) / scale)


@dataclass
class VandermondeResult:
    decomposition: VandermondeDecomposition | None
    rel_error: float
    consistency: float
    symmetric: DecompositionResult
    seconds: float = 0.0

    @property
    def success(self) -> bool:
        return self.symmetric.success and self.decomposition is not None


def vdecompose(A: np.ndarray, cfg: SolverConfig | None = None) -> VandermondeResult:
    """Decompose on the Segre variety and split each point into its k mode pairs.

    With every point on the affine chart the pairs are (1, (v_j)_{e_s}) and
    lambda_j is the weight; the consistency field reports how far the points
    are from exact products (relative).
    """
    t0 = time.perf_counter()
    A = np.asarray(A, dtype=complex)
    k, d = A.ndim, A.shape[0] - 1
    B = embed(A)
    res = decompose(B, segre_variety(k), cfg)
    if res.decomposition is None:
        return VandermondeResult(None, 1.0, math.inf, res, time.perf_counter() - t0)
    D = res.decomposition
    weights, pairs, worst = [], [], 0.0
    for lam, v, l0 in zip(D.weights, D.points, D.leads):
        u = np.concatenate([[l0], v])
        c, pr, cons = _factor(u, k)
        weights.append(lam * c ** d)
        pairs.append(pr)
        worst = max(worst, cons)
    V = VandermondeDecomposition(d, np.array(weights), np.array(pairs).reshape(len(weights), k, 2))
    return VandermondeResult(V, relative_error(A, V), worst, res, time.perf_counter() - t0)


def default_nodes(d: int) -> np.ndarray:
    """The (d+1)-th roots of unity."""
    return np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))


def vandermonde_oracle(A: np.ndarray, nodes=None) -> VandermondeDecomposition:
    """Expand A in the basis v_{j_1} (x) ... (x) v_{j_k}, v_l = (1, t_l, ..., t_l^d); always (d+1)^k terms."""
    A = np.asarray(A, dtype=complex)
    k, d = A.ndim, A.shape[0] - 1
    t = default_nodes(d) if nodes is None else np.asarray(nodes, dtype=complex)
    if t.size != d + 1:
        raise ValueError(f"need {d + 1} nodes")
    if np.min(np.abs(t[:, None] - t[None, :]) + np.eye(d + 1)) < 1e-14:
        raise ValueError("nodes must be distinct")
    V = t[None, :] ** np.arange(d + 1)[:, None]   # column l is v_l
    Vinv = np.linalg.inv(V)
    C = A
    for s in range(k):
        C = np.moveaxis(np.tensordot(Vinv, C, axes=([1], [s])), 0, s)
    idx = list(itertools.product(range(d + 1), repeat=k))
    weights = np.array([C[j] for j in idx])
    pairs = np.array([[[1.0, t[js]] for js in j] for j in idx], dtype=complex)
    return VandermondeDecomposition(d, weights, pairs)


def planted_vandermonde(k: int, d: int, r: int, seed: int = 0, real: bool = True):
    """(A, VandermondeDecomposition) from r terms with normally distributed b_sj and weights, a_sj = 1."""
    rng = np.random.default_rng(seed)
    if real:
        b = rng.standard_normal((r, k))
        w = rng.standard_normal(r)
    else:
        b = (rng.standard_normal((r, k)) + 1j * rng.standard_normal((r, k))) / math.sqrt(2)
        w = (rng.standard_normal(r) + 1j * rng.standard_normal(r)) / math.sqrt(2)
    pairs = np.stack([np.ones((r, k)), b], axis=2).astype(complex)
    V = VandermondeDecomposition(d, w.astype(complex), pairs)
    return V.reconstruct(), V


@dataclass
class BenchRow:
    k: int
    n: int
    d: int
    r: int
    time: float
    rel_error: float
    seed: int
    success: bool


def bench(k: int, d: int, r: int, trials: int, seed: int = 0, cfg: SolverConfig | None = None) -> list[BenchRow]:
    """Planted rank-r instances decomposed at r (escalation off), one row per trial."""
    rows = []
    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(trials):
        trial_seed = int(child.generate_state(1)[0])
        A, _ = planted_vandermonde(k, d, r, seed=trial_seed)
        c = replace(cfg or SolverConfig(), rank_min=r, rank_max=r, escalate=False, seed=trial_seed)
        t0 = time.perf_counter()
        res = vdecompose(A, c)
        rows.append(BenchRow(k, 2 ** k - 1, d, r, time.perf_counter() - t0, res.rel_error, trial_seed,
                             res.success and res.rel_error <= 1e-8))
    return rows
