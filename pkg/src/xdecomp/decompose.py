"""Solve for w, extract the common zeros, recover the weights, escalate the rank on failure."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .genpoly import (
    GenMatrixFamily,
    InconsistentSystem,
    generating_residual,
    ResidualSystem,
    interpolating_G,
    mult_matrices,
    parameterize_G,
    residual_system,
)
from .poly import BorderBasisCtx
from .tensor import Decomposition, SymTensor, max_flattening_rank, power_vector, residual, transform
from .variety import BasisSelectionError, SamplingError, VarietySpec, exp_grank, sample_Y, select_B0


class NoSolution(RuntimeError):
    pass


class RootExtractionError(RuntimeError):
    pass


@dataclass
class SolverConfig:
    restarts: int = 50
    max_iters: int = 200
    residual_tol: float = 1e-10
    newton_damping: tuple[float, float] = (1e-12, 1e8)
    seed: int = 0
    rank_min: int | None = None
    rank_max: int | None = None
    root_method: str = "schur_combination"
    rel_tol: float = 1e-6
    variety_tol: float = 1e-6
    escalate: bool = True
    generic_change: bool = True
    norm_kind: str = "hilbert_schmidt"
    flattening_tol: float = 1e-8

    def __post_init__(self):
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.rel_tol <= 0 or self.variety_tol <= 0:
            raise ValueError("rel_tol and variety_tol must be positive")
        if self.norm_kind not in ("hilbert_schmidt", "coefficient"):
            raise ValueError(f"unknown norm {self.norm_kind!r}")
        if self.rank_min is not None and self.rank_max is not None and self.rank_min > self.rank_max:
            raise ValueError("rank_min exceeds rank_max")
        if self.root_method != "schur_combination":
            raise ValueError(f"unknown root method {self.root_method!r}")


@dataclass
class Attempt:
    """One line of the escalation log."""

    rank: int
    stage: str
    ok: bool
    message: str = ""
    m: int | None = None
    B0: list | None = None
    restarts_used: int = 0
    solver_residual: float | None = None
    rel_error: float | None = None
    violation: float | None = None
    seconds: float = 0.0
    generic_change: bool = False


@dataclass
class DecompositionResult:
    decomposition: Decomposition | None
    rank_used: int | None
    solver_residual: float
    abs_error: float
    rel_error: float
    on_variety_violation: float
    success: bool
    trace: list = field(default_factory=list)
    change: "CoordinateChange | None" = None

    def __bool__(self):
        return self.success


# step 3: the polynomial system in w ------------------------------------------

def _lm(rs: ResidualSystem, w: np.ndarray, cfg: SolverConfig, measure=None,
        polish_steps: int = 5) -> tuple[np.ndarray, float, int]:
    """Levenberg-Marquardt on the unit-scaled residuals; returns (w, measure(w), iterations).

    Once measure(w) <= residual_tol a few undamped steps are taken while they
    still shrink the residual, so accepted solutions sit at rounding level.
    """
    measure = measure or rs.relative_residual
    lo, hi = cfg.newton_damping
    F = rs.scaled(w)
    f = float(np.vdot(F, F).real)
    J = rs.scaled_jacobian(w)
    mu = 1e-3 * max(float(np.max(np.sum(np.abs(J) ** 2, axis=0))), 1e-12)
    eye = np.eye(rs.m)
    polished = 0
    it = 0
    for it in range(1, cfg.max_iters + 1):
        if measure(w) <= cfg.residual_tol:
            if polished >= polish_steps:
                break
            polished += 1
            mu = lo
        lhs = np.vstack([J, math.sqrt(mu) * eye])
        rhs = np.concatenate([-F, np.zeros(rs.m)])
        step = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
        w_new = w + step
        F_new = rs.scaled(w_new)
        f_new = float(np.vdot(F_new, F_new).real)
        if np.isfinite(f_new) and f_new < f:
            shrink = f_new / f if f > 0 else 0.0
            w, F, f = w_new, F_new, f_new
            J = rs.scaled_jacobian(w)
            mu = max(mu / 5.0, lo)
            if np.linalg.norm(step) <= 1e-15 * (1.0 + np.linalg.norm(w)):
                break
            if polished and shrink > 0.25:
                break
        else:
            if polished:
                break
            mu *= 4.0
            if mu > hi:
                break
    return w, measure(w), it


def _initial_points(rs: ResidualSystem, cfg: SolverConfig, rng, family: GenMatrixFamily | None,
                    X: VarietySpec | None):
    """Starting w values: projections of G interpolating random points of Y, alternated with Gaussians."""
    sampled = None
    if family is not None and X is not None:
        try:
            sampled = sample_Y(X, family.r * cfg.restarts, seed=int(rng.integers(2**31)))
        except SamplingError:
            sampled = None
    for k in range(cfg.restarts):
        if sampled is not None and k % 2 == 0:
            pts = sampled[(k // 2) * family.r:(k // 2 + 1) * family.r]
            try:
                yield "sampled", family.project(interpolating_G(pts, family.ctx))
                continue
            except np.linalg.LinAlgError:
                pass
        yield "gaussian", (rng.standard_normal(rs.m) + 1j * rng.standard_normal(rs.m)) / math.sqrt(2)


def solutions(rs: ResidualSystem, cfg: SolverConfig, rng=None, family=None, X=None):
    """Yield (restart, w, residual) for every restart that reaches residual_tol.

    With the family and variety at hand the residual is judged on G(w)
    itself (see generating_residual); otherwise by the cancellation-relative
    size of the residual polynomials.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if family is not None and X is not None:
        def measure(w):
            return generating_residual(family.evaluate(w), family.ctx, X)
    else:
        measure = rs.relative_residual
    if len(rs) == 0:
        w = np.zeros(rs.m, dtype=complex)
        yield 0, w, measure(w)
        return
    if rs.m == 0:
        w = np.zeros(0, dtype=complex)
        res = measure(w)
        if res <= cfg.residual_tol:
            yield 0, w, res
        return
    for k, (_, w0) in enumerate(_initial_points(rs, cfg, rng, family, X)):
        w, res, _ = _lm(rs, np.asarray(w0, dtype=complex), cfg, measure)
        if res <= cfg.residual_tol and np.all(np.isfinite(w)):
            yield k, w, res


def solve_w(rs: ResidualSystem, cfg: SolverConfig | None = None, family=None, X=None) -> np.ndarray:
    """First restart whose relative residual reaches cfg.residual_tol."""
    cfg = cfg or SolverConfig()
    for _, w, _ in solutions(rs, cfg, family=family, X=X):
        return w
    raise NoSolution(f"no restart out of {cfg.restarts} reached residual {cfg.residual_tol:g}")


# steps 4 and 5 ------------------------------------------------------------------

def extract_roots(G: np.ndarray, ctx: BorderBasisCtx, rng=None, retries: int = 5,
                  gap_tol: float = 1e-8) -> np.ndarray:
    """Common zeros of the generating polynomials from one random combination of the M_i."""
    if rng is None:
        rng = np.random.default_rng(0)
    Ms = mult_matrices(np.asarray(G, dtype=complex), ctx)
    r, n = ctx.r, ctx.n
    scale = max(max(np.abs(M).max() for M in Ms), 1.0) if Ms else 1.0
    for _ in range(retries):
        xi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        xi /= np.linalg.norm(xi)
        Mx = sum(c * M for c, M in zip(xi, Ms))
        vals, Q = np.linalg.eig(Mx.T)
        if r > 1:
            gaps = np.abs(vals[:, None] - vals[None, :])
            np.fill_diagonal(gaps, np.inf)
            if gaps.min() <= gap_tol * scale:
                continue
            # a defective double eigenvalue splits by ~sqrt(eps) but keeps parallel eigenvectors
            Qn = Q / np.linalg.norm(Q, axis=0)
            cosines = np.abs(Qn.conj().T @ Qn)
            np.fill_diagonal(cosines, 0.0)
            if cosines.max() > 1 - 1e-10:
                continue
        pts = np.empty((r, n), dtype=complex)
        for j in range(r):
            q = Q[:, j]
            qq = np.vdot(q, q)
            for i, M in enumerate(Ms):
                pts[j, i] = np.vdot(q, M.T @ q) / qq
        return pts
    raise RootExtractionError("multiplication matrices have a repeated eigenvalue for every tried combination")


def solve_lambdas(A: SymTensor, points, leads=None) -> tuple[np.ndarray, float]:
    """Least-squares weights over every entry; returns (weights, relative linear residual)."""
    P = np.asarray(points, dtype=complex).reshape(-1, A.n)
    leads = np.ones(P.shape[0]) if leads is None else leads
    W = np.column_stack([power_vector(v, A.n, A.d, l0) for v, l0 in zip(P, leads)]) if len(P) else \
        np.zeros((A.data.size, 0), dtype=complex)
    if W.shape[1]:
        s = np.linalg.svd(W, compute_uv=False)
        if s[-1] <= 1e-13 * s[0]:
            raise np.linalg.LinAlgError("points are (nearly) coincident; weights are not determined")
    lam = np.linalg.lstsq(W, A.data, rcond=None)[0]
    res = np.linalg.norm(W @ lam - A.data) / max(np.linalg.norm(A.data), 1e-300)
    return lam, float(res)


def variety_violation(X: VarietySpec, D: Decomposition) -> float:
    """max |h_i(lead_j, v_j)| over generators and terms."""
    worst = 0.0
    for v, l0 in zip(D.points, D.leads):
        u = np.concatenate([[l0], v])
        for h in X.generators_h:
            worst = max(worst, abs(complex(h.eval(u))))
    return worst


def _variety_threshold(X: VarietySpec, D: Decomposition, tol: float) -> float:
    if not D.rank:
        return tol
    big = max(float(np.linalg.norm(np.concatenate([[l0], v]))) for v, l0 in zip(D.points, D.leads))
    return tol * (1.0 + big ** max(X.max_generator_degree, 1))


# coordinate changes --------------------------------------------------------------

@dataclass(frozen=True)
class CoordinateChange:
    """x' = L x with L unitary, so the inverse is L^H."""

    L: np.ndarray

    @classmethod
    def random(cls, n: int, rng) -> "CoordinateChange":
        Z = rng.standard_normal((n + 1, n + 1)) + 1j * rng.standard_normal((n + 1, n + 1))
        Q, R = np.linalg.qr(Z)
        return cls(Q * (np.diag(R) / np.abs(np.diag(R))))

    @classmethod
    def identity(cls, n: int) -> "CoordinateChange":
        return cls(np.eye(n + 1, dtype=complex))

    @property
    def Linv(self) -> np.ndarray:
        return self.L.conj().T

    def tensor(self, A: SymTensor) -> SymTensor:
        return transform(A, self.L)

    def variety(self, X: VarietySpec) -> VarietySpec:
        # h'(x') = h(L^{-1} x')
        gens = tuple(h.linear_substitute(self.Linv) for h in X.generators_h)
        return VarietySpec(X.n, gens, dimX=X.dimX, name=X.name)

    def pullback(self, D: Decomposition, infinity_tol: float = 1e-10) -> Decomposition:
        """Map terms back; a pulled-back point with negligible x_0 becomes a term at infinity (lead 0)."""
        d = D.d
        lams, pts, leads = [], [], []
        for lam, v, l0 in zip(D.weights, D.points, D.leads):
            u = self.Linv @ np.concatenate([[l0], v])
            nu = np.linalg.norm(u)
            if abs(u[0]) <= infinity_tol * nu:
                # scale so the largest coordinate is 1
                s = u[1:][int(np.argmax(np.abs(u[1:])))]
                lams.append(lam * s ** d)
                pts.append(u[1:] / s)
                leads.append(0.0)
            else:
                lams.append(lam * u[0] ** d)
                pts.append(u[1:] / u[0])
                leads.append(1.0)
        return Decomposition(d, np.array(lams), np.array(pts).reshape(len(lams), -1), np.array(leads))


def preprocess_generic_change(A: SymTensor, X: VarietySpec | None = None, seed: int = 0):
    """(A', X', change) after a random unitary change of coordinates on C^{n+1}."""
    change = CoordinateChange.random(A.n, np.random.default_rng(seed))
    X2 = change.variety(X) if X is not None else None
    return change.tensor(A), X2, change


# the driver ------------------------------------------------------------------------

def _default_rank_range(A: SymTensor, X: VarietySpec, cfg: SolverConfig) -> tuple[int, int]:
    r0 = max_flattening_rank(A, cfg.flattening_tol)
    lo = max(cfg.rank_min or 1, r0, 1)
    if cfg.rank_max is not None:
        return lo, max(cfg.rank_max, cfg.rank_min or 1)
    try:
        guess = exp_grank(X, A.d)
    except (ValueError, SamplingError):
        guess = lo
    return lo, max(lo, guess) + 1


def _finish(A, X, D, cfg, res):
    abs_err, rel_err = residual(A, D, cfg.norm_kind)
    viol = variety_violation(X, D)
    ok = rel_err <= cfg.rel_tol and viol <= _variety_threshold(X, D, cfg.variety_tol)
    return abs_err, rel_err, viol, ok


def attempt_rank(A: SymTensor, X: VarietySpec, r: int, cfg: SolverConfig, rng):
    """Run every step at a fixed r; returns (Attempt, best DecompositionResult or None)."""
    t0 = time.perf_counter()
    att = Attempt(rank=r, stage="basis", ok=False)
    try:
        B0 = select_B0(X, r, seed=int(rng.integers(2**31)))
    except (BasisSelectionError, SamplingError) as exc:
        att.message = str(exc)
        return att, None
    att.B0 = [list(b) for b in B0]
    att.stage = "linear systems"
    try:
        family = parameterize_G(A, B0)
    except (InconsistentSystem, ValueError) as exc:
        att.message = str(exc)
        att.seconds = time.perf_counter() - t0
        return att, None
    att.m = family.m
    att.stage = "residual system"
    rs = residual_system(A, X, family)
    att.stage = "solve w"
    best = None
    tried = 0
    failures: dict = {}
    for k, w, res in solutions(rs, cfg, rng, family, X):
        tried = k + 1
        G = family.evaluate(w)
        try:
            pts = extract_roots(G, family.ctx, rng)
            lam, _ = solve_lambdas(A, pts)
        except (RootExtractionError, np.linalg.LinAlgError) as exc:
            failures[type(exc).__name__] = failures.get(type(exc).__name__, 0) + 1
            continue
        D = Decomposition(A.d, lam, pts)
        abs_err, rel_err, viol, ok = _finish(A, X, D, cfg, res)
        cand = DecompositionResult(D, r, res, abs_err, rel_err, viol, ok)
        if best is None or rel_err < best.rel_error:
            best = cand
        if ok:
            break
    att.restarts_used = tried if best is not None and best.success else (cfg.restarts if rs.m else 1)
    att.seconds = time.perf_counter() - t0
    if best is None:
        att.message = "no restart solved the residual system" + (f" ({failures})" if failures else "")
        return att, None
    att.solver_residual, att.rel_error, att.violation = best.solver_residual, best.rel_error, best.on_variety_violation
    att.stage = "verify"
    att.ok = best.success
    if not best.success:
        att.message = f"verification failed: rel_error {best.rel_error:.3g}, violation {best.on_variety_violation:.3g}"
    return att, best


def _run_range(A, X, lo, hi, cfg, rng, trace, changed=False):
    best = None
    for r in range(lo, hi + 1):
        att, res = attempt_rank(A, X, r, cfg, rng)
        att.generic_change = changed
        trace.append(att)
        if res is not None and (best is None or res.rel_error < best.rel_error):
            best = res
        if res is not None and res.success:
            return res
        if not cfg.escalate:
            break
    return best


def decompose(A: SymTensor, X: VarietySpec | None = None, cfg: SolverConfig | None = None) -> DecompositionResult:
    """Symmetric X-decomposition with rank escalation starting at the largest flattening rank.

    If every rank fails and cfg.generic_change is set, the whole search is
    repeated once in random unitary coordinates and the result pulled back.
    """
    cfg = cfg or SolverConfig()
    X = X if X is not None else VarietySpec.full_space(A.n)
    if X.n != A.n:
        raise ValueError("tensor and variety live in different spaces")
    rng = np.random.default_rng(cfg.seed)
    lo, hi = _default_rank_range(A, X, cfg)
    if not cfg.escalate:
        hi = lo
    trace: list = []
    if not np.any(A.data):
        D = Decomposition(A.d, np.zeros(0), np.zeros((0, A.n)))
        return DecompositionResult(D, 0, 0.0, 0.0, 0.0, 0.0, True, trace)
    res = _run_range(A, X, lo, hi, cfg, rng, trace)
    if (res is None or not res.success) and cfg.generic_change:
        A2, X2, change = preprocess_generic_change(A, X, seed=int(rng.integers(2**31)))
        res2 = _run_range(A2, X2, lo, hi, cfg, rng, trace, changed=True)
        if res2 is not None:
            D = change.pullback(res2.decomposition)
            abs_err, rel_err, viol, ok = _finish(A, X, D, cfg, res2.solver_residual)
            pulled = DecompositionResult(D, res2.rank_used, res2.solver_residual, abs_err, rel_err, viol, ok,
                                         change=change)
            if res is None or ok or rel_err < res.rel_error:
                res = pulled
    if res is None:
        nA = float(np.linalg.norm(A.data))
        return DecompositionResult(None, None, math.inf, nA, 1.0 if nA else 0.0, math.inf, False, trace)
    res.trace = trace
    return res


def planted_instance(X: VarietySpec, r: int, d: int, seed: int = 0, real: bool = False):
    """(A, weights, points) with r random points of Y and random weights."""
    rng = np.random.default_rng(seed)
    pts = sample_Y(X, r, seed=int(rng.integers(2**31)))
    if real:
        lam = rng.standard_normal(r)
    else:
        lam = (rng.standard_normal(r) + 1j * rng.standard_normal(r)) / math.sqrt(2)
    D = Decomposition(d, lam, pts)
    return D.reconstruct(X.n), lam, pts


def match_points(found, planted) -> float:
    """Largest distance after optimally pairing two equally sized point sets."""
    from scipy.optimize import linear_sum_assignment

    found, planted = np.asarray(found), np.asarray(planted)
    if found.shape != planted.shape:
        return math.inf
    cost = np.linalg.norm(found[:, None, :] - planted[None, :, :], axis=2)
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max()) if len(i) else 0.0


__all__ = [
    "Attempt", "CoordinateChange", "DecompositionResult", "NoSolution", "RootExtractionError", "SolverConfig",
    "attempt_rank", "decompose", "extract_roots", "match_points", "planted_instance", "preprocess_generic_change",
    "solutions", "solve_lambdas", "solve_w", "variety_violation",
]
