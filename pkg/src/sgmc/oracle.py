"""Independent ground-truth solvers used to cross-check the closed forms.

Nothing here shares code paths with the candidate/sweep machinery: the saddle
solver is a proximal fixed-point iteration on the optimality inclusion, the
min-norm solver projects the origin onto the equality+inequality system, the
LASSO reference is plain coordinate descent, and tiny instances can be solved
outright by enumerating all 3^(2n) candidate indicators.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .candidate import (
    candidate_slope,
    eval_weq,
    weq_passes_opt,
    zone_membership,
)
from .model import ProblemInstance, as_indicator, indicator_to_string, support


class NonConvergenceError(RuntimeError):
    """Iterative solver ran out of iterations; carries the best iterate."""

    def __init__(self, message: str, w: np.ndarray | None = None, achieved: float = math.inf):
        super().__init__(f"{message} (achieved violation {achieved:.3e})")
        self.w = w
        self.achieved = achieved


class InfeasibleSystemError(ValueError):
    """The equality system (or the full system) has no solution."""


@dataclass(frozen=True)
class OracleConfig:
    max_iters: int = 200000
    tol: float = 1e-9
    step_scale: float = 0.9

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not 0 < self.step_scale <= 1:
            raise ValueError("step_scale must lie in (0, 1]")


def _soft(v: np.ndarray, thresh: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def _operator_norm(G: np.ndarray, iters: int = 100, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=G.shape[1])
    v /= np.linalg.norm(v)
    est = 1.0
    for _ in range(iters):
        v = G.T @ (G @ v)
        norm = np.linalg.norm(v)
        if norm == 0:
            return 1.0
        est = math.sqrt(norm)
        v /= norm
    return est


def _worst_violation(w: np.ndarray, xi: np.ndarray, lam: float, tol: float) -> float:
    slack = tol * (1.0 + lam)
    active = np.abs(w) > tol
    excess = np.where(
        active, np.abs(xi - lam * np.sign(w)) - slack, np.abs(xi) - lam - slack
    )
    return float(max(0.0, excess.max()))


def solve_saddle(
    inst: ProblemInstance,
    config: OracleConfig | None = None,
    w0: np.ndarray | None = None,
) -> np.ndarray:
    """Extended solution by a forward-backward-forward fixed-point iteration
    on the optimality inclusion  C^T(b - D C w) in lambda * d||.||_1(w):

        z   = soft(w + tau * xi(w), tau * lambda)
        w^+ = z - tau * (xi(w) - xi(z))

    The forward operator is monotone but not cocoercive (D is nonsymmetric),
    so the correction step is what guarantees convergence at a fixed step
    below 1/||C^T D C||_2; the plain forward-backward map can cycle for rho
    near 1.  The step is step_scale / ||C^T D C||_2 with the norm estimated
    by power iteration.  Warm-startable through w0.
    """
    cfg = config or OracleConfig()
    mats = inst.matrices
    G = mats.C.T @ (mats.D @ mats.C)
    h = mats.C.T @ inst.b
    lam = inst.lam
    L = max(_operator_norm(G), 1e-12)
    tau = cfg.step_scale / L
    w = np.zeros(2 * inst.n) if w0 is None else np.array(w0, dtype=float)
    check_tol = min(cfg.tol, 1e-9)

    for it in range(cfg.max_iters):
        xi_w = h - G @ w
        z = _soft(w + tau * xi_w, tau * lam)
        xi_z = h - G @ z
        w = z - tau * (xi_w - xi_z)
        if it % 10 == 0:
            if _worst_violation(z, xi_z, lam, check_tol) <= cfg.tol:
                return z
    z = _soft(w + tau * (h - G @ w), tau * lam)
    worst = _worst_violation(z, h - G @ z, lam, check_tol)
    if worst <= cfg.tol:
        return z
    raise NonConvergenceError("saddle solver did not converge", w=z, achieved=worst)


def _project_halfspaces(
    halfspaces: list[tuple[np.ndarray, float]],
    dim: int,
    tol: float,
    max_cycles: int,
) -> np.ndarray:
    """Project the origin onto the intersection of halfspaces {g.y <= h}
    with Dykstra's alternating corrections.

    An empty intersection makes the worst violation plateau at a positive
    gap; that plateau is reported as infeasibility.
    """
    y = np.zeros(dim)
    corrections = [np.zeros(dim) for _ in halfspaces]
    worst = math.inf
    best = math.inf
    stalled = 0
    for _ in range(max_cycles):
        shift = 0.0
        for k, (g, h) in enumerate(halfspaces):
            y_in = y + corrections[k]
            overshoot = float(g @ y_in - h)
            if overshoot > 0.0:
                y_out = y_in - overshoot / float(g @ g) * g
            else:
                y_out = y_in
            corrections[k] = y_in - y_out
            shift = max(shift, float(np.abs(y_out - y).max(initial=0.0)))
            y = y_out
        worst = max(
            (float(g @ y - h) for g, h in halfspaces), default=0.0
        )
        if shift <= tol and worst <= tol:
            return y
        if worst < 0.99 * best:
            best = worst
            stalled = 0
        else:
            stalled += 1
            if stalled >= 500 and worst > 100.0 * tol:
                raise InfeasibleSystemError(
                    f"constraint system appears empty (gap plateau {worst:.3e})"
                )
    raise NonConvergenceError("halfspace projection did not converge", achieved=worst)


def min_norm_over_eqnq(
    inst: ProblemInstance,
    s: np.ndarray,
    tol: float = 1e-9,
    max_cycles: int = 100000,
) -> np.ndarray:
    """Minimum l2-norm element of the equality+inequality system of s at the
    instance's own (b, lambda).

    The equality system pins w to an affine set; parametrizing it by the null
    space of C_E^T D C_E reduces the problem to projecting the origin onto a
    small polyhedron, solved by Dykstra's method with a combined feasibility/
    fixed-point stopping rule at `tol`.
    """
    s = as_indicator(s)
    E = support(s)
    mats = inst.matrices
    lam = inst.lam
    if E.size == 0:
        return np.zeros(2 * inst.n)
    CE = mats.C[:, E]
    M = CE.T @ mats.D @ CE
    d = CE.T @ inst.b - lam * s[E]
    w0_E = np.linalg.pinv(M, rtol=1e-12) @ d
    eq_residual = float(np.abs(M @ w0_E - d).max())
    if eq_residual > 1e-8 * (1.0 + np.abs(d).max()):
        raise InfeasibleSystemError(
            f"equality system certified infeasible (residual {eq_residual:.3e})"
        )

    U, sigma, Vt = np.linalg.svd(M)
    rank = int(np.sum(sigma > 1e-12 * (sigma[0] if sigma.size else 1.0)))
    N = Vt[rank:].T  # orthonormal basis of the null space of M

    def embed(wE: np.ndarray) -> np.ndarray:
        w = np.zeros(2 * inst.n)
        w[E] = wE
        return w

    if N.shape[1] == 0:
        w = embed(w0_E)
        _assert_nq(inst, s, w, tol)
        return w

    # halfspaces in null-space coordinates y (w_E = w0_E + N y)
    halfspaces: list[tuple[np.ndarray, float]] = []
    for row, i in enumerate(E):
        g = -float(s[i]) * N[row]
        h = float(s[i]) * float(w0_E[row])
        if np.abs(g).max() > 0:
            halfspaces.append((g, h))
        elif h < -tol * (1.0 + lam):
            raise InfeasibleSystemError("sign constraint infeasible on the null space")
    xi0 = mats.C.T @ (inst.b - mats.D @ (CE @ w0_E))
    T = mats.C.T @ (mats.D @ (CE @ N))
    off = np.setdiff1d(np.arange(2 * inst.n), E)
    for i in off:
        for g, h in ((-T[i], lam - xi0[i]), (T[i], lam + xi0[i])):
            if np.abs(g).max() > 0:
                halfspaces.append((np.array(g), float(h)))
            elif h < -tol * (1.0 + lam):
                raise InfeasibleSystemError(
                    "correlation bound infeasible on the null space"
                )
    scaled_tol = tol * (1.0 + lam)
    y = _project_halfspaces(halfspaces, N.shape[1], scaled_tol, max_cycles)
    w = embed(w0_E + N @ y)
    _assert_nq(inst, s, w, tol)
    return w


def _assert_nq(inst: ProblemInstance, s: np.ndarray, w: np.ndarray, tol: float):
    from .candidate import eqnq_membership

    if not eqnq_membership(inst, s, w, tol=max(tol, 1e-7)):
        raise InfeasibleSystemError(
            "candidate system has no feasible point at these parameters"
        )


@dataclass(frozen=True)
class LassoConfig:
    max_iters: int = 20000
    tol: float = 1e-9


def lasso_reference(
    A: np.ndarray,
    y: np.ndarray,
    lam: float,
    config: LassoConfig | None = None,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Cyclic coordinate-descent LASSO solver, stopped on the KKT residual."""
    cfg = config or LassoConfig()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    y = np.ravel(y)
    n = A.shape[1]
    col_sq = np.einsum("ij,ij->j", A, A)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = y - A @ x
    for _ in range(cfg.max_iters):
        for j in range(n):
            if col_sq[j] == 0.0:
                x[j] = 0.0
                continue
            old = x[j]
            rho_j = A[:, j] @ r + col_sq[j] * old
            new = math.copysign(max(abs(rho_j) - lam, 0.0), rho_j) / col_sq[j]
            if new != old:
                r += A[:, j] * (old - new)
                x[j] = new
        if _lasso_kkt_residual(A, x, r, lam) <= cfg.tol:
            return x
    achieved = _lasso_kkt_residual(A, x, y - A @ x, lam)
    if achieved <= cfg.tol:
        return x
    raise NonConvergenceError("coordinate descent did not converge", w=x, achieved=achieved)


def _lasso_kkt_residual(A: np.ndarray, x: np.ndarray, r: np.ndarray, lam: float) -> float:
    g = A.T @ r
    active = np.abs(x) > 1e-12
    excess = np.where(active, np.abs(g - lam * np.sign(x)), np.abs(g) - lam)
    return float(max(0.0, excess.max(initial=0.0)))


# -- exhaustive enumeration for tiny instances --------------------------------

@dataclass
class BruteForceResult:
    """Per-sample min-norm indicator assignments over all 3^(2n) candidates.

    `indicators` is the union of assigned indicator strings; `assignments`
    maps each sample to its assigned string (None when nothing matched);
    `matches` lists every indicator whose zone contains the sample and whose
    candidate map satisfies optimality there.
    """

    indicators: set[str] = field(default_factory=set)
    assignments: list[str | None] = field(default_factory=list)
    matches: list[list[str]] = field(default_factory=list)


def brute_force_indicators(
    A: np.ndarray,
    rho: float,
    samples: list[tuple[np.ndarray, float]],
    opt_tol: float = 1e-7,
) -> BruteForceResult:
    """Enumerate every candidate indicator of a (A, rho) family and assign to
    each sample the matching indicator whose candidate solution has minimal
    l2-norm (ties broken by smaller support, then lexicographic string).

    Guarded to 2n <= 10 (3^10 = 59049 candidates).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if 2 * n > 10:
        raise ValueError(f"size guard exceeded: 2n = {2 * n} > 10")
    base = ProblemInstance(A=A, rho=rho, y=np.zeros(m), lam=1.0)
    pieces = []
    for combo in itertools.product((1, 0, -1), repeat=2 * n):
        s = as_indicator(np.array(combo))
        piece = candidate_slope(base, s)
        if piece.compatible:
            pieces.append(piece)

    result = BruteForceResult()
    for b, lam in samples:
        b = np.ravel(b)
        matched = []
        for piece in pieces:
            if zone_membership(base, piece.s, b, lam, piece=piece) and weq_passes_opt(
                base, piece, b, lam, tol=opt_tol
            ):
                w = eval_weq(piece, b, lam)
                matched.append(
                    (
                        float(np.linalg.norm(w)),
                        int(piece.support.size),
                        indicator_to_string(piece.s),
                    )
                )
        result.matches.append(sorted(key for *_rest, key in matched))
        if not matched:
            result.assignments.append(None)
            continue
        min_norm = min(norm for norm, *_ in matched)
        eligible = [
            entry for entry in matched if entry[0] <= min_norm + 1e-9 * (1.0 + min_norm)
        ]
        eligible.sort(key=lambda entry: (entry[1], entry[2]))
        chosen = eligible[0][2]
        result.assignments.append(chosen)
        result.indicators.add(chosen)
    return result
