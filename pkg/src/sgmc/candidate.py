"""Decoding indicators into affine candidate solution maps and convex zones.

A candidate indicator s fixes a support E and signs on it.  Solving the
equality half of the optimality system in the least-squares sense gives an
affine map of the parameters (b, lambda),

    w_E(b, lambda) = R(s) [b; lambda],     w off E = 0,
    R(s) = pinv(C_E^T D C_E) [C_E^T, -s_E],

whose slope R(s) depends on (A, rho, s) only.  The set of (b, lambda) where
this map also satisfies the inequality half is a convex cone, the candidate
zone of s; on it the map reproduces the minimum-norm solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ProblemInstance, as_indicator, slice_columns, support
from .optimality import check_opt, correlation

PINV_RTOL = 1e-12  # relative singular-value cutoff for the slope pseudoinverse
COMPAT_TOL = 1e-8  # residual tolerance of the column-space compatibility test


class IncompatibleIndicatorError(ValueError):
    """Raised when an operation needs [s]_E in Col(C_E^T) and it is not."""


def is_compatible(inst: ProblemInstance, s: np.ndarray) -> bool:
    """Whether [s]_E lies in the column space of C_E^T (least-squares
    residual below COMPAT_TOL * sqrt(|E|) in the sup norm).  Indicators
    failing this have an empty candidate zone."""
    s = as_indicator(s)
    E = support(s)
    if E.size == 0:
        return True
    CEt = inst.matrices.C[:, E].T
    sol, *_ = np.linalg.lstsq(CEt, s[E].astype(float), rcond=None)
    residual = CEt @ sol - s[E]
    return bool(np.abs(residual).max() <= COMPAT_TOL * np.sqrt(E.size))


@dataclass(frozen=True)
class CandidatePiece:
    """Affine candidate solution map of one indicator.

    `R` has shape (|E|, 2m+1); rows follow the ascending support order.  For
    the empty support the stored block is the 1 x (2m+1) zero matrix (the
    empty-slice convention) and the map is identically zero.
    """

    s: np.ndarray
    R: np.ndarray
    compatible: bool

    @property
    def support(self) -> np.ndarray:
        return support(self.s)


def candidate_slope(inst: ProblemInstance, s: np.ndarray) -> CandidatePiece:
    """Closed-form slope R(s) via the Moore-Penrose pseudoinverse of
    C_E^T D C_E (singular values below PINV_RTOL relative are dropped)."""
    s = as_indicator(s)
    E = support(s)
    mats = inst.matrices
    CE = slice_columns(mats.C, E)
    sE = s[E].astype(float) if E.size else np.zeros(1)
    M = CE.T @ mats.D @ CE
    R = np.linalg.pinv(M, rtol=PINV_RTOL) @ np.hstack([CE.T, -sE[:, None]])
    return CandidatePiece(s=s, R=R, compatible=is_compatible(inst, s))


def eval_weq(piece: CandidatePiece, b: np.ndarray, lam: float) -> np.ndarray:
    """Evaluate the candidate map at (b, lambda): R [b; lambda] on the
    support, zeros elsewhere."""
    E = piece.support
    w = np.zeros(piece.s.size, dtype=float)
    if E.size:
        w[E] = piece.R @ np.append(b, lam)
    return w


def eqnq_membership(
    inst: ProblemInstance, s: np.ndarray, w: np.ndarray, tol: float = 1e-9
) -> bool:
    """Whether w solves the full equality+inequality system of s at the
    instance's own (b, lambda), every condition within tol*(1+lambda)."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    s = as_indicator(s)
    w = np.ravel(w)
    lam = inst.lam
    slack = tol * (1.0 + lam)
    E = support(s)
    mask = np.zeros(s.size, dtype=bool)
    mask[E] = True
    xi = correlation(inst, w)
    if E.size:
        if np.abs(xi[E] - lam * s[E]).max() > slack:  # EQ on the support
            return False
        if (s[E] * w[E]).min() < -slack:  # NQ signs on the support
            return False
    off = ~mask
    if off.any():
        if np.abs(w[off]).max() > slack:  # EQ zeros off the support
            return False
        if np.abs(xi[off]).max() > lam + slack:  # NQ bound off the support
            return False
    return True


def zone_membership(
    inst: ProblemInstance,
    s: np.ndarray,
    b: np.ndarray,
    lam: float,
    tol: float = 1e-9,
    piece: CandidatePiece | None = None,
) -> bool:
    """Whether (b, lambda) lies in the candidate zone of s.

    Evaluates the two inequality families directly on w = eval_weq(s; b, lam):
    sign consistency s_i w_i >= -tol on the support and |xi_i(w)| <= lambda +
    tol*(1+lambda) off it.  A precomputed `piece` skips the slope rebuild.
    """
    if lam <= 0:
        return False
    if piece is None:
        piece = candidate_slope(inst, s)
    if not piece.compatible:
        return False
    margins = zone_margins(inst, piece, b, lam)
    sign_ok = margins.sign_margin >= -tol
    corr_ok = margins.corr_margin >= -tol * (1.0 + lam)
    return bool(sign_ok and corr_ok)


@dataclass(frozen=True)
class ZoneMargins:
    """Worst margins of the two zone inequality families (>= 0 inside)."""

    sign_margin: float  # min over the support of s_i * w_i
    corr_margin: float  # min off the support of lambda - |xi_i(w)|

    @property
    def overall(self) -> float:
        return min(self.sign_margin, self.corr_margin)


def zone_margins(
    inst: ProblemInstance, piece: CandidatePiece, b: np.ndarray, lam: float
) -> ZoneMargins:
    probe = inst.with_params(b=b, lam=lam)
    w = eval_weq(piece, b, lam)
    E = piece.support
    mask = np.zeros(piece.s.size, dtype=bool)
    mask[E] = True
    xi = correlation(probe, w)
    sign_margin = float((piece.s[E] * w[E]).min()) if E.size else np.inf
    corr_margin = float((lam - np.abs(xi[~mask])).min()) if np.any(~mask) else np.inf
    return ZoneMargins(sign_margin=sign_margin, corr_margin=corr_margin)


def zone_slack(
    inst: ProblemInstance,
    s: np.ndarray,
    b: np.ndarray,
    lam: float,
    piece: CandidatePiece | None = None,
) -> float:
    """Minimum slack over all zone inequalities (including lambda > 0);
    negative outside the zone, -inf for incompatible indicators."""
    if piece is None:
        piece = candidate_slope(inst, s)
    if not piece.compatible:
        return -np.inf
    return float(min(zone_margins(inst, piece, b, lam).overall, lam))


def strictly_inside(
    inst: ProblemInstance,
    s: np.ndarray,
    b: np.ndarray,
    lam: float,
    piece: CandidatePiece | None = None,
    margin: float = 1e-6,
) -> bool:
    """Operational interior test: every zone inequality holds with slack at
    least margin*(1+lambda)."""
    return zone_slack(inst, s, b, lam, piece=piece) >= margin * (1.0 + lam)


def weq_passes_opt(
    inst: ProblemInstance,
    piece: CandidatePiece,
    b: np.ndarray,
    lam: float,
    tol: float = 1e-7,
) -> bool:
    """Convenience: does the candidate map value at (b, lambda) satisfy the
    optimality condition there?"""
    probe = inst.with_params(b=b, lam=lam)
    w = eval_weq(piece, b, lam)
    return check_opt(probe, w).worst_violation <= tol
