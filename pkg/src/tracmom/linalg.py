"""Tolerance-aware rank, PSD testing, kernel extraction, and rank-drop search.

All decisions are relative to the largest eigenvalue magnitude, so the module
behaves identically under a global rescaling of the input matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .moments import BASIS2


@dataclass(frozen=True)
class ToleranceConfig:
    rank_tol: float = 1e-9
    psd_tol: float = 1e-9
    match_tol: float = 1e-8

    def __post_init__(self):
        if min(self.rank_tol, self.psd_tol, self.match_tol) <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_TOL = ToleranceConfig()


def _sym_eig(M: np.ndarray):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if np.abs(M - M.T).max(initial=0.0) > 1e-8 * max(1.0, np.abs(M).max(initial=0.0)):
        raise ValueError("expected a symmetric matrix")
    return np.linalg.eigh(0.5 * (M + M.T))


def numerical_rank(M: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL) -> int:
    """Count of eigenvalues with |lam| above rank_tol * max|lam| (0 for M = 0)."""
    w, _ = _sym_eig(M)
    scale = np.abs(w).max(initial=0.0)
    if scale == 0.0:
        return 0
    return int(np.count_nonzero(np.abs(w) > cfg.rank_tol * scale))


def rank_margin(M: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Distance of the closest eigenvalue to the rank cut, relative to the cut.

    Values below 10 indicate a borderline rank decision.
    """
    w, _ = _sym_eig(M)
    scale = np.abs(w).max(initial=0.0)
    if scale == 0.0:
        return np.inf
    cut = cfg.rank_tol * scale
    ratios = np.abs(w) / cut
    # distance factor from the cut, in either direction
    return float(np.min(np.maximum(ratios, 1.0 / np.maximum(ratios, 1e-300))))


def psd_margin(M: np.ndarray) -> float:
    w, _ = _sym_eig(M)
    return float(w.min())


def is_psd(M: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[bool, float]:
    """PSD test: min eigenvalue >= -psd_tol * max|eigenvalue|; returns margin."""
    w, _ = _sym_eig(M)
    scale = np.abs(w).max(initial=0.0)
    lo = float(w.min())
    return lo >= -cfg.psd_tol * max(scale, 1e-300), lo


@dataclass(frozen=True)
class ColumnRelation:
    """A degree <= 2 polynomial p with M2 * p_hat = 0, over the basis
    {1, X, Y, X^2, XY, YX, Y^2}."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (7,):
            raise ValueError("column relation needs 7 coefficients")
        object.__setattr__(self, "coeffs", c)

    def as_poly(self) -> dict[str, float]:
        return {w: float(c) for w, c in zip(BASIS2, self.coeffs) if c != 0.0}

    def evaluate(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """p(A, B) for a matrix pair; zero for atoms supporting the relation."""
        t = A.shape[0]
        words = [np.eye(t), A, B, A @ A, A @ B, B @ A, B @ B]
        return sum(c * w for c, w in zip(self.coeffs, words))

    def __repr__(self):
        terms = [f"{c:+.3g}*{w or '1'}" for w, c in zip(BASIS2, self.coeffs)
                 if abs(c) > 1e-12]
        return "ColumnRelation(" + " ".join(terms) + ")"


#: the canonical relation shapes recurring throughout the solver
CANONICAL_SHAPES: dict[str, np.ndarray] = {
    "X2+Y2=1": np.array([-1.0, 0, 0, 1, 0, 0, 1]),
    "Y2=1": np.array([-1.0, 0, 0, 0, 0, 0, 1]),
    "Y2-X2=1": np.array([-1.0, 0, 0, -1, 0, 0, 1]),
    "Y2=X2": np.array([0.0, 0, 0, -1, 0, 0, 1]),
    "XY+YX=0": np.array([0.0, 0, 0, 0, 1, 1, 0]),
}


def relation_holds(M2: np.ndarray, coeffs: np.ndarray, tol: float = 1e-7) -> bool:
    """Whether M2 annihilates the coefficient vector, relative to ||M2||."""
    M2 = np.asarray(M2, dtype=float)
    c = np.asarray(coeffs, dtype=float)
    scale = max(np.abs(M2).max(initial=0.0), 1e-300) * max(np.linalg.norm(c), 1e-300)
    return float(np.linalg.norm(M2 @ c)) <= tol * scale


def kernel_relations(M2: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL,
                     shape_tol: float = 1e-7):
    """Orthonormal kernel basis of a 7x7 moment matrix as polynomials.

    Returns (relations, matched_shapes) where matched_shapes lists the names
    of canonical relation shapes annihilated by M2 within tolerance.
    """
    M2 = np.asarray(M2, dtype=float)
    if M2.shape != (7, 7):
        raise ValueError("expected a 7x7 moment matrix")
    w, V = _sym_eig(M2)
    scale = np.abs(w).max(initial=0.0)
    if scale == 0.0:
        kernel_idx = range(7)
    else:
        kernel_idx = [i for i in range(7) if abs(w[i]) <= cfg.rank_tol * scale]
    relations = [ColumnRelation(V[:, i]) for i in kernel_idx]
    matched = [name for name, c in CANONICAL_SHAPES.items()
               if relation_holds(M2, c, shape_tol)]
    return relations, matched


class RankDropError(RuntimeError):
    """No rank drop occurs before the pencil loses positive semidefiniteness."""

    def __init__(self, message: str, psd_loss_alpha: float):
        super().__init__(message)
        self.psd_loss_alpha = psd_loss_alpha


@dataclass
class AlphaDrop:
    alpha: float
    rank_before: int
    rank_after: int
    residual: np.ndarray = field(repr=False)


def smallest_rank_drop_alpha(M: np.ndarray, D: np.ndarray,
                             cfg: ToleranceConfig = DEFAULT_TOL) -> AlphaDrop:
    """Smallest alpha > 0 with rank(M - alpha*D) < rank(M) and M - alpha*D PSD.

    Both inputs must be PSD.  The drop is located by a coarse geometric scan
    of the smallest structural eigenvalue followed by bisection to 1e-12.
    """
    M = np.asarray(M, dtype=float)
    D = np.asarray(D, dtype=float)
    ok, margin = is_psd(M, cfg)
    if not ok:
        raise ValueError(f"M must be PSD (margin {margin:.3g})")
    ok, margin = is_psd(D, cfg)
    if not ok:
        raise ValueError(f"D must be PSD (margin {margin:.3g})")

    w, V = _sym_eig(M)
    scale = np.abs(w).max(initial=0.0)
    if scale == 0.0:
        raise RankDropError("M is zero; no rank to drop", 0.0)
    keep = np.abs(w) > cfg.rank_tol * scale
    r0 = int(np.count_nonzero(keep))
    U = V[:, keep]
    K = V[:, ~keep]

    d_scale = np.abs(D).max(initial=0.0)
    if d_scale == 0.0:
        raise RankDropError("D is zero; rank never drops", np.inf)
    if K.shape[1] and np.abs(K.T @ D @ K).max(initial=0.0) > 1e-10 * d_scale:
        # D pushes into the kernel of M: M - alpha*D is indefinite for any alpha > 0
        raise RankDropError("D is not supported on the range of M; "
                            "PSD is lost immediately", 0.0)

    A = U.T @ M @ U
    B = U.T @ D @ U

    def smallest_structural_eig(alpha: float) -> float:
        return float(np.linalg.eigvalsh(A - alpha * B).min())

    # geometric scan for a sign change of the restricted smallest eigenvalue
    alpha = 1e-6 * float(np.trace(A)) / max(float(np.trace(B)), 1e-300)
    g_prev, a_prev = smallest_structural_eig(0.0), 0.0
    bracket = None
    for _ in range(80):
        g = smallest_structural_eig(alpha)
        if g < 0.0:
            bracket = (a_prev, alpha)
            break
        a_prev, g_prev = alpha, g
        alpha *= 2.0
    if bracket is None:
        raise RankDropError("no rank drop found before the scan limit", np.inf)

    lo, hi = bracket
    for _ in range(200):
        if hi - lo <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        if smallest_structural_eig(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    alpha0 = lo if smallest_structural_eig(lo) >= 0 else hi
    # secant polish: push the touching eigenvalue to machine precision, so
    # that downstream changes of variables cannot amplify the leftover
    for _ in range(4):
        g0 = smallest_structural_eig(alpha0)
        h = max(1e-9 * max(alpha0, 1.0), 1e-12)
        slope = (smallest_structural_eig(alpha0 + h) - g0) / h
        if not np.isfinite(slope) or abs(slope) < 1e-300:
            break
        step = g0 / slope
        candidate = alpha0 - step
        if not (lo - h <= candidate <= hi + h):
            break
        alpha0 = candidate
        if abs(step) <= 1e-16 * max(alpha0, 1.0):
            break
    if smallest_structural_eig(alpha0) < 0.0:
        # stay on the PSD side of the crossing
        alpha0 = np.nextafter(alpha0, 0.0)
    residual = M - alpha0 * D
    r1 = numerical_rank(residual, cfg)
    if r1 >= r0:
        # the touching eigenvalue sits just above the rank cut; nudge to hi
        alpha0 = hi
        residual = M - alpha0 * D
        r1 = numerical_rank(residual, cfg)
    if r1 >= r0:
        raise RankDropError("bisection converged without a numerical rank drop",
                            alpha0)
    return AlphaDrop(alpha=float(alpha0), rank_before=r0, rank_after=r1,
                     residual=0.5 * (residual + residual.T))
