"""Flat-extension analysis for rank-6 moment matrices.

For each basic relation, recursive generation pins all degree-5 moments of
the extension block B3 up to two or three free parameters.  A flat extension
forces C3 = W1' M2|_M1 W1, and the extension has a moment structure exactly
when a short list of Hankel-type equalities between C3 entries holds.
Searching the parameters for a zero of those residuals yields a sufficiency
certificate for a representing measure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .linalg import DEFAULT_TOL, ToleranceConfig, is_psd, numerical_rank
from .moments import BASIS2, MomentSequence, build_moment_matrix
from .words import canonical_word

#: degree-3 column words of the extension blocks, in the display order
DEG3_COLS = ("XXX", "XXY", "XYX", "XYY", "YXX", "YXY", "YYX", "YYY")

RELATIONS = ("REL1", "REL2", "REL3", "REL4")

#: principal row set whose columns stay invertible for each relation;
#: Y^2 = 1 makes the Y^2 column dependent, so that case keeps YX instead
_M1_INDEX = {
    "REL1": (0, 1, 2, 3, 4, 5),  # 1, X, Y, X^2, XY, YX
    "REL2": (0, 1, 2, 3, 4, 5),
    "REL3": (0, 1, 2, 3, 4, 6),  # 1, X, Y, X^2, XY, Y^2
    "REL4": (0, 1, 2, 3, 4, 5),
}


def n_parameters(relation: str) -> int:
    return 3 if relation == "REL4" else 2


def degree5_moments(relation: str, seq: MomentSequence, params) -> dict[str, float]:
    """All eight degree-5 class moments forced by recursive generation."""
    bx, by = seq["X"], seq["Y"]
    bx3, bx2y = seq["XXX"], seq["XXY"]
    if relation == "REL1":
        p, q = params
        return {"XXXXX": p, "XXXXY": q,
                "XXXYY": bx3 - p, "XXYXY": bx3 - p,
                "XXYYY": bx2y - q, "XYXYY": bx2y - q,
                "XYYYY": bx - 2 * bx3 + p, "YYYYY": by - 2 * bx2y + q}
    if relation == "REL2":
        p, q = params
        return {"XXXXX": p, "XXXXY": q,
                "XXXYY": bx3 + p, "XXYXY": bx3 + p,
                "XXYYY": bx2y + q, "XYXYY": bx2y + q,
                "XYYYY": bx + 2 * bx3 + p, "YYYYY": by + 2 * bx2y + q}
    if relation == "REL3":
        p, q = params
        return {"XXXXX": p, "XXXXY": 0.0, "XXXYY": 0.0, "XXYXY": 0.0,
                "XXYYY": 0.0, "XYXYY": 0.0, "XYYYY": 0.0, "YYYYY": q}
    if relation == "REL4":
        p, q, r = params
        return {"XXXXX": p, "XXXXY": q, "XXXYY": bx3, "XXYXY": r,
                "XXYYY": bx2y, "XYXYY": bx2y, "XYYYY": bx, "YYYYY": by}
    raise ValueError(f"unknown relation {relation}")


def build_B3(relation: str, seq: MomentSequence, params) -> np.ndarray:
    """The 7x8 block of degree-(2,3) moments with RG-derived degree-5 values."""
    deg5 = degree5_moments(relation, seq, params)
    B3 = np.empty((7, 8))
    for i, u in enumerate(BASIS2):
        for j, v in enumerate(DEG3_COLS):
            w = canonical_word(u[::-1] + v)
            B3[i, j] = deg5[w] if len(w) == 5 else seq[w]
    return B3


def compute_C3(seq: MomentSequence, B3: np.ndarray, relation: str,
               cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """C3 = W1' M2|_M1 W1 with W1 solving M2|_M1 W1 = B3|_M1.

    Independent of the particular solve: any W with the same product gives
    the same congruence.
    """
    M2 = build_moment_matrix(seq)
    idx = list(_M1_INDEX[relation])
    A = M2[np.ix_(idx, idx)]
    rhs = B3[idx, :]
    try:
        W1 = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        W1 = np.linalg.lstsq(A, rhs, rcond=None)[0]
    scale = max(np.abs(A).max(), np.abs(rhs).max(initial=0.0), 1.0)
    if np.abs(A @ W1 - rhs).max() > 1e-6 * scale:
        raise ValueError("principal block M2|_M1 is singular")
    C3 = rhs.T @ W1
    return 0.5 * (C3 + C3.T)


def _c(C: np.ndarray, i: int, j: int) -> float:
    return float(C[i - 1, j - 1])


def hankel_residuals(C3: np.ndarray, relation: str,
                     seq: MomentSequence | None = None) -> list[tuple[str, float]]:
    """The relation-specific equalities a flat moment extension must satisfy."""
    C = C3
    if relation in ("REL1", "REL2"):
        pairs = [("C47-C66", _c(C, 4, 7) - _c(C, 6, 6)),
                 ("C25-C33", _c(C, 2, 5) - _c(C, 3, 3)),
                 ("C12-C13", _c(C, 1, 2) - _c(C, 1, 3)),
                 ("C16-C23", _c(C, 1, 6) - _c(C, 2, 3)),
                 ("C48-C68", _c(C, 4, 8) - _c(C, 6, 8)),
                 ("C14-C22", _c(C, 1, 4) - _c(C, 2, 2)),
                 ("C28-C44", _c(C, 2, 8) - _c(C, 4, 4)),
                 ("C26-C27", _c(C, 2, 6) - _c(C, 2, 7))]
        return pairs
    if relation == "REL3":
        return [("C12", _c(C, 1, 2)),
                ("C13", _c(C, 1, 3)),
                ("C18-C24", _c(C, 1, 8) - _c(C, 2, 4)),
                ("C16-C23", _c(C, 1, 6) - _c(C, 2, 3)),
                ("C38-C46", _c(C, 3, 8) - _c(C, 4, 6)),
                ("C48", _c(C, 4, 8)),
                ("C68", _c(C, 6, 8)),
                ("C14-C22", _c(C, 1, 4) - _c(C, 2, 2)),
                ("C28-C44", _c(C, 2, 8) - _c(C, 4, 4)),
                ("C26-C27", _c(C, 2, 6) - _c(C, 2, 7)),
                ("C27-C34", _c(C, 2, 7) - _c(C, 3, 4))]
    if relation == "REL4":
        if seq is None:
            raise ValueError("the Y^2 = 1 system needs the degree-4 moments")
        return [("C66-bX2", _c(C, 6, 6) - seq["XX"]),
                ("C25-C33", _c(C, 2, 5) - _c(C, 3, 3)),
                ("C12-C13", _c(C, 1, 2) - _c(C, 1, 3)),
                ("C16-C23", _c(C, 1, 6) - _c(C, 2, 3)),
                ("C22-bX4", _c(C, 2, 2) - seq["XXXX"]),
                ("C26-bXYXY", _c(C, 2, 6) - seq["XYXY"]),
                ("bXYXY-bX3Y", seq["XYXY"] - seq["XXXY"])]
    raise ValueError(f"unknown relation {relation}")


#: identities that hold for any flat extension, moment structure or not
AUTO_IDENTITIES = (
    ("C12=C15", (1, 2), (1, 5)), ("C24=C57", (2, 4), (5, 7)),
    ("C23=C35", (2, 3), (3, 5)), ("C46=C67", (4, 6), (6, 7)),
    ("C48=C78", (4, 8), (7, 8)), ("C14=C17", (1, 4), (1, 7)),
    ("C22=C55", (2, 2), (5, 5)), ("C28=C58", (2, 8), (5, 8)),
    ("C44=C77", (4, 4), (7, 7)), ("C26=C56", (2, 6), (5, 6)),
    ("C27=C45", (2, 7), (4, 5)), ("C34=C37", (3, 4), (3, 7)),
)


def auto_identity_residuals(C3: np.ndarray) -> list[tuple[str, float]]:
    return [(name, _c(C3, *ij) - _c(C3, *kl)) for name, ij, kl in AUTO_IDENTITIES]


@dataclass
class FlatResult:
    relation: str
    feasible: bool
    params: tuple[float, ...]
    residuals: list[tuple[str, float]]
    objective: float
    M3: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def assemble_M3(seq: MomentSequence, relation: str, params,
                cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """[[M2, B3], [B3', C3]] for the given parameters (flat by construction)."""
    M2 = build_moment_matrix(seq)
    B3 = build_B3(relation, seq, params)
    C3 = compute_C3(seq, B3, relation, cfg)
    top = np.hstack([M2, B3])
    bottom = np.hstack([B3.T, C3])
    return np.vstack([top, bottom])


def flat_search(seq: MomentSequence, relation: str,
                residual_tol: float = 1e-8,
                cfg: ToleranceConfig = DEFAULT_TOL) -> FlatResult:
    """Minimize the Hankel residuals over the free degree-5 parameters.

    Feasibility (every equality within ``residual_tol``) certifies that M2
    admits a flat extension to a degree-3 moment matrix, hence a measure.
    """
    seq, _ = seq.normalized()
    n = n_parameters(relation)

    def residual_vector(params):
        B3 = build_B3(relation, seq, params)
        C3 = compute_C3(seq, B3, relation, cfg)
        return np.array([v for _, v in hankel_residuals(C3, relation, seq)])

    scale = max(abs(v) for v in seq.moments().values())
    starts = list(itertools.product((-scale, 0.0, scale), repeat=n))
    best = None
    for start in starts:
        out = least_squares(residual_vector, np.asarray(start, dtype=float),
                            method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or out.cost < best.cost:
            best = out
    params = tuple(float(v) for v in best.x)
    B3 = build_B3(relation, seq, params)
    C3 = compute_C3(seq, B3, relation, cfg)
    residuals = hankel_residuals(C3, relation, seq)
    feasible = all(abs(v) <= residual_tol for _, v in residuals)
    diagnostics: dict = {"starts": len(starts)}
    M3 = None
    if feasible:
        M3 = assemble_M3(seq, relation, params, cfg)
        M2 = build_moment_matrix(seq)
        # flatness requires B3 to lie in the range of M2 on all rows
        idx = list(_M1_INDEX[relation])
        W1 = np.linalg.solve(M2[np.ix_(idx, idx)], B3[idx, :])
        Wfull = np.zeros((7, 8))
        Wfull[idx, :] = W1
        range_residual = float(np.abs(M2 @ Wfull - B3).max())
        diagnostics["range_residual"] = range_residual
        ok, margin = is_psd(M3, cfg)
        diagnostics["M3_psd_margin"] = margin
        diagnostics["M3_rank"] = numerical_rank(M3, cfg)
        if range_residual > 1e-7 or not ok:
            feasible = False
            M3 = None
    return FlatResult(relation=relation, feasible=feasible, params=params,
                      residuals=residuals,
                      objective=float(2 * best.cost),
                      M3=M3, diagnostics=diagnostics)
