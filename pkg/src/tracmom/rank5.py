"""Complete solution of the four rank-5 basic cases.

Each case pairs XY + YX = 0 with a second relation (circle, Y^2 = 1,
hyperbola, or equal squares).  Existence is decided by subtracting the forced
size-1 atomic matrices and checking the residual; construction removes the
largest admissible multiple of a symmetric point pair (or the origin atom)
until the rank drops to 4, where the single size-2 atom takes over.

The solver snaps the input onto the case's exact matrix form (determined by
the free moments) before making rank decisions, which keeps boundary
classifications stable; the final measure is always validated against the
sequence that was actually passed in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    RankDropError,
    ToleranceConfig,
    is_psd,
    numerical_rank,
    smallest_rank_drop_alpha,
)
from .moments import (
    Atom,
    Measure,
    MomentSequence,
    build_moment_matrix,
    point_moment_matrix,
    reconstruction_error,
    sequence_from_matrix,
)
from .rank4 import solve_rank4
from .transforms import ReductionError

CASES = ("BC1", "BC2", "BC3", "BC4")

#: second relation of each basic case (the first is always XY + YX = 0)
CASE_RELATIONS = {
    "BC1": "X2+Y2=1",
    "BC2": "Y2=1",
    "BC3": "Y2-X2=1",
    "BC4": "Y2=X2",
}


@dataclass
class Rank5Report:
    exists: bool
    case: str
    measure: Measure | None = None
    minimal_type: tuple[int, ...] | None = None
    uniqueness: str = "not-classified"
    alpha0: float | None = None
    reconstruction_error: float | None = None
    alternative_measure: Measure | None = None
    diagnostics: dict = field(default_factory=dict)


def synthesize_case_sequence(case: str, bx: float, by: float, bx2: float,
                             bx4: float, bx3: float = 0.0) -> MomentSequence:
    """The full degree-4 sequence of a basic case from its free moments."""
    if case == "BC1":
        entries = dict(X=bx, Y=by, XX=bx2, YY=1 - bx2, XXX=bx, YYY=by,
                       XXXX=bx4, XXYY=bx2 - bx4, XYXY=bx4 - bx2,
                       YYYY=1 - 2 * bx2 + bx4)
    elif case == "BC2":
        entries = dict(X=0.0, Y=by, XX=bx2, YY=1.0, XXX=bx3, YYY=by,
                       XXXX=bx4, XXYY=bx2, XYXY=-bx2, YYYY=1.0)
    elif case == "BC3":
        entries = dict(X=bx, Y=by, XX=bx2, YY=1 + bx2, XXX=-bx, YYY=by,
                       XXXX=bx4, XXYY=bx2 + bx4, XYXY=-(bx2 + bx4),
                       YYYY=1 + 2 * bx2 + bx4)
    elif case == "BC4":
        entries = dict(X=bx, Y=by, XX=bx2, YY=bx2, XXX=0.0, YYY=0.0,
                       XXXX=bx4, XXYY=bx4, XYXY=-bx4, YYYY=bx4)
    else:
        raise ValueError(f"unknown case {case}")
    full = {"1": 1.0, "XY": 0.0, "XXY": 0.0, "XYY": 0.0, "XXXY": 0.0,
            "XYYY": 0.0}
    full.update(entries)
    return MomentSequence(full)


def snap_to_case(case: str, seq: MomentSequence, tol: float = 1e-6):
    """Project onto the case's exact form; returns (params, snapped, deviation)."""
    seq, _ = seq.normalized()
    params = dict(bx=seq["X"], by=seq["Y"], bx2=seq["XX"], bx4=seq["XXXX"],
                  bx3=seq["XXX"])
    snapped = synthesize_case_sequence(case, **params)
    deviation = max(abs(seq[w] - snapped[w]) for w in seq.moments())
    if deviation > tol:
        raise ReductionError(
            f"sequence is not in {case} form (deviation {deviation:.3g})")
    return params, snapped, deviation


def psd_conditions_rank5(case: str, seq: MomentSequence) -> tuple[bool, dict]:
    """Closed-form PSD characterization of each basic case.

    Returns (ok, details); details maps each inequality to its margin.
    """
    seq, _ = seq.normalized()
    bx, by = seq["X"], seq["Y"]
    bx2, bx3, bx4 = seq["XX"], seq["XXX"], seq["XXXX"]
    details: dict[str, float] = {}

    def add(name: str, margin: float):
        details[name] = float(margin)

    if case == "BC1":
        add("|bx| < bx2", bx2 - abs(bx))
        add("bx2 < 1", 1 - bx2)
        add("|by| < 1 - bx2", (1 - bx2) - abs(by))
        num = (-bx2**3 + bx2**4 - bx**2 + by**2 * bx**2
               + 3 * bx2 * bx**2 - 2 * bx2**2 * bx**2)
        den = -bx2 + by**2 * bx2 + bx2**2 + bx**2 - bx2 * bx**2
        c = num / den if den != 0 else np.inf
        add("c < bx4", bx4 - c)
        add("bx4 < bx2", bx2 - bx4)
    elif case == "BC2":
        add("bx2 > 0", bx2)
        add("|by| < 1", 1 - abs(by))
        den = (1 - by**2) * bx2
        c = (bx2**3 + bx3**2 - by**2 * bx3**2) / den if den != 0 else np.inf
        add("c < bx4", bx4 - c)
    elif case == "BC3":
        add("bx2 > 0", bx2)
        add("|bx| < sqrt(bx2)", np.sqrt(max(bx2, 0.0)) - abs(bx))
        inner = (1 + bx2) * (bx2 - bx**2) / bx2 if bx2 > 0 else -np.inf
        c = np.sqrt(inner) if inner > 0 else -np.inf
        add("|by| < c", c - abs(by))
        den = (1 + bx2) * (bx2 - bx**2) - by**2 * bx2
        num = (bx2**3 + bx2**4 + bx**2 - by**2 * bx**2
               + 3 * bx2 * bx**2 + 2 * bx2**2 * bx**2)
        d = num / den if den > 0 else np.inf
        add("d < bx4", bx4 - d)
    elif case == "BC4":
        add("bx2 > 0", bx2)
        add("|bx| < sqrt(bx2)", np.sqrt(max(bx2, 0.0)) - abs(bx))
        add("|by| < sqrt(bx2 - bx^2)", np.sqrt(max(bx2 - bx**2, 0.0)) - abs(by))
        den = bx2 - by**2 - bx**2
        bound = bx2**3 / den if den > 0 else np.inf
        add("bx2^3/(bx2-by^2-bx^2) < bx4", bx4 - bound)
    else:
        raise ValueError(f"unknown case {case}")
    ok = all(margin > 0 for margin in details.values())
    return ok, details


def _sign(value: float) -> float:
    # tie-break convention: sign(0) = +
    return 1.0 if value >= 0 else -1.0


def _merged_points(point_atoms: list[tuple[float, float, float]]):
    merged: dict[tuple[float, float], float] = {}
    for x, y, lam in point_atoms:
        if lam <= 1e-12:
            continue
        key = (round(x, 12), round(y, 12))
        merged[key] = merged.get(key, 0.0) + lam
    return [Atom.point(x, y, lam) for (x, y), lam in merged.items()]


def _finish_with_rank4(R2: np.ndarray, point_atoms, cfg):
    """Solve the rank-4 residual and assemble the atom list."""
    mass = R2[0, 0]
    if mass <= 0:
        raise ReductionError("rank-4 residual lost all mass")
    seq_res = sequence_from_matrix(R2 / mass)
    rep4 = solve_rank4(seq_res, cfg)
    if not rep4.exists:
        raise ReductionError(
            f"rank-4 residual unexpectedly fails: {rep4.diagnostics}")
    size2 = Atom(rep4.atom.A, rep4.atom.B, mass)
    return _merged_points(point_atoms) + [size2]


def _attempt_measure(M: np.ndarray, forced: list[tuple[float, float, float]],
                     pair: list[tuple[float, float]], cfg):
    """Subtract forced size-1 matrices, then drop rank along the given pair.

    Returns (atoms, alpha, rank_after_forced) or an obstruction string.
    """
    A = np.zeros((7, 7))
    for x, y, lam in forced:
        A += lam * point_moment_matrix(x, y)
    R = M - A
    ok, margin = is_psd(R, cfg)
    if not ok:
        return f"residual after forced atoms not PSD (margin {margin:.3g})", None, None
    block = R[np.ix_([0, 1, 2, 4], [0, 1, 2, 4])]
    low = float(np.linalg.eigvalsh(block).min())
    if low <= cfg.psd_tol * max(np.abs(block).max(), 1.0):
        return (f"columns 1, X, Y, XY of the residual are not positive definite "
                f"(margin {low:.3g})"), None, None
    r = numerical_rank(R, cfg)
    if r == 4:
        atoms = _finish_with_rank4(R, forced, cfg)
        return None, atoms, 4
    D = sum(point_moment_matrix(x, y) for x, y in pair)
    try:
        drop = smallest_rank_drop_alpha(R, D, cfg)
    except RankDropError as err:
        return f"rank drop failed: {err}", None, None
    points = list(forced) + [(x, y, drop.alpha) for x, y in pair]
    atoms = _finish_with_rank4(drop.residual, points, cfg)
    return None, atoms, 5, drop.alpha


def solve_rank5(case: str, seq: MomentSequence,
                cfg: ToleranceConfig = DEFAULT_TOL) -> Rank5Report:
    """Decide existence and construct the minimal measure for a basic case."""
    if case not in CASES:
        raise ValueError(f"unknown case {case}")
    seq, _ = seq.normalized()
    params, snapped, deviation = snap_to_case(case, seq)
    bx, by, bx3 = params["bx"], params["by"], params["bx3"]
    M = build_moment_matrix(snapped)
    diagnostics: dict = {"case": case, "snap_deviation": deviation}
    psd_ok, psd_details = psd_conditions_rank5(case, snapped)
    eig_ok, eig_margin = is_psd(M, cfg)
    diagnostics["psd_conditions"] = psd_details
    diagnostics["psd_margin"] = eig_margin
    if not eig_ok or numerical_rank(M, cfg) != 5:
        return Rank5Report(
            exists=False, case=case, diagnostics=dict(
                diagnostics, reason="moment matrix not PSD of rank 5"))

    ztol = 100 * cfg.match_tol
    # case-specific vanishing-moment requirements (necessary for a measure)
    required_zero = {"BC1": {}, "BC2": {"beta_X3": bx3},
                     "BC3": {"beta_X": bx}, "BC4": {"beta_X": bx, "beta_Y": by}}
    for name, value in required_zero[case].items():
        if abs(value) > ztol:
            return Rank5Report(
                exists=False, case=case, diagnostics=dict(
                    diagnostics,
                    reason=f"{name} = {value:.3g} must vanish for a measure"))

    sx, sy = _sign(bx), _sign(by)
    if case == "BC1":
        forced = [(sx, 0.0, abs(bx)), (0.0, sy, abs(by))]
        pair_x, pair_y = [(1.0, 0.0), (-1.0, 0.0)], [(0.0, 1.0), (0.0, -1.0)]
        if abs(bx) <= ztol and abs(by) > ztol:
            primary, secondary = pair_y, None
        elif abs(by) <= ztol and abs(bx) > ztol:
            primary, secondary = pair_x, None
        else:
            # both zero or both nonzero: two minimal measures, emit the
            # (+-1, 0)-based one and report the (0, +-1)-based alternative
            primary, secondary = pair_x, pair_y
    elif case in ("BC2", "BC3"):
        forced = [(0.0, sy, abs(by))]
        primary, secondary = [(0.0, 1.0), (0.0, -1.0)], None
    else:  # BC4
        forced = []
        primary, secondary = [(0.0, 0.0)], None
    forced = [(x, y, lam) for x, y, lam in forced if lam > ztol]

    outcome = _attempt_measure(M, forced, primary, cfg)
    if outcome[0] is not None:
        return Rank5Report(exists=False, case=case,
                           diagnostics=dict(diagnostics, reason=outcome[0]))
    atoms, rank_forced = outcome[1], outcome[2]
    alpha = outcome[3] if len(outcome) > 3 else None

    measure = Measure(atoms)
    err = reconstruction_error(snapped, measure)
    err_input = reconstruction_error(seq, measure)
    if err > cfg.match_tol:
        raise ReductionError(f"rank-5 reconstruction failed ({err:.3g})")

    n_zero = (abs(bx) <= ztol, abs(by) <= ztol)
    if case == "BC1":
        if rank_forced == 4:
            uniq = "unique"
        elif all(n_zero) or not any(n_zero):
            uniq = "two-measures"
        else:
            uniq = "unique"
    else:
        uniq = "unique"

    alternative = None
    if case == "BC1" and secondary is not None and rank_forced == 5:
        alt = _attempt_measure(M, forced, secondary, cfg)
        if alt[0] is None:
            alternative = Measure(alt[1])
            diagnostics["alternative_measure"] = alternative.to_json()

    diagnostics["rank_after_forced_atoms"] = rank_forced
    return Rank5Report(
        exists=True, case=case, measure=measure, minimal_type=measure.type,
        uniqueness=uniq, alpha0=alpha,
        reconstruction_error=max(err, err_input),
        alternative_measure=alternative, diagnostics=diagnostics)
