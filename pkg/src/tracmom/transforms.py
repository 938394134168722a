"""Affine changes of variables on sequences and the canonical-case reductions.

An invertible map phi(x, y) = (a + b*x + c*y, d + e*x + f*y) acts on a
sequence by precomposition of the Riesz functional; it preserves rank and PSD
of the moment matrix, and representing measures of the image pull back to
representing measures of the original through the inverse map.

The reductions drive a rank-5 matrix onto XY+YX = 0 plus one of four second
relations (basic cases 1-4), and a rank-6 matrix onto a single canonical
relation (basic relations 1-4).  Each step re-extracts the current column
relations from the transformed matrix, which keeps the case analysis stable
against tolerance-level noise.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .linalg import (
    CANONICAL_SHAPES,
    DEFAULT_TOL,
    ToleranceConfig,
    is_psd,
    numerical_rank,
    relation_holds,
)
from .moments import Atom, Measure, MomentSequence, build_moment_matrix
from .words import ONE, canonical_words

_SHAPE_TOL = 1e-7
_COEF_TOL = 1e-7


class ReductionError(RuntimeError):
    """Input is inconsistent with the declared rank/PSD structure."""


class MeasureObstruction(RuntimeError):
    """A necessary condition for a representing measure fails."""

    def __init__(self, condition: str, message: str | None = None):
        super().__init__(message or f"no measure: condition {condition} violated")
        self.condition = condition


@dataclass(frozen=True)
class AffineMap:
    """phi(x, y) = (a + b*x + c*y, d + e*x + f*y) with b*f - c*e != 0."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def __post_init__(self):
        if abs(self.det) <= 1e-14 * max(1.0, abs(self.b), abs(self.c),
                                        abs(self.e), abs(self.f)):
            raise ValueError(f"singular affine map: {self}")

    @property
    def det(self) -> float:
        return self.b * self.f - self.c * self.e

    @staticmethod
    def identity() -> "AffineMap":
        return AffineMap(0, 1, 0, 0, 0, 1)

    @staticmethod
    def shift(dx: float, dy: float) -> "AffineMap":
        """(x + dx, y + dy)"""
        return AffineMap(dx, 1, 0, dy, 0, 1)

    @staticmethod
    def scale(sx: float, sy: float) -> "AffineMap":
        return AffineMap(0, sx, 0, 0, 0, sy)

    @staticmethod
    def swap() -> "AffineMap":
        return AffineMap(0, 0, 1, 0, 1, 0)

    def is_identity(self, tol: float = 1e-14) -> bool:
        return (abs(self.a) <= tol and abs(self.b - 1) <= tol and abs(self.c) <= tol
                and abs(self.d) <= tol and abs(self.e) <= tol and abs(self.f - 1) <= tol)

    def inverse(self) -> "AffineMap":
        det = self.det
        return AffineMap(
            (self.c * self.d - self.f * self.a) / det, self.f / det, -self.c / det,
            (self.e * self.a - self.b * self.d) / det, -self.e / det, self.b / det)

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self o inner"""
        u0, u1 = inner.apply_point(0.0, 0.0)
        bx, ex = (v - w for v, w in zip(inner.apply_point(1.0, 0.0), (u0, u1)))
        cy, fy = (v - w for v, w in zip(inner.apply_point(0.0, 1.0), (u0, u1)))
        return AffineMap(self.a + self.b * u0 + self.c * u1,
                         self.b * bx + self.c * ex,
                         self.b * cy + self.c * fy,
                         self.d + self.e * u0 + self.f * u1,
                         self.e * bx + self.f * ex,
                         self.e * cy + self.f * fy)

    def apply_point(self, x: float, y: float) -> tuple[float, float]:
        return (self.a + self.b * x + self.c * y, self.d + self.e * x + self.f * y)

    def apply_atom(self, A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        I = np.eye(A.shape[0])
        return (self.a * I + self.b * A + self.c * B,
                self.d * I + self.e * A + self.f * B)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in "abcdef"}

    @staticmethod
    def from_json(obj: dict) -> "AffineMap":
        return AffineMap(*(float(obj[k]) for k in "abcdef"))


def apply_affine(seq: MomentSequence, phi: AffineMap,
                 check: bool = False, cfg: ToleranceConfig = DEFAULT_TOL) -> MomentSequence:
    """Sequence of the pushed-forward measure: beta'_w = L_beta(w o phi).

    Each word w(phi_1, phi_2) is expanded as a noncommutative polynomial of
    the same degree and fed to the Riesz functional.
    """
    forms = {
        "X": ((ONE, phi.a), ("X", phi.b), ("Y", phi.c)),
        "Y": ((ONE, phi.d), ("X", phi.e), ("Y", phi.f)),
    }
    entries: dict[str, float] = {}
    for w in canonical_words(seq.degree):
        poly: dict[str, float] = {ONE: 1.0}
        for ch in w:
            nxt: dict[str, float] = defaultdict(float)
            for u, cu in poly.items():
                for v, cv in forms[ch]:
                    if cv != 0.0:
                        nxt[u + v] += cu * cv
            poly = nxt
        entries[w] = seq.riesz(poly)
    out = MomentSequence(entries, seq.degree)
    if check:
        M0 = build_moment_matrix(seq)
        M1 = build_moment_matrix(out)
        if numerical_rank(M0, cfg) != numerical_rank(M1, cfg):
            raise ReductionError("affine map failed to preserve rank")
        if is_psd(M0, cfg)[0] != is_psd(M1, cfg)[0]:
            raise ReductionError("affine map failed to preserve PSD")
    return out


@dataclass
class TransformChain:
    """Ordered affine maps applied to a sequence, with the reached case label."""

    maps: tuple[AffineMap, ...] = ()
    target_case: str = ""

    def __post_init__(self):
        self.maps = tuple(self.maps)

    def apply(self, seq: MomentSequence) -> MomentSequence:
        for phi in self.maps:
            seq = apply_affine(seq, phi)
        return seq

    def total_map(self) -> AffineMap:
        total = AffineMap.identity()
        for phi in self.maps:
            total = phi.compose(total)
        return total

    def pull_back_atom(self, atom: Atom) -> Atom:
        A, B = atom.A, atom.B
        for phi in reversed(self.maps):
            A, B = phi.inverse().apply_atom(A, B)
        return Atom(A, B, atom.density)

    def to_json(self) -> dict:
        return {"maps": [m.to_json() for m in self.maps],
                "target_case": self.target_case}

    @staticmethod
    def from_json(obj: dict) -> "TransformChain":
        return TransformChain(tuple(AffineMap.from_json(m) for m in obj["maps"]),
                              obj.get("target_case", ""))


def pull_back_measure(mu: Measure, chain: TransformChain) -> Measure:
    """Measure of the original sequence from a measure of a transformed one.

    Applies the composed inverse map entrywise to every atom's matrix pair;
    densities are unchanged.
    """
    return Measure([chain.pull_back_atom(a) for a in mu.atoms])


# ---------------------------------------------------------------------------
# column-relation extraction

_Y2_DESIGN_COLS = (0, 1, 2, 3, "XY+YX")  # 1, X, Y, X^2, merged anticommutator


def _design(M: np.ndarray, cols) -> np.ndarray:
    out = []
    for c in cols:
        out.append(M[:, 4] + M[:, 5] if c == "XY+YX" else M[:, c])
    return np.column_stack(out)


def _expand_column(M: np.ndarray, target: int, cols, tol: float = 1e-6):
    """Least-squares coefficients of column ``target`` over design columns.

    Returns None when the residual shows the column is not in the span.
    """
    D = _design(M, cols)
    rhs = M[:, target]
    coeffs, *_ = np.linalg.lstsq(D, rhs, rcond=None)
    scale = max(np.abs(M).max(initial=0.0), 1e-300)
    if np.linalg.norm(D @ coeffs - rhs) > tol * scale:
        return None
    return coeffs


def _columns_independent(M: np.ndarray, cols, cfg: ToleranceConfig) -> bool:
    block = M[np.ix_(cols, cols)]
    return numerical_rank(block, cfg) == len(cols)


# ---------------------------------------------------------------------------
# reducers

class _Reducer:
    def __init__(self, seq: MomentSequence, cfg: ToleranceConfig):
        self.seq = seq
        self.cfg = cfg
        self.maps: list[AffineMap] = []
        self._matrix: np.ndarray | None = None

    @property
    def M(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = build_moment_matrix(self.seq)
        return self._matrix

    def apply(self, phi: AffineMap):
        if phi.is_identity():
            return
        self.seq = apply_affine(self.seq, phi)
        self.maps.append(phi)
        self._matrix = None

    def chain(self, target: str) -> TransformChain:
        return TransformChain(tuple(self.maps), target)


def _sqrt_positive(value: float, label: str) -> float:
    if value <= _COEF_TOL:
        raise ReductionError(
            f"constant {label} must be positive, got {value:.6g}; "
            "input inconsistent with the declared structure")
    return float(np.sqrt(value))


def _extract_y2(red: _Reducer):
    """Coefficients (a1, a2, a3, a4, a5) of Y^2 = a1+a2 X+a3 Y+a4 X^2+a5(XY+YX).

    The expansion over {1, X, Y, X^2, XY} is tried first: at rank 5 those
    columns are an independent basis, so the coefficients are unique and row
    symmetry forces the XY coefficient to vanish.  Rank-6 relations genuinely
    involve XY+YX and are picked up by the merged regressor instead.
    """
    M = red.M
    plain = _expand_column(M, 6, (0, 1, 2, 3, 4))
    if plain is not None:
        a1, a2, a3, a4, a5xy = plain
        if abs(a5xy) <= _COEF_TOL * (1.0 + float(np.abs(plain).max())):
            return np.array([a1, a2, a3, a4, 0.0])
    merged = _expand_column(M, 6, _Y2_DESIGN_COLS)
    return merged


def _reduce_y2(red: _Reducer) -> str:
    """Drive a Y^2-type relation to one of Y2=1-X2 / Y2=1 / Y2=1+X2 / Y2=X2."""
    targets = (("Y2=1-X2", CANONICAL_SHAPES["X2+Y2=1"]),
               ("Y2=1", CANONICAL_SHAPES["Y2=1"]),
               ("Y2=1+X2", CANONICAL_SHAPES["Y2-X2=1"]),
               ("Y2=X2", CANONICAL_SHAPES["Y2=X2"]))
    for _ in range(12):
        M = red.M
        for name, coeffs in targets:
            if relation_holds(M, coeffs, _SHAPE_TOL):
                return name
        rel = _extract_y2(red)
        if rel is None:
            raise ReductionError("Y^2 is not a combination of 1, X, Y, X^2, XY+YX")
        a1, a2, a3, a4, a5 = rel
        ztol = _COEF_TOL * (1.0 + float(np.abs(rel).max()))
        if abs(a5) > ztol:
            red.apply(AffineMap(0, 1, 0, 0, -a5, 1))  # (x, y - a5*x)
            continue
        if a4 < -ztol:
            # completing the square leaves Y^2 = -X^2 + C1 with
            # C1 = a1 + a3^2/4 - a2^2/(4 a4), positive by the PSD rank argument
            c1 = a1 + a3 * a3 / 4.0 - a2 * a2 / (4.0 * a4)
            s = _sqrt_positive(-a4, "-a4")
            red.apply(AffineMap(-a2 / (2 * s), s, 0, -a3 / 2.0, 0, 1))
            root = _sqrt_positive(c1, "C1")
            red.apply(AffineMap.scale(1.0 / root, 1.0 / root))
        elif a4 > ztol:
            c3 = a1 + a3 * a3 / 4.0 - a2 * a2 / (4.0 * a4)
            s = _sqrt_positive(a4, "a4")
            red.apply(AffineMap(a2 / (2 * s), s, 0, -a3 / 2.0, 0, 1))
            if c3 > ztol:
                root = float(np.sqrt(c3))
                red.apply(AffineMap.scale(1.0 / root, 1.0 / root))
            elif c3 < -ztol:
                red.apply(AffineMap.swap())
            # |c3| <= ztol: relation is already Y^2 = X^2
        else:
            if abs(a2) > 10 * ztol:
                raise MeasureObstruction(
                    "a2=0", "no measure: linear X term in a constant Y^2 relation "
                    "contradicts recursive generation")
            c2 = a1 + a3 * a3 / 4.0
            root = _sqrt_positive(c2, "C2")
            red.apply(AffineMap(0, 1, 0, -a3 / 2.0, 0, 1.0))
            red.apply(AffineMap.scale(1.0, 1.0 / root))
        continue
    raise ReductionError("Y^2 reduction did not converge")


def reduce_rank4(seq: MomentSequence, cfg: ToleranceConfig = DEFAULT_TOL):
    """Chain sending a rank-4 nc matrix onto X^2 = 1, XY+YX = a*1, Y^2 = 1.

    Returns (a, chain, diagnostics).  Raises MeasureObstruction when the
    coefficient conditions necessary for a measure fail, ReductionError when
    the input does not look like a PSD rank-4 nc matrix at all.
    """
    seq, _ = seq.normalized()
    M = build_moment_matrix(seq)
    ok, margin = is_psd(M, cfg)
    if not ok:
        raise MeasureObstruction("M2 PSD", f"moment matrix not PSD (margin {margin:.3g})")
    if numerical_rank(M, cfg) != 4:
        raise ReductionError("expected a rank-4 moment matrix")
    basis = [0, 1, 2, 4]  # 1, X, Y, XY
    if not _columns_independent(M, basis, cfg):
        raise MeasureObstruction("1,X,Y,XY independent",
                                 "no nc measure: columns 1, X, Y, XY are dependent")
    relations = {}
    for name, target in (("X2", 3), ("YX", 5), ("Y2", 6)):
        coeffs = _expand_column(M, target, basis)
        if coeffs is None:
            raise ReductionError(f"column {name} not in the span of 1, X, Y, XY")
        relations[name] = coeffs
    a1, b1, c1, d1 = relations["X2"]
    a2, b2, c2, d2 = relations["YX"]
    a3, b3, c3, d3 = relations["Y2"]
    scale = 1.0 + max(abs(v) for r in relations.values() for v in r)
    ctol = 100 * cfg.match_tol * scale
    if abs(d1) > ctol or abs(d3) > ctol or abs(d2 + 1) > ctol:
        raise ReductionError("X^2/Y^2/YX relations violate row symmetry")
    for cond, value in (("c1=0", c1), ("b3=0", b3), ("b2=c3", b2 - c3),
                        ("c2=b1", c2 - b1)):
        if abs(value) > ctol:
            raise MeasureObstruction(cond, f"no measure: {cond} fails by {value:.3g}")
    s1 = _sqrt_positive(a1 + b1 * b1 / 4.0, "a1+b1^2/4")
    s2 = _sqrt_positive(a3 + c3 * c3 / 4.0, "a3+c3^2/4")
    a = (4 * a2 + 2 * b1 * c3) / np.sqrt((4 * a1 + b1 * b1) * (4 * a3 + c3 * c3))
    if abs(a) >= 2.0:
        raise MeasureObstruction("a in (-2,2)",
                                 f"canonical parameter a={a:.6g} outside (-2, 2)")
    red = _Reducer(seq, cfg)
    red.apply(AffineMap.shift(-b1 / 2.0, -c3 / 2.0))
    red.apply(AffineMap.scale(1.0 / s1, 1.0 / s2))
    diag = {"a": float(a), "psd_margin": margin}
    if 2.0 - abs(a) < 1e-6:
        diag["boundary_warning"] = f"a within {2.0 - abs(a):.2e} of +-2"
    return float(a), red.chain("RANK4"), diag


_RANK5_CASES = (
    ("BC1", CANONICAL_SHAPES["X2+Y2=1"]),
    ("BC2", CANONICAL_SHAPES["Y2=1"]),
    ("BC3", CANONICAL_SHAPES["Y2-X2=1"]),
    ("BC4", CANONICAL_SHAPES["Y2=X2"]),
)


def _rank5_terminal(M: np.ndarray) -> str | None:
    if not relation_holds(M, CANONICAL_SHAPES["XY+YX=0"], _SHAPE_TOL):
        return None
    for name, coeffs in _RANK5_CASES:
        if relation_holds(M, coeffs, _SHAPE_TOL):
            return name
    return None


def _extract_anticommutator(M: np.ndarray):
    """Coefficients (a, b, c, d) of XY + YX = a*1 + b*X + c*Y + d*X^2."""
    D = _design(M, (0, 1, 2, 3))
    rhs = M[:, 4] + M[:, 5]
    coeffs, *_ = np.linalg.lstsq(D, rhs, rcond=None)
    scale = max(np.abs(M).max(initial=0.0), 1e-300)
    if np.linalg.norm(D @ coeffs - rhs) > 1e-6 * scale:
        return None
    return coeffs


def _one_x2_y2_null(M: np.ndarray, cfg: ToleranceConfig):
    """Null combination u*1 + v*X^2 + w*Y^2 = 0 among columns {1, X^2, Y^2}."""
    block = M[:, [0, 3, 6]]
    _, sing, Vt = np.linalg.svd(block, full_matrices=False)
    if sing[-1] > 1e-7 * max(sing[0], 1e-300):
        return None
    return Vt[-1]


def reduce_rank5(seq: MomentSequence, cfg: ToleranceConfig = DEFAULT_TOL):
    """Chain sending a PSD rank-5 nc matrix onto one of the basic cases.

    Returns (case, chain) with case in {"BC1", "BC2", "BC3", "BC4"}.
    """
    seq, _ = seq.normalized()
    M = build_moment_matrix(seq)
    ok, margin = is_psd(M, cfg)
    if not ok:
        raise MeasureObstruction("M2 PSD", f"moment matrix not PSD (margin {margin:.3g})")
    if numerical_rank(M, cfg) != 5:
        raise ReductionError("expected a rank-5 moment matrix")
    if not _columns_independent(M, [0, 1, 2, 4], cfg):
        raise MeasureObstruction("1,X,Y,XY independent",
                                 "no nc measure: columns 1, X, Y, XY are dependent")
    red = _Reducer(seq, cfg)
    for _ in range(24):
        M = red.M
        case = _rank5_terminal(M)
        if case:
            return case, red.chain(case)
        if _step_rank5(red):
            continue
        raise ReductionError("rank-5 reduction could not classify the kernel")
    raise ReductionError("rank-5 reduction did not converge")


def _step_rank5(red: _Reducer) -> bool:
    M, cfg = red.M, red.cfg

    # Case 1 structure: X^2 and Y^2 both lie in span{1, X, Y}
    cx = _expand_column(M, 3, (0, 1, 2))
    cy = _expand_column(M, 6, (0, 1, 2))
    if cx is not None and cy is not None:
        a1, b1, c1 = cx
        a2, b2, c2 = cy
        ztol = _COEF_TOL * (1.0 + max(np.abs(cx).max(), np.abs(cy).max()))
        if abs(c1) > 10 * ztol or abs(b2) > 10 * ztol:
            raise MeasureObstruction(
                "c1=b2=0", "no measure: cross-variable terms in constant-square "
                "relations contradict recursive generation")
        s1 = _sqrt_positive(a1 + b1 * b1 / 4.0, "a1+b1^2/4")
        s2 = _sqrt_positive(a2 + c2 * c2 / 4.0, "a2+c2^2/4")
        red.apply(AffineMap.shift(-b1 / 2.0, -c2 / 2.0))
        red.apply(AffineMap.scale(1.0 / s1, 1.0 / s2))
        red.apply(AffineMap(0, 0.5, 0.5, 0, -0.5, 0.5))  # ((x+y)/2, (y-x)/2)
        return True

    # canonical second relation already present: finish the anticommutator
    if relation_holds(M, CANONICAL_SHAPES["Y2=1"], _SHAPE_TOL):
        return _step_case_y2_is_1(red)
    if relation_holds(M, CANONICAL_SHAPES["X2+Y2=1"], _SHAPE_TOL):
        return _step_case_circle(red)
    if relation_holds(M, CANONICAL_SHAPES["Y2=X2"], _SHAPE_TOL):
        return _step_case_equal_squares(red)
    if relation_holds(M, CANONICAL_SHAPES["Y2-X2=1"], _SHAPE_TOL):
        return _step_case_hyperbola(red)

    # Y^2 = gamma * 1 for gamma != 1: normalize the y scale
    cyc = _expand_column(M, 6, (0,))
    if cyc is not None:
        gamma = float(cyc[0])
        root = _sqrt_positive(gamma, "Y^2 constant")
        red.apply(AffineMap.scale(1.0, 1.0 / root))
        return True

    # after the (x+y, y-x) rotation: a null combination of {1, X^2, Y^2}
    null = _one_x2_y2_null(M, cfg)
    if null is not None and _step_squares_combination(red, null):
        return True

    # generic Case 2: {1, X, Y, X^2, XY} independent, reduce the Y^2 relation
    if _columns_independent(M, [0, 1, 2, 3, 4], cfg) and _extract_y2(red) is not None:
        _reduce_y2(red)
        return True

    # Case 3: swap the variables and retry
    if _columns_independent(M, [0, 1, 2, 6, 5], cfg):
        red.apply(AffineMap.swap())
        return True
    return False


def _require_pure_anticommutator(red: _Reducer):
    """Extract XY+YX = a + b*X + c*Y + d*X^2 and demand b = c = 0."""
    coeffs = _extract_anticommutator(red.M)
    if coeffs is None:
        raise ReductionError("anticommutator not in the span of 1, X, Y, X^2")
    a, b, c, d = coeffs
    ztol = _COEF_TOL * (1.0 + float(np.abs(coeffs).max()))
    if abs(b) > 10 * ztol or abs(c) > 10 * ztol:
        raise MeasureObstruction(
            "b=c=0", "no measure: linear terms in the anticommutator relation "
            "contradict recursive generation")
    return float(a), float(d)


def _step_case_y2_is_1(red: _Reducer) -> bool:
    """Case 2.1: Y^2 = 1 with XY+YX = a + b*X + c*Y + d*X^2."""
    coeffs = _extract_anticommutator(red.M)
    if coeffs is None:
        raise ReductionError("anticommutator not in the span of 1, X, Y, X^2")
    a, b, c, d = coeffs
    ztol = _COEF_TOL * (1.0 + float(np.abs(coeffs).max()))
    if abs(c) > ztol:
        red.apply(AffineMap(-c / 2.0, 1, 0, 0, 0, 1))  # (x - c/2, y)
        return True
    if abs(b) > 10 * ztol:
        raise MeasureObstruction(
            "b4=0", "no measure: linear X term survives in the anticommutator "
            "relation under Y^2 = 1")
    if abs(d) <= ztol:
        red.apply(AffineMap(0, 1, -a / 2.0, 0, 0, 1))  # (x - (a/2) y, y) -> BC2
    else:
        red.apply(AffineMap(0, -1, 1.0 / d, 0, 0, 1))  # ((1/d) y - x, y) -> case 1
    return True


def _step_case_circle(red: _Reducer) -> bool:
    """Case 2.2: X^2 + Y^2 = 1 with XY+YX = a + d*X^2.

    A large d makes the square-completion map badly conditioned, so first
    rotate the circle (an orthogonal change of variables) until the X^2 term
    of the anticommutator relation vanishes: with tan(2*theta) = d/2 the
    relation becomes XY + YX = const.
    """
    a, d = _require_pure_anticommutator(red)
    if abs(d) > 0.5:
        theta = 0.5 * np.arctan2(d / 2.0, 1.0)
        c, s = np.cos(theta), np.sin(theta)
        red.apply(AffineMap(0, c, s, 0, -s, c))
        return True
    alpha = 0.5 * np.sqrt(4.0 + d * d) + d / 2.0
    red.apply(AffineMap(0, 1, 0, 0, np.sqrt(alpha - d), np.sqrt(alpha)))
    return True  # next pass normalizes Y^2 = (alpha + a) * 1


def _step_case_equal_squares(red: _Reducer) -> bool:
    """Case 2.3: Y^2 = X^2; rotate into XY + YX = 0."""
    _require_pure_anticommutator(red)
    red.apply(AffineMap(0, 1, 1, 0, -1, 1))  # (x + y, y - x)
    return True


def _step_case_hyperbola(red: _Reducer) -> bool:
    """Case 2.4: Y^2 - X^2 = 1 with XY+YX = a + d*X^2.

    A pure-constant anticommutator is folded into Y^2 = (1+a^2) X^2 directly
    (the rotation would oscillate between reciprocal constants); otherwise
    rotate and let the squares handler take over.
    """
    a, d = _require_pure_anticommutator(red)
    ztol = _COEF_TOL * (1.0 + abs(a) + abs(d))
    if abs(d) <= ztol and abs(a) > ztol:
        red.apply(AffineMap(0, 1, 0, 0, 1, -a))  # (x, x - a*y)
    else:
        red.apply(AffineMap(0, 1, 1, 0, -1, 1))
    return True


def _step_squares_combination(red: _Reducer, null: np.ndarray) -> bool:
    """Dispatch a relation u*1 + v*X^2 + w*Y^2 = 0 (post-rotation states)."""
    u, v, w = (float(t) for t in null)
    ztol = _COEF_TOL * (1.0 + float(np.abs(null).max()))
    if abs(v) <= ztol and abs(w) <= ztol:
        return False
    if abs(w) > ztol and abs(v) <= ztol:
        gamma = -u / w
        root = _sqrt_positive(gamma, "Y^2 constant")
        red.apply(AffineMap.scale(1.0, 1.0 / root))
        return True
    if abs(v) > ztol and abs(w) <= ztol:
        red.apply(AffineMap.swap())
        return True
    # both squares present: normalize their magnitudes to 1
    red.apply(AffineMap.scale(np.sqrt(abs(v)), np.sqrt(abs(w))))
    # relation becomes sign(v) X^2 + sign(w) Y^2 = -u
    sv, sw = np.sign(v), np.sign(w)
    rhs = -u
    if sv == sw:
        const = rhs / sv
        root = _sqrt_positive(const, "X^2+Y^2 constant")
        red.apply(AffineMap.scale(1.0 / root, 1.0 / root))
        return True
    # opposite signs: arrange Y^2 - X^2 = t with t >= 0
    t = rhs / sw
    if t < -ztol:
        red.apply(AffineMap.swap())
        t = -t
    if t > ztol:
        root = float(np.sqrt(t))
        red.apply(AffineMap.scale(1.0 / root, 1.0 / root))
    return True


_RANK6_RELATIONS = (
    ("REL1", CANONICAL_SHAPES["X2+Y2=1"]),
    ("REL2", CANONICAL_SHAPES["Y2-X2=1"]),
    ("REL3", CANONICAL_SHAPES["XY+YX=0"]),
    ("REL4", CANONICAL_SHAPES["Y2=1"]),
)


def _rank6_terminal(M: np.ndarray) -> str | None:
    for name, coeffs in _RANK6_RELATIONS:
        if relation_holds(M, coeffs, _SHAPE_TOL):
            return name
    return None


def reduce_rank6(seq: MomentSequence, cfg: ToleranceConfig = DEFAULT_TOL):
    """Chain sending a PSD rank-6 nc matrix onto one basic relation.

    Returns (relation, chain) with relation in {"REL1", ..., "REL4"}:
    Y^2 = 1 - X^2, Y^2 = 1 + X^2, XY + YX = 0, Y^2 = 1 respectively.
    """
    seq, _ = seq.normalized()
    M = build_moment_matrix(seq)
    ok, margin = is_psd(M, cfg)
    if not ok:
        raise MeasureObstruction("M2 PSD", f"moment matrix not PSD (margin {margin:.3g})")
    if numerical_rank(M, cfg) != 6:
        raise ReductionError("expected a rank-6 moment matrix")
    if not _columns_independent(M, [0, 1, 2, 4], cfg):
        raise MeasureObstruction("1,X,Y,XY independent",
                                 "no nc measure: columns 1, X, Y, XY are dependent")
    red = _Reducer(seq, cfg)
    for _ in range(16):
        M = red.M
        label = _rank6_terminal(M)
        if label:
            return label, red.chain(label)
        # Y^2 expressible over {1, X, Y, X^2, XY+YX}: run the Y^2 reduction
        if _extract_y2(red) is not None:
            target = _reduce_y2(red)
            if target == "Y2=X2":
                red.apply(AffineMap(0, 1, -1, 0, 1, 1))  # (x - y, x + y) -> XY+YX=0
            continue
        # otherwise {1, X, Y, X^2, XY, Y^2} must be a basis: inspect YX
        coeffs = _expand_column(red.M, 5, (0, 1, 2, 3, 4, 6))
        if coeffs is not None:
            a1, a2, a3, a4, a5, a6 = coeffs
            ztol = _COEF_TOL * (1.0 + float(np.abs(coeffs).max()))
            if abs(a5 + 1.0) > 100 * ztol:
                raise ReductionError("YX relation violates row symmetry")
            if abs(a6) > ztol:
                # rewrite as a Y^2 relation; the next pass picks it up
                raise ReductionError("unexpected: Y^2 relation extraction failed "
                                     "although a6 != 0")
            if abs(a4) > ztol:
                red.apply(AffineMap.swap())
            else:
                red.apply(AffineMap(0, 1, 1, 0, 0, 1))  # (x + y, y)
            continue
        red.apply(AffineMap.swap())
    raise ReductionError("rank-6 reduction did not converge")
