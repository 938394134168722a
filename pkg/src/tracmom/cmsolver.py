"""Restricted commutative quartic moment solver.

Used by the rank-6 machinery: checks PSD, recursive generation, and the
rank-to-variety condition for 6x6 commutative moment matrices carrying at
least one degree-2 column relation, then recovers an atomic measure supported
on the variety.  Finite varieties are enumerated by conic intersection;
infinite components (circles, lines) get quadrature-style candidate nodes
from the data plus an equally spaced fallback grid, and nonnegative densities
come from an active-set nonnegative least squares fit of all 15 moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import nnls

from .linalg import DEFAULT_TOL, ToleranceConfig, is_psd, numerical_rank
from .moments import Atom, MomentSequence

CM_BASIS = ("1", "x", "y", "xx", "xy", "yy")

#: cm monomials of degree <= 4 as (i, j) powers, degree-lexicographic
CM_MONOMIALS = tuple((i - j, j) for i in range(5) for j in range(i + 1))


class CmUnsupported(RuntimeError):
    """The matrix has no degree-2 kernel relation: outside the restricted scope."""


@dataclass
class CmReport:
    admits: bool
    points: list[tuple[float, float, float]] = field(default_factory=list)
    variety_card: float = 0
    residual: float = np.inf
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)

    def atoms(self) -> list[Atom]:
        return [Atom.point(x, y, lam) for x, y, lam in self.points]


def cm_moments_from_sequence(seq: MomentSequence, tol: float = 1e-8) -> dict:
    """Collapse a commutative tracial sequence to cm moments m[(i, j)]."""
    if not seq.is_commutative(tol):
        raise ValueError("sequence is noncommutative")
    return {(i, j): seq["X" * i + "Y" * j] for i, j in CM_MONOMIALS}


def build_cm_matrix(m: dict) -> np.ndarray:
    basis = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    M = np.empty((6, 6))
    for r, (i, j) in enumerate(basis):
        for c, (k, l) in enumerate(basis):
            M[r, c] = m[(i + k, j + l)]
    return M


def moment_vector(m: dict) -> np.ndarray:
    return np.array([m[p] for p in CM_MONOMIALS])


def point_vector(x: float, y: float) -> np.ndarray:
    return np.array([x ** i * y ** j for i, j in CM_MONOMIALS])


def eval_conic(p: np.ndarray, x: float, y: float) -> float:
    c1, cx, cy, cxx, cxy, cyy = p
    return c1 + cx * x + cy * y + cxx * x * x + cxy * x * y + cyy * y * y


# ---------------------------------------------------------------------------
# variety components


@dataclass(frozen=True)
class LineComp:
    point: tuple[float, float]
    direction: tuple[float, float]  # unit vector

    def at(self, t: float) -> tuple[float, float]:
        return (self.point[0] + t * self.direction[0],
                self.point[1] + t * self.direction[1])


@dataclass(frozen=True)
class ConicComp:
    coeffs: tuple[float, ...]  # irreducible conic with infinitely many points
    kind: str                  # circle / ellipse / hyperbola / parabola
    center: tuple[float, float] | None = None
    radius: float | None = None


def classify_conic(p: np.ndarray, tol: float = 1e-9):
    """Real components of Z(p): points, lines, or an irreducible conic.

    Returns a list of components; [] for an empty zero set, None when p is
    (numerically) the zero polynomial.
    """
    p = np.asarray(p, dtype=float)
    scale = np.abs(p).max(initial=0.0)
    if scale <= tol:
        return None
    p = p / scale
    c1, cx, cy, cxx, cxy, cyy = p
    Q = np.array([[cxx, cxy / 2.0], [cxy / 2.0, cyy]])
    L = np.array([cx, cy])
    if np.abs(Q).max() <= tol:
        norm = np.linalg.norm(L)
        if norm <= tol:
            return None if abs(c1) <= tol else []
        p0 = -c1 * L / norm ** 2
        d = np.array([-L[1], L[0]]) / norm
        return [LineComp(tuple(p0), tuple(d))]
    lam, V = np.linalg.eigh(Q)
    if min(abs(lam)) > tol:
        center = np.linalg.solve(2 * Q, -L)
        v = eval_conic(p, *center)
        if lam[0] * lam[1] > 0:
            sgn = np.sign(lam[0])
            if abs(v) <= tol:
                return [("point", (float(center[0]), float(center[1])))]
            if v * sgn > 0:
                return []
            if abs(lam[0] - lam[1]) <= 100 * tol and abs(cxy) <= 100 * tol:
                r = float(np.sqrt(-v / lam[0]))
                return [ConicComp(tuple(p), "circle", tuple(center), r)]
            return [ConicComp(tuple(p), "ellipse", tuple(center))]
        # opposite signs
        if abs(v) <= tol:
            # two crossing lines along the isotropic directions of Q
            d1 = V @ np.array([np.sqrt(abs(lam[1])), np.sqrt(abs(lam[0]))])
            d2 = V @ np.array([np.sqrt(abs(lam[1])), -np.sqrt(abs(lam[0]))])
            out = []
            for d in (d1, d2):
                d = d / np.linalg.norm(d)
                out.append(LineComp((float(center[0]), float(center[1])),
                                    (float(d[0]), float(d[1]))))
            return out
        return [ConicComp(tuple(p), "hyperbola", tuple(center))]
    # parabolic case: one eigenvalue numerically zero
    idx = int(np.argmax(np.abs(lam)))
    u = V[:, idx]
    w = V[:, 1 - idx]
    lu = float(L @ u)
    lw = float(L @ w)
    if abs(lw) > tol:
        return [ConicComp(tuple(p), "parabola")]
    # lam[idx] s^2 + lu s + c1 = 0 along direction u, free along w
    disc = lu * lu - 4 * lam[idx] * c1
    if disc < -tol:
        return []
    out = []
    roots = [(-lu + s * np.sqrt(max(disc, 0.0))) / (2 * lam[idx]) for s in (+1, -1)]
    if abs(disc) <= tol:
        roots = roots[:1]
    for s in roots:
        p0 = s * u
        out.append(LineComp((float(p0[0]), float(p0[1])),
                            (float(w[0]), float(w[1]))))
    return out


def _poly_in_y(p):
    """Conic as quadratic in y with x-polynomial coefficients (ascending)."""
    c1, cx, cy, cxx, cxy, cyy = p
    return (np.array([c1, cx, cxx]),      # y^0
            np.array([cy, cxy]),          # y^1
            np.array([cyy]))              # y^2


def _y_degree(a0, a1, a2, tol) -> int:
    if np.abs(a2).max(initial=0.0) > tol:
        return 2
    if np.abs(a1).max(initial=0.0) > tol:
        return 1
    return 0


def conic_resultant_points(p: np.ndarray, q: np.ndarray, tol: float = 1e-9):
    """Candidate intersection points of two conics via elimination of y.

    Returns None when the curves share a whole component (the eliminant
    vanishes identically).
    """
    p = np.asarray(p, dtype=float) / max(np.abs(p).max(), 1e-300)
    q = np.asarray(q, dtype=float) / max(np.abs(q).max(), 1e-300)
    a0, a1, a2 = _poly_in_y(p)
    b0, b1, b2 = _poly_in_y(q)
    pm, ps = npoly.polymul, npoly.polysub
    dp, dq = _y_degree(a0, a1, a2, tol), _y_degree(b0, b1, b2, tol)
    if dp < dq:
        return conic_resultant_points(q, p, tol)
    if dp == 2 and dq == 2:
        t1 = ps(pm(a2, b0), pm(a0, b2))
        t2 = ps(pm(a2, b1), pm(a1, b2))
        t3 = ps(pm(a1, b0), pm(a0, b1))
        res = ps(pm(t1, t1), pm(t2, t3))
    elif dq == 1:
        # substitute y = -b0/b1 into p (multiplied through by b1^deg)
        if dp == 2:
            res = ps(npoly.polyadd(pm(a2, pm(b0, b0)), pm(a0, pm(b1, b1))),
                     pm(a1, pm(b0, b1)))
        else:
            res = ps(pm(a0, b1), pm(a1, b0))
    elif dp >= 1:
        # q depends on x only: its roots give vertical candidate lines
        res = b0
    else:
        # both depend on x only: they intersect in a shared vertical line or
        # not at all
        roots_a = [r.real for r in np.roots(np.trim_zeros(a0, "b")[::-1])
                   if abs(r.imag) <= 1e-8 * (1 + abs(r))] if np.abs(a0).max() > tol else []
        if any(abs(npoly.polyval(x, b0)) <= 1e-7 * (1 + x * x) for x in roots_a):
            return None
        return []
    res = np.trim_zeros(np.atleast_1d(res), "b")
    if res.size == 0 or np.abs(res).max() <= 1e-9:
        return None  # common component
    if res.size == 1:
        return []
    xs = [r.real for r in np.roots(res[::-1]) if abs(r.imag) <= 1e-7 * (1 + abs(r))]
    pts = []
    for x in xs:
        for (u0, u1, u2) in ((a0, a1, a2), (b0, b1, b2)):
            A = float(u2[0]) if u2.size else 0.0
            B = float(npoly.polyval(x, u1))
            C = float(npoly.polyval(x, u0))
            if abs(A) > tol:
                disc = B * B - 4 * A * C
                if disc < -1e-8 * (1 + B * B):
                    continue
                for s in (+1, -1):
                    pts.append((x, (-B + s * np.sqrt(max(disc, 0.0))) / (2 * A)))
            elif abs(B) > tol:
                pts.append((x, -C / B))
    good = [pt for pt in pts
            if abs(eval_conic(p, *pt)) <= 1e-6 * (1 + abs(pt[0]) + abs(pt[1])) ** 2
            and abs(eval_conic(q, *pt)) <= 1e-6 * (1 + abs(pt[0]) + abs(pt[1])) ** 2]
    return _dedupe(good)


def _dedupe(points, tol=1e-7):
    out = []
    for pt in points:
        if not any(abs(pt[0] - q[0]) <= tol and abs(pt[1] - q[1]) <= tol
                   for q in out):
            out.append((float(pt[0]), float(pt[1])))
    return out


def _polish_point(polys, pt, iters: int = 6):
    """Newton refinement of a candidate common zero of several conics."""
    x, y = pt
    for _ in range(iters):
        f = np.array([eval_conic(p, x, y) for p in polys])
        J = np.array([[p[1] + 2 * p[3] * x + p[4] * y,
                       p[2] + p[4] * x + 2 * p[5] * y] for p in polys])
        step, *_ = np.linalg.lstsq(J, -f, rcond=None)
        if not np.all(np.isfinite(step)):
            break
        x, y = x + step[0], y + step[1]
        if np.abs(step).max() < 1e-14:
            break
    return (float(x), float(y))


def _restrict_to_line(p: np.ndarray, line: LineComp):
    """Coefficients (ascending in t) of p restricted to the line."""
    x0, y0 = line.point
    dx, dy = line.direction
    c1, cx, cy, cxx, cxy, cyy = p
    c0 = eval_conic(p, x0, y0)
    lin = cx * dx + cy * dy + 2 * cxx * x0 * dx + cxy * (x0 * dy + y0 * dx) \
        + 2 * cyy * y0 * dy
    quad = cxx * dx * dx + cxy * dx * dy + cyy * dy * dy
    return np.array([c0, lin, quad])


def compute_variety(polys: list[np.ndarray], tol: float = 1e-8):
    """Common real zero set of the kernel polynomials.

    Returns (points, infinite_components); the cardinality is infinite
    whenever infinite_components is nonempty.
    """
    comps: list = None
    for p in polys:
        c = classify_conic(p)
        if c is None:
            continue
        if comps is None:
            comps = c
            continue
        nxt = []
        for comp in comps:
            if isinstance(comp, tuple) and comp[0] == "point":
                x, y = comp[1]
                if abs(eval_conic(p, x, y)) <= 1e-6 * (1 + abs(x) + abs(y)) ** 2:
                    nxt.append(comp)
            elif isinstance(comp, LineComp):
                r = _restrict_to_line(p, comp)
                if np.abs(r).max() <= 1e-8 * max(np.abs(p).max(), 1.0):
                    nxt.append(comp)
                else:
                    r = np.trim_zeros(r, "b")
                    if r.size > 1:
                        for t in np.roots(r[::-1]):
                            if abs(t.imag) <= 1e-8 * (1 + abs(t)):
                                nxt.append(("point", comp.at(t.real)))
            elif isinstance(comp, ConicComp):
                q = np.asarray(comp.coeffs)
                cross = np.outer(q, p) - np.outer(p, q)
                if np.abs(cross).max() <= 1e-9 * np.abs(q).max() * np.abs(p).max():
                    nxt.append(comp)  # same conic
                    continue
                pts = conic_resultant_points(q, p)
                if pts is None:
                    nxt.append(comp)  # shared component: stay infinite
                else:
                    nxt.extend(("point", pt) for pt in pts)
            else:
                raise AssertionError(comp)
        comps = nxt
    if comps is None:
        raise CmUnsupported("no kernel relation: outside the restricted scope")
    raw = [c[1] for c in comps if isinstance(c, tuple)]
    points = _dedupe(_polish_point(polys, pt) for pt in raw)
    infinite = [c for c in comps if not isinstance(c, tuple)]
    # points must satisfy every kernel polynomial
    points = [pt for pt in points
              if all(abs(eval_conic(p, *pt)) <= 1e-6 * (1 + abs(pt[0]) + abs(pt[1])) ** 2
                     for p in polys)]
    return points, infinite


# ---------------------------------------------------------------------------
# quadrature-style candidate nodes on infinite components


def _hankel_nodes(mom: np.ndarray, tol: float = 1e-9) -> list[float]:
    """Gauss-type nodes for 1-D moments (m0..m4) via Christoffel subtraction."""
    m0, m1, m2, m3, m4 = (float(v) for v in mom)
    if m0 <= tol:
        return []
    H = np.array([[m0, m1, m2], [m1, m2, m3], [m2, m3, m4]])
    r = numerical_rank(H, ToleranceConfig(rank_tol=1e-9))
    if r >= 3:
        t0 = m1 / m0
        v = np.array([1.0, t0, t0 * t0])
        try:
            quad = float(v @ np.linalg.solve(H, v))
        except np.linalg.LinAlgError:
            return []
        if quad <= 0 or not np.isfinite(quad):
            return []
        lam0 = 1.0 / quad  # Christoffel function: largest mass placeable at t0
        sub = np.array([t0 ** k for k in range(5)]) * lam0
        rest = _hankel_nodes(mom - sub)
        return [t0] + rest
    if r == 2:
        _, _, Vt = np.linalg.svd(H)
        c = Vt[-1]
        if abs(c[2]) <= 1e-10 * np.abs(c).max():
            if abs(c[1]) <= 1e-10 * np.abs(c).max():
                return []
            return [-c[0] / c[1]]
        roots = np.roots(c[::-1])
        return [float(t.real) for t in roots if abs(t.imag) <= 1e-6 * (1 + abs(t))]
    if r == 1:
        return [m1 / m0]
    return []


def _line_moments(m: dict, line: LineComp) -> np.ndarray:
    """1-D moments of the full data along the line parameter."""
    x0, y0 = line.point
    dx, dy = line.direction
    # linear form l(x, y) = dx*(x - x0) + dy*(y - y0); moments of l^k
    base = {(0, 0): -(dx * x0 + dy * y0), (1, 0): dx, (0, 1): dy}
    out = [m[(0, 0)]]
    poly = {(0, 0): 1.0}
    for _ in range(4):
        nxt: dict = {}
        for (i, j), cv in poly.items():
            for (a, b), cw in base.items():
                key = (i + a, j + b)
                nxt[key] = nxt.get(key, 0.0) + cv * cw
        poly = nxt
        out.append(sum(cv * m[key] for key, cv in poly.items()))
    return np.array(out)


def _circle_complex_moments(m: dict, center, radius) -> np.ndarray:
    """Trigonometric moments c_k = E[z^k], z = ((x-cx) + i (y-cy)) / r."""
    cx, cy = center
    shift = {(0, 0): complex(-cx, -cy), (1, 0): 1.0 + 0j, (0, 1): 1j}
    cks = [complex(m[(0, 0)])]
    poly = {(0, 0): 1.0 + 0j}
    for k in range(1, 5):
        nxt: dict = {}
        for (i, j), cv in poly.items():
            for (a, b), cw in shift.items():
                key = (i + a, j + b)
                nxt[key] = nxt.get(key, 0.0) + cv * cw
        poly = nxt
        cks.append(sum(cv * m[key] for key, cv in poly.items()) / radius ** k)
    return np.array(cks)


def _circle_nodes(m: dict, comp: ConicComp) -> list[tuple[float, float]]:
    """Support-angle candidates from the Toeplitz structure of circle data."""
    cks = _circle_complex_moments(m, comp.center, comp.radius)
    T = np.empty((5, 5), dtype=complex)
    for a in range(5):
        for b in range(5):
            k = a - b
            T[a, b] = cks[k] if k >= 0 else np.conj(cks[-k])
    angles: list[float] = []

    def kernel_angles(Tm):
        Tm = 0.5 * (Tm + Tm.conj().T)
        w, V = np.linalg.eigh(Tm)
        scale = np.abs(w).max(initial=0.0)
        out = []
        for i in range(len(w)):
            if abs(w[i]) <= 1e-8 * max(scale, 1e-300):
                h = V[:, i]
                if np.abs(h).max() <= 1e-12:
                    continue
                for z in np.roots(h[::-1]):
                    if abs(abs(z) - 1.0) <= 1e-5:
                        out.append(float(np.angle(z)))
        return out

    tw = np.linalg.eigvalsh(0.5 * (T + T.conj().T))
    r = int(np.count_nonzero(np.abs(tw) > 1e-9 * max(np.abs(tw).max(), 1e-300)))
    if r >= 5:
        theta0 = float(np.angle(cks[1])) if abs(cks[1]) > 1e-12 else 0.0
        v = np.exp(1j * theta0 * np.arange(5))
        try:
            lam0 = 1.0 / float(np.real(v.conj() @ np.linalg.solve(T, v)))
        except np.linalg.LinAlgError:
            lam0 = 0.0
        if lam0 > 0:
            angles.append(theta0)
            T = T - lam0 * np.outer(v, v.conj())
    angles.extend(kernel_angles(T))
    cx, cy = comp.center
    return [(cx + comp.radius * np.cos(t), cy + comp.radius * np.sin(t))
            for t in angles]


def _split_parallel_lines(m: dict, lines) -> list[tuple[float, float]]:
    """Exact nodes for a pair of horizontal lines y = +-c (after detection)."""
    cs = sorted(ln.point[1] + 0.0 for ln in lines)
    c = abs(cs[1])
    if not (abs(cs[0] + cs[1]) <= 1e-9 * (1 + c) and c > 1e-12):
        return []
    for ln in lines:
        if abs(ln.direction[1]) > 1e-9:
            return []
    mx = [m[(j, 0)] for j in range(5)]
    mxy = [m[(j, 1)] for j in range(4)]
    plus = [(mx[j] + mxy[j] / c) / 2.0 for j in range(4)]
    minus = [(mx[j] - mxy[j] / c) / 2.0 for j in range(4)]
    total4 = mx[4]

    def min_top(mm):
        H2 = np.array([[mm[0], mm[1]], [mm[1], mm[2]]])
        b = np.array([mm[2], mm[3]])
        try:
            return float(b @ np.linalg.solve(H2, b))
        except np.linalg.LinAlgError:
            return 0.0

    lo = min_top(plus)
    hi = total4 - min_top(minus)
    if hi < lo - 1e-12:
        return []
    s_plus = 0.5 * (lo + hi)
    nodes = []
    for mm, yv, s in ((plus, c, s_plus), (minus, -c, total4 - s_plus)):
        for t in _hankel_nodes(np.array(mm + [s])):
            nodes.append((t, yv))
    return nodes


def _axes_nodes(m: dict) -> list[tuple[float, float]]:
    """Prony nodes on the coordinate axes for an xy = 0 variety."""
    out = [(0.0, 0.0)]
    for moments, axis in (([m[(j, 0)] for j in range(1, 5)], "x"),
                          ([m[(0, j)] for j in range(1, 5)], "y")):
        a1, a2, a3, a4 = moments
        ts: list[float] = []
        A = np.array([[a1, a2], [a2, a3]])
        if abs(np.linalg.det(A)) > 1e-12 * (1 + np.abs(A).max()) ** 2:
            c0, c1 = np.linalg.solve(A, [-a3, -a4])
            roots = np.roots([1.0, c1, c0])
            ts = [float(t.real) for t in roots if abs(t.imag) <= 1e-8 * (1 + abs(t))]
        elif abs(a1) > 1e-12:
            ts = [a2 / a1]
        elif abs(a2) > 1e-12:
            ts_sq = a4 / a2 if abs(a2) > 1e-12 else 0.0
            if ts_sq > 0:
                ts = [np.sqrt(ts_sq), -np.sqrt(ts_sq)]
        out.extend((t, 0.0) if axis == "x" else (0.0, t) for t in ts)
    return out


def _grid_nodes(comp, m: dict, n: int) -> list[tuple[float, float]]:
    """Deterministic equally spaced samples on an infinite component."""
    if isinstance(comp, LineComp):
        mom = _line_moments(m, comp)
        spread = np.sqrt(max(mom[2] / max(mom[0], 1e-12), 1e-6))
        top = np.sqrt(np.sqrt(max(mom[4] / max(mom[0], 1e-12), 1e-12)))
        R = 2.5 * max(spread, top, 1.0)
        return [comp.at(t) for t in np.linspace(-R, R, n)]
    assert isinstance(comp, ConicComp)
    if comp.kind == "circle":
        cx, cy = comp.center
        return [(cx + comp.radius * np.cos(t), cy + comp.radius * np.sin(t))
                for t in np.linspace(0.0, 2 * np.pi, n, endpoint=False)]
    c1, cx_, cy_, cxx, cxy, cyy = comp.coeffs
    Q = np.array([[cxx, cxy / 2], [cxy / 2, cyy]])
    lam, V = np.linalg.eigh(Q)
    if comp.kind == "ellipse":
        center = np.array(comp.center)
        v = eval_conic(np.asarray(comp.coeffs), *center)
        axes = np.sqrt(np.maximum(-v / lam, 1e-12))
        pts = []
        for t in np.linspace(0.0, 2 * np.pi, n, endpoint=False):
            pts.append(tuple(center + V @ (axes * np.array([np.cos(t), np.sin(t)]))))
        return pts
    if comp.kind == "hyperbola":
        center = np.array(comp.center)
        v = eval_conic(np.asarray(comp.coeffs), *center)
        # lam[0] s^2 + lam[1] t^2 + v = 0 in eigencoordinates, lam[0]*lam[1] < 0
        pts = []
        grid = np.linspace(-3.0, 3.0, max(n // 2, 7))
        for t in grid:
            s_sq = (-v - lam[1] * t * t) / lam[0]
            if s_sq >= 0:
                for s in (np.sqrt(s_sq), -np.sqrt(s_sq)):
                    pts.append(tuple(center + V @ np.array([s, t])))
        for s in grid:
            t_sq = (-v - lam[0] * s * s) / lam[1]
            if t_sq >= 0:
                for t in (np.sqrt(t_sq), -np.sqrt(t_sq)):
                    pts.append(tuple(center + V @ np.array([s, t])))
        return pts
    # parabola: solve along the null direction
    idx = int(np.argmax(np.abs(lam)))
    u = V[:, idx]
    w = V[:, 1 - idx]
    L = np.array([cx_, cy_])
    pts = []
    for t in np.linspace(-3.0, 3.0, n):
        # lam s^2 + (L.u) s + (L.w) t + c1 = 0
        disc = (L @ u) ** 2 - 4 * lam[idx] * ((L @ w) * t + c1)
        if disc >= 0:
            for s in (+1, -1):
                sval = (-(L @ u) + s * np.sqrt(disc)) / (2 * lam[idx])
                pts.append(tuple(sval * u + t * w))
    return pts


def _candidate_nodes(m: dict, points, infinite, rank: int, dense: bool):
    cands = list(points)
    n = max(4 * (rank + 3), 24) * (2 if dense else 1)
    lines = [c for c in infinite if isinstance(c, LineComp)]
    if len(infinite) == 1:
        comp = infinite[0]
        if isinstance(comp, LineComp):
            cands += [comp.at(t) for t in _hankel_nodes(_line_moments(m, comp))]
        elif comp.kind == "circle":
            cands += _circle_nodes(m, comp)
    if len(lines) == 2 and len(infinite) == 2:
        horizontal = all(abs(l.direction[1]) <= 1e-9 for l in lines)
        vertical = all(abs(l.direction[0]) <= 1e-9 for l in lines)
        crossing_axes = any(abs(l.direction[0]) <= 1e-9 for l in lines) and \
            any(abs(l.direction[1]) <= 1e-9 for l in lines)
        if horizontal:
            cands += _split_parallel_lines(m, lines)
        elif vertical:
            mt = {(i, j): m[(j, i)] for i, j in m}
            flipped = [LineComp((l.point[1], l.point[0]),
                                (l.direction[1], l.direction[0])) for l in lines]
            cands += [(y, x) for x, y in _split_parallel_lines(mt, flipped)]
        elif crossing_axes:
            cands += _axes_nodes(m)
    for comp in infinite:
        cands += _grid_nodes(comp, m, n)
    return _dedupe(cands, 1e-9)


# ---------------------------------------------------------------------------
# the solver


def cm_solve(seq: MomentSequence | dict, cfg: ToleranceConfig = DEFAULT_TOL) -> CmReport:
    """Decide representability of a singular commutative quartic sequence.

    Accepts a commutative MomentSequence or a raw cm moment dict keyed by
    (i, j) powers.  The total mass m[(0,0)] need not be 1.
    """
    m = cm_moments_from_sequence(seq) if isinstance(seq, MomentSequence) else dict(seq)
    if m[(0, 0)] <= 0:
        return CmReport(False, reason="nonpositive mass")
    M = build_cm_matrix(m)
    scale = np.abs(M).max()
    ok, margin = is_psd(M, cfg)
    diagnostics = {"psd_margin": margin}
    if not ok:
        return CmReport(False, reason=f"not PSD (margin {margin:.3g})",
                        diagnostics=diagnostics)
    rank = numerical_rank(M, cfg)
    w, V = np.linalg.eigh(M)
    kernel = [V[:, i] for i in range(6) if abs(w[i]) <= cfg.rank_tol * scale]
    if not kernel:
        raise CmUnsupported("positive definite cm matrix: "
                            "no degree-2 kernel relation to exploit")

    # recursive generation: degree-1 kernel polynomials propagate
    for vec in kernel:
        if np.abs(vec[3:]).max() <= 1e-8:
            for mult, name in ((np.array([0, vec[0], 0, vec[1], vec[2], 0]), "x"),
                               (np.array([0, 0, vec[0], 0, vec[1], vec[2]]), "y")):
                if np.linalg.norm(M @ mult) > 1e-7 * scale:
                    return CmReport(
                        False, reason="not recursively generated: product of "
                        f"kernel polynomial with {name} is not annihilated",
                        diagnostics=diagnostics)

    points, infinite = compute_variety(kernel)
    card = np.inf if infinite else len(points)
    diagnostics["rank"] = rank
    diagnostics["variety_card"] = card
    if rank > (card if card != np.inf else np.inf):
        return CmReport(False, variety_card=card,
                        reason=f"rank {rank} exceeds variety cardinality {card}",
                        diagnostics=diagnostics)

    beta = moment_vector(m)
    tol = cfg.match_tol * max(1.0, np.abs(beta).max())
    best = None
    for dense in (False, True):
        cands = _candidate_nodes(m, points, infinite, rank, dense)
        if not cands:
            break
        A = np.column_stack([point_vector(x, y) for x, y in cands])
        weights, _ = nnls(A, beta)
        resid = float(np.abs(A @ weights - beta).max())
        if best is None or resid < best[0]:
            best = (resid, cands, weights)
        if resid <= tol:
            break
        if not infinite:
            break  # finite varieties cannot be enlarged
    resid, cands, weights = best
    sel = [(x, y, float(lam)) for (x, y), lam in zip(cands, weights)
           if lam > 1e-11]
    if resid <= tol:
        return CmReport(True, points=sel, variety_card=card, residual=resid,
                        diagnostics=diagnostics)
    reason = "sampling-limited: no nonnegative fit on the candidate nodes" \
        if infinite else "no nonnegative density on the finite variety"
    return CmReport(False, points=[], variety_card=card, residual=resid,
                    reason=reason, diagnostics=diagnostics)
