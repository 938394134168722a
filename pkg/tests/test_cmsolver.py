import numpy as np
import pytest

from tracmom.cmsolver import (
    CmReport,
    CmUnsupported,
    CM_MONOMIALS,
    classify_conic,
    cm_solve,
    compute_variety,
    conic_resultant_points,
    moment_vector,
    point_vector,
)
from tracmom.moments import Atom, moments_from_measure


def cm_from_points(points_weights):
    m = {}
    for i, j in CM_MONOMIALS:
        m[(i, j)] = sum(w * x ** i * y ** j for (x, y), w in points_weights)
    return m


def recon_error(m, report):
    beta = moment_vector(m)
    approx = sum(lam * point_vector(x, y) for x, y, lam in report.points)
    return np.abs(approx - beta).max()


def test_circle_four_points_exact():
    pts = [((1, 0), 0.25), ((-1, 0), 0.25), ((0, 1), 0.25), ((0, -1), 0.25)]
    m = cm_from_points(pts)
    report = cm_solve(m)
    assert report.admits
    assert report.variety_card == 4
    assert recon_error(m, report) <= 1e-10
    found = sorted((round(x, 6), round(y, 6)) for x, y, _ in report.points)
    assert found == [(-1.0, 0.0), (0.0, -1.0), (0.0, 1.0), (1.0, 0.0)]


def test_two_horizontal_lines_example():
    # the commutative residual of the Y^2 = 1 rank-6 family at beta_X4 = 2:
    # mass 1/2, x^2 = x^2y^2 = 1/2, x^4 = 3/2, y^2 = y^4 = 1/2
    m = {(i, j): 0.0 for i, j in CM_MONOMIALS}
    m[(0, 0)] = 0.5
    m[(2, 0)] = 0.5
    m[(0, 2)] = 0.5
    m[(2, 2)] = 0.5
    m[(4, 0)] = 1.5
    m[(0, 4)] = 0.5
    report = cm_solve(m)
    assert report.admits, report.reason
    assert report.variety_card == np.inf
    assert recon_error(m, report) <= 1e-9
    assert all(abs(abs(y) - 1.0) <= 1e-9 for _, y, _ in report.points)


def test_rank_exceeds_variety_cardinality():
    # kernel {y - x^2, x^2 - 1, xy - x} with free tail moments raising the
    # rank to 3 while the variety is the two points (+-1, 1)
    m = {(0, 0): 1.0, (1, 0): 0.0, (0, 1): 1.0,
         (2, 0): 1.0, (1, 1): 0.0, (0, 2): 1.0,
         (3, 0): 0.0, (2, 1): 1.0, (1, 2): 0.0, (0, 3): 1.0,
         (4, 0): 1.0, (3, 1): 0.0, (2, 2): 1.0, (1, 3): 0.0, (0, 4): 2.0}
    report = cm_solve(m)
    assert not report.admits
    assert report.variety_card == 2
    assert "exceeds variety" in report.reason


def test_full_rank_unsupported():
    rng = np.random.default_rng(3)
    pts = [((x, y), w) for (x, y), w in
           zip(rng.normal(size=(8, 2)), rng.dirichlet(np.ones(8)))]
    m = cm_from_points(pts)
    with pytest.raises(CmUnsupported):
        cm_solve(m)


def test_unit_circle_five_points():
    rng = np.random.default_rng(11)
    angles = rng.uniform(0, 2 * np.pi, size=5)
    weights = rng.dirichlet(np.ones(5))
    pts = [((np.cos(t), np.sin(t)), w) for t, w in zip(angles, weights)]
    m = cm_from_points(pts)
    report = cm_solve(m)
    assert report.admits, report.reason
    assert recon_error(m, report) <= 1e-8


def test_shifted_circle_recovery():
    rng = np.random.default_rng(12)
    angles = rng.uniform(0, 2 * np.pi, size=4)
    weights = rng.dirichlet(np.ones(4))
    pts = [((0.5 + 2 * np.cos(t), -0.25 + 2 * np.sin(t)), w)
           for t, w in zip(angles, weights)]
    m = cm_from_points(pts)
    report = cm_solve(m)
    assert report.admits, report.reason
    assert recon_error(m, report) <= 1e-8


def test_single_line_gauss_nodes():
    pts = [((t, 2.0), w) for t, w in [(-1.3, 0.3), (0.4, 0.5), (2.0, 0.2)]]
    m = cm_from_points(pts)
    report = cm_solve(m)
    assert report.admits, report.reason
    assert recon_error(m, report) <= 1e-9


def test_axes_variety():
    pts = [((0.0, 0.0), 0.2), ((1.5, 0.0), 0.3), ((-0.5, 0.0), 0.1),
           ((0.0, 0.7), 0.4)]
    m = cm_from_points(pts)
    report = cm_solve(m)
    assert report.admits, report.reason
    assert recon_error(m, report) <= 1e-9


def test_not_psd_rejected():
    pts = [((1, 0), 0.5), ((-1, 0), 0.5)]
    m = cm_from_points(pts)
    m[(4, 0)] = 0.5  # below the Cauchy-Schwarz bound x4 >= x2^2
    report = cm_solve(m)
    assert not report.admits
    assert "PSD" in report.reason


def test_swap_invariance_verdict_and_exactness():
    pts = [((0.3, 1.0), 0.4), ((-0.9, 1.0), 0.3), ((0.1, -1.0), 0.3)]
    m = cm_from_points(pts)
    mt = {(i, j): m[(j, i)] for i, j in m}
    rep = cm_solve(m)
    rep_t = cm_solve(mt)
    # the representing measure is not unique on an infinite variety, but the
    # verdict and exact reconstruction must agree under relabeling x <-> y
    assert rep.admits and rep_t.admits
    assert recon_error(m, rep) <= 1e-9
    assert recon_error(mt, rep_t) <= 1e-9


def test_swap_invariance_unique_measure():
    # finite variety: the measure is forced, so it must mirror exactly
    pts = [((1, 0), 0.4), ((-1, 0), 0.2), ((0, 1), 0.25), ((0, -1), 0.15)]
    m = cm_from_points(pts)
    mt = {(i, j): m[(j, i)] for i, j in m}
    rep, rep_t = cm_solve(m), cm_solve(mt)
    assert rep.admits and rep_t.admits
    got = sorted((round(y, 9), round(x, 9), round(l, 9)) for x, y, l in rep.points)
    got_t = sorted((round(x, 9), round(y, 9), round(l, 9)) for x, y, l in rep_t.points)
    assert got == got_t


def test_classify_circle():
    comps = classify_conic(np.array([-1.0, 0, 0, 1, 0, 1]))
    assert len(comps) == 1 and comps[0].kind == "circle"
    assert comps[0].radius == pytest.approx(1.0)


def test_classify_crossing_lines():
    comps = classify_conic(np.array([0.0, 0, 0, 0, 1, 0]))  # xy = 0
    assert len(comps) == 2
    dirs = sorted(abs(np.array(c.direction)).round(9).tolist() for c in comps)
    assert dirs == [[0.0, 1.0], [1.0, 0.0]]


def test_classify_point():
    comps = classify_conic(np.array([0.0, 0, 0, 1, 0, 1]))  # x^2 + y^2 = 0
    assert comps == [("point", (0.0, 0.0))]


def test_classify_empty():
    comps = classify_conic(np.array([1.0, 0, 0, 1, 0, 1]))  # x^2 + y^2 = -1
    assert comps == []


def test_conic_intersection_circle_hyperbola():
    circle = np.array([-1.0, 0, 0, 1, 0, 1])
    hyper = np.array([-0.5, 0, 0, 1, 0, -1])  # x^2 - y^2 = 1/2
    pts = conic_resultant_points(circle, hyper)
    assert pts is not None
    got = sorted((round(x, 6), round(y, 6)) for x, y in pts)
    expected = sorted([(round(s * np.sqrt(0.75), 6), round(t * 0.5, 6))
                       for s in (1, -1) for t in (1, -1)])
    assert got == expected


def test_conic_intersection_linear_in_y():
    # both curves linear in y: y = x^2 and xy = x (the latter through y = 1)
    parab = np.array([0.0, 0, -1, 1, 0, 0])   # x^2 - y
    other = np.array([0.0, -1, 0, 0, 1, 0])   # xy - x
    pts = conic_resultant_points(parab, other)
    assert pts is not None
    got = sorted((round(x, 6), round(y, 6)) for x, y in pts)
    assert got == [(-1.0, 1.0), (0.0, 0.0), (1.0, 1.0)]


def test_conic_common_component_detected():
    # x^2 - 1 and (x^2 - 1) scaled share both lines
    p = np.array([-1.0, 0, 0, 1, 0, 0])
    q = np.array([-2.0, 0, 0, 2, 0, 0])
    assert conic_resultant_points(p, q) is None


def test_variety_of_circle_and_axes():
    circle = np.array([-1.0, 0, 0, 1, 0, 1])
    axes = np.array([0.0, 0, 0, 0, 1, 0])
    points, infinite = compute_variety([circle, axes])
    assert infinite == []
    assert len(points) == 4


def _brute_force_admits(m, points, tol=1e-8):
    """Independent check: a feasibility LP on all variety points."""
    from scipy.optimize import linprog
    A = np.column_stack([point_vector(x, y) for x, y in points])
    b = moment_vector(m)
    out = linprog(c=np.zeros(A.shape[1]), A_eq=A, b_eq=b,
                  bounds=[(0, None)] * A.shape[1], method="highs")
    if not out.success:
        return False
    return np.abs(A @ out.x - b).max() <= tol


@pytest.mark.parametrize("weights", [
    (0.25, 0.25, 0.25, 0.25), (0.4, 0.1, 0.3, 0.2), (0.5, 0.5, 0.0, 0.0)])
def test_finite_variety_agrees_with_linear_program(weights):
    pts = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    chosen = [((x, y), w) for (x, y), w in zip(pts, weights) if w > 0]
    m = cm_from_points(chosen)
    report = cm_solve(m)
    from tracmom.cmsolver import compute_variety, build_cm_matrix
    if report.variety_card != np.inf and report.variety_card > 0:
        M = build_cm_matrix(m)
        w, V = np.linalg.eigh(M)
        kernel = [V[:, i] for i in range(6)
                  if abs(w[i]) <= 1e-9 * abs(w).max()]
        points, infinite = compute_variety(kernel)
        if not infinite:
            assert report.admits == _brute_force_admits(m, points)


def test_rank_variety_failure_agrees_with_linear_program():
    m = {(0, 0): 1.0, (1, 0): 0.0, (0, 1): 1.0,
         (2, 0): 1.0, (1, 1): 0.0, (0, 2): 1.0,
         (3, 0): 0.0, (2, 1): 1.0, (1, 2): 0.0, (0, 3): 1.0,
         (4, 0): 1.0, (3, 1): 0.0, (2, 2): 1.0, (1, 3): 0.0, (0, 4): 2.0}
    report = cm_solve(m)
    assert not report.admits
    assert not _brute_force_admits(m, [(1.0, 1.0), (-1.0, 1.0)])
