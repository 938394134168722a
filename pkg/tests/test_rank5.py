import zlib

import numpy as np
import pytest

from conftest import anticommuting_atom
from tracmom.linalg import is_psd
from tracmom.moments import (
    Atom,
    Measure,
    build_moment_matrix,
    moments_from_measure,
    reconstruction_error,
)
from tracmom.rank5 import (
    psd_conditions_rank5,
    snap_to_case,
    solve_rank5,
    synthesize_case_sequence,
)


def test_psd_conditions_bc1_example():
    seq = synthesize_case_sequence("BC1", bx=0.0, by=0.0, bx2=0.5, bx4=0.3)
    ok, details = psd_conditions_rank5("BC1", seq)
    assert ok
    # c = beta_X2^2 = 0.25 at bx = by = 0
    assert details["c < bx4"] == pytest.approx(0.3 - 0.25)


def test_psd_conditions_bc2_rejects_large_by():
    seq = synthesize_case_sequence("BC2", bx=0.0, by=1.0, bx2=0.5, bx4=0.5)
    ok, details = psd_conditions_rank5("BC2", seq)
    assert not ok
    assert details["|by| < 1"] <= 0


def test_psd_conditions_bc4_bound():
    seq = synthesize_case_sequence("BC4", bx=0.0, by=0.0, bx2=0.5, bx4=0.2)
    ok, details = psd_conditions_rank5("BC4", seq)
    assert not ok  # needs bx4 > 0.5^3 / 0.5 = 0.25
    assert details["bx2^3/(bx2-by^2-bx^2) < bx4"] == pytest.approx(0.2 - 0.25)


@pytest.mark.parametrize("case", ["BC1", "BC2", "BC3", "BC4"])
def test_psd_conditions_agree_with_eigenvalues(case):
    rng = np.random.default_rng(42)
    hits = 0
    for _ in range(200):
        bx, by = rng.normal(scale=0.4, size=2)
        bx2 = rng.uniform(0.05, 1.5)
        bx4 = rng.uniform(0.01, 1.5)
        bx3 = rng.normal(scale=0.3)
        if case in ("BC1",):
            bx2 = min(bx2, 0.95)
        try:
            seq = synthesize_case_sequence(case, bx=bx, by=by, bx2=bx2,
                                           bx4=bx4, bx3=bx3)
        except Exception:
            continue
        ok_form, _ = psd_conditions_rank5(case, seq)
        M = build_moment_matrix(seq)
        ok_eig, margin = is_psd(M)
        # strict closed-form conditions match PSD away from the boundary
        if abs(margin) > 1e-9:
            assert ok_form == ok_eig, (case, bx, by, bx2, bx3, bx4, margin)
            hits += 1
    assert hits > 50


def test_bc4_spec_instance():
    seq = synthesize_case_sequence("BC4", bx=0.0, by=0.0, bx2=0.5, bx4=0.5)
    report = solve_rank5("BC4", seq)
    assert report.exists
    assert report.minimal_type == (1, 1)
    assert report.uniqueness == "unique"
    assert report.alpha0 == pytest.approx(0.5, abs=1e-8)
    origin = [a for a in report.measure.atoms if a.size == 1]
    assert len(origin) == 1
    assert origin[0].density == pytest.approx(0.5, abs=1e-8)
    assert abs(origin[0].A[0, 0]) < 1e-9 and abs(origin[0].B[0, 0]) < 1e-9
    assert report.reconstruction_error <= 1e-10


def test_bc2_boundary_type_11():
    by = 0.2
    bx2 = 0.5
    bx4 = bx2 * bx2 / (1 - abs(by))  # 0.3125
    seq = synthesize_case_sequence("BC2", bx=0.0, by=by, bx2=bx2, bx4=bx4)
    report = solve_rank5("BC2", seq)
    assert report.exists
    assert report.minimal_type == (1, 1)
    assert report.uniqueness == "unique"


def test_bc2_interior_type_21():
    seq = synthesize_case_sequence("BC2", bx=0.0, by=0.2, bx2=0.5, bx4=0.4)
    report = solve_rank5("BC2", seq)
    assert report.exists
    assert report.minimal_type == (2, 1)


def test_bc2_nonzero_x3_no_measure():
    seq = synthesize_case_sequence("BC2", bx=0.0, by=0.0, bx2=0.5, bx4=0.5,
                                   bx3=0.1)
    report = solve_rank5("BC2", seq)
    assert not report.exists
    assert "beta_X3" in report.diagnostics["reason"]


def test_bc4_nonzero_x_no_measure():
    seq = synthesize_case_sequence("BC4", bx=0.1, by=0.0, bx2=0.5, bx4=0.5)
    report = solve_rank5("BC4", seq)
    assert not report.exists


def test_bc1_symmetric_two_measures():
    seq = synthesize_case_sequence("BC1", bx=0.0, by=0.0, bx2=0.5, bx4=0.3)
    report = solve_rank5("BC1", seq)
    assert report.exists
    assert report.minimal_type == (2, 1)
    assert report.uniqueness == "two-measures"
    assert report.alternative_measure is not None
    # both minimal measures reproduce the moments
    assert reconstruction_error(seq, report.alternative_measure) <= 1e-8
    xs = sorted(a.A[0, 0] for a in report.measure.atoms if a.size == 1)
    assert xs == pytest.approx([-1.0, 1.0])
    ys = sorted(a.B[0, 0] for a in report.alternative_measure.atoms if a.size == 1)
    assert ys == pytest.approx([-1.0, 1.0])


def test_bc1_one_sided_moment():
    # beta_X != 0, beta_Y = 0: unique minimal measure of type (2,1) or (1,1)
    seq = synthesize_case_sequence("BC1", bx=0.15, by=0.0, bx2=0.5, bx4=0.35)
    report = solve_rank5("BC1", seq)
    assert report.exists
    assert report.uniqueness == "unique"
    assert report.minimal_type in ((1, 1), (2, 1))
    assert report.reconstruction_error <= 1e-8


def test_bc1_both_moments_type_31():
    seq = synthesize_case_sequence("BC1", bx=0.1, by=0.1, bx2=0.5, bx4=0.35)
    report = solve_rank5("BC1", seq)
    assert report.exists
    assert report.minimal_type == (3, 1)
    assert report.uniqueness == "two-measures"
    assert report.alternative_measure is not None


def test_bc1_boundary_type_11():
    bx, by, bx2 = 0.15, 0.0, 0.5
    c = (-bx2**2 - abs(bx) + 2 * bx2 * abs(bx) + abs(by * bx)) / (
        -1 + abs(by) + abs(bx))
    seq = synthesize_case_sequence("BC1", bx=bx, by=by, bx2=bx2, bx4=c)
    report = solve_rank5("BC1", seq)
    assert report.exists
    assert report.minimal_type == (1, 1)
    assert report.uniqueness == "unique"


def test_bc3_measure_roundtrip():
    seq = synthesize_case_sequence("BC3", bx=0.0, by=0.25, bx2=0.4, bx4=0.5)
    report = solve_rank5("BC3", seq)
    if report.exists:
        assert report.reconstruction_error <= 1e-8
        assert report.minimal_type in ((1, 1), (2, 1))


def test_bc3_existence_threshold_uses_squared_formula():
    # decision: the type/existence boundary is bx4 >= bx2^2/(1-|by|)
    by, bx2 = 0.25, 0.4
    bound = bx2 * bx2 / (1 - abs(by))
    below = synthesize_case_sequence("BC3", bx=0.0, by=by, bx2=bx2,
                                     bx4=bound - 0.02)
    above = synthesize_case_sequence("BC3", bx=0.0, by=by, bx2=bx2,
                                     bx4=bound + 0.02)
    at = synthesize_case_sequence("BC3", bx=0.0, by=by, bx2=bx2, bx4=bound)
    r_below = solve_rank5("BC3", below)
    r_above = solve_rank5("BC3", above)
    r_at = solve_rank5("BC3", at)
    assert not r_below.exists
    assert r_above.exists and r_above.minimal_type == (2, 1)
    assert r_at.exists and r_at.minimal_type == (1, 1)


@pytest.mark.parametrize("case", ["BC1", "BC2", "BC3", "BC4"])
@pytest.mark.parametrize("trial", range(8))
def test_solve_from_random_measures(case, trial):
    from test_transforms import bc_case_measure
    rng = np.random.default_rng(zlib.adler32(f"r5solve-{case}-{trial}".encode()))
    mu = bc_case_measure(case, rng)
    seq = moments_from_measure(mu)
    report = solve_rank5(case, seq)
    assert report.exists, report.diagnostics
    assert report.reconstruction_error <= 1e-8
    # every atom annihilates the case's kernel relations
    from tracmom.linalg import CANONICAL_SHAPES, ColumnRelation
    from tracmom.rank5 import CASE_RELATIONS
    for shape in ("XY+YX=0", CASE_RELATIONS[case]):
        rel = ColumnRelation(CANONICAL_SHAPES[shape])
        for atom in report.measure.atoms:
            assert np.abs(rel.evaluate(atom.A, atom.B)).max() <= 1e-7
