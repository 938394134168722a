"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; every tolerance is pinned here, nothing is deferred to calibration.
"""

import time

import numpy as np
import pytest

from conftest import canonical_rank4_matrix, seq_from_betas
from tracmom.flat import build_B3, compute_C3, flat_search, hankel_residuals
from tracmom.linalg import (
    CANONICAL_SHAPES,
    ColumnRelation,
    is_psd,
    kernel_relations,
    numerical_rank,
    smallest_rank_drop_alpha,
)
from tracmom.moments import (
    Measure,
    build_moment_matrix,
    moments_from_measure,
    point_moment_matrix,
    sequence_from_matrix,
)
from tracmom.pipeline import COMPLETE_CASES, gen_random, solve_pipeline
from tracmom.rank4 import solve_rank4
from tracmom.rank5 import solve_rank5, synthesize_case_sequence
from tracmom.rank6 import (
    rel1_alpha_closed_form,
    rel3_alpha_closed_form,
    solve_rank6_rel2_rel4,
)
from test_flat import rel1_family, rel2_family, rel3_family, rel4_family
from test_rank6 import rel1_symmetric_instance, rel3_symmetric_instance


def _verdict(capsys, number: int, name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {number} [{name}]: {status} {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, f"criterion {number} ({name}) failed: {detail}"


def test_criterion_1_rank4_golden_family(capsys):
    t0 = time.perf_counter()
    failures = []
    for a in (-1.9, -1.0, 0.0, 0.5, 1.9):
        seq = sequence_from_matrix(canonical_rank4_matrix(a))
        report = solve_rank4(seq)
        if not report.exists:
            failures.append(f"a={a}: no measure")
            continue
        k2 = 0.5 * np.sqrt(4 - a * a)
        X_expected = np.diag([1.0, -1.0])
        Y_expected = np.array([[a / 2, k2], [k2, -a / 2]])
        if np.abs(report.atom.A - X_expected).max() > 1e-10:
            failures.append(f"a={a}: X atom mismatch")
        if np.abs(report.atom.B - Y_expected).max() > 1e-10:
            failures.append(f"a={a}: Y atom mismatch")
        if report.reconstruction_error > 1e-10:
            failures.append(f"a={a}: reconstruction {report.reconstruction_error}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f}s >= 1s")
    _verdict(capsys, 1, "rank-4 golden family", not failures,
             f"({elapsed:.2f}s)" + ("; ".join(failures) if failures else ""))


def _bc_alpha_instance(case, rng):
    """Admissible zero-odd-moment data and its closed-form alpha."""
    if case == "BC1":
        bx2 = rng.uniform(0.15, 0.85)
        bx4 = rng.uniform(bx2 * bx2 + 0.01, bx2 - 0.01) \
            if bx2 * bx2 + 0.02 < bx2 else None
        if bx4 is None:
            return None
        seq = synthesize_case_sequence("BC1", bx=0, by=0, bx2=bx2, bx4=bx4)
        alpha = (bx2 * bx2 - bx4) / (2 * (-1 + 2 * bx2 - bx4))
        pair = [(1, 0), (-1, 0)]
    elif case in ("BC2", "BC3"):
        bx2 = rng.uniform(0.15, 1.2)
        bx4 = rng.uniform(bx2 * bx2 * 1.05, bx2 * bx2 * 3.0)
        seq = synthesize_case_sequence(case, bx=0, by=0, bx2=bx2, bx4=bx4)
        alpha = 0.5 - bx2 * bx2 / (2 * bx4)
        pair = [(0, 1), (0, -1)]
    else:  # BC4
        bx2 = rng.uniform(0.15, 1.2)
        bx4 = rng.uniform(bx2 * bx2 * 1.05, bx2 * bx2 * 3.0)
        seq = synthesize_case_sequence("BC4", bx=0, by=0, bx2=bx2, bx4=bx4)
        alpha = (bx4 - bx2 * bx2) / bx4
        pair = [(0, 0)]
    return seq, alpha, pair


def test_criterion_2_alpha_closed_forms(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260808)
    failures = []
    for case in ("BC1", "BC2", "BC3", "BC4"):
        done = 0
        while done < 50:
            inst = _bc_alpha_instance(case, rng)
            if inst is None:
                continue
            seq, alpha_cf, pair = inst
            M = build_moment_matrix(seq)
            if not is_psd(M)[0] or numerical_rank(M) != 5:
                continue
            D = sum(point_moment_matrix(x, y) for x, y in pair)
            drop = smallest_rank_drop_alpha(M, D)
            if abs(drop.alpha - alpha_cf) > 1e-7:
                failures.append(f"{case}: {drop.alpha} vs {alpha_cf}")
            done += 1
    for relation, make, closed_form, pair in (
            ("REL1", rel1_symmetric_instance, rel1_alpha_closed_form,
             [(1, 0), (-1, 0)]),
            ("REL3", rel3_symmetric_instance, rel3_alpha_closed_form,
             [(0, 0)])):
        done = 0
        while done < 50:
            seq = make(rng)
            M = build_moment_matrix(seq)
            if numerical_rank(M) != 6:
                continue
            D = sum(point_moment_matrix(x, y) for x, y in pair)
            drop = smallest_rank_drop_alpha(M, D)
            if abs(drop.alpha - closed_form(seq)) > 1e-7:
                failures.append(f"{relation}: {drop.alpha} vs {closed_form(seq)}")
            done += 1
    elapsed = time.perf_counter() - t0
    if elapsed >= 10.0:
        failures.append(f"runtime {elapsed:.1f}s >= 10s")
    _verdict(capsys, 2, "alpha closed forms (50 per case)", not failures,
             f"({elapsed:.2f}s)" + "; ".join(failures[:4]))


def test_criterion_3_flat_residual_values(capsys):
    failures = []
    for b, expected in ((0.3, 0.08), (0.45, 0.005)):
        seq = rel1_family(b)
        C3 = compute_C3(seq, build_B3("REL1", seq, (0.37, -0.81)), "REL1")
        value = dict(hankel_residuals(C3, "REL1"))["C47-C66"]
        if abs(value - expected) > 1e-9:
            failures.append(f"REL1 b={b}: {value} vs {expected}")
    seq = rel2_family(1.0)
    C3 = compute_C3(seq, build_B3("REL2", seq, (0.2, 0.4)), "REL2")
    value = dict(hankel_residuals(C3, "REL2"))["C47-C66"]
    if abs(value - 4.5) > 1e-9:
        failures.append(f"REL2: {value} vs 4.5")
    seq = rel3_family(2.0)
    C3 = compute_C3(seq, build_B3("REL3", seq, (1.0, 1.0)), "REL3")
    if abs(C3[0, 5] - (-2.0)) > 1e-9:
        failures.append(f"REL3 C16 = {C3[0, 5]} vs -2")
    if abs(C3[1, 2] - (-1.0)) > 1e-9:
        failures.append(f"REL3 C23 = {C3[1, 2]} vs -1")
    _verdict(capsys, 3, "flat residual values", not failures, "; ".join(failures))


def test_criterion_4_y2_is_1_flat_point(capsys):
    failures = []
    for b in (1.2, 1.5, 1.8):
        result = flat_search(rel4_family(b), "REL4")
        if b != 1.5:
            if result.feasible:
                failures.append(f"b={b} unexpectedly flat")
            continue
        if not result.feasible:
            failures.append("b=1.5 not flat")
            continue
        p, q, r = result.params
        if abs(q) >= 1e-6:
            failures.append(f"q = {q}")
        if abs(p * p - 0.125) >= 1e-6:
            failures.append(f"p^2 = {p * p}")
        if abs(r * r - 0.5) >= 1e-6:
            failures.append(f"r^2 = {r * r}")
        ok, _ = is_psd(result.M3)
        if not ok or numerical_rank(result.M3) != 6:
            failures.append("M3 not PSD of rank 6")
    _verdict(capsys, 4, "Y^2 = 1 flat point", not failures, "; ".join(failures))


def test_criterion_5_roundtrip_property_suite(capsys):
    t0 = time.perf_counter()
    failures = []
    worst_err = 0.0
    worst_ann = 0.0
    for case in COMPLETE_CASES:
        for seed in range(200):
            mu, seq = gen_random(case, seed=seed)
            report = solve_pipeline(seq)
            if report.verdict != "exists" or report.measure is None:
                failures.append(f"{case}/{seed}: verdict {report.verdict}")
                continue
            err = report.reconstruction_error
            worst_err = max(worst_err, err)
            if err > 1e-8:
                failures.append(f"{case}/{seed}: error {err:.2e}")
            relations, _ = kernel_relations(build_moment_matrix(seq))
            for rel in relations:
                for atom in report.measure.atoms:
                    ann = np.abs(rel.evaluate(atom.A, atom.B)).max()
                    worst_ann = max(worst_ann, ann)
                    if ann > 1e-7:
                        failures.append(f"{case}/{seed}: annihilation {ann:.2e}")
            if len(failures) > 10:
                break
    elapsed = time.perf_counter() - t0
    if elapsed >= 60.0:
        failures.append(f"runtime {elapsed:.1f}s >= 60s")
    _verdict(capsys, 5, "roundtrip suite (200 x 7 cases)", not failures,
             f"({elapsed:.1f}s, worst error {worst_err:.2e}, "
             f"worst annihilation {worst_ann:.2e}) " + "; ".join(failures[:4]))


def test_criterion_6_minimal_type_classification(capsys):
    failures = []
    # BC2 boundary: type (1,1) exactly at beta_X4 = beta_X2^2/(1-|beta_Y|)
    by, bx2 = 0.2, 0.5
    seq = synthesize_case_sequence("BC2", bx=0, by=by, bx2=bx2,
                                   bx4=bx2 * bx2 / (1 - abs(by)))
    rep = solve_rank5("BC2", seq)
    if not (rep.exists and rep.minimal_type == (1, 1)):
        failures.append(f"BC2 boundary: {rep.minimal_type}")
    # BC1 symmetric: type (2,1) with two reported minimal measures
    seq = synthesize_case_sequence("BC1", bx=0, by=0, bx2=0.5, bx4=0.3)
    rep = solve_rank5("BC1", seq)
    if not (rep.exists and rep.minimal_type == (2, 1)):
        failures.append(f"BC1 symmetric type: {rep.minimal_type}")
    if rep.uniqueness != "two-measures" or rep.alternative_measure is None:
        failures.append("BC1 symmetric: second minimal measure not reported")
    # BC4 with beta_X != 0: no measure
    seq = synthesize_case_sequence("BC4", bx=0.05, by=0, bx2=0.5, bx4=0.4)
    rep = solve_rank5("BC4", seq)
    if rep.exists:
        failures.append("BC4 with beta_X != 0 must not admit a measure")
    _verdict(capsys, 6, "minimal-type classification", not failures, "; ".join(failures))


def test_criterion_7_documented_partial_verdicts(capsys, monkeypatch):
    failures = []
    # positive definite rank-7: informational existence, no construction
    rng = np.random.default_rng(5)
    atoms = []
    for w in (0.3, 0.3, 0.4):
        A, B = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
        from tracmom.moments import Atom
        atoms.append(Atom(A + A.T, B + B.T, w))
    seq = moments_from_measure(atoms)
    if numerical_rank(build_moment_matrix(seq)) == 7:
        report = solve_pipeline(seq)
        if not (report.verdict == "exists" and report.measure is None
                and report.case == "PD"):
            failures.append(f"PD verdict: {report.verdict}, "
                            f"constructed={report.constructed}")
    else:
        failures.append("could not build a rank-7 instance")
    # flat certificate without measure extraction: force the heuristics off
    import tracmom.rank6 as r6
    from tracmom.linalg import RankDropError

    def no_drop(M, D, cfg):
        raise RankDropError("disabled for the certificate test", 0.0)

    monkeypatch.setattr(r6, "smallest_rank_drop_alpha", no_drop)
    report = solve_rank6_rel2_rel4(rel4_family(1.5), "REL4")
    monkeypatch.undo()
    if not (report.verdict == "exists" and report.measure is None
            and report.method == "flat-certificate"):
        failures.append(f"flat certificate: {report.verdict}/{report.method}")
    # an unresolvable relation stays undetermined, never a fabricated measure
    seq = seq_from_betas(XX=1.0, YY=1.0, XY=0.4, XXXX=1.6, XXYY=1.0,
                         XYYY=0.4, XYXY=0.5, XXXY=0.3)
    report = solve_pipeline(seq)
    if report.verdict == "exists" and report.measure is not None \
            and report.reconstruction_error > 1e-8:
        failures.append("fabricated measure on an unresolved instance")
    _verdict(capsys, 7, "documented partial verdicts", not failures, "; ".join(failures))
