import numpy as np
import pytest

from tracmom.moments import Atom, MomentSequence


def canonical_rank4_matrix(a: float) -> np.ndarray:
    """The rank-4 moment matrix with relations X^2 = 1, XY + YX = a*1, Y^2 = 1."""
    h = a / 2.0
    k = a * a / 2.0 - 1.0
    return np.array([
        [1, 0, 0, 1, h, h, 1],
        [0, 1, h, 0, 0, 0, 0],
        [0, h, 1, 0, 0, 0, 0],
        [1, 0, 0, 1, h, h, 1],
        [h, 0, 0, h, 1, k, h],
        [h, 0, 0, h, k, 1, h],
        [1, 0, 0, 1, h, h, 1],
    ], dtype=float)


def canonical_rank4_sequence(a: float) -> MomentSequence:
    h = a / 2.0
    return MomentSequence({
        "1": 1.0, "X": 0.0, "Y": 0.0, "XX": 1.0, "XY": h, "YY": 1.0,
        "XXX": 0.0, "XXY": 0.0, "XYY": 0.0, "YYY": 0.0,
        "XXXX": 1.0, "XXXY": h, "XXYY": 1.0, "XYXY": a * a / 2.0 - 1.0,
        "XYYY": h, "YYYY": 1.0,
    })


def seq_from_betas(**betas) -> MomentSequence:
    """Build a degree-4 sequence from keyword moments, defaulting zeros.

    beta_1 defaults to 1.  Keys use JSON spelling: X, XX, XY, XXXY, ...
    """
    base = {w: 0.0 for w in
            ("X", "Y", "XX", "XY", "YY", "XXX", "XXY", "XYY", "YYY",
             "XXXX", "XXXY", "XXYY", "XYXY", "XYYY", "YYYY")}
    base["1"] = 1.0
    for key, value in betas.items():
        name = "1" if key == "one" else key
        if name not in base:
            raise KeyError(name)
        base[name] = float(value)
    return MomentSequence(base)


def anticommuting_atom(c1: float, c2: float, density: float) -> Atom:
    """Size-2 trace-zero pair X = c1*diag(1,-1), Y = c2*offdiag(1,1)."""
    return Atom(np.diag([c1, -c1]), np.array([[0.0, c2], [c2, 0.0]]), density)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
