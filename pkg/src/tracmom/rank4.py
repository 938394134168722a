"""Complete solution of the rank-4 case.

A PSD rank-4 nc moment matrix admits a representing measure exactly when its
column-relation coefficients satisfy c1 = b3 = 0, b2 = c3, c2 = b1; the
minimal measure is then a single size-2 atom, unique up to orthogonal
equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, ToleranceConfig
from .moments import Atom, Measure, MomentSequence, reconstruction_error
from .transforms import (
    MeasureObstruction,
    ReductionError,
    TransformChain,
    reduce_rank4,
)


@dataclass
class Rank4Report:
    exists: bool
    atom: Atom | None = None
    a: float | None = None
    chain: TransformChain | None = None
    uniqueness: str = "unique up to orthogonal equivalence"
    reconstruction_error: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def measure(self) -> Measure | None:
        return Measure([self.atom]) if self.atom is not None else None


def canonical_atom(a: float) -> Atom:
    """The representing atom of the canonical matrix with X^2 = Y^2 = 1 and
    XY + YX = a*1, with the positive off-diagonal sign convention."""
    k2 = 0.5 * np.sqrt(4.0 - a * a)
    X = np.diag([1.0, -1.0])
    Y = np.array([[a / 2.0, k2], [k2, -a / 2.0]])
    return Atom(X, Y, 1.0)


def solve_rank4(seq: MomentSequence, cfg: ToleranceConfig = DEFAULT_TOL) -> Rank4Report:
    """Decide existence and construct the unique size-2 atom when it exists."""
    seq, _ = seq.normalized()
    try:
        a, chain, diag = reduce_rank4(seq, cfg)
    except MeasureObstruction as obs:
        return Rank4Report(exists=False,
                           diagnostics={"violated_condition": obs.condition,
                                        "detail": str(obs)})
    atom = chain.pull_back_atom(canonical_atom(a))
    measure = Measure([atom])
    err = reconstruction_error(seq, measure)
    diag["construction"] = "rank-4 single-atom"
    if err > cfg.match_tol:
        raise ReductionError(
            f"rank-4 reconstruction failed: moment mismatch {err:.3g}")
    return Rank4Report(exists=True, atom=atom, a=a, chain=chain,
                       reconstruction_error=err, diagnostics=diag)
