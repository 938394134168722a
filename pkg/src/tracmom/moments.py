"""Tracial moment sequences, moment matrices, and the trace oracle.

A degree-4 sequence stores one real number per canonical word of degree at
most 4 (16 classes).  The moment matrix of order 2 is the 7x7 matrix over the
word basis {1, X, Y, X^2, XY, YX, Y^2} whose (U, V) entry is beta_{U*V}.
Moments of an atomic measure are normalized traces, tr(.)/t for a size-t
atom, which makes them scale-free across atom sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .words import (
    ONE,
    canonical_word,
    canonical_words,
    degree,
    json_key_to_word,
    word_to_json_key,
)

#: row/column basis of the order-2 moment matrix, degree-lexicographic
BASIS2 = (ONE, "X", "Y", "XX", "XY", "YX", "YY")

DEG4_WORDS = canonical_words(4)
DEG6_WORDS = canonical_words(6)

_SYM_TOL = 1e-9


class MomentError(ValueError):
    """Invalid moment data: missing keys, conflicts, or degree overflow."""


@dataclass(frozen=True)
class Atom:
    """A pair of real symmetric t x t matrices with a positive density."""

    A: np.ndarray
    B: np.ndarray
    density: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if A.shape != B.shape or A.shape[0] != A.shape[1]:
            raise MomentError("atom matrices must be square and of equal size")
        scale = max(1.0, np.abs(A).max(initial=0.0), np.abs(B).max(initial=0.0))
        if np.abs(A - A.T).max(initial=0.0) > _SYM_TOL * scale:
            raise MomentError("atom matrix A is not symmetric")
        if np.abs(B - B.T).max(initial=0.0) > _SYM_TOL * scale:
            raise MomentError("atom matrix B is not symmetric")
        if not self.density > 0:
            raise MomentError("atom density must be positive")
        object.__setattr__(self, "A", 0.5 * (A + A.T))
        object.__setattr__(self, "B", 0.5 * (B + B.T))

    @property
    def size(self) -> int:
        return self.A.shape[0]

    def word_value(self, w: str) -> float:
        """Normalized trace of the word evaluated at (A, B)."""
        t = self.size
        if not w:
            return 1.0
        P = np.eye(t)
        for ch in w:
            P = P @ (self.A if ch == "X" else self.B)
        return float(np.trace(P)) / t

    def to_json(self) -> dict:
        return {"A": self.A.tolist(), "B": self.B.tolist(), "density": self.density}

    @staticmethod
    def from_json(obj: dict) -> "Atom":
        return Atom(np.array(obj["A"], dtype=float), np.array(obj["B"], dtype=float),
                    float(obj["density"]))

    @staticmethod
    def point(x: float, y: float, density: float) -> "Atom":
        return Atom(np.array([[float(x)]]), np.array([[float(y)]]), density)


@dataclass(frozen=True)
class Measure:
    """A density-weighted list of atoms; densities sum to one."""

    atoms: tuple[Atom, ...]

    def __init__(self, atoms, check_mass: bool = True):
        atoms = tuple(atoms)
        if not atoms:
            raise MomentError("measure needs at least one atom")
        if check_mass:
            mass = sum(a.density for a in atoms)
            if abs(mass - 1.0) > 1e-6:
                raise MomentError(f"densities must sum to 1, got {mass}")
        object.__setattr__(self, "atoms", atoms)

    @property
    def type(self) -> tuple[int, ...]:
        """(m_1, m_2, ..., m_r): number of atoms of each size, m_r != 0."""
        top = max(a.size for a in self.atoms)
        counts = [0] * top
        for a in self.atoms:
            counts[a.size - 1] += 1
        while counts and counts[-1] == 0:
            counts.pop()
        return tuple(counts)

    def to_json(self) -> dict:
        return {"atoms": [a.to_json() for a in self.atoms]}

    @staticmethod
    def from_json(obj: dict) -> "Measure":
        return Measure([Atom.from_json(a) for a in obj["atoms"]])


class MomentSequence:
    """Canonical map from words of degree <= 4 (or <= 6) to reals."""

    def __init__(self, entries: dict[str, float], degree_limit: int = 4):
        if degree_limit not in (4, 6):
            raise MomentError("degree limit must be 4 or 6")
        required = canonical_words(degree_limit)
        canon: dict[str, float] = {}
        for key, value in entries.items():
            w = canonical_word(json_key_to_word(str(key)))
            if degree(w) > degree_limit:
                raise MomentError(f"word {key!r} exceeds degree {degree_limit}")
            v = float(value)
            if w in canon:
                ref = canon[w]
                if abs(ref - v) > 1e-8 * max(1.0, abs(ref), abs(v)):
                    raise MomentError(
                        f"conflicting values for cyclically equivalent words at {w!r}: "
                        f"{ref} vs {v}")
            else:
                canon[w] = v
        missing = [w for w in required if w not in canon]
        if missing:
            raise MomentError(f"missing moments for {missing}")
        self._entries = {w: canon[w] for w in required}
        self.degree = degree_limit

    def __getitem__(self, w: str) -> float:
        key = canonical_word(json_key_to_word(w))
        if key not in self._entries:
            raise MomentError(f"word {w!r} exceeds stored degree {self.degree}")
        return self._entries[key]

    def moments(self) -> dict[str, float]:
        return dict(self._entries)

    @property
    def is_normalized(self) -> bool:
        return abs(self._entries[ONE] - 1.0) <= 1e-12

    def normalized(self) -> tuple["MomentSequence", float]:
        """Divide all moments by beta_1.  Rejects beta_1 <= 0."""
        b1 = self._entries[ONE]
        if b1 <= 0:
            raise MomentError(f"beta_1 must be positive, got {b1}")
        if b1 == 1.0:
            return self, 1.0
        return MomentSequence({w: v / b1 for w, v in self._entries.items()},
                              self.degree), b1

    def is_commutative(self, tol: float = 1e-8) -> bool:
        gap = abs(self["XXYY"] - self["XYXY"])
        scale = max(1.0, abs(self["XXYY"]), abs(self["XYXY"]))
        return gap <= tol * scale

    def riesz(self, poly: dict[str, float]) -> float:
        """Apply the Riesz functional to a polynomial given as word -> coeff."""
        total = 0.0
        for w, coeff in poly.items():
            total += coeff * self[w]
        return total

    def map_entries(self, fn) -> "MomentSequence":
        return MomentSequence({w: fn(w, v) for w, v in self._entries.items()}, self.degree)

    def subtract(self, other: "MomentSequence") -> "MomentSequence":
        return self.map_entries(lambda w, v: v - other[w])

    def scaled(self, factor: float) -> "MomentSequence":
        return self.map_entries(lambda w, v: v * factor)

    def truncate4(self) -> "MomentSequence":
        if self.degree == 4:
            return self
        return MomentSequence({w: self._entries[w] for w in DEG4_WORDS}, 4)

    def to_json(self) -> dict:
        return {"beta": {word_to_json_key(w): v for w, v in self._entries.items()}}

    @staticmethod
    def from_json(obj: dict, degree_limit: int = 4) -> "MomentSequence":
        if "beta" not in obj or not isinstance(obj["beta"], dict):
            raise MomentError('sequence JSON must carry a "beta" object')
        entries = {json_key_to_word(k): v for k, v in obj["beta"].items()}
        return MomentSequence(entries, degree_limit)

    def __repr__(self):
        return f"MomentSequence(degree={self.degree}, beta1={self._entries[ONE]:.6g})"


def classify_sequence(seq: MomentSequence, tol: float = 1e-8):
    """Normalize by beta_1 and flag the sequence as commutative or not.

    Returns (normalized sequence, "cm" | "nc").
    """
    norm, _ = seq.normalized()
    return norm, ("cm" if norm.is_commutative(tol) else "nc")


def build_moment_matrix(seq: MomentSequence) -> np.ndarray:
    """The 7x7 order-2 moment matrix with entry (U, V) = beta_{U*V}."""
    n = len(BASIS2)
    M = np.empty((n, n))
    for i, u in enumerate(BASIS2):
        for j, v in enumerate(BASIS2):
            M[i, j] = seq[u[::-1] + v]
    return M


_MATRIX_READOUT = {
    ONE: (0, 0), "X": (0, 1), "Y": (0, 2), "XX": (0, 3), "XY": (0, 4),
    "YY": (0, 6), "XXX": (1, 3), "XXY": (1, 4), "XYY": (1, 6), "YYY": (2, 6),
    "XXXX": (3, 3), "XXXY": (3, 4), "XXYY": (3, 6), "XYXY": (4, 5),
    "XYYY": (4, 6), "YYYY": (6, 6),
}


def sequence_from_matrix(M: np.ndarray) -> MomentSequence:
    """Read a degree-4 sequence back from a 7x7 moment matrix."""
    M = np.asarray(M, dtype=float)
    return MomentSequence({w: M[i, j] for w, (i, j) in _MATRIX_READOUT.items()}, 4)


def moments_from_measure(mu: Measure | list[Atom], degree_limit: int = 4) -> MomentSequence:
    """Exact trace moments of a measure; the verification oracle for solver output.

    beta_w = sum_i lambda_i Tr(w(A_i, B_i)) with the normalized trace.
    """
    atoms = mu.atoms if isinstance(mu, Measure) else tuple(mu)
    entries = {}
    for w in canonical_words(degree_limit):
        entries[w] = sum(a.density * a.word_value(w) for a in atoms)
    return MomentSequence(entries, degree_limit)


def point_moment_matrix(x: float, y: float) -> np.ndarray:
    """Moment matrix of the size-1 atom (x, y) with unit density."""
    seq = moments_from_measure([Atom.point(x, y, 1.0)], 4)
    return build_moment_matrix(seq)


def reconstruction_error(seq: MomentSequence, mu: Measure) -> float:
    """Max absolute moment mismatch between a sequence and a measure."""
    recon = moments_from_measure(mu, 4)
    ref = seq.truncate4()
    return max(abs(ref[w] - recon[w]) for w in DEG4_WORDS)
