"""Shared mathematical objects: dictionaries, signals, codes, supports, samples.

All numerics are float64. Atom matrices are kept column-contiguous (Fortran
order) because the hot kernel everywhere is the correlation ``atoms.T @ r``,
one dot product per atom, which walks columns.

Conventions for the lightweight aliases:

* ``Signal``     1-D float vector of length ``signal_dim``.
* ``SparseCode`` 1-D float vector of length ``num_atoms``; pursuit results
  are non-negative with at most ``budget`` nonzeros.
* ``SupportSet`` 1-D int vector of atom indices in selection order; plain
  matching pursuit may select the same atom more than once, so repeats are
  allowed and order is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NotNormalized,
    NotOvercomplete,
    ParseError,
)

#: validation gate on column norms
NORM_TOL = 1e-6
#: tolerance for equality assertions on reconstructed signals
EQ_TOL = 1e-9

Signal = np.ndarray
SparseCode = np.ndarray
SupportSet = np.ndarray


@dataclass(frozen=True)
class Dictionary:
    """Overcomplete non-negative generative model; columns are unit-norm atoms.

    Construct via :func:`validate_dictionary` so the invariants hold. The atom
    matrix is frozen (read-only) after construction and safe to share across
    threads.
    """

    atoms: np.ndarray

    @property
    def signal_dim(self) -> int:
        return self.atoms.shape[0]

    @property
    def num_atoms(self) -> int:
        return self.atoms.shape[1]

    def atom(self, index: int) -> np.ndarray:
        return self.atoms[:, index]


@dataclass(frozen=True)
class Sample:
    """A noiseless mixture together with the ground truth that generated it.

    ``signal`` equals the weighted sum of the ``true_support`` atoms with
    weights ``true_coeffs`` (all strictly positive); ``true_support`` holds
    ``sparsity`` distinct atom indices.
    """

    signal: np.ndarray
    true_support: np.ndarray
    true_coeffs: np.ndarray
    sparsity: int


def validate_dictionary(atoms) -> Dictionary:
    """Check the dictionary invariants and freeze the atom matrix.

    Requirements: a non-empty 2-D matrix with strictly more columns (atoms)
    than rows (signal dimensions), non-negative entries, and unit Euclidean
    column norms within ``NORM_TOL``.
    """
    a = np.array(atoms, dtype=np.float64, order="F")
    if a.ndim != 2 or a.size == 0:
        raise DimensionMismatch(
            f"expected a non-empty 2-D matrix, got shape {np.shape(atoms)}"
        )
    rows, cols = a.shape
    if rows >= cols:
        raise NotOvercomplete(f"need signal_dim < num_atoms, got {rows}x{cols}")
    if np.any(a < 0.0):
        raise NegativeEntry("dictionary entries must be non-negative")
    norms = np.linalg.norm(a, axis=0)
    bad = np.flatnonzero(~(np.abs(norms - 1.0) <= NORM_TOL))
    if bad.size:
        raise NotNormalized(f"column {bad[0]} has norm {norms[bad[0]]!r}")
    a.flags.writeable = False
    return Dictionary(a)


def synthesize(dictionary: Dictionary, code) -> Signal:
    """Reconstruct the signal ``atoms @ code`` for a full-length code vector.

    Linear in the code; the code may carry any sign here, non-negativity is a
    property of pursuit outputs, not of the synthesis map.
    """
    c = np.asarray(code, dtype=np.float64)
    if c.shape != (dictionary.num_atoms,):
        raise DimensionMismatch(
            f"code length {c.shape} does not match {dictionary.num_atoms} atoms"
        )
    return dictionary.atoms @ c


def distinct_support(support) -> np.ndarray:
    """Sorted distinct atom indices of a (possibly repeating) support."""
    return np.unique(np.asarray(support, dtype=np.int64))


# -- CSV serialization --------------------------------------------------------
#
# One row per signal dimension, comma-separated columns are atoms. An optional
# first header line is ignored when it fails numeric parse. Values are written
# with shortest round-trip formatting, so save/load is bit-exact.


def read_csv_matrix(path) -> np.ndarray:
    """Parse a dense numeric CSV matrix, skipping one optional header line."""
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                values = [float(c) for c in cells]
            except ValueError:
                if lineno == 1:
                    continue  # header
                col = next(i for i, c in enumerate(cells) if not _is_float(c))
                raise ParseError(
                    f"{path}: row {lineno}, column {col + 1}: "
                    f"{cells[col].strip()!r} is not numeric"
                ) from None
            if rows and len(values) != len(rows[0]):
                raise ParseError(
                    f"{path}: row {lineno} has {len(values)} cells, "
                    f"expected {len(rows[0])}"
                )
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no numeric rows")
    return np.array(rows, dtype=np.float64)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def save_dictionary_csv(dictionary: Dictionary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in dictionary.atoms:
            fh.write(",".join(repr(v) for v in row.tolist()))
            fh.write("\n")


def load_dictionary_csv(path) -> Dictionary:
    """Load a dictionary written by :func:`save_dictionary_csv` (strict)."""
    return validate_dictionary(read_csv_matrix(path))
