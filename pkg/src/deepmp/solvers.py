"""Greedy non-negative pursuit solvers.

Two reference algorithms operate on a fixed dictionary:

* ``nnmp_solve``  plain matching pursuit with a positivity loop guard and a
  projected residual update. Selected coefficients are raw correlations, so
  an atom may be picked repeatedly.
* ``nnomp_solve`` orthogonal variant: same greedy selection, but every step
  refits all selected coefficients with active-set non-negative least squares
  and recomputes the residual from the refit. Never re-selects an atom.

Both share the unrolled pursuit loop that also powers trained models: the
selection score comes from a per-step selection matrix, while the residual
update always uses the dictionary atom, so swapping the selection matrices
changes which atom is picked but never how the residual evolves.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, EmptyInput, MaxIterationsExceeded
from .types import Dictionary

#: stop pursuing once the residual is numerical dust
RESIDUAL_FLOOR = 1e-12


class ProjectionMode(Enum):
    """Residual-update operator: identity or entrywise clamp at zero."""

    IDENTITY = "identity"
    POSITIVE_ORTHANT = "positive"


def project(values: np.ndarray, mode: ProjectionMode) -> np.ndarray:
    if mode is ProjectionMode.POSITIVE_ORTHANT:
        return np.maximum(values, 0.0)
    return values


@dataclass(frozen=True)
class PursuitResult:
    """Outcome of one pursuit run.

    ``support`` lists atom indices in selection order (repeats possible for
    plain MP). ``residual_norm_path`` holds the residual norm before the first
    step and after every completed step, so it has ``steps_taken + 1`` entries.
    ``steps_taken`` falls short of the budget only when a stopping test fired.
    """

    code: np.ndarray
    support: np.ndarray
    residual: np.ndarray
    steps_taken: int
    residual_norm_path: np.ndarray


def hard_max(scores) -> tuple[float, int]:
    """Largest entry of a score vector and its index; ties go to the lowest index."""
    s = np.asarray(scores)
    if s.size == 0:
        raise EmptyInput("hard_max needs at least one score")
    index = int(np.argmax(s))
    return float(s[index]), index


def unrolled_pursuit(selection_mats, atoms: np.ndarray, y, depth: int,
                     proj: ProjectionMode) -> PursuitResult:
    """Run ``depth`` pursuit steps driven by per-step selection matrices.

    Step k scores the residual with ``selection_mats[k].T @ r`` and hard-max
    picks the winner; the subtracted coefficient is the winner's dictionary
    correlation ``atoms[:, i] @ r`` so the update is the fixed-dictionary rule
    regardless of what drove the selection. Stops early when the residual is
    below ``RESIDUAL_FLOOR`` or no score is strictly positive.
    """
    rows, cols = atoms.shape
    r = np.array(y, dtype=np.float64)
    if r.shape != (rows,):
        raise DimensionMismatch(f"signal shape {r.shape}, expected ({rows},)")
    code = np.zeros(cols)
    support: list[int] = []
    norm_path = [float(np.linalg.norm(r))]
    for k in range(depth):
        if norm_path[-1] < RESIDUAL_FLOOR:
            break
        score, index = hard_max(selection_mats[k].T @ r)
        if score <= 0.0:
            break
        coeff = float(atoms[:, index] @ r)
        if coeff <= 0.0:
            # score and correlation can straddle zero only at float-noise level
            break
        code[index] += coeff
        support.append(index)
        r = project(r - coeff * atoms[:, index], proj)
        norm_path.append(float(np.linalg.norm(r)))
    return PursuitResult(
        code=code,
        support=np.array(support, dtype=np.int64),
        residual=r,
        steps_taken=len(support),
        residual_norm_path=np.array(norm_path),
    )


def nnmp_solve(dictionary: Dictionary, y, budget: int,
               proj: ProjectionMode = ProjectionMode.POSITIVE_ORTHANT) -> PursuitResult:
    """Non-negative matching pursuit.

    Repeats up to ``budget`` times: pick the atom with the largest correlation
    against the current residual (must be strictly positive to continue),
    accumulate that correlation as its coefficient, subtract the contribution
    and project the residual.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    atoms = dictionary.atoms
    return unrolled_pursuit([atoms] * budget, atoms, y, budget, proj)


def nnls_active_set(columns, target, max_iter: int | None = None) -> np.ndarray:
    """Active-set (Lawson-Hanson) non-negative least squares.

    Minimizes ``||columns @ x - target||_2`` over ``x >= 0``. Assumes full
    column rank; callers restrict to at most ``signal_dim`` columns. At the
    solution the KKT conditions hold: the gradient is ~0 on positive
    coordinates and non-negative on zero coordinates.

    Raises MaxIterationsExceeded past the iteration cap (default three times
    the number of columns, counting both insertions and backtracks).
    """
    a = np.asarray(columns, dtype=np.float64)
    b = np.asarray(target, dtype=np.float64)
    if a.ndim != 2 or b.shape != (a.shape[0],):
        raise DimensionMismatch(
            f"incompatible shapes {a.shape} and {b.shape} for NNLS"
        )
    n = a.shape[1]
    cap = 3 * n if max_iter is None else max_iter
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    grad_tol = 1e-12 * max(1.0, float(np.abs(a.T @ b).max()))
    iterations = 0
    while True:
        w = a.T @ (b - a @ x)  # negative gradient
        w_free = np.where(passive, -np.inf, w)
        if passive.all() or w_free.max() <= grad_tol:
            return x
        iterations += 1
        if iterations > cap:
            raise MaxIterationsExceeded(f"NNLS did not converge in {cap} iterations")
        passive[int(np.argmax(w_free))] = True
        while True:
            z = np.zeros(n)
            z[passive] = np.linalg.lstsq(a[:, passive], b, rcond=None)[0]
            if z[passive].min() > 0.0:
                x = z
                break
            # step back to the feasibility boundary, release blocking columns
            blocking = passive & (z <= 0.0)
            alpha = float(np.min(x[blocking] / (x[blocking] - z[blocking])))
            x = x + alpha * (z - x)
            passive &= x > 1e-14
            x[~passive] = 0.0
            iterations += 1
            if iterations > cap:
                raise MaxIterationsExceeded(
                    f"NNLS did not converge in {cap} iterations"
                )


def nnomp_solve(dictionary: Dictionary, y, budget: int) -> PursuitResult:
    """Orthogonal non-negative pursuit with a full NNLS refit per step.

    Selection is identical to ``nnmp_solve`` but restricted to atoms not yet
    selected; after each pick all selected coefficients are refit by
    :func:`nnls_active_set` against the original signal and the residual is
    recomputed from the refit (no projection needed, the refit residual is
    used directly).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    atoms = dictionary.atoms
    rows, cols = atoms.shape
    y = np.array(y, dtype=np.float64)
    if y.shape != (rows,):
        raise DimensionMismatch(f"signal shape {y.shape}, expected ({rows},)")
    r = y.copy()
    selected: list[int] = []
    coeffs = np.zeros(0)
    free = np.ones(cols, dtype=bool)
    norm_path = [float(np.linalg.norm(r))]
    for _ in range(budget):
        if norm_path[-1] < RESIDUAL_FLOOR:
            break
        free_idx = np.flatnonzero(free)
        if free_idx.size == 0:
            break
        scores = atoms.T @ r
        score, local = hard_max(scores[free_idx])
        if score <= 0.0:
            break
        index = int(free_idx[local])
        selected.append(index)
        free[index] = False
        coeffs = nnls_active_set(atoms[:, selected], y)
        r = y - atoms[:, selected] @ coeffs
        norm_path.append(float(np.linalg.norm(r)))
    code = np.zeros(cols)
    if selected:
        code[np.array(selected)] = coeffs
    return PursuitResult(
        code=code,
        support=np.array(selected, dtype=np.int64),
        residual=r,
        steps_taken=len(selected),
        residual_norm_path=np.array(norm_path),
    )
