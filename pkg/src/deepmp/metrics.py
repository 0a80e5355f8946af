"""Evaluation metrics and the sweep harness.

* support recovery: normalized Hamming-distance complement, reduced to the
  fraction of ground-truth atoms recovered (duplicate selections collapse to
  distinct indices before intersecting);
* relative reconstruction error: mean of ||y - reconstruction|| / ||y||;
* mutual coherence of a matrix and the empirical CDF of all pairwise column
  coherences on a grid over [0, 1].

``run_sweep`` draws fresh test mixtures per sparsity level (stream disjoint
from training by construction) and aggregates both metrics per solver.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .datagen import MixtureConfig, sample_mixture
from .errors import (
    DimensionMismatch,
    MissingModel,
    ZeroColumn,
    ZeroSignal,
    ZeroSparsity,
)
from .network import UnfoldedModel, forward_infer
from .seeding import TEST_STREAM, child_seed
from .solvers import ProjectionMode, PursuitResult, nnmp_solve, nnomp_solve
from .types import Dictionary, Sample, distinct_support

#: default ECDF grid resolution over [0, 1]
ECDF_GRID_POINTS = 200
#: default number of test mixtures per sparsity level
DEFAULT_NUM_TEST = 5000

SweepSolver = Callable[[np.ndarray, int], PursuitResult]


def hamming_complement(acquired, truth, sparsity: int) -> float:
    """Fraction of ground-truth atoms recovered, in [0, 1].

    Duplicate selections count once; ``truth`` is assumed to hold ``sparsity``
    distinct indices.
    """
    if sparsity < 1:
        raise ZeroSparsity("sparsity must be >= 1")
    found = np.intersect1d(distinct_support(acquired), distinct_support(truth))
    return found.size / sparsity


def raw_hamming_sum(acquired, truth, sparsity: int, num_atoms: int) -> float:
    """Audit-only unnormalized variant over indicator vectors.

    Sums ``1 - |a_n - g_n| / sparsity`` over all atom positions, where a and g
    are 0/1 membership indicators. Not confined to [0, 1]; exposed only so the
    normalized metric can be audited against it.
    """
    if sparsity < 1:
        raise ZeroSparsity("sparsity must be >= 1")
    a = np.zeros(num_atoms)
    g = np.zeros(num_atoms)
    a[distinct_support(acquired)] = 1.0
    g[distinct_support(truth)] = 1.0
    return float(np.sum(1.0 - np.abs(a - g) / sparsity))


def epsilon_error(dictionary: Dictionary, samples, codes) -> float:
    """Mean relative residual norm of reconstructions over aligned lists."""
    samples = list(samples)
    codes = list(codes)
    if len(samples) != len(codes):
        raise DimensionMismatch(
            f"{len(samples)} samples vs {len(codes)} codes"
        )
    total = 0.0
    for sample, code in zip(samples, codes):
        norm = np.linalg.norm(sample.signal)
        if norm == 0.0:
            raise ZeroSignal("relative error undefined for a zero signal")
        total += np.linalg.norm(sample.signal - dictionary.atoms @ code) / norm
    return float(total / len(samples))


def _normalized_columns(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] < 2:
        raise DimensionMismatch("coherence needs a 2-D matrix with >= 2 columns")
    norms = np.linalg.norm(m, axis=0)
    if np.any(norms == 0.0):
        raise ZeroColumn(f"column {int(np.flatnonzero(norms == 0.0)[0])} is zero")
    return m / norms


def pairwise_coherences(matrix) -> np.ndarray:
    """Normalized absolute inner products of all unordered column pairs.

    Clipped into [0, 1]; the input is normalized internally, never modified.
    """
    normed = _normalized_columns(matrix)
    gram = normed.T @ normed
    iu = np.triu_indices(gram.shape[0], k=1)
    return np.clip(np.abs(gram[iu]), 0.0, 1.0)


def coherence(matrix) -> float:
    """Largest pairwise column coherence (the mutual coherence)."""
    return float(pairwise_coherences(matrix).max())


def coherence_ecdf(matrix, grid=None) -> list[tuple[float, float]]:
    """Fraction of column pairs with coherence <= t, for each grid point t."""
    if grid is None:
        grid = np.linspace(0.0, 1.0, ECDF_GRID_POINTS)
    pairs = np.sort(pairwise_coherences(matrix))
    counts = np.searchsorted(pairs, np.asarray(grid, dtype=np.float64),
                             side="right")
    return [(float(t), float(c) / pairs.size) for t, c in zip(grid, counts)]


# -- sweep harness ------------------------------------------------------------------


@dataclass
class MetricsReport:
    """Per-sparsity recovery and reconstruction error for one solver."""

    solver: str
    num_test: int
    recovery: dict[int, float] = field(default_factory=dict)
    epsilon: dict[int, float] = field(default_factory=dict)
    ecdf_samples: list[tuple[float, float]] = field(default_factory=list)


def nnmp_runner(dictionary: Dictionary,
                proj: ProjectionMode = ProjectionMode.POSITIVE_ORTHANT) -> SweepSolver:
    return lambda y, k: nnmp_solve(dictionary, y, k, proj)


def nnomp_runner(dictionary: Dictionary) -> SweepSolver:
    return lambda y, k: nnomp_solve(dictionary, y, k)


def deepmp_runner(models: Mapping[int, UnfoldedModel]) -> SweepSolver:
    """Dispatch to one trained model per sparsity level."""
    models = dict(models)

    def run(y: np.ndarray, k: int) -> PursuitResult:
        if k not in models:
            raise MissingModel(f"no trained model for sparsity {k}")
        return forward_infer(models[k], y)

    return run


def run_sweep(dictionary: Dictionary, solvers: Mapping[str, SweepSolver],
              k_range, num_test: int, seed: int,
              ecdf_grid=None) -> dict[str, MetricsReport]:
    """Evaluate every solver on fresh test mixtures at each sparsity level.

    Each solver runs with budget equal to the mixture sparsity; all solvers
    see identical test sets. Reports carry the dictionary's coherence ECDF.
    """
    ecdf = coherence_ecdf(dictionary.atoms, ecdf_grid)
    reports = {
        label: MetricsReport(solver=label, num_test=num_test, ecdf_samples=ecdf)
        for label in solvers
    }
    for k in k_range:
        samples = sample_mixture(
            dictionary,
            MixtureConfig(sparsity=k, num_samples=num_test,
                          seed=child_seed(seed, TEST_STREAM, k)),
        )
        for label, solve in solvers.items():
            results = [solve(s.signal, k) for s in samples]
            reports[label].recovery[k] = float(np.mean([
                hamming_complement(res.support, s.true_support, k)
                for res, s in zip(results, samples)
            ]))
            reports[label].epsilon[k] = epsilon_error(
                dictionary, samples, [res.code for res in results]
            )
    return reports


# -- report files -------------------------------------------------------------------


def write_metrics_csv(reports: Mapping[str, MetricsReport], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("solver,k,recovery,epsilon\n")
        for label in sorted(reports):
            report = reports[label]
            for k in sorted(report.recovery):
                fh.write(
                    f"{label},{k},{report.recovery[k]!r},{report.epsilon[k]!r}\n"
                )


def write_metrics_json(reports: Mapping[str, MetricsReport], path) -> None:
    payload = {
        label: {
            "solver": rep.solver,
            "num_test": rep.num_test,
            "recovery": {str(k): v for k, v in sorted(rep.recovery.items())},
            "epsilon": {str(k): v for k, v in sorted(rep.epsilon.items())},
        }
        for label, rep in reports.items()
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_ecdf_csv(points, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,fraction\n")
        for t, fraction in points:
            fh.write(f"{t!r},{fraction!r}\n")
