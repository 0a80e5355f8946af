"""Unfolded pursuit network with trainable selection matrices.

The model unrolls ``depth`` pursuit steps. Each step k owns a trainable
selection matrix ``W_k`` of the dictionary's shape; inference scores the
residual with ``W_k.T @ r`` and hard-max picks the atom, while the residual
update stays the fixed-dictionary rule (subtract the picked atom scaled by its
dictionary correlation, then project). With every ``W_k`` initialized to the
dictionary the network reproduces plain matching pursuit bit for bit, so
training can only move it away from that baseline.

Training treats each step as an atom classification problem: the hard-max is
relaxed to a softmax over the selection scores and each layer is penalized
with cross entropy against a teacher target. Teacher forcing advances the
residual with the ground-truth atom (the best remaining true atom by
dictionary correlation), so layer k trains on the residual distribution it
would see at inference when the earlier layers are right. Because the teacher
residuals never depend on the weights, the loss gradient is the closed-form
softmax cross-entropy expression per layer and no backpropagation through the
recursion is needed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyBatch,
    ParseError,
    ShapeMismatch,
    SparsityMismatch,
)
from .solvers import (
    RESIDUAL_FLOOR,
    ProjectionMode,
    PursuitResult,
    project,
    unrolled_pursuit,
)
from .types import Dictionary, Sample

_MAGIC = b"DMP1"


@dataclass
class UnfoldedModel:
    """K trainable selection matrices plus the fixed dictionary they unroll.

    ``selection_weights[k]`` drives the atom choice at step k and is the only
    trainable state; ``update_dict`` is used verbatim in every residual
    update. Total trainable parameters: depth * signal_dim * num_atoms.
    """

    selection_weights: list[np.ndarray]
    update_dict: Dictionary
    proj: ProjectionMode = ProjectionMode.POSITIVE_ORTHANT

    def __post_init__(self) -> None:
        shape = self.update_dict.atoms.shape
        for k, w in enumerate(self.selection_weights):
            if w.shape != shape:
                raise ShapeMismatch(
                    f"selection matrix {k} has shape {w.shape}, expected {shape}"
                )

    @property
    def depth(self) -> int:
        return len(self.selection_weights)

    @property
    def signal_dim(self) -> int:
        return self.update_dict.signal_dim

    @property
    def num_atoms(self) -> int:
        return self.update_dict.num_atoms

    def parameter_count(self) -> int:
        return sum(w.size for w in self.selection_weights)


def init_from_dictionary(dictionary: Dictionary, depth: int,
                         proj: ProjectionMode = ProjectionMode.POSITIVE_ORTHANT
                         ) -> UnfoldedModel:
    """Model whose every selection matrix is an independent copy of the dictionary."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    weights = [np.array(dictionary.atoms, order="F") for _ in range(depth)]
    return UnfoldedModel(selection_weights=weights, update_dict=dictionary, proj=proj)


def forward_infer(model: UnfoldedModel, y) -> PursuitResult:
    """Hard-max inference; shape-identical to plain matching pursuit."""
    return unrolled_pursuit(
        model.selection_weights, model.update_dict.atoms, y, model.depth, model.proj
    )


# -- training ------------------------------------------------------------------


@dataclass
class TrainingBatch:
    """Samples of sparsity = depth with their per-step teacher targets.

    ``targets[i]`` is the ordered list of ground-truth atom indices for sample
    i, one per layer; it is a permutation of the sample's true support chosen
    by the teacher (greedy best remaining atom). Targets depend only on the
    dictionary, never on the trainable weights.
    """

    samples: list[Sample]
    targets: np.ndarray

    def __len__(self) -> int:
        return len(self.samples)


@dataclass
class ForwardTrace:
    """Per-layer training quantities for one sample.

    ``probs`` holds softmax distributions for the layers that received a loss
    term (all of them unless the residual died early); ``residuals`` holds the
    teacher-forced path r_0 .. r_K including the final residual; ``targets``
    always has ``depth`` entries.
    """

    probs: list[np.ndarray]
    residuals: list[np.ndarray]
    targets: np.ndarray


def _check_sample(model: UnfoldedModel, sample: Sample) -> None:
    if sample.sparsity != model.depth:
        raise SparsityMismatch(
            f"sample sparsity {sample.sparsity} != model depth {model.depth}"
        )
    if sample.signal.shape != (model.signal_dim,):
        raise DimensionMismatch(
            f"signal shape {sample.signal.shape}, expected ({model.signal_dim},)"
        )


def build_training_batch(model: UnfoldedModel, samples) -> TrainingBatch:
    """Compute teacher target order for every sample (vectorized).

    At each step the teacher picks, among the sample's not-yet-used true
    atoms, the one with the largest dictionary correlation against the current
    teacher residual (ties to the earliest support position), then applies the
    fixed-dictionary update. Every sample always receives exactly ``depth``
    targets even if its residual dies early.
    """
    samples = list(samples)
    if not samples:
        raise EmptyBatch("no samples")
    for s in samples:
        _check_sample(model, s)
    atoms = model.update_dict.atoms
    depth = model.depth
    batch = len(samples)
    signals = np.stack([s.signal for s in samples])  # (B, M)
    candidates = np.stack([s.true_support for s in samples])  # (B, depth)

    residuals = signals.copy()
    used = np.zeros((batch, depth), dtype=bool)
    targets = np.zeros((batch, depth), dtype=np.int64)
    rows = np.arange(batch)
    for step in range(depth):
        # correlations of each sample's true atoms with its current residual
        cand_atoms = atoms[:, candidates]  # (M, B, depth)
        corr = np.einsum("mbk,bm->bk", cand_atoms, residuals)
        corr[used] = -np.inf
        pick = np.argmax(corr, axis=1)
        chosen = candidates[rows, pick]
        used[rows, pick] = True
        targets[:, step] = chosen
        picked_atoms = atoms[:, chosen]  # (M, B)
        coeff = np.einsum("mb,bm->b", picked_atoms, residuals)
        residuals = project(residuals - coeff[:, None] * picked_atoms.T, model.proj)
    return TrainingBatch(samples=samples, targets=targets)


def forward_train(model: UnfoldedModel, sample: Sample) -> ForwardTrace:
    """Teacher-forced forward pass for one sample.

    Layers whose incoming residual norm is below ``RESIDUAL_FLOOR`` are
    skipped (no softmax emitted), matching the loss computation.
    """
    _check_sample(model, sample)
    batch = build_training_batch(model, [sample])
    targets = batch.targets[0]
    atoms = model.update_dict.atoms
    r = np.array(sample.signal, dtype=np.float64)
    probs: list[np.ndarray] = []
    residuals = [r.copy()]
    for k in range(model.depth):
        if np.linalg.norm(r) < RESIDUAL_FLOOR:
            break
        scores = model.selection_weights[k].T @ r
        probs.append(_softmax(scores))
        t = targets[k]
        coeff = float(atoms[:, t] @ r)
        r = project(r - coeff * atoms[:, t], model.proj)
        residuals.append(r.copy())
    return ForwardTrace(probs=probs, residuals=residuals, targets=targets)


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max()
    e = np.exp(z)
    return e / e.sum()


def loss_and_gradient(model: UnfoldedModel, batch: TrainingBatch
                      ) -> tuple[float, list[np.ndarray]]:
    """Cross-entropy loss over all layers and its closed-form gradients.

    Loss is the per-sample sum over live layers of -log softmax(target),
    averaged over the batch; the gradient for layer k is therefore the batch
    mean of outer(residual_k, softmax_k - onehot(target_k)), with samples
    whose residual died before layer k contributing nothing.
    """
    if len(batch) == 0:
        raise EmptyBatch("no samples")
    for s in batch.samples:
        _check_sample(model, s)
    atoms = model.update_dict.atoms
    depth = model.depth
    batch_size = len(batch)
    signals = np.stack([s.signal for s in batch.samples])  # (B, M)
    targets = batch.targets

    residuals = signals.copy()
    live = np.ones(batch_size, dtype=bool)
    loss = 0.0
    grads = [np.zeros_like(w) for w in model.selection_weights]
    for k in range(depth):
        live = live & (np.linalg.norm(residuals, axis=1) >= RESIDUAL_FLOOR)
        if not live.any():
            break
        r_live = residuals[live]  # (L, M)
        t_live = targets[live, k]
        scores = r_live @ model.selection_weights[k]  # (L, N)
        scores -= scores.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(scores).sum(axis=1))
        rows = np.arange(r_live.shape[0])
        loss += float((log_norm - scores[rows, t_live]).sum()) / batch_size
        p = np.exp(scores - log_norm[:, None])
        p[rows, t_live] -= 1.0
        grads[k] += (r_live.T @ p) / batch_size
        # teacher-forced residual update for every sample (dead rows are inert)
        picked_atoms = atoms[:, targets[:, k]]  # (M, B)
        coeff = np.einsum("mb,bm->b", picked_atoms, residuals)
        residuals = project(residuals - coeff[:, None] * picked_atoms.T, model.proj)
    return loss, grads


# -- batched inference -----------------------------------------------------------


def batched_infer(model: UnfoldedModel, signals: np.ndarray
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Hard-max inference over a stack of signals (rows).

    Returns ``(supports, codes)`` where ``supports`` is (batch, depth) with -1
    padding after early stops. Follows the same stopping rules as
    :func:`forward_infer`; it is a throughput path for validation and sweeps
    over many signals, not a bit-exact replacement for the per-sample solver.
    """
    signals = np.asarray(signals, dtype=np.float64)
    if signals.ndim != 2 or signals.shape[1] != model.signal_dim:
        raise DimensionMismatch(
            f"signals shape {signals.shape}, expected (*, {model.signal_dim})"
        )
    atoms = model.update_dict.atoms
    batch = signals.shape[0]
    residuals = signals.copy()
    live = np.ones(batch, dtype=bool)
    supports = np.full((batch, model.depth), -1, dtype=np.int64)
    codes = np.zeros((batch, model.num_atoms))
    rows = np.arange(batch)
    for k in range(model.depth):
        live = live & (np.linalg.norm(residuals, axis=1) >= RESIDUAL_FLOOR)
        if not live.any():
            break
        scores = residuals @ model.selection_weights[k]  # (B, N)
        picked = np.argmax(scores, axis=1)
        best = scores[rows, picked]
        picked_atoms = atoms[:, picked]  # (M, B)
        coeff = np.einsum("mb,bm->b", picked_atoms, residuals)
        live = live & (best > 0.0) & (coeff > 0.0)
        if not live.any():
            break
        supports[live, k] = picked[live]
        codes[live, picked[live]] += coeff[live]
        update = residuals - coeff[:, None] * picked_atoms.T
        residuals[live] = project(update[live], model.proj)
    return supports, codes


# -- serialization ----------------------------------------------------------------
#
# Flat little-endian binary container: magic "DMP1", then four uint32 fields
# (depth, signal_dim, num_atoms, projection flag 0=identity 1=positive), then
# depth row-major float64 selection matrices, then the dictionary matrix.


def save_model(model: UnfoldedModel, path) -> None:
    header = struct.pack(
        "<4sIIII",
        _MAGIC,
        model.depth,
        model.signal_dim,
        model.num_atoms,
        1 if model.proj is ProjectionMode.POSITIVE_ORTHANT else 0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for w in model.selection_weights:
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.update_dict.atoms, dtype="<f8").tobytes())


def load_model(path) -> UnfoldedModel:
    from .types import validate_dictionary

    with open(path, "rb") as fh:
        blob = fh.read()
    head = struct.calcsize("<4sIIII")
    if len(blob) < head:
        raise ParseError(f"{path}: truncated model file")
    magic, depth, signal_dim, num_atoms, proj_flag = struct.unpack(
        "<4sIIII", blob[:head]
    )
    if magic != _MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}")
    matrix_bytes = signal_dim * num_atoms * 8
    expected = head + (depth + 1) * matrix_bytes
    if len(blob) != expected:
        raise ParseError(
            f"{path}: expected {expected} bytes for a depth-{depth} model, "
            f"got {len(blob)}"
        )
    weights = []
    offset = head
    for _ in range(depth):
        flat = np.frombuffer(blob, dtype="<f8", count=signal_dim * num_atoms,
                             offset=offset)
        weights.append(np.array(flat.reshape(signal_dim, num_atoms), order="F"))
        offset += matrix_bytes
    flat = np.frombuffer(blob, dtype="<f8", count=signal_dim * num_atoms,
                         offset=offset)
    dictionary = validate_dictionary(flat.reshape(signal_dim, num_atoms))
    proj = ProjectionMode.POSITIVE_ORTHANT if proj_flag else ProjectionMode.IDENTITY
    return UnfoldedModel(selection_weights=weights, update_dict=dictionary, proj=proj)
