"""Bounded adaptive gradient steps for the selection matrices.

Adam-style first/second moment estimates with bias correction, but the
per-coordinate step size ``lr / sqrt(vhat + epsilon)`` is clamped into
``[lower(t), upper(t)]`` where both bounds converge to ``final_lr``:

    lower(t) = final_lr * (1 - 1 / (gamma * t + 1))
    upper(t) = final_lr * (1 + 1 / (gamma * t))

so updates start adaptive and approach plain SGD at ``final_lr``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteGradient, ShapeMismatch


@dataclass(frozen=True)
class AdaBoundHyper:
    lr: float = 1e-3
    final_lr: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    gamma: float = 1e-3
    epsilon: float = 1e-8


@dataclass
class AdaBoundState:
    """Per-parameter moment accumulators and the step counter.

    Single-writer: the training loop owns it exclusively. ``t`` advances by
    exactly one per step; second moments stay non-negative.
    """

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    hyper: AdaBoundHyper = field(default_factory=AdaBoundHyper)


def init_adabound(params, hyper: AdaBoundHyper | None = None) -> AdaBoundState:
    hyper = hyper or AdaBoundHyper()
    return AdaBoundState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        hyper=hyper,
    )


def step_bounds(hyper: AdaBoundHyper, t: int) -> tuple[float, float]:
    """Clamp interval for the per-coordinate step size at step t >= 1."""
    lower = hyper.final_lr * (1.0 - 1.0 / (hyper.gamma * t + 1.0))
    upper = hyper.final_lr * (1.0 + 1.0 / (hyper.gamma * t))
    return lower, upper


def adabound_step(state: AdaBoundState, params, grads):
    """Advance every parameter in place by one bounded adaptive step.

    Returns ``(params, state)`` for chaining; both are mutated. Raises
    ShapeMismatch when params/grads/state disagree and NonFiniteGradient when
    any gradient entry is NaN or infinite.
    """
    if len(params) != len(state.m) or len(grads) != len(state.m):
        raise ShapeMismatch(
            f"{len(params)} params / {len(grads)} grads for "
            f"{len(state.m)} state slots"
        )
    for p, g, m in zip(params, grads, state.m):
        if p.shape != m.shape or g.shape != m.shape:
            raise ShapeMismatch(
                f"param {p.shape} / grad {g.shape} vs state {m.shape}"
            )
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient("gradient contains NaN or Inf")
    h = state.hyper
    t = state.t + 1
    lower, upper = step_bounds(h, t)
    bias1 = 1.0 - h.beta1 ** t
    bias2 = 1.0 - h.beta2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= h.beta1
        m += (1.0 - h.beta1) * g
        v *= h.beta2
        v += (1.0 - h.beta2) * np.square(g)
        step_size = np.clip(h.lr / np.sqrt(v / bias2 + h.epsilon), lower, upper)
        p -= step_size * (m / bias1)
    state.t = t
    return params, state
