"""Adadelta updates over the model's parameter arrays.

Per parameter: accumulate E[g^2] <- rho E[g^2] + (1 - rho) g^2, step by
-(sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps)) g, then fold the step into
E[dx^2]. No learning rate; eps seeds the very first steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import PARAM_FIELDS, ModelParams


@dataclass
class AdadeltaState:
    rho: float = 0.95
    epsilon: float = 1e-6
    sq_grad: dict[str, np.ndarray] = field(default_factory=dict)
    sq_step: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must be in [0, 1)")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


def init_state(params: ModelParams, rho: float = 0.95, epsilon: float = 1e-6) -> AdadeltaState:
    state = AdadeltaState(rho=rho, epsilon=epsilon)
    for name, arr in params.arrays().items():
        state.sq_grad[name] = np.zeros_like(arr)
        state.sq_step[name] = np.zeros_like(arr)
    return state


def adadelta_step(state: AdadeltaState, params: ModelParams, grads: ModelParams) -> ModelParams:
    """Apply one update; returns new params, mutates the accumulators in place.

    A zero gradient on zero accumulators leaves the parameter bit-identical:
    the step is sqrt(eps)/sqrt(eps) * 0.
    """
    updated = {}
    for name in PARAM_FIELDS:
        p = getattr(params, name)
        g = getattr(grads, name)
        eg = state.sq_grad[name]
        ed = state.sq_step[name]
        eg *= state.rho
        eg += (1.0 - state.rho) * g * g
        step = -np.sqrt(ed + state.epsilon) / np.sqrt(eg + state.epsilon) * g
        ed *= state.rho
        ed += (1.0 - state.rho) * step * step
        updated[name] = p + step
    return ModelParams(**updated)
