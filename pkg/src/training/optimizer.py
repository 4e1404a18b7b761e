"""Adam with bias correction."""
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from src.config.run_config import TmpSchedule
from src.numerics.tensor import Tensor


@dataclass
class OptimizerState:
    """First and second moment estimates per parameter name."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_schedule(cls, schedule: TmpSchedule) -> "OptimizerState":
        return cls(
            learning_rate=schedule.learning_rate,
            beta1=schedule.beta1,
            beta2=schedule.beta2,
            eps=schedule.adam_eps,
        )


def opt_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray | None],
    state: OptimizerState,
    frozen: set[str] | frozenset[str] = frozenset(),
) -> None:
    """Apply one Adam update in place; frozen names and missing gradients are skipped."""
    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for name, param in params.items():
        grad = grads.get(name)
        if name in frozen or grad is None:
            continue
        m = state.first.get(name, np.zeros_like(param.data))
        v = state.second.get(name, np.zeros_like(param.data))
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        state.first[name], state.second[name] = m, v
        param.data = param.data - state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
