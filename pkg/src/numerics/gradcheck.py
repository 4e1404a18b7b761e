"""Finite-difference verification of recorded gradients."""
from collections.abc import Callable

import numpy as np

from src.numerics.tensor import Tensor


def grad_check(
    f: Callable[[Tensor], Tensor],
    x: Tensor,
    eps: float = 1e-5,
    floor: float = 1e-12,
    max_elements: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Compare the backward gradient of ``f`` at ``x`` against central differences.

    Returns the maximum over checked elements of
    ``|analytic - numeric| / max(floor, |analytic| + |numeric|)``.
    ``max_elements`` restricts the check to a random subset, which keeps
    whole-model checks affordable. ``x`` must require gradients; its ``grad``
    is reset before the check.
    """
    x.zero_grad()
    f(x).backward()
    analytic = np.zeros_like(x.data) if x.grad is None else x.grad.copy()

    flat = x.data.reshape(-1)
    if max_elements is not None and max_elements < flat.size:
        generator = rng or np.random.default_rng(0)
        indices = generator.choice(flat.size, size=max_elements, replace=False)
    else:
        indices = np.arange(flat.size)

    worst = 0.0
    for i in indices:
        original = flat[i]
        flat[i] = original + eps
        plus = f(x).item()
        flat[i] = original - eps
        minus = f(x).item()
        flat[i] = original
        numeric = (plus - minus) / (2.0 * eps)
        a = float(analytic.reshape(-1)[i])
        worst = max(worst, abs(a - numeric) / max(floor, abs(a) + abs(numeric)))
    x.zero_grad()
    return worst
