"""
AdaGrad - Per-coordinate adaptive step with L2 on relation parameters.
"""

import logging
from typing import Dict

import numpy as np

from models import Model
from .state import AdaGradState

logger = logging.getLogger(__name__)


class NonFiniteGradientError(FloatingPointError):
    """Raised when a gradient block contains NaN or infinite entries."""

    def __init__(self, block: str, count: int, step: int):
        self.block = block
        self.count = count
        self.step = step
        super().__init__(f"Gradient block '{block}' has {count} non-finite entr(ies) at step {step}")


def adagrad_step(
    model: Model,
    grads: Dict[str, np.ndarray],
    state: AdaGradState,
    lr: float,
    l2: float = 0.0
) -> AdaGradState:
    """
    Apply one AdaGrad update in place.

    G <- G + g^2; theta <- theta - lr * g / sqrt(G + eps). Relation blocks get
    2 * l2 * theta added to g first; entity rows are never regularized.

    Args:
        model: Model updated in place
        grads: Gradient of the loss per parameter name
        state: Accumulators updated in place
        lr: Learning rate
        l2: L2 coefficient for relation parameters

    Returns:
        The updated state

    Raises:
        NonFiniteGradientError: Before any parameter is touched
    """
    for name, g in grads.items():
        bad = int(np.size(g) - np.count_nonzero(np.isfinite(g)))
        if bad:
            raise NonFiniteGradientError(name, bad, state.steps + 1)

    for name, param in model.parameters():
        g = grads.get(name)
        if g is None:
            continue
        if l2 and name.startswith("relation/"):
            g = g + 2.0 * l2 * param
        acc = state[name]
        acc += g * g
        param -= lr * g / np.sqrt(acc + state.epsilon)

    state.steps += 1
    return state
