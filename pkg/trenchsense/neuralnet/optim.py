"""First-order optimizers updating a network's parameters in place."""

from typing import Dict

import numpy as np

from trenchsense.core.exceptions import DomainError


class Optimizer:
    """Base optimizer keeping per-parameter state by parameter name."""

    def __init__(self, learning_rate: float):
        """Validate and store the learning rate."""
        if learning_rate < 0:
            raise DomainError("learning_rate must be non-negative")
        self.learning_rate = learning_rate
        self.state: Dict[str, Dict[str, np.ndarray]] = {}

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]):
        """Update every parameter from its gradient."""
        for name, param in params.items():
            self._update(name, param, grads[name].astype(param.dtype, copy=False))

    def _update(self, name: str, param: np.ndarray, grad: np.ndarray):
        raise NotImplementedError


class SGDMomentum(Optimizer):
    """Stochastic gradient descent with heavy-ball momentum."""

    def __init__(self, learning_rate: float = 1e-2, momentum: float = 0.9):
        """Set the step size and the velocity decay."""
        super().__init__(learning_rate)
        if not 0 <= momentum < 1:
            raise DomainError("momentum must lie in [0, 1)")
        self.momentum = momentum

    def _update(self, name: str, param: np.ndarray, grad: np.ndarray):
        slot = self.state.setdefault(name, {"velocity": np.zeros_like(param)})
        velocity = slot["velocity"]
        velocity *= param.dtype.type(self.momentum)
        velocity -= param.dtype.type(self.learning_rate) * grad
        param += velocity


class Adam(Optimizer):
    """Adam with bias-corrected first and second moment estimates."""

    def __init__(
        self,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        """Set the step size and the moment decays."""
        super().__init__(learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.steps = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]):
        """Advance the step counter then update every parameter."""
        self.steps += 1
        super().step(params, grads)

    def _update(self, name: str, param: np.ndarray, grad: np.ndarray):
        slot = self.state.setdefault(
            name, {"m": np.zeros_like(param), "v": np.zeros_like(param)}
        )
        cast = param.dtype.type
        slot["m"] = cast(self.beta1) * slot["m"] + cast(1 - self.beta1) * grad
        slot["v"] = cast(self.beta2) * slot["v"] + cast(1 - self.beta2) * grad**2
        m_hat = slot["m"] / cast(1 - self.beta1**self.steps)
        v_hat = slot["v"] / cast(1 - self.beta2**self.steps)
        denominator = np.sqrt(v_hat) + cast(self.epsilon)
        param -= cast(self.learning_rate) * m_hat / denominator


OPTIMIZERS = {"adam": Adam, "sgd-momentum": SGDMomentum}


def get_optimizer(name: str, learning_rate: float, momentum: float = 0.9) -> Optimizer:
    """Instantiate an optimizer by its configuration name."""
    if name == "adam":
        return Adam(learning_rate)
    if name == "sgd-momentum":
        return SGDMomentum(learning_rate, momentum)
    raise DomainError(
        f"Optimizer '{name}' not found. Available optimizers: {list(OPTIMIZERS)}"
    )
