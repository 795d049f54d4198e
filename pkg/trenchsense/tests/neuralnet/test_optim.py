"""
Test the optimizers
"""

import numpy as np
import pytest

from trenchsense.core.exceptions import DomainError
from trenchsense.neuralnet.optim import Adam, SGDMomentum, get_optimizer


def _param():
    return {"w": np.array([1.0, -1.0], dtype=np.float32)}


def _grad():
    return {"w": np.array([2.0, -4.0], dtype=np.float32)}


@pytest.mark.parametrize("name", ["adam", "sgd-momentum"])
def test_zero_learning_rate_changes_nothing(name):
    """A zero step size leaves every parameter in place."""
    params = _param()
    optimizer = get_optimizer(name, 0.0)

    for _ in range(3):
        optimizer.step(params, _grad())

    np.testing.assert_array_equal(params["w"], [1.0, -1.0])


def test_sgd_momentum_steps():
    """The velocity accumulates previous steps."""
    params = _param()
    optimizer = SGDMomentum(learning_rate=0.1, momentum=0.9)

    optimizer.step(params, _grad())
    np.testing.assert_allclose(params["w"], [0.8, -0.6], rtol=1e-6)

    optimizer.step(params, _grad())
    np.testing.assert_allclose(params["w"], [0.42, 0.16], rtol=1e-5)


def test_adam_first_step_is_learning_rate_sized():
    """Bias correction makes the first step about lr times the gradient sign."""
    params = _param()
    optimizer = Adam(learning_rate=0.1)

    optimizer.step(params, _grad())

    np.testing.assert_allclose(params["w"], [0.9, -0.9], rtol=1e-5)
    assert optimizer.steps == 1


def test_parameters_keep_their_dtype():
    """Updates happen in place in the parameter precision."""
    params = _param()

    Adam(1e-3).step(params, {"w": np.array([1.0, 1.0])})

    assert params["w"].dtype == np.float32


def test_unknown_optimizer():
    """Unknown names list the available optimizers."""
    with pytest.raises(DomainError, match="Optimizer 'rmsprop' not found"):
        get_optimizer("rmsprop", 1e-3)


@pytest.mark.parametrize(
    "build, message",
    [
        (lambda: Adam(-1.0), "learning_rate must be non-negative"),
        (lambda: SGDMomentum(0.1, momentum=1.0), "momentum must lie"),
    ],
)
def test_optimizer_validation(build, message):
    """Step sizes and momentum are bounded."""
    with pytest.raises(DomainError, match=message):
        build()
