""""""
import logging

import numpy as np

from multitask_link_prediction.errors import ContractViolation, NumericError
from multitask_link_prediction.numeric.tape import Tape, Tensor

logger = logging.getLogger(__name__)


def _evaluate(f, params):
    """ Evaluate a scalar function on constant tensors. """
    value = f({name: Tensor(p) for name, p in params.items()}).item()
    if not np.isfinite(value):
        raise NumericError(f"Function evaluated to {value}")

    return value


def finite_diff_check(f, params, step=1e-6):
    """ Compare reverse-mode gradients with central finite differences.

    Parameters
    ----------
    f : callable
        Deterministic function mapping a dict of named tensors to a
        single-element tensor.

    params : dict
        Mapping from name to array at which the gradient is checked.

    step : float, default 1e-6
        Finite-difference step.

    Returns
    -------
    float
        Maximum over all parameter entries of
        ``|autodiff - central| / max(1, |central|)``.
    """
    if step <= 0:
        raise ContractViolation("step must be positive")

    params = {k: np.asarray(p, dtype=np.float64) for k, p in params.items()}

    tape = Tape()
    output = f({name: tape.leaf(p, name) for name, p in params.items()})
    if not np.isfinite(output.item()):
        raise NumericError(f"Function evaluated to {output.item()}")
    grads = tape.backward(output)

    max_error = 0.0
    for name, value in params.items():
        for idx in np.ndindex(value.shape):
            shifted = value.copy()
            shifted[idx] = value[idx] + step
            plus = _evaluate(f, {**params, name: shifted})
            shifted[idx] = value[idx] - step
            minus = _evaluate(f, {**params, name: shifted})

            central = (plus - minus) / (2.0 * step)
            error = abs(grads[name][idx] - central) / max(1.0, abs(central))
            max_error = max(max_error, error)

    logger.debug(f"Finite difference check: max relative error {max_error}")

    return max_error
