""""""
import logging

import numpy as np

from multitask_link_prediction.errors import ContractViolation, NumericError

logger = logging.getLogger(__name__)


class AdamState:
    """ Moment accumulators and step counter of the Adam optimizer. """

    def __init__(self, params, step=0, m=None, v=None):
        """ Constructor.

        Parameters
        ----------
        params : dict
            Mapping from parameter name to array, used for the accumulator
            shapes.

        step : int, default 0
            Number of steps taken so far.

        m, v : dict, optional
            First and second moment accumulators. Zero if not specified.
        """
        self.step = step
        self.m = m or {k: np.zeros_like(p) for k, p in params.items()}
        self.v = v or {k: np.zeros_like(p) for k, p in params.items()}


def clip_gradients(grads, clip_norm):
    """ Scale gradients so that their global norm is at most ``clip_norm``.

    Parameters
    ----------
    grads : dict
        Mapping from parameter name to gradient array.

    clip_norm : float or None
        Maximum global L2 norm. No clipping if None.

    Returns
    -------
    clipped : dict
        The (possibly scaled) gradients.

    norm : float
        The global norm before clipping.
    """
    norm = float(np.sqrt(sum(np.sum(g * g) for g in grads.values())))
    if clip_norm is None or norm <= clip_norm:
        return grads, norm

    scale = clip_norm / norm
    return {k: g * scale for k, g in grads.items()}, norm


def adam_step(
    params,
    grads,
    state,
    lr,
    weight_decay=0.0,
    clip_norm=None,
    beta1=0.9,
    beta2=0.999,
    eps=1e-8,
):
    """ Perform one step of Adam with decoupled weight decay.

    Parameters
    ----------
    params : dict
        Mapping from parameter name to array. Not modified.

    grads : dict
        Gradients for (a subset of) the parameters. Parameters without a
        gradient are left untouched.

    state : AdamState
        Optimizer state before the step. Not modified.

    lr : float or dict
        Learning rate, or a mapping from parameter name to learning rate.

    weight_decay : float, default 0.0
        Decoupled weight decay rate; parameters are multiplied by
        ``1 - lr * weight_decay`` before the Adam update.

    clip_norm : float, optional
        Maximum global gradient norm.

    beta1, beta2, eps : float
        Adam constants.

    Returns
    -------
    params : dict
        The updated parameters.

    state : AdamState
        The updated optimizer state.
    """
    for name, grad in grads.items():
        if name not in params or grad.shape != params[name].shape:
            raise ContractViolation(f"Gradient does not match param {name}")
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"Non-finite gradient for {name}")

    if isinstance(lr, dict):
        rates = lr
    else:
        rates = {name: lr for name in grads}
    if any(rate <= 0 for rate in rates.values()):
        raise ContractViolation("Learning rates must be positive")

    grads, norm = clip_gradients(grads, clip_norm)
    logger.debug(f"Adam step {state.step + 1}, gradient norm {norm:.6g}")

    step = state.step + 1
    new_params = dict(params)
    new_m, new_v = dict(state.m), dict(state.v)

    for name, grad in grads.items():
        rate = rates[name]
        m = beta1 * state.m[name] + (1.0 - beta1) * grad
        v = beta2 * state.v[name] + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1 ** step)
        v_hat = v / (1.0 - beta2 ** step)

        decayed = params[name] * (1.0 - rate * weight_decay)
        new_params[name] = decayed - rate * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name], new_v[name] = m, v

    return new_params, AdamState(params, step=step, m=new_m, v=new_v)


class Adam:
    """ Adam optimizer with gradient clipping and decoupled weight decay. """

    def __init__(self, params, lr=0.001, weight_decay=0.0, clip_norm=None):
        """ Constructor.

        Parameters
        ----------
        params : dict
            Parameters that will be optimized.

        lr : float or dict, default 0.001
            Learning rate or mapping from parameter name to learning rate.

        weight_decay : float, default 0.0
            Decoupled weight decay rate.

        clip_norm : float, optional
            Maximum global gradient norm.
        """
        self.lr = lr
        self.weight_decay = weight_decay
        self.clip_norm = clip_norm
        self.state = AdamState(params)

    def step(self, params, grads):
        """ Update parameters from gradients and advance the state. """
        params, self.state = adam_step(
            params,
            grads,
            self.state,
            self.lr,
            weight_decay=self.weight_decay,
            clip_norm=self.clip_norm,
        )

        return params
