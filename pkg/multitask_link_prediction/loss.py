""" Dual-sampling task loss and attention regularizers. """
import logging

from multitask_link_prediction.base import config_factory
from multitask_link_prediction.errors import ContractViolation
from multitask_link_prediction.numeric import ops

logger = logging.getLogger(__name__)

SCORE_EPS = 1e-12

LossConfig = config_factory(
    "LossConfig",
    {"n": 2, "m": 2, "lambda1": 0.1, "lambda2": 0.1, "anneal": 1.1},
    config_attrs={"section": "loss"},
    checks=(
        (lambda c: c.n >= 0 and c.m >= 0, "n and m must be non-negative"),
        (
            lambda c: c.lambda1 >= 0 and c.lambda2 >= 0,
            "regularization coefficients must be non-negative",
        ),
        (lambda c: c.anneal >= 1, "anneal must be at least 1"),
    ),
)


def _log_clipped(scores, complement=False):
    """ Log of scores (or of their complement) clamped away from 0 and 1.
    """
    clipped = ops.clip(scores, lower=SCORE_EPS, upper=1.0 - SCORE_EPS)
    if complement:
        clipped = ops.subtract(1.0, clipped)

    return ops.log(clipped)


def dual_loss(scores_pos, scores_tail_neg, scores_rel_neg):
    """ Binary cross-entropy over positives and both kinds of negatives.

    Computes::

        -sum over positives of [ log s_pos
                                 + mean_i log(1 - s_tail_i)
                                 + mean_j log(1 - s_rel_j) ]

    A negative term is dropped when its count is zero.

    Parameters
    ----------
    scores_pos : Tensor, shape (B,)
        Scores of the positives.

    scores_tail_neg : Tensor, shape (B, n)
        Scores of the tail-corrupted negatives of every positive.

    scores_rel_neg : Tensor, shape (B, m)
        Scores of the relation-corrupted negatives of every positive.

    Returns
    -------
    Tensor
        Scalar loss, summed over positives.
    """
    scores_pos = ops.as_tensor(scores_pos)
    if scores_pos.size == 0:
        raise ContractViolation("No positive scores")

    loss = ops.negative(ops.sum(_log_clipped(scores_pos)))

    for scores in (scores_tail_neg, scores_rel_neg):
        scores = ops.as_tensor(scores)
        if scores.size == 0:
            continue
        if scores.ndim != 2 or scores.shape[0] != scores_pos.size:
            raise ContractViolation(
                f"Expected ({scores_pos.size}, k) negative scores, got "
                f"{scores.shape}"
            )
        term = ops.sum(_log_clipped(scores, complement=True))
        loss = ops.subtract(loss, ops.divide(term, float(scores.shape[1])))

    return loss


def one_hot_entropy(alpha):
    """ Sum of the row entropies of an attention matrix, ``0 log 0 = 0``. """
    return ops.negative(ops.sum(ops.xlogx(alpha)))


def concentration_lgamma(alpha):
    """ Negative sum over tasks of ``lgamma(1 + total attention)``. """
    mass = ops.add(ops.sum(alpha, axis=0), 1.0)

    return ops.negative(ops.sum(ops.lgamma(mass)))


def total_loss(dual, alpha, lambda1, lambda2):
    """ Task loss plus the weighted attention regularizers.

    Parameters
    ----------
    dual : Tensor
        Scalar task loss.

    alpha : Tensor, shape (R, K)
        Row-stochastic attention matrix.

    lambda1, lambda2 : float
        Current coefficients of the entropy and concentration terms.

    Returns
    -------
    Tensor
        Scalar total loss.
    """
    loss = dual
    if lambda1 != 0:
        loss = ops.add(loss, ops.multiply(one_hot_entropy(alpha), lambda1))
    if lambda2 != 0:
        loss = ops.add(
            loss, ops.multiply(concentration_lgamma(alpha), lambda2)
        )

    return loss


def annealed(value, epoch, factor=1.1):
    """ Coefficient after ``epoch`` multiplicative annealing steps. """
    return value * factor ** epoch


def annealed_lambdas(config, epoch):
    """ Regularization coefficients of an epoch. """
    return (
        annealed(config.lambda1, epoch, config.anneal),
        annealed(config.lambda2, epoch, config.anneal),
    )
