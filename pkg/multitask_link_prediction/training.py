""""""
import logging
import time

import numpy as np
import pandas as pd

from multitask_link_prediction.base import config_factory
from multitask_link_prediction.datasets import (
    sample_negatives,
    self_supervised_split,
)
from multitask_link_prediction.errors import ContractViolation, NumericError
from multitask_link_prediction.evaluation import DualScheme, evaluate
from multitask_link_prediction.loss import (
    LossConfig,
    annealed_lambdas,
    dual_loss,
    total_loss,
)
from multitask_link_prediction.model import (
    ATTENTION,
    AttentionWeights,
    ModelConfig,
    ModelParams,
)
from multitask_link_prediction.model.network import (
    forward,
    make_scorer,
    score_triplets,
)
from multitask_link_prediction.numeric import Adam, Tape, ops
from multitask_link_prediction.utils import rng_stream

logger = logging.getLogger(__name__)

ADAPT_INIT_STD = 0.01

TrainConfig = config_factory(
    "TrainConfig",
    {
        "batch_positives": 256,
        "lr": 0.001,
        "weight_decay": 5e-4,
        "clip_norm": 1.0,
        "max_epochs": 10,
        "patience": 5,
        "seed": 0,
        "eval_seed": -1,
        "adapt_epochs": 10,
        "adapt_holdout_fraction": 0.1,
        "attention_lr": 0.1,
        "adapt_lr": 0.1,
    },
    config_attrs={"section": "train"},
    checks=(
        (lambda c: c.batch_positives >= 1, "batch_positives must be >= 1"),
        (
            lambda c: c.lr > 0 and c.attention_lr > 0 and c.adapt_lr > 0,
            "learning rates must be positive",
        ),
        (lambda c: c.weight_decay >= 0, "weight_decay must be >= 0"),
        (lambda c: c.clip_norm > 0, "clip_norm must be positive"),
        (lambda c: c.max_epochs >= 1, "max_epochs must be >= 1"),
        (
            lambda c: 1 <= c.patience <= c.max_epochs,
            "patience must be between 1 and max_epochs",
        ),
        (lambda c: c.adapt_epochs >= 1, "adapt_epochs must be >= 1"),
        (
            lambda c: 0 < c.adapt_holdout_fraction < 1,
            "adapt_holdout_fraction must be in (0, 1)",
        ),
    ),
)


def _iter_wrapper(it, **kwargs):
    """ Dummy iter wrapper. """
    return it


def eval_seed(config):
    """ Seed of the validation candidate pools. """
    if config.eval_seed >= 0:
        return config.eval_seed
    return int(rng_stream(config.seed, "eval").integers(2 ** 31))


class TrainHistory:
    """ Per-epoch record of a training run. """

    columns = ("epoch", "loss", "val_mrr", "lambda1", "lambda2", "seconds")

    def __init__(self):
        """ Constructor. """
        self.rows = []

    def __len__(self):
        return len(self.rows)

    def append(self, **row):
        """ Add the record of an epoch. """
        self.rows.append({k: row[k] for k in self.columns})

    @property
    def best_epoch(self):
        """ Epoch with the highest validation MRR, the first among ties. """
        if len(self.rows) == 0:
            return None
        mrr = [row["val_mrr"] for row in self.rows]
        return self.rows[int(np.argmax(mrr))]["epoch"]

    def to_frame(self):
        """ History as a DataFrame. """
        return pd.DataFrame(self.rows, columns=list(self.columns))

    def to_csv(self, path):
        """ Write the history as CSV. """
        self.to_frame().to_csv(path, index=False)


def batch_loss(
    bound,
    observable,
    batch,
    model_config,
    lambda1=0.0,
    lambda2=0.0,
    homogeneous=False,
):
    """ Total loss of a batch of positives with their negatives.

    Parameters
    ----------
    bound : dict
        Mapping from parameter name to Tensor.

    observable : Multigraph
        Graph used for message passing.

    batch : NegativeBatch
        Positives and negatives.

    model_config : ModelConfig
        Model configuration.

    lambda1, lambda2 : float
        Current regularization coefficients.

    homogeneous : bool, default False
        Use relation-agnostic states. The attention regularizers are
        dropped.

    Returns
    -------
    Tensor
        Scalar loss.
    """
    size = len(batch)
    alpha = None if homogeneous else ops.softmax(bound[ATTENTION], axis=1)

    states = forward(
        observable, bound, model_config, alpha=alpha, homogeneous=homogeneous
    )
    scores = score_triplets(
        states,
        batch.triplets(),
        bound,
        num_relations=observable.num_relations,
    )

    tail_end = size * (1 + batch.n)
    pos = ops.take(scores, np.arange(size))
    tail = ops.reshape(
        ops.take(scores, np.arange(size, tail_end)), (size, batch.n)
    )
    rel = ops.reshape(
        ops.take(scores, np.arange(tail_end, len(scores.data))),
        (size, batch.m),
    )
    loss = dual_loss(pos, tail, rel)

    if homogeneous:
        return loss
    return total_loss(loss, alpha, lambda1, lambda2)


def _step(optimizer, params, grads, epoch, batch_index):
    """ Optimizer step with training context on numeric errors. """
    try:
        return optimizer.step(params, grads)
    except NumericError as e:
        raise NumericError(f"{e} (epoch {epoch}, batch {batch_index})")


def train(
    train_split,
    valid_split=None,
    config=None,
    model_config=None,
    loss_config=None,
    threads=1,
    iter_wrapper=_iter_wrapper,
):
    """ Train a model on the missing triplets of a split.

    Parameters
    ----------
    train_split : DatasetSplit
        Training split. Its missing triplets are the positives, its
        observable graph the message passing context.

    valid_split : DatasetSplit, optional
        Split for early stopping, the training split if not specified.

    config : TrainConfig, optional
        Training configuration.

    model_config : ModelConfig, optional
        Model configuration.

    loss_config : LossConfig, optional
        Loss configuration.

    threads : int, default 1
        Maximum number of threads for validation scoring.

    iter_wrapper : callable, optional
        A wrapper around the epoch iterator. Works with ``tqdm`` as a
        progress bar.

    Returns
    -------
    params : ModelParams
        Parameters of the epoch with the best validation MRR.

    history : TrainHistory
        Per-epoch record.
    """
    config = config or TrainConfig()
    model_config = model_config or ModelConfig()
    loss_config = loss_config or LossConfig()
    if valid_split is None:
        valid_split = train_split

    if len(train_split.missing) == 0:
        raise ContractViolation("The training split has no positives")
    if valid_split.num_relations != train_split.num_relations:
        raise ContractViolation(
            "Training and validation splits differ in relation types"
        )

    observable = train_split.observable
    positives = train_split.missing.triplets
    homogeneous = model_config.homogeneous

    params = ModelParams.initialize(
        model_config,
        train_split.num_relations,
        rng_stream(config.seed, "init"),
    )
    trainable = [
        name
        for name in params.arrays
        if not (homogeneous and name == ATTENTION)
    ]
    rates = {name: config.lr for name in trainable}
    if ATTENTION in rates:
        rates[ATTENTION] = config.attention_lr
    optimizer = Adam(
        {name: params[name] for name in trainable},
        lr=rates,
        weight_decay=config.weight_decay,
        clip_norm=config.clip_norm,
    )

    batch_rng = rng_stream(config.seed, "batches")
    negative_rng = rng_stream(config.seed, "negatives")
    seed = eval_seed(config)

    history = TrainHistory()
    best_params, best_mrr, bad_epochs = params, -np.inf, 0

    for epoch in iter_wrapper(
        range(config.max_epochs), total=config.max_epochs
    ):
        start = time.monotonic()
        lambda1, lambda2 = annealed_lambdas(loss_config, epoch)

        order = batch_rng.permutation(len(positives))
        losses = []
        for b, start_idx in enumerate(
            range(0, len(order), config.batch_positives)
        ):
            idx = order[start_idx : start_idx + config.batch_positives]
            batch = sample_negatives(
                observable,
                positives[idx],
                loss_config.n,
                loss_config.m,
                negative_rng,
            )

            tape = Tape()
            bound = params.bind(tape, trainable=trainable)
            loss = batch_loss(
                bound,
                observable,
                batch,
                model_config,
                lambda1,
                lambda2,
                homogeneous=homogeneous,
            )
            value = loss.item()
            if not np.isfinite(value):
                raise NumericError(
                    f"Non-finite loss {value} (epoch {epoch}, batch {b})"
                )
            grads = tape.backward(loss)
            # the next batch builds a new graph, drop the old one first
            del tape, bound, loss
            params = params.replace(
                _step(optimizer, params.arrays, grads, epoch, b)
            )
            losses.append(value / len(idx))

        report = evaluate(
            make_scorer(valid_split.observable, params),
            valid_split.observable,
            valid_split.missing,
            DualScheme(),
            seed,
            threads=threads,
        )
        history.append(
            epoch=epoch,
            loss=float(np.mean(losses)),
            val_mrr=report.mrr,
            lambda1=lambda1,
            lambda2=lambda2,
            seconds=time.monotonic() - start,
        )
        logger.info(
            f"Epoch {epoch}: loss {np.mean(losses):.4f}, "
            f"validation MRR {report.mrr:.4f}"
        )

        if report.mrr > best_mrr:
            best_params, best_mrr, bad_epochs = params, report.mrr, 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                logger.info(f"Early stopping after epoch {epoch}")
                break

    return best_params, history


def adapt(
    params,
    test_observable,
    config=None,
    loss_config=None,
    iter_wrapper=_iter_wrapper,
):
    """ Learn attention weights for the relation types of a new graph.

    All parameters but the attention logits are frozen. The logits are
    re-initialized for the relation types of ``test_observable`` and
    optimized on self-supervised splits of it, drawn anew every epoch.

    Parameters
    ----------
    params : ModelParams
        Trained parameters.

    test_observable : Multigraph
        Observable graph with the new relation types.

    config : TrainConfig, optional
        Supplies ``adapt_epochs``, ``adapt_holdout_fraction``, ``adapt_lr``,
        ``batch_positives``, ``clip_norm`` and ``seed``.

    loss_config : LossConfig, optional
        Negative counts and regularization coefficients.

    iter_wrapper : callable, optional
        A wrapper around the epoch iterator. Works with ``tqdm`` as a
        progress bar.

    Returns
    -------
    AttentionWeights
        Attention for the relation types of ``test_observable``.
    """
    config = config or TrainConfig()
    loss_config = loss_config or LossConfig()
    model_config = params.config
    rng = rng_stream(config.seed, "adapt")

    logits = rng.normal(
        0.0,
        ADAPT_INIT_STD,
        size=(test_observable.num_relations, model_config.max_tasks),
    )
    current = params.with_attention(logits)
    optimizer = Adam(
        {ATTENTION: logits}, lr=config.adapt_lr, clip_norm=config.clip_norm
    )

    for epoch in iter_wrapper(
        range(config.adapt_epochs), total=config.adapt_epochs
    ):
        lambda1, lambda2 = annealed_lambdas(loss_config, epoch)
        context, targets = self_supervised_split(
            test_observable, config.adapt_holdout_fraction, rng
        )
        positives = targets.triplets[rng.permutation(len(targets))]

        for b, start in enumerate(
            range(0, len(positives), config.batch_positives)
        ):
            batch = sample_negatives(
                context,
                positives[start : start + config.batch_positives],
                loss_config.n,
                loss_config.m,
                rng,
            )
            tape = Tape()
            bound = current.bind(tape, trainable=[ATTENTION])
            loss = batch_loss(
                bound, context, batch, model_config, lambda1, lambda2
            )
            value = loss.item()
            if not np.isfinite(value):
                raise NumericError(
                    f"Non-finite adaptation loss (epoch {epoch}, batch {b})"
                )
            grads = tape.backward(loss)
            del tape, bound, loss
            updated = _step(
                optimizer, {ATTENTION: current[ATTENTION]}, grads, epoch, b
            )
            current = current.with_attention(updated[ATTENTION])

        logger.debug(f"Adaptation epoch {epoch}: loss {value:.4f}")

    return AttentionWeights(current[ATTENTION])
