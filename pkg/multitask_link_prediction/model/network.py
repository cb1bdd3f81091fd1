""""""
import logging

import numpy as np

from multitask_link_prediction.errors import ContractViolation
from multitask_link_prediction.model import (
    ATTENTION,
    MLP_WEIGHTS,
    ModelParams,
    RelationStates,
    num_layers,
)
from multitask_link_prediction.model.layers import (
    mlp,
    mtde_layer_soft,
    stack_propagation,
)
from multitask_link_prediction.numeric import Tensor, ops

logger = logging.getLogger(__name__)


def layer_weights(bound, t):
    """ MLP weight tuples of the components of layer t. """
    return {
        component: tuple(
            bound[f"layer{t}.{component}.{w}"] for w in MLP_WEIGHTS
        )
        for component in ("l1", "l2", "l3")
    }


def scorer_weights(bound):
    """ MLP weight tuple of the triplet scorer. """
    return tuple(bound[f"scorer.{w}"] for w in MLP_WEIGHTS)


def _resolve(params, config):
    """ Bound tensors and config from ModelParams or a dict of tensors. """
    if isinstance(params, ModelParams):
        return params.bind(), config or params.config
    if config is None:
        raise ContractViolation("A config is required with bound tensors")
    return params, config


def forward(graph, params, config=None, alpha=None, homogeneous=None):
    """ Compute the node representations of every relation type.

    Initial states are all-ones. The first ``num_gnn_layers`` soft MTDE
    layers use GIN components over the relation subgraphs, the remaining
    ones row-wise MLPs, with ReLU between layers.

    Parameters
    ----------
    graph : Multigraph
        Observable graph used for message passing.

    params : ModelParams or dict
        Parameters, or a mapping from name to Tensor as returned by
        :meth:`ModelParams.bind`.

    config : ModelConfig, optional
        Model configuration, taken from ``params`` if not specified.

    alpha : Tensor, optional
        Attention matrix of shape (R, K). By default the row softmax of the
        attention logits.

    homogeneous : bool, optional
        If True, all relation types are merged into a single channel and
        the attention is ignored. Defaults to ``config.homogeneous``.

    Returns
    -------
    RelationStates
        States of shape (R, N, d), or (1, N, d) if homogeneous.
    """
    bound, config = _resolve(params, config)
    if homogeneous is None:
        homogeneous = config.homogeneous
    if len(graph) == 0:
        raise ContractViolation("Cannot run the model on an empty graph")

    if homogeneous:
        channels = 1
        matrix = graph.propagation_matrix(merge_relations=True)
        alpha = Tensor(np.eye(config.max_tasks)[:1])
    else:
        channels = graph.num_relations
        matrix = graph.propagation_matrix()
        if alpha is None:
            alpha = ops.softmax(bound[ATTENTION], axis=1)
        if alpha.shape != (channels, config.max_tasks):
            raise ContractViolation(
                f"Attention of shape {alpha.shape} does not match "
                f"{channels} relations and {config.max_tasks} tasks"
            )

    stacked = stack_propagation(matrix, config.max_tasks)
    states = Tensor(np.ones((channels, graph.num_nodes, config.hidden_dim)))

    total = num_layers(config)
    for t in range(total):
        gnn = t < config.num_gnn_layers
        states = mtde_layer_soft(
            states,
            alpha,
            layer_weights(bound, t),
            bound[f"layer{t}.pos"],
            matrix=matrix if gnn else None,
            stacked=stacked if gnn else None,
        )
        if t < total - 1:
            states = ops.relu(states)

    return RelationStates(states)


def _check_ids(triplets, num_nodes, num_relations):
    """ Raise a ContractViolation for ids outside of the graph. """
    if triplets.size == 0:
        return
    heads, rels, tails = triplets.T
    if (
        min(heads.min(), tails.min(), rels.min()) < 0
        or max(heads.max(), tails.max()) >= num_nodes
        or rels.max() >= num_relations
    ):
        raise ContractViolation("Triplet id out of range")


def score_triplets(states, triplets, params, num_relations=None):
    """ Score triplets from relation states.

    The score of ``(u, r, v)`` is the sigmoid of the scorer MLP applied to
    the concatenated rows u and v of the states of relation r. States with a
    single channel are relation-agnostic and used for every r.

    Parameters
    ----------
    states : RelationStates
        Output of :func:`forward`.

    triplets : array_like, shape (B, 3)
        Triplets to score.

    params : ModelParams or dict
        Parameters holding the scorer weights.

    num_relations : int, optional
        Number of relation types for the range check of relation ids.
        Defaults to the number of channels of the states.

    Returns
    -------
    Tensor, shape (B,)
        Scores in [0, 1].
    """
    if isinstance(params, ModelParams):
        params = params.bind()

    triplets = np.asarray(triplets, dtype=np.int64).reshape(-1, 3)
    channels, n, d = states.tensor.shape
    _check_ids(triplets, n, num_relations or channels)
    heads, rels, tails = triplets.T

    channel = rels if channels > 1 else np.zeros_like(rels)
    flat = ops.reshape(states.tensor, (channels * n, d))
    pairs = ops.concat(
        [
            ops.take(flat, channel * n + heads, axis=0),
            ops.take(flat, channel * n + tails, axis=0),
        ],
        axis=1,
    )
    logits = mlp(pairs, scorer_weights(params))

    return ops.reshape(ops.sigmoid(logits), (len(triplets),))


def score_triplet(states, triplet, params, num_relations=None):
    """ Score of a single ``(u, r, v)`` triplet as a float. """
    return score_triplets(
        states, [triplet], params, num_relations=num_relations
    ).item()


def make_scorer(graph, params, homogeneous=None, alpha=None):
    """ Create a function scoring triplets on a fixed observable graph.

    Parameters
    ----------
    graph : Multigraph
        Observable graph used for message passing.

    params : ModelParams
        Model parameters.

    homogeneous : bool, optional
        Score with relation-agnostic states. Defaults to the setting of the
        model configuration.

    alpha : array_like, optional
        Attention matrix overriding the one of the parameters.

    Returns
    -------
    callable
        Function mapping a (B, 3) array of triplets to a (B,) array of
        scores.
    """
    bound = params.bind()
    if alpha is not None:
        alpha = Tensor(alpha)
    states = forward(
        graph, bound, params.config, alpha=alpha, homogeneous=homogeneous
    )

    def scorer(triplets):
        triplets = np.asarray(triplets, dtype=np.int64).reshape(-1, 3)
        _check_ids(triplets, graph.num_nodes, graph.num_relations)
        if len(triplets) == 0:
            return np.zeros(0)
        keys = triplets.copy()
        if states.num_relations == 1:
            keys[:, 1] = 0
        # equal inputs get bit-equal scores
        unique, inverse = np.unique(keys, axis=0, return_inverse=True)
        scores = score_triplets(
            states, unique, bound, num_relations=graph.num_relations
        ).data
        return scores[inverse.reshape(-1)]

    return scorer


def homogeneous_score(graph, triplet, params):
    """ Relation-agnostic score of a triplet.

    All relation types of ``graph`` are merged, so every relation variant
    of a node pair gets the same score.
    """
    states = forward(graph, params, homogeneous=True)

    return score_triplet(
        states, triplet, params, num_relations=graph.num_relations
    )
