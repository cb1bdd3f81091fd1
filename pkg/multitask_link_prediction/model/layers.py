""" Message passing and multi-task double-equivariant layers.

States are tensors of shape (R, N, d) holding the node representations of
every relation type. The components ``l1``, ``l2`` and ``l3`` of a layer are
either GIN layers over the relation subgraphs (when a propagation matrix is
given) or row-wise MLPs.
"""
import logging

import numpy as np
from scipy import sparse

from multitask_link_prediction.errors import ContractViolation, ShapeError
from multitask_link_prediction.numeric import Tensor, ops

logger = logging.getLogger(__name__)

NORMALIZER_FLOOR = 1e-12


def mlp(x, weights):
    """ Two-layer perceptron ``relu(x @ w0 + b0) @ w1 + b1``.

    Parameters
    ----------
    x : Tensor, shape (M, d_in)
        Input rows.

    weights : tuple of Tensor
        ``(w0, b0, w1, b1)``.

    Returns
    -------
    Tensor, shape (M, d_out)
        Output rows.
    """
    w0, b0, w1, b1 = weights
    hidden = ops.relu(ops.add(ops.matmul(x, w0), b0))

    return ops.add(ops.matmul(hidden, w1), b1)


def gin_layer(x, matrix, weights):
    """ GIN layer with ``eps = 0`` and mean neighborhood aggregation.

    Parameters
    ----------
    x : Tensor, shape (M, d)
        Node features.

    matrix : scipy.sparse matrix, shape (M, M)
        Mean-aggregation operator, e.g. from
        :meth:`Multigraph.propagation_matrix`. Isolated nodes have zero rows.

    weights : tuple of Tensor
        MLP weights ``(w0, b0, w1, b1)``.

    Returns
    -------
    Tensor, shape (M, d_out)
        ``MLP(x + matrix @ x)``.
    """
    return mlp(ops.add(x, ops.propagate(matrix, x)), weights)


def _component(x, matrix, weights):
    """ Apply one layer component to stacked (rows, d) features. """
    if matrix is None:
        return mlp(x, weights)
    return gin_layer(x, matrix, weights)


def stack_propagation(matrix, copies):
    """ Block-diagonal operator acting on ``copies`` stacked state tensors.
    """
    if matrix is None or copies == 1:
        return matrix
    return sparse.block_diag([matrix] * copies, format="csr")


def mtde_layer_soft(states, alpha, weights, pos, matrix=None, stacked=None):
    """ Soft multi-task double-equivariant layer.

    For every relation r with most attended task ``k_r``::

        out_r = L1(H_r)
              + L2(p_{k_r} + agg_{k_r, r})
              + sum over k != k_r of L3(p_k + agg_{k, r})

    where ``agg_{k, r}`` is the attention-weighted mean of the states of all
    relations other than r, with weights ``alpha[:, k]``.

    Parameters
    ----------
    states : Tensor, shape (R, N, d)
        Input states.

    alpha : Tensor, shape (R, K)
        Row-stochastic attention matrix.

    weights : dict
        Mapping from "l1", "l2" and "l3" to MLP weight tuples.

    pos : Tensor, shape (K, d)
        Task positional embeddings.

    matrix : scipy.sparse matrix, optional
        Block-diagonal (R * N, R * N) propagation operator. If not given,
        the components are row-wise MLPs.

    stacked : scipy.sparse matrix, optional
        ``stack_propagation(matrix, K)``, computed if not given.

    Returns
    -------
    Tensor, shape (R, N, d_out)
        Output states.
    """
    num_rel, n, d = states.shape
    if alpha.shape[0] != num_rel:
        raise ShapeError("Attention needs one row per relation")
    num_tasks = alpha.shape[1]
    if pos.shape != (num_tasks, d):
        raise ShapeError(f"Positional embeddings must be ({num_tasks}, {d})")

    # excl[k, r, r'] = alpha[r', k] for r' != r
    excl = ops.multiply(
        ops.reshape(ops.transpose(alpha), (num_tasks, 1, num_rel)),
        1.0 - np.eye(num_rel)[None],
    )
    excl = ops.reshape(excl, (num_tasks * num_rel, num_rel))
    numerator = ops.matmul(excl, ops.reshape(states, (num_rel, n * d)))
    denominator = ops.clip(
        ops.sum(excl, axis=1, keepdims=True), lower=NORMALIZER_FLOOR
    )
    aggregated = ops.add(
        ops.reshape(
            ops.divide(numerator, denominator), (num_tasks, num_rel, n, d)
        ),
        ops.reshape(pos, (num_tasks, 1, 1, d)),
    )

    # one-hot of the most attended task, ties to the smallest index
    selected = np.eye(num_tasks)[np.argmax(alpha.data, axis=1)].T

    if stacked is None:
        stacked = stack_propagation(matrix, num_tasks)

    own = _component(
        ops.reshape(states, (num_rel * n, d)), matrix, weights["l1"]
    )
    same = ops.sum(
        ops.multiply(aggregated, selected.reshape(num_tasks, num_rel, 1, 1)),
        axis=0,
    )
    same = _component(
        ops.reshape(same, (num_rel * n, d)), matrix, weights["l2"]
    )
    foreign = _component(
        ops.reshape(aggregated, (num_tasks * num_rel * n, d)),
        stacked,
        weights["l3"],
    )
    d_out = foreign.shape[1]
    foreign = ops.sum(
        ops.multiply(
            ops.reshape(foreign, (num_tasks, num_rel, n, d_out)),
            (1.0 - selected).reshape(num_tasks, num_rel, 1, 1),
        ),
        axis=0,
    )

    return ops.add(
        ops.reshape(ops.add(own, same), (num_rel, n, d_out)), foreign
    )


def mtde_layer_hard(states, tasks, weights, pos, matrix=None):
    """ Multi-task double-equivariant layer for a known task partition.

    For every relation r in task ``i(r)``::

        out_r = L1(H_r)
              + L2(p_{i(r)} + mean of H_{r'} over r' != r in task i(r))
              + sum over other tasks k of L3(p_k + mean of H over task k)

    The same-task mean is zero if r is alone in its task.

    Parameters
    ----------
    states : Tensor, shape (R, N, d)
        Input states.

    tasks : TaskPartition
        Partition of the R relation types into K tasks.

    weights : dict
        Mapping from "l1", "l2" and "l3" to MLP weight tuples.

    pos : Tensor, shape (K, d)
        Task positional embeddings.

    matrix : scipy.sparse matrix, optional
        Block-diagonal (R * N, R * N) propagation operator. If not given,
        the components are row-wise MLPs.

    Returns
    -------
    Tensor, shape (R, N, d_out)
        Output states.
    """
    num_rel, n, d = states.shape
    if tasks.num_relations != num_rel:
        raise ContractViolation("Partition does not cover all relations")
    if pos.shape != (tasks.num_tasks, d):
        raise ShapeError(
            f"Positional embeddings must be ({tasks.num_tasks}, {d})"
        )

    relation_states = [
        ops.reshape(ops.take(states, [r], axis=0), (n, d))
        for r in range(num_rel)
    ]
    task_pos = [
        ops.reshape(ops.take(pos, [k], axis=0), (1, d))
        for k in range(tasks.num_tasks)
    ]

    def block(r):
        if matrix is None:
            return None
        return matrix[r * n : (r + 1) * n, r * n : (r + 1) * n]

    def mean_of(relations):
        if len(relations) == 0:
            return Tensor(np.zeros((n, d)))
        total = relation_states[relations[0]]
        for other in relations[1:]:
            total = ops.add(total, relation_states[other])
        return ops.divide(total, float(len(relations)))

    outputs = []
    for r in range(num_rel):
        own_task = tasks.task_of(r)
        sub = block(r)

        out = _component(relation_states[r], sub, weights["l1"])

        others = [o for o in tasks.members(own_task).tolist() if o != r]
        out = ops.add(
            out,
            _component(
                ops.add(task_pos[own_task], mean_of(others)),
                sub,
                weights["l2"],
            ),
        )

        for k in range(tasks.num_tasks):
            if k == own_task:
                continue
            members = tasks.members(k).tolist()
            out = ops.add(
                out,
                _component(
                    ops.add(task_pos[k], mean_of(members)),
                    sub,
                    weights["l3"],
                ),
            )

        outputs.append(ops.reshape(out, (1, n, out.shape[1])))

    return ops.concat(outputs, axis=0)
