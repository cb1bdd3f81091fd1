""""""
import logging

import numpy as np
import xarray as xr
from scipy import special

from multitask_link_prediction.base import config_factory
from multitask_link_prediction.errors import ContractViolation, ShapeError
from multitask_link_prediction.graph import TaskPartition
from multitask_link_prediction.numeric import Tensor
from multitask_link_prediction.utils import compute_hash

logger = logging.getLogger(__name__)

ATTENTION = "attention.logits"
MLP_WEIGHTS = ("w0", "b0", "w1", "b1")

ModelConfig = config_factory(
    "ModelConfig",
    {
        "hidden_dim": 32,
        "num_gnn_layers": 2,
        "num_mlp_layers": 2,
        "max_tasks": 2,
        "aggregation": "mean",
        "activation": "relu",
        "homogeneous": False,
        "attention_init_std": 1.0,
    },
    config_attrs={"section": "model"},
    checks=(
        (lambda c: c.hidden_dim >= 1, "hidden_dim must be at least 1"),
        (lambda c: c.max_tasks >= 1, "max_tasks must be at least 1"),
        (
            lambda c: c.num_gnn_layers >= 1 and c.num_mlp_layers >= 1,
            "layer counts must be at least 1",
        ),
        (lambda c: c.aggregation == "mean", "only mean aggregation"),
        (lambda c: c.activation == "relu", "only relu activation"),
        (
            lambda c: c.attention_init_std >= 0,
            "attention_init_std must be non-negative",
        ),
    ),
)


def num_layers(config):
    """ Total number of MTDE layers. """
    return config.num_gnn_layers + config.num_mlp_layers


def param_shapes(config, num_relations):
    """ Names and shapes of all model parameters, in canonical order.

    Parameters
    ----------
    config : ModelConfig
        The model configuration.

    num_relations : int
        Number of relation types R of the attention matrix.

    Returns
    -------
    dict
        Mapping from parameter name to shape.
    """
    d = config.hidden_dim
    mlp = {"w0": (d, d), "b0": (d,), "w1": (d, d), "b1": (d,)}

    shapes = {}
    for t in range(num_layers(config)):
        for component in ("l1", "l2", "l3"):
            for name, shape in mlp.items():
                shapes[f"layer{t}.{component}.{name}"] = shape
        shapes[f"layer{t}.pos"] = (config.max_tasks, d)

    shapes["scorer.w0"] = (2 * d, d)
    shapes["scorer.b0"] = (d,)
    shapes["scorer.w1"] = (d, 1)
    shapes["scorer.b1"] = (1,)
    shapes[ATTENTION] = (num_relations, config.max_tasks)

    return shapes


class AttentionWeights:
    """ Soft assignment of relation types to tasks. """

    def __init__(self, logits):
        """ Constructor.

        Parameters
        ----------
        logits : array_like, shape (R, K)
            Unnormalized attention logits.
        """
        logits = np.asarray(logits, dtype=np.float64)
        if logits.ndim != 2:
            raise ShapeError(
                f"Attention logits must be 2-d, got {logits.shape}"
            )
        self.logits = logits

    @property
    def num_relations(self):
        return self.logits.shape[0]

    @property
    def num_tasks(self):
        return self.logits.shape[1]

    @property
    def alpha(self):
        """ Row-stochastic attention matrix. """
        return special.softmax(self.logits, axis=1)

    def assignment(self):
        """ Most attended task of every relation, ties to the smallest. """
        return np.argmax(self.alpha, axis=1)

    def partition(self):
        """ The argmax assignment as a canonical TaskPartition.

        Unused tasks are dropped and the rest are ordered by their smallest
        relation id.
        """
        assignment = self.assignment()
        classes = [
            np.flatnonzero(assignment == k).tolist()
            for k in range(self.num_tasks)
        ]
        return TaskPartition.from_classes(
            [c for c in classes if len(c) > 0]
        ).canonical()

    def to_dataarray(self, relation_names=None):
        """ The attention matrix as a labelled DataArray. """
        coords = {"task": np.arange(self.num_tasks)}
        if relation_names is not None:
            coords["relation"] = list(relation_names)
        else:
            coords["relation"] = np.arange(self.num_relations)

        return xr.DataArray(
            self.alpha,
            dims=("relation", "task"),
            coords=coords,
            name="attention",
        )


class RelationStates:
    """ Node representations of every relation type. """

    def __init__(self, tensor):
        """ Constructor.

        Parameters
        ----------
        tensor : Tensor, shape (R, N, d)
            Stacked representations.
        """
        if tensor.ndim != 3:
            raise ShapeError(f"Expected (R, N, d) states, got {tensor.shape}")
        self.tensor = tensor

    def __repr__(self):
        r, n, d = self.tensor.shape
        return f"RelationStates(R={r}, N={n}, d={d})"

    @property
    def num_relations(self):
        return self.tensor.shape[0]

    @property
    def num_nodes(self):
        return self.tensor.shape[1]

    @property
    def dim(self):
        return self.tensor.shape[2]

    def relation(self, r):
        """ Node representation matrix of one relation type. """
        return self.tensor.data[r]


class ModelParams:
    """ Named parameter arrays of a model. """

    def __init__(self, arrays, config, num_relations):
        """ Constructor.

        Parameters
        ----------
        arrays : dict
            Mapping from parameter name to float64 array.

        config : ModelConfig
            The configuration the parameters belong to.

        num_relations : int
            Number of relation types of the attention logits.
        """
        expected = param_shapes(config, num_relations)
        if set(arrays) != set(expected):
            raise ContractViolation(
                f"Parameter names do not match the configuration: "
                f"{sorted(set(arrays) ^ set(expected))}"
            )
        for name, shape in expected.items():
            if np.shape(arrays[name]) != tuple(shape):
                raise ShapeError(
                    f"{name} has shape {np.shape(arrays[name])}, "
                    f"expected {shape}"
                )

        self.arrays = {
            name: np.asarray(arrays[name], dtype=np.float64)
            for name in expected
        }
        self.config = config
        self.num_relations = num_relations

    def __repr__(self):
        return (
            f"ModelParams(R={self.num_relations}, "
            f"num_params={sum(a.size for a in self.arrays.values())})"
        )

    def __getitem__(self, name):
        return self.arrays[name]

    @classmethod
    def initialize(cls, config, num_relations, rng):
        """ Randomly initialize parameters.

        Weight matrices are Glorot-uniform, biases zero, positional
        embeddings standard normal and attention logits normal with
        standard deviation ``config.attention_init_std``.
        """
        arrays = {}
        for name, shape in param_shapes(config, num_relations).items():
            kind = name.rsplit(".", 1)[-1]
            if kind.startswith("w"):
                limit = np.sqrt(6.0 / (shape[0] + shape[1]))
                arrays[name] = rng.uniform(-limit, limit, size=shape)
            elif kind.startswith("b"):
                arrays[name] = np.zeros(shape)
            elif kind == "pos":
                arrays[name] = rng.standard_normal(shape)
            else:
                arrays[name] = rng.normal(
                    0.0, config.attention_init_std, size=shape
                )

        logger.debug(
            f"Initialized {len(arrays)} parameter arrays for R={num_relations}"
        )

        return cls(arrays, config, num_relations)

    def bind(self, tape=None, trainable=None):
        """ Wrap parameters as tensors.

        Parameters
        ----------
        tape : Tape, optional
            If specified, trainable parameters become leaves of this tape.

        trainable : iterable of str, optional
            Names of the parameters to record as leaves, all by default.

        Returns
        -------
        dict
            Mapping from parameter name to Tensor.
        """
        if trainable is not None:
            trainable = set(trainable)

        bound = {}
        for name, value in self.arrays.items():
            if tape is not None and (trainable is None or name in trainable):
                bound[name] = tape.leaf(value, name)
            else:
                bound[name] = Tensor(value)

        return bound

    def replace(self, arrays):
        """ Copy with some parameter arrays replaced. """
        new = dict(self.arrays)
        new.update(arrays)

        return ModelParams(new, self.config, self.num_relations)

    def digest(self, exclude_attention=False):
        """ SHA-256 digest of the parameter values. """
        return compute_hash(
            {
                k: v
                for k, v in self.arrays.items()
                if not (exclude_attention and k == ATTENTION)
            }
        )

    @property
    def attention(self):
        return AttentionWeights(self.arrays[ATTENTION])

    def with_attention(self, logits):
        """ Copy with new attention logits, possibly for other relations. """
        logits = np.asarray(logits, dtype=np.float64)
        if logits.ndim != 2 or logits.shape[1] != self.config.max_tasks:
            raise ShapeError(
                f"Attention logits must have {self.config.max_tasks} columns"
            )
        arrays = dict(self.arrays)
        arrays[ATTENTION] = logits

        return ModelParams(arrays, self.config, logits.shape[0])


from multitask_link_prediction.model.network import (  # noqa: E402
    forward,
    homogeneous_score,
    make_scorer,
    score_triplet,
    score_triplets,
)
