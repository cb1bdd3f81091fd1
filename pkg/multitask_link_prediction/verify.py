""" Property suites checking the library against independent oracles. """
import itertools
import logging

import numpy as np

from multitask_link_prediction.base import BaseConfigurable
from multitask_link_prediction.datasets import DatasetSplit, sample_negatives
from multitask_link_prediction.decorators import suite
from multitask_link_prediction.evaluation import (
    DualScheme,
    RelationScheme,
    evaluate,
    rank_positives,
    rank_pessimistic,
)
from multitask_link_prediction.exchangeability import (
    EmpiricalDistribution,
    exchangeable_bruteforce,
    relational_tasks,
)
from multitask_link_prediction.graph import (
    Multigraph,
    Perm,
    TaskPartition,
    apply_perms,
)
from multitask_link_prediction.loss import concentration_lgamma, total_loss
from multitask_link_prediction.model import (
    ATTENTION,
    ModelConfig,
    ModelParams,
)
from multitask_link_prediction.model.layers import (
    mtde_layer_hard,
    mtde_layer_soft,
)
from multitask_link_prediction.model.network import forward
from multitask_link_prediction.numeric import Tensor, finite_diff_check, ops
from multitask_link_prediction.training import batch_loss
from multitask_link_prediction.utils import rng_stream

logger = logging.getLogger(__name__)


class PropertyResult:
    """ Outcome of checking one property. """

    def __init__(self, name, passed, value=None, seed=None, detail=""):
        """ Constructor.

        Parameters
        ----------
        name : str
            Name of the property.

        passed : bool
            Whether the property holds.

        value : float, optional
            Measured quantity, e.g. a maximum deviation.

        seed : int, optional
            Seed of the first counterexample, or of the run.

        detail : str, default ""
            Human-readable description of a failure.
        """
        self.name = name
        self.passed = bool(passed)
        self.value = value
        self.seed = seed
        self.detail = detail

    def __repr__(self):
        status = "ok" if self.passed else "FAILED"
        value = "" if self.value is None else f", value={self.value:.3g}"
        return f"PropertyResult({self.name}: {status}{value})"

    def to_dict(self):
        """ Result as a dict. """
        return {
            "property": self.name,
            "passed": self.passed,
            "value": self.value,
            "seed": self.seed,
            "detail": self.detail,
        }


def _worst(name, deviations, tolerance):
    """ Result from per-seed deviations, reporting the worst seed. """
    seeds = list(deviations)
    values = np.array([deviations[s] for s in seeds])
    worst = seeds[int(np.argmax(values))]

    return PropertyResult(
        name,
        values.max() <= tolerance,
        value=float(values.max()),
        seed=worst,
        detail=f"deviation {values.max():.3g} > {tolerance:g}",
    )


class BaseSuite(BaseConfigurable):
    """ Base class for property suites. """

    suite_type = None

    def __init__(self, seed=0):
        """ Constructor.

        Parameters
        ----------
        seed : int, default 0
            Master seed of all random cases.
        """
        self.seed = seed

    @classmethod
    def from_config(cls, config, **kwargs):
        """ Create a suite from a SuiteConfig. """
        try:
            return suite.registry[config.suite_type]._from_config(
                config, **kwargs
            )
        except KeyError:
            raise ValueError(
                f"No such suite type: {config.suite_type}. "
                f"If you are implementing a custom suite, remember to use "
                f"the @multitask_link_prediction.suite class decorator."
            )

    @classmethod
    def _from_config(cls, config, **kwargs):
        """ Per-class implementation of from_config. """
        return cls(**cls.get_constructor_args(config, **kwargs))

    def run(self):
        """ Check all properties of this suite.

        Returns
        -------
        list of PropertyResult
            One result per property.
        """
        raise NotImplementedError


def get_suite(name, **kwargs):
    """ Create a registered suite by name from its Config. """
    try:
        suite_class = suite.registry[name]
    except KeyError:
        raise ValueError(f"No such suite type: {name}")

    return BaseSuite.from_config(suite_class.Config(**kwargs))


def run_suite(name, **kwargs):
    """ Run a registered suite and log the outcome of every property. """
    results = get_suite(name, **kwargs).run()
    for result in results:
        if result.passed:
            logger.info(
                f"{name}: {result.name} passed (value {result.value})"
            )
        else:
            logger.error(
                f"{name}: {result.name} failed for seed {result.seed}: "
                f"{result.detail}"
            )

    return results


def _random_weights(rng, hidden_dim):
    """ Random MLP weights of the three layer components. """
    shapes = [(hidden_dim, hidden_dim), (hidden_dim,)] * 2
    return {
        component: tuple(
            Tensor(rng.standard_normal(shape) / np.sqrt(hidden_dim))
            for shape in shapes
        )
        for component in ("l1", "l2", "l3")
    }


def jitter_biases(params, rng, scale=0.1):
    """ Copy of parameters with small random biases, keeping ReLU inputs
    of all-zero rows off the kink. """
    return params.replace(
        {
            name: rng.normal(0.0, scale, size=value.shape)
            for name, value in params.arrays.items()
            if name.rsplit(".", 1)[-1].startswith("b")
        }
    )


@suite("gradcheck")
class GradcheckSuite(BaseSuite):
    """ Reverse-mode gradients against central finite differences. """

    def __init__(
        self,
        seed=0,
        num_nodes=5,
        num_relations=3,
        hidden_dim=8,
        max_tasks=2,
        tolerance=1e-5,
    ):
        """ Constructor. """
        super().__init__(seed=seed)
        self.num_nodes = num_nodes
        self.num_relations = num_relations
        self.hidden_dim = hidden_dim
        self.max_tasks = max_tasks
        self.tolerance = tolerance

    def run(self):
        rng = rng_stream(self.seed, "gradcheck")
        graph = Multigraph.random(
            self.num_nodes, self.num_relations, 2 * self.num_nodes, rng
        )
        config = ModelConfig(
            hidden_dim=self.hidden_dim,
            max_tasks=self.max_tasks,
            num_gnn_layers=1,
            num_mlp_layers=1,
        )
        params = jitter_biases(
            ModelParams.initialize(config, self.num_relations, rng), rng
        )
        batch = sample_negatives(graph, graph.triplets[:4], 2, 2, rng)

        def loss(bound):
            return batch_loss(bound, graph, batch, config, 0.1, 0.1)

        def regularizers(bound):
            alpha = ops.softmax(bound[ATTENTION], axis=1)
            return total_loss(concentration_lgamma(alpha), alpha, 1.0, 0.0)

        results = []
        for name, f, arrays in (
            ("loss_gradient", loss, params.arrays),
            (
                "regularizer_gradient",
                regularizers,
                {ATTENTION: params[ATTENTION]},
            ),
        ):
            error = finite_diff_check(f, arrays)
            results.append(
                PropertyResult(
                    name,
                    error <= self.tolerance,
                    value=error,
                    seed=self.seed,
                    detail=f"max relative error {error:.3g}",
                )
            )

        return results


@suite("equivariance")
class EquivarianceSuite(BaseSuite):
    """ Double equivariance of the network and consistency of the layers.
    """

    def __init__(
        self,
        seed=0,
        cases=200,
        max_nodes=6,
        max_relations=4,
        hidden_dim=4,
        layer_cases=100,
        tolerance=1e-9,
    ):
        """ Constructor. """
        super().__init__(seed=seed)
        self.cases = cases
        self.max_nodes = max_nodes
        self.max_relations = max_relations
        self.hidden_dim = hidden_dim
        self.layer_cases = layer_cases
        self.tolerance = tolerance

    def _random_graph(self, rng):
        n = int(rng.integers(2, self.max_nodes + 1))
        r = int(rng.integers(2, self.max_relations + 1))
        count = int(rng.integers(1, n * n * r // 2 + 1))

        return Multigraph.random(n, r, count, rng)

    def relabeling_deviation(self, case):
        """ Deviation of forward under a joint node and relation relabeling.
        """
        rng = rng_stream(self.seed, case)
        graph = self._random_graph(rng)
        config = ModelConfig(hidden_dim=self.hidden_dim, max_tasks=2)
        params = ModelParams.initialize(config, graph.num_relations, rng)

        node_perm = Perm.random(graph.num_nodes, rng)
        rel_perm = Perm.random(graph.num_relations, rng)

        logits = np.empty_like(params[ATTENTION])
        logits[rel_perm.mapping] = params[ATTENTION]
        relabeled = params.with_attention(logits)

        states = forward(graph, params).tensor.data
        image = forward(
            apply_perms(graph, node_perm, rel_perm), relabeled
        ).tensor.data
        expected = np.empty_like(states)
        expected[np.ix_(rel_perm.mapping, node_perm.mapping)] = states

        return float(np.max(np.abs(image - expected)))

    def hard_soft_deviation(self, case):
        """ Deviation of the soft layer with one-hot attention from the
        hard layer of the same partition. """
        rng = rng_stream(self.seed, f"layers.{case}")
        graph = self._random_graph(rng)
        r, n, d = graph.num_relations, graph.num_nodes, self.hidden_dim

        assignment = rng.integers(0, r, size=r)
        tasks = TaskPartition(np.unique(assignment, return_inverse=True)[1])
        states = Tensor(rng.standard_normal((r, n, d)))
        weights = _random_weights(rng, d)
        pos = Tensor(rng.standard_normal((tasks.num_tasks, d)))
        matrix = graph.propagation_matrix() if case % 2 == 0 else None

        hard = mtde_layer_hard(states, tasks, weights, pos, matrix=matrix)
        soft = mtde_layer_soft(
            states, Tensor(tasks.one_hot()), weights, pos, matrix=matrix
        )

        return float(np.max(np.abs(hard.data - soft.data)))

    def single_task_deviation(self, case):
        """ Deviation of the soft layer with one task from the hard layer
        that treats all relations as one task. """
        rng = rng_stream(self.seed, f"single.{case}")
        graph = self._random_graph(rng)
        r, n, d = graph.num_relations, graph.num_nodes, self.hidden_dim

        states = Tensor(rng.standard_normal((r, n, d)))
        weights = _random_weights(rng, d)
        pos = Tensor(rng.standard_normal((1, d)))
        matrix = graph.propagation_matrix()

        hard = mtde_layer_hard(
            states, TaskPartition(np.zeros(r)), weights, pos, matrix=matrix
        )
        soft = mtde_layer_soft(
            states, Tensor(np.ones((r, 1))), weights, pos, matrix=matrix
        )

        return float(np.max(np.abs(hard.data - soft.data)))

    def run(self):
        return [
            _worst(
                "double_equivariance",
                {c: self.relabeling_deviation(c) for c in range(self.cases)},
                self.tolerance,
            ),
            _worst(
                "hard_soft_consistency",
                {
                    c: self.hard_soft_deviation(c)
                    for c in range(self.layer_cases)
                },
                self.tolerance,
            ),
            _worst(
                "single_task_reduction",
                {
                    c: self.single_task_deviation(c)
                    for c in range(self.layer_cases)
                },
                1e-12,
            ),
        ]


def orbit_distribution(num_nodes, tasks, rng):
    """ Uniform distribution over the orbit of a random graph under all
    relabelings within tasks.

    Every relation of task k has ``k + 1`` triplets in every graph of the
    support, so relations of different tasks are never exchangeable, while
    swapping relations within a task leaves the distribution unchanged.

    Parameters
    ----------
    num_nodes : int
        Number of nodes.

    tasks : TaskPartition
        The intended relational tasks.

    rng : numpy.random.Generator
        Random generator.

    Returns
    -------
    EmpiricalDistribution
        The distribution.
    """
    triplets = []
    for rel in range(tasks.num_relations):
        count = tasks.task_of(rel) + 1
        pairs = rng.choice(num_nodes * num_nodes, size=count, replace=False)
        heads, tails = np.divmod(pairs, num_nodes)
        triplets.append(np.stack([heads, np.full(count, rel), tails], 1))
    base = Multigraph(num_nodes, tasks.num_relations, np.concatenate(triplets))

    orbit = {}
    node_id = Perm.identity(num_nodes)
    for images in itertools.product(
        *(itertools.permutations(c) for c in tasks.classes())
    ):
        mapping = np.arange(tasks.num_relations)
        for members, image in zip(tasks.classes(), images):
            mapping[members] = image
        graph = apply_perms(base, node_id, Perm(mapping))
        orbit[graph.key()] = graph

    return EmpiricalDistribution.uniform(list(orbit.values()))


@suite("exchangeability")
class ExchangeabilitySuite(BaseSuite):
    """ Equivalence properties of exchangeability and task recovery. """

    def __init__(self, seed=0, cases=20, num_nodes=4, max_relations=4):
        """ Constructor. """
        super().__init__(seed=seed)
        self.cases = cases
        self.num_nodes = num_nodes
        self.max_relations = max_relations

    def check_case(self, case):
        """ Names of the properties violated on one random distribution. """
        rng = rng_stream(self.seed, case)
        r = int(rng.integers(2, self.max_relations + 1))
        _, assignment = np.unique(
            rng.integers(0, r, size=r), return_inverse=True
        )
        tasks = TaskPartition(assignment).canonical()
        dist = orbit_distribution(self.num_nodes, tasks, rng)

        ex = np.array(
            [
                [exchangeable_bruteforce(dist, a, b) for b in range(r)]
                for a in range(r)
            ]
        )
        violated = []
        if not ex.diagonal().all():
            violated.append("reflexivity")
        if not np.array_equal(ex, ex.T):
            violated.append("symmetry")
        # a ~ b and b ~ c imply a ~ c
        reach = (ex.astype(int) @ ex.astype(int)) > 0
        if np.any(reach & ~ex):
            violated.append("transitivity")
        if relational_tasks(dist) != tasks:
            violated.append("task_recovery")

        return violated

    def run(self):
        names = ("reflexivity", "symmetry", "transitivity", "task_recovery")
        failures = {name: [] for name in names}
        for case in range(self.cases):
            for name in self.check_case(case):
                failures[name].append(case)

        return [
            PropertyResult(
                name,
                len(failures[name]) == 0,
                value=float(len(failures[name])),
                seed=failures[name][0] if failures[name] else self.seed,
                detail=f"violated in cases {failures[name]}",
            )
            for name in names
        ]


def relation_agnostic_scorer(num_nodes, rng):
    """ Scorer that gives every relation variant of a pair the same score.
    """
    table = rng.random((num_nodes, num_nodes))

    def scorer(triplets):
        triplets = np.asarray(triplets).reshape(-1, 3)
        return table[triplets[:, 0], triplets[:, 2]]

    return scorer


@suite("ranking")
class RankingSuite(BaseSuite):
    """ Pessimistic ranking and the metrics of tied scorers. """

    def __init__(self, seed=0, cases=100, num_nodes=20, num_relations=5):
        """ Constructor. """
        super().__init__(seed=seed)
        self.cases = cases
        self.num_nodes = num_nodes
        self.num_relations = num_relations

    def _rank_properties(self):
        """ Seeds violating monotonicity and tie invariance. """
        monotone, invariant = [], []
        for case in range(self.cases):
            rng = rng_stream(self.seed, case)
            scores = rng.integers(0, 5, size=int(rng.integers(2, 52))) / 4.0
            rank = rank_pessimistic(scores)

            raised = scores.copy()
            raised[0] += 0.25
            if rank_pessimistic(raised) > rank:
                monotone.append(case)

            lowered = np.append(scores, scores[0] - 1.0)
            if rank_pessimistic(lowered) != rank:
                invariant.append(case)

        return monotone, invariant

    def run(self):
        monotone, invariant = self._rank_properties()

        rng = rng_stream(self.seed, "tied")
        graph = Multigraph.random(
            self.num_nodes, self.num_relations, 4 * self.num_nodes, rng
        )
        split = DatasetSplit(
            graph.subgraph(graph.triplets[::2]),
            graph.subgraph(graph.triplets[1::2]),
        )
        scorer = relation_agnostic_scorer(self.num_nodes, rng)
        relation = evaluate(
            scorer, split.observable, split.missing, RelationScheme(), 0
        )
        dual_ranks = rank_positives(
            scorer, split.observable, split.missing, DualScheme(), 0
        )

        return [
            PropertyResult(
                "all_tied_rank",
                rank_pessimistic(np.full(51, 0.5)) == 51,
                value=float(rank_pessimistic(np.full(51, 0.5))),
                seed=self.seed,
            ),
            PropertyResult(
                "monotonicity",
                len(monotone) == 0,
                value=float(len(monotone)),
                seed=monotone[0] if monotone else self.seed,
                detail=f"violated in cases {monotone}",
            ),
            PropertyResult(
                "tie_invariance",
                len(invariant) == 0,
                value=float(len(invariant)),
                seed=invariant[0] if invariant else self.seed,
                detail=f"violated in cases {invariant}",
            ),
            PropertyResult(
                "relation_scheme_ties",
                relation.mr == 51.0,
                value=relation.mr,
                seed=self.seed,
                detail=f"mean rank {relation.mr} instead of 51",
            ),
            PropertyResult(
                "dual_scheme_ties",
                dual_ranks.min() >= 27,
                value=float(dual_ranks.min()),
                seed=self.seed,
                detail=f"minimum rank {dual_ranks.min()} below 27",
            ),
        ]
