""" Ranking evaluation of triplet scorers. """
import logging

import numpy as np
import pandas as pd

from multitask_link_prediction.base import BaseConfigurable
from multitask_link_prediction.datasets import sample_negatives
from multitask_link_prediction.decorators import scheme
from multitask_link_prediction.errors import ContractViolation
from multitask_link_prediction.utils import map_chunks, rng_stream

logger = logging.getLogger(__name__)

HITS_AT = (1, 3, 5, 10)


class BaseScheme(BaseConfigurable):
    """ Base class for ranking schemes.

    A scheme ranks every positive triplet within a pool made of the positive,
    ``n_tail`` tail-corrupted and ``n_rel`` relation-corrupted negatives.
    """

    scheme_type = None

    def __init__(self, n_tail=0, n_rel=0):
        """ Constructor.

        Parameters
        ----------
        n_tail : int, default 0
            Number of tail-corrupted negatives per positive.

        n_rel : int, default 0
            Number of relation-corrupted negatives per positive.
        """
        if n_tail < 0 or n_rel < 0 or n_tail + n_rel == 0:
            raise ContractViolation(
                "A scheme needs a non-negative number of negatives, "
                "at least one in total"
            )
        self.n_tail = n_tail
        self.n_rel = n_rel

    def __repr__(self):
        return (
            f"{self.__class__.__name__}(n_tail={self.n_tail}, "
            f"n_rel={self.n_rel})"
        )

    @property
    def pool_size(self):
        return 1 + self.n_tail + self.n_rel

    @classmethod
    def from_config(cls, config, **kwargs):
        """ Create a scheme from a SchemeConfig. """
        try:
            return scheme.registry[config.scheme_type]._from_config(
                config, **kwargs
            )
        except KeyError:
            raise ValueError(
                f"No such scheme type: {config.scheme_type}. "
                f"If you are implementing a custom scheme, remember to use "
                f"the @multitask_link_prediction.scheme class decorator."
            )

    @classmethod
    def _from_config(cls, config, **kwargs):
        """ Per-class implementation of from_config. """
        return cls(**cls.get_constructor_args(config, **kwargs))

    def candidates(self, observable, positives, rng):
        """ Candidate pools of positives, the positive first in each pool.

        Returns
        -------
        numpy.ndarray, shape (B, pool_size, 3)
            The pools.
        """
        batch = sample_negatives(
            observable, positives, self.n_tail, self.n_rel, rng
        )
        return np.concatenate(
            [
                batch.positives[:, None, :],
                batch.tail_negatives,
                batch.relation_negatives,
            ],
            axis=1,
        )


@scheme("dual")
class DualScheme(BaseScheme):
    """ Pools with both tail- and relation-corrupted negatives. """

    def __init__(self, n_tail=24, n_rel=26):
        """ Constructor. """
        super().__init__(n_tail=n_tail, n_rel=n_rel)


@scheme("entity")
class EntityScheme(BaseScheme):
    """ Pools with tail-corrupted negatives only. """

    def __init__(self, n_tail=50, n_rel=0):
        """ Constructor. """
        super().__init__(n_tail=n_tail, n_rel=n_rel)


@scheme("relation")
class RelationScheme(BaseScheme):
    """ Pools with relation-corrupted negatives only. """

    def __init__(self, n_tail=0, n_rel=50):
        """ Constructor. """
        super().__init__(n_tail=n_tail, n_rel=n_rel)


def get_scheme(name, **kwargs):
    """ Create a registered scheme by name.

    Keyword arguments override the defaults of the scheme's Config.
    """
    try:
        scheme_class = scheme.registry[name]
    except KeyError:
        raise ValueError(f"No such scheme type: {name}")

    return BaseScheme.from_config(scheme_class.Config(**kwargs))


def rank_pessimistic(candidate_scores, positive_index=0):
    """ Rank of a candidate, placed last among the candidates it ties with.

    Parameters
    ----------
    candidate_scores : array_like
        Scores of all candidates of a pool.

    positive_index : int, default 0
        Index of the positive candidate.

    Returns
    -------
    int
        ``1 + number of other candidates scoring at least as high``.
    """
    scores = np.asarray(candidate_scores, dtype=np.float64)
    if scores.ndim != 1 or not 0 <= positive_index < len(scores):
        raise ContractViolation("Positive index out of range")

    others = np.delete(scores, positive_index)
    return 1 + int(np.count_nonzero(others >= scores[positive_index]))


def _ranks_of_pools(pool_scores, pools=None):
    """ Pessimistic ranks of the first candidate of every pool.

    Candidates that repeat the positive triplet itself are not counted.
    """
    beaten = pool_scores[:, 1:] >= pool_scores[:, :1]
    if pools is not None:
        beaten &= np.any(pools[:, 1:] != pools[:, :1], axis=2)

    return 1 + np.count_nonzero(beaten, axis=1)


class MetricsReport:
    """ Ranking metrics over a set of positives. """

    def __init__(self, mr, mrr, hits, count, scheme_type=None):
        """ Constructor.

        Parameters
        ----------
        mr : float
            Mean rank.

        mrr : float
            Mean reciprocal rank.

        hits : dict
            Mapping from k to the fraction of ranks at most k.

        count : int
            Number of ranked positives.

        scheme_type : str, optional
            Name of the scheme the ranks were computed with.
        """
        self.mr = mr
        self.mrr = mrr
        self.hits = hits
        self.count = count
        self.scheme_type = scheme_type

    def __repr__(self):
        hits = ", ".join(f"hits@{k}={v:.3f}" for k, v in self.hits.items())
        return (
            f"MetricsReport(scheme={self.scheme_type}, mr={self.mr:.3f}, "
            f"mrr={self.mrr:.3f}, {hits}, count={self.count})"
        )

    def to_dict(self):
        """ Metric name to value. """
        metrics = {"mr": self.mr, "mrr": self.mrr}
        metrics.update({f"hits@{k}": v for k, v in self.hits.items()})
        return metrics

    def to_frame(self):
        """ Metrics as a DataFrame with columns scheme, metric, value and
        count. """
        return pd.DataFrame(
            [
                {
                    "scheme": self.scheme_type,
                    "metric": metric,
                    "value": value,
                    "count": self.count,
                }
                for metric, value in self.to_dict().items()
            ]
        )


def metrics_from_ranks(ranks, scheme_type=None):
    """ Aggregate ranks into a MetricsReport.

    Parameters
    ----------
    ranks : array_like of int
        Ranks, all at least 1.

    scheme_type : str, optional
        Name of the scheme the ranks were computed with.

    Returns
    -------
    MetricsReport
        MR, MRR and Hits@1, 3, 5, 10.
    """
    ranks = np.asarray(ranks, dtype=np.float64)
    if ranks.size == 0 or np.any(ranks < 1):
        raise ContractViolation("Ranks must be non-empty and at least 1")

    return MetricsReport(
        mr=float(ranks.mean()),
        mrr=float(np.mean(1.0 / ranks)),
        hits={k: float(np.mean(ranks <= k)) for k in HITS_AT},
        count=len(ranks),
        scheme_type=scheme_type,
    )


def rank_positives(
    scorer, observable, missing, ranking, seed, threads=1, chunk_size=64
):
    """ Pessimistic rank of every missing triplet within its pool.

    Parameters
    ----------
    scorer : callable
        Function mapping a (B, 3) array of triplets to a (B,) array of
        scores.

    observable : Multigraph
        Graph defining the node and relation sets.

    missing : Multigraph
        Positive triplets to rank.

    ranking : BaseScheme
        The ranking scheme.

    seed : int
        Seed of the candidate sampling. The pool of the i-th positive only
        depends on ``seed`` and ``i``.

    threads : int, default 1
        Maximum number of scoring threads.

    chunk_size : int, default 64
        Number of positives scored together.

    Returns
    -------
    numpy.ndarray
        The ranks, in the order of ``missing.triplets``.
    """
    if len(missing) == 0:
        raise ContractViolation("No missing triplets to evaluate")

    positives = missing.triplets

    def rank_chunk(indexes):
        pools = np.concatenate(
            [
                ranking.candidates(
                    observable, positives[[i]], rng_stream(seed, int(i))
                )
                for i in indexes
            ]
        )
        scores = np.asarray(scorer(pools.reshape(-1, 3)))
        return _ranks_of_pools(scores.reshape(len(indexes), -1), pools)

    ranks = map_chunks(
        rank_chunk,
        np.arange(len(positives)),
        threads=threads,
        chunk_size=chunk_size,
    )

    return np.concatenate(ranks)


def evaluate(
    scorer, observable, missing, ranking, seed, threads=1, chunk_size=64
):
    """ Evaluate a scorer on missing triplets with a ranking scheme.

    Parameters
    ----------
    scorer : callable
        Function mapping a (B, 3) array of triplets to a (B,) array of
        scores, e.g. from :func:`multitask_link_prediction.make_scorer`.

    observable : Multigraph
        Graph defining the node and relation sets.

    missing : Multigraph
        Positive triplets to rank.

    ranking : BaseScheme or str
        The ranking scheme or its registered name.

    seed : int
        Seed of the candidate sampling.

    threads : int, default 1
        Maximum number of scoring threads.

    chunk_size : int, default 64
        Number of positives scored together.

    Returns
    -------
    MetricsReport
        The metrics.
    """
    if isinstance(ranking, str):
        ranking = get_scheme(ranking)

    ranks = rank_positives(
        scorer,
        observable,
        missing,
        ranking,
        seed,
        threads=threads,
        chunk_size=chunk_size,
    )
    report = metrics_from_ranks(ranks, scheme_type=ranking.scheme_type)
    logger.debug(f"Evaluated {report!r}")

    return report


def reports_to_frame(reports):
    """ Concatenate the frames of several reports. """
    return pd.concat([r.to_frame() for r in reports], ignore_index=True)
