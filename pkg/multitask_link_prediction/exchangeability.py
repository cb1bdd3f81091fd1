""" Brute-force decision of relation exchangeability on small distributions.

Two relation types are exchangeable under a distribution over graphs if
some joint relabeling of nodes and relations that maps one onto the other
leaves the distribution unchanged. Relational tasks are the equivalence
classes of this relation.
"""
import itertools
import logging

import numpy as np

from multitask_link_prediction.errors import CapacityError, ContractViolation
from multitask_link_prediction.graph import TaskPartition, apply_perms

logger = logging.getLogger(__name__)

MAX_NODES = 6
MAX_RELATIONS = 4
PROB_TOLERANCE = 1e-12


class EmpiricalDistribution:
    """ Finite distribution over multigraphs with equal node and relation
    counts. """

    def __init__(self, support):
        """ Constructor.

        Parameters
        ----------
        support : iterable of (Multigraph, float)
            Graphs and their probabilities. Equal graphs are merged.
        """
        support = list(support)
        if len(support) == 0:
            raise ContractViolation("Empty support")

        sizes = {(g.num_nodes, g.num_relations) for g, _ in support}
        if len(sizes) != 1:
            raise ContractViolation("All graphs must share N and R")
        self.num_nodes, self.num_relations = sizes.pop()

        probs = np.array([p for _, p in support], dtype=float)
        if np.any(probs <= 0) or abs(probs.sum() - 1.0) > PROB_TOLERANCE:
            raise ContractViolation(
                "Probabilities must be positive and sum to 1"
            )

        self.graphs = {}
        self.probs = {}
        for graph, prob in support:
            key = _code_key(graph.encode())
            self.graphs[key] = graph
            self.probs[key] = self.probs.get(key, 0.0) + float(prob)

    def __len__(self):
        return len(self.probs)

    @property
    def support(self):
        """ List of (graph, probability) pairs. """
        return [(self.graphs[k], p) for k, p in self.probs.items()]

    @classmethod
    def uniform(cls, graphs):
        """ Uniform distribution over the given graphs. """
        graphs = list(graphs)
        return cls((g, 1.0 / len(graphs)) for g in graphs)

    def check_capacity(self):
        """ Raise a CapacityError if exhaustive enumeration is too large. """
        if self.num_nodes > MAX_NODES or self.num_relations > MAX_RELATIONS:
            raise CapacityError(
                f"Exhaustive search supports N <= {MAX_NODES} and "
                f"R <= {MAX_RELATIONS}, got N={self.num_nodes}, "
                f"R={self.num_relations}"
            )


def _code_key(codes):
    """ Hashable canonical key of a set of encoded triplets. """
    return np.sort(codes).astype("<i8").tobytes()


def _relation_perms(num_relations, r, r_prime):
    """ All relation permutations mapping r to r_prime. """
    for mapping in itertools.permutations(range(num_relations)):
        if mapping[r] == r_prime:
            yield np.array(mapping)


def _is_invariant(dist, node_perms, rel_perm):
    """ Mask of node permutations under which the distribution is invariant
    when combined with a relation permutation. """
    n, num_rel = dist.num_nodes, dist.num_relations
    valid = np.ones(len(node_perms), dtype=bool)

    for key, graph in dist.graphs.items():
        t = graph.triplets
        # one row of transformed codes per node permutation
        codes = (
            node_perms[:, t[:, 0]] * num_rel + rel_perm[t[:, 1]]
        ) * n + node_perms[:, t[:, 2]]
        prob = dist.probs[key]
        for idx in np.flatnonzero(valid):
            image = dist.probs.get(_code_key(codes[idx]))
            if image is None or abs(image - prob) > PROB_TOLERANCE:
                valid[idx] = False
        if not valid.any():
            break

    return valid


def exchangeable_bruteforce(dist, r, r_prime):
    """ Decide whether two relation types are exchangeable.

    Parameters
    ----------
    dist : EmpiricalDistribution
        Distribution with at most 6 nodes and 4 relation types.

    r, r_prime : int
        Relation ids.

    Returns
    -------
    bool
        True iff there is a node permutation and a relation permutation
        mapping ``r`` to ``r_prime`` whose joint action leaves every
        graph probability unchanged.
    """
    dist.check_capacity()
    for rel in (r, r_prime):
        if not 0 <= rel < dist.num_relations:
            raise ContractViolation(f"Relation id {rel} out of range")

    node_perms = np.array(list(itertools.permutations(range(dist.num_nodes))))

    for rel_perm in _relation_perms(dist.num_relations, r, r_prime):
        if _is_invariant(dist, node_perms, rel_perm).any():
            logger.debug(
                f"Relations {r} and {r_prime} exchangeable via "
                f"{rel_perm.tolist()}"
            )
            return True

    return False


def relational_tasks(dist):
    """ Partition the relation types into exchangeability classes.

    Parameters
    ----------
    dist : EmpiricalDistribution
        Distribution with at most 6 nodes and 4 relation types.

    Returns
    -------
    TaskPartition
        Classes ordered by their smallest relation id.
    """
    dist.check_capacity()

    assignment = np.full(dist.num_relations, -1)
    num_tasks = 0
    for r in range(dist.num_relations):
        if assignment[r] >= 0:
            continue
        assignment[r] = num_tasks
        for r_prime in range(r + 1, dist.num_relations):
            if assignment[r_prime] < 0 and exchangeable_bruteforce(
                dist, r, r_prime
            ):
                assignment[r_prime] = num_tasks
        num_tasks += 1

    logger.info(f"Found {num_tasks} relational task(s)")

    return TaskPartition(assignment, num_tasks=num_tasks)


def relabel_distribution(dist, node_perm, rel_perm):
    """ Push a distribution forward under a node and relation relabeling.
    """
    return EmpiricalDistribution(
        (apply_perms(g, node_perm, rel_perm), p) for g, p in dist.support
    )

