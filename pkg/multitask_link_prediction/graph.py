""""""
import logging
from pathlib import Path

import numpy as np
from scipy import sparse

from multitask_link_prediction.errors import ContractViolation, ParseError

logger = logging.getLogger(__name__)


class Multigraph:
    """ Directed multigraph with typed edges, stored as a set of triplets.

    Triplets are ``(head, relation, tail)`` rows of integer ids, kept
    sorted so that equal graphs have equal arrays.
    """

    def __init__(self, num_nodes, num_relations, triplets=()):
        """ Constructor.

        Parameters
        ----------
        num_nodes : int
            Number of nodes N, at least 2.

        num_relations : int
            Number of relation types R, at least 2.

        triplets : array_like, shape (T, 3)
            Distinct ``(head, relation, tail)`` triplets with ids in range.
        """
        if num_nodes < 2 or num_relations < 2:
            raise ContractViolation(
                f"A multigraph needs at least 2 nodes and 2 relations, got "
                f"N={num_nodes}, R={num_relations}"
            )

        triplets = np.asarray(triplets, dtype=np.int64).reshape(-1, 3)
        if triplets.size > 0:
            if triplets.min() < 0 or np.any(
                triplets.max(axis=0) >= (num_nodes, num_relations, num_nodes)
            ):
                raise ContractViolation("Triplet id out of range")

        unique = np.unique(triplets, axis=0)
        if len(unique) != len(triplets):
            raise ContractViolation("Duplicate triplets")
        unique.flags.writeable = False

        self.num_nodes = int(num_nodes)
        self.num_relations = int(num_relations)
        self.triplets = unique

        self._propagation = {}

    def __len__(self):
        return len(self.triplets)

    def __eq__(self, other):
        return (
            isinstance(other, Multigraph)
            and self.num_nodes == other.num_nodes
            and self.num_relations == other.num_relations
            and np.array_equal(self.triplets, other.triplets)
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return (
            f"Multigraph(N={self.num_nodes}, R={self.num_relations}, "
            f"T={len(self)})"
        )

    @classmethod
    def random(cls, num_nodes, num_relations, num_triplets, rng):
        """ Graph with distinct triplets drawn uniformly at random. """
        total = num_nodes * num_relations * num_nodes
        if not 0 <= num_triplets <= total:
            raise ContractViolation(
                f"Cannot draw {num_triplets} out of {total} triplets"
            )
        codes = rng.choice(total, size=num_triplets, replace=False)
        head, rest = np.divmod(codes, num_relations * num_nodes)
        rel, tail = np.divmod(rest, num_nodes)

        return cls(num_nodes, num_relations, np.stack([head, rel, tail], 1))

    def key(self):
        """ Canonical byte representation of this graph. """
        header = np.array([self.num_nodes, self.num_relations], dtype="<i8")
        return header.tobytes() + self.triplets.astype("<i8").tobytes()

    def encode(self, triplets=None):
        """ Encode triplets as single integers ``(h * R + r) * N + t``. """
        if triplets is None:
            triplets = self.triplets
        triplets = np.asarray(triplets, dtype=np.int64).reshape(-1, 3)
        return (
            triplets[:, 0] * self.num_relations + triplets[:, 1]
        ) * self.num_nodes + triplets[:, 2]

    def contains(self, triplets):
        """ Whether each of the given triplets is part of this graph. """
        return np.isin(self.encode(triplets), self.encode())

    def subgraph(self, triplets):
        """ Graph with the same node and relation sets and other triplets. """
        return Multigraph(self.num_nodes, self.num_relations, triplets)

    def relation_counts(self):
        """ Number of triplets per relation type. """
        return np.bincount(self.triplets[:, 1], minlength=self.num_relations)

    def propagation_matrix(self, merge_relations=False):
        """ Mean aggregation operator over symmetrized neighborhoods.

        Parameters
        ----------
        merge_relations : bool, default False
            If True, all relation types are collapsed into one and the
            operator has shape (N, N). Otherwise it is block-diagonal with
            one (N, N) block per relation type, for node representations
            stacked relation by relation, i.e. shape (R * N, R * N).

        Returns
        -------
        scipy.sparse.csr_matrix
            Row ``(r, v)`` holds ``1 / |neighbors_r(v)|`` for every
            in- or out-neighbor of ``v`` in the subgraph of relation ``r``.
            Nodes without neighbors have all-zero rows.
        """
        if merge_relations in self._propagation:
            return self._propagation[merge_relations]

        n = self.num_nodes
        heads, rels, tails = self.triplets.T
        if merge_relations:
            rels = np.zeros_like(rels)
            size = n
        else:
            size = self.num_relations * n

        rows = np.concatenate([rels * n + heads, rels * n + tails])
        cols = np.concatenate([rels * n + tails, rels * n + heads])
        adjacency = sparse.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(size, size)
        )
        # duplicates from symmetrization count once
        adjacency.data[:] = 1.0

        degree = np.asarray(adjacency.sum(axis=1)).ravel()
        inverse = np.divide(
            1.0, degree, out=np.zeros_like(degree), where=degree > 0
        )
        matrix = sparse.diags(inverse) @ adjacency
        matrix = matrix.tocsr()

        self._propagation[merge_relations] = matrix

        return matrix


class Perm:
    """ Permutation of ``{0, ..., n - 1}``. """

    def __init__(self, mapping):
        """ Constructor.

        Parameters
        ----------
        mapping : array_like of int
            ``mapping[i]`` is the image of ``i``.
        """
        mapping = np.asarray(mapping, dtype=np.int64).ravel()
        if not np.array_equal(np.sort(mapping), np.arange(len(mapping))):
            raise ContractViolation(f"Not a bijection: {mapping.tolist()}")
        mapping.flags.writeable = False

        self.mapping = mapping

    def __len__(self):
        return len(self.mapping)

    def __call__(self, ids):
        return self.mapping[ids]

    def __eq__(self, other):
        return isinstance(other, Perm) and np.array_equal(
            self.mapping, other.mapping
        )

    def __repr__(self):
        return f"Perm({self.mapping.tolist()})"

    @classmethod
    def identity(cls, n):
        """ Identity permutation of size n. """
        return cls(np.arange(n))

    @classmethod
    def random(cls, n, rng):
        """ Uniformly random permutation of size n. """
        return cls(rng.permutation(n))

    def compose(self, other):
        """ The permutation ``self ∘ other`` (apply ``other`` first). """
        if len(self) != len(other):
            raise ContractViolation("Permutations differ in size")
        return Perm(self.mapping[other.mapping])

    def inverse(self):
        """ The inverse permutation. """
        return Perm(np.argsort(self.mapping))


class TripletMask:
    """ Set of triplets hidden from the observable graph. """

    def __init__(self, hidden=()):
        """ Constructor.

        Parameters
        ----------
        hidden : array_like, shape (T, 3)
            The hidden triplets.
        """
        self.hidden = np.asarray(hidden, dtype=np.int64).reshape(-1, 3)

    def __len__(self):
        return len(self.hidden)


class TaskPartition:
    """ Assignment of every relation type to exactly one task. """

    def __init__(self, assignment, num_tasks=None):
        """ Constructor.

        Parameters
        ----------
        assignment : array_like of int
            Task index of every relation type.

        num_tasks : int, optional
            Number of tasks K. Defaults to ``max(assignment) + 1``.
        """
        assignment = np.asarray(assignment, dtype=np.int64).ravel()
        if num_tasks is None:
            num_tasks = int(assignment.max()) + 1 if assignment.size else 0

        if assignment.size == 0 or num_tasks < 1:
            raise ContractViolation("A partition needs relations and tasks")
        if assignment.min() < 0 or assignment.max() >= num_tasks:
            raise ContractViolation("Task index out of range")
        if len(np.unique(assignment)) != num_tasks:
            raise ContractViolation("Every task must hold a relation")
        assignment.flags.writeable = False

        self.assignment = assignment
        self.num_tasks = int(num_tasks)

    def __eq__(self, other):
        return (
            isinstance(other, TaskPartition)
            and self.num_tasks == other.num_tasks
            and np.array_equal(self.assignment, other.assignment)
        )

    def __repr__(self):
        return f"TaskPartition({self.classes()})"

    @property
    def num_relations(self):
        return len(self.assignment)

    @classmethod
    def from_classes(cls, classes):
        """ Create a partition from a list of relation id lists. """
        assignment = np.full(sum(len(c) for c in classes), -1)
        for task, members in enumerate(classes):
            assignment[list(members)] = task
        return cls(assignment, num_tasks=len(classes))

    def task_of(self, relation):
        """ Task index of a relation type. """
        return int(self.assignment[relation])

    def members(self, task):
        """ Relation types of a task, in increasing order. """
        return np.flatnonzero(self.assignment == task)

    def classes(self):
        """ List of relation id lists, one per task. """
        return [self.members(k).tolist() for k in range(self.num_tasks)]

    def canonical(self):
        """ Same partition with tasks ordered by their smallest member. """
        order = sorted(self.classes(), key=min)
        return TaskPartition.from_classes(order)

    def one_hot(self):
        """ Membership matrix of shape (R, K). """
        return np.eye(self.num_tasks)[self.assignment]


def apply_perms(graph, node_perm, rel_perm):
    """ Relabel a graph: ``(u, r, v)`` becomes ``(π(u), σ(r), π(v))``.

    Parameters
    ----------
    graph : Multigraph
        The graph to relabel.

    node_perm : Perm
        Node permutation π of size N.

    rel_perm : Perm
        Relation permutation σ of size R.

    Returns
    -------
    Multigraph
        The relabeled graph.
    """
    if len(node_perm) != graph.num_nodes:
        raise ContractViolation("Node permutation does not match graph")
    if len(rel_perm) != graph.num_relations:
        raise ContractViolation("Relation permutation does not match graph")

    t = graph.triplets
    triplets = np.stack(
        [node_perm(t[:, 0]), rel_perm(t[:, 1]), node_perm(t[:, 2])], axis=1
    )

    return graph.subgraph(triplets)


def perms_commute_check(graph, node_perm, rel_perm):
    """ Whether relabeling nodes and relations commutes on a graph. """
    node_id = Perm.identity(graph.num_nodes)
    rel_id = Perm.identity(graph.num_relations)

    nodes_first = apply_perms(
        apply_perms(graph, node_perm, rel_id), node_id, rel_perm
    )
    relations_first = apply_perms(
        apply_perms(graph, node_id, rel_perm), node_perm, rel_id
    )

    return nodes_first == relations_first


def mask_split(graph, mask):
    """ Split a graph into its observable and hidden parts.

    Parameters
    ----------
    graph : Multigraph
        The full graph.

    mask : TripletMask
        Triplets of ``graph`` to hide.

    Returns
    -------
    observable : Multigraph
        The graph without the hidden triplets.

    hidden : Multigraph
        The hidden triplets.
    """
    if not np.all(graph.contains(mask.hidden)):
        raise ContractViolation("Mask references a triplet not in the graph")

    is_hidden = np.isin(graph.encode(), graph.encode(mask.hidden))

    return (
        graph.subgraph(graph.triplets[~is_hidden]),
        graph.subgraph(graph.triplets[is_hidden]),
    )


def write_graph_tsv(graph, path):
    """ Write a graph in the canonical tab-separated format.

    The first line is ``N<TAB>R``, followed by one ``head<TAB>rel<TAB>tail``
    line per triplet.
    """
    path = Path(path).expanduser()
    lines = [f"{graph.num_nodes}\t{graph.num_relations}"]
    lines += ["\t".join(map(str, row)) for row in graph.triplets.tolist()]

    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def _parse_ints(fields, path, line_number, expected):
    """ Parse the integer fields of a line. """
    if len(fields) != expected:
        raise ParseError(
            f"expected {expected} tab-separated fields, got {len(fields)}",
            path,
            line_number,
        )
    try:
        return [int(x) for x in fields]
    except ValueError:
        raise ParseError(f"non-integer field in {fields}", path, line_number)


def read_graph_tsv(path):
    """ Read a graph written by :func:`write_graph_tsv`.

    Parameters
    ----------
    path : str or pathlib.Path
        Path to the file.

    Returns
    -------
    Multigraph
        The graph.
    """
    path = Path(path).expanduser()
    if not path.exists():
        raise FileNotFoundError(f"No such file: {path}")

    with open(path) as f:
        lines = f.read().split("\n")
    if lines[-1] == "":
        lines = lines[:-1]
    if len(lines) == 0:
        raise ParseError("missing header line", path, 1)

    num_nodes, num_relations = _parse_ints(lines[0].split("\t"), path, 1, 2)
    rows = [
        _parse_ints(line.split("\t"), path, idx, 3)
        for idx, line in enumerate(lines[1:], start=2)
    ]

    logger.debug(f"Read {len(rows)} triplets from {path}")

    return Multigraph(num_nodes, num_relations, rows)
