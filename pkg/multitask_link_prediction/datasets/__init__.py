""""""
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from multitask_link_prediction.errors import (
    ContractViolation,
    DegenerateInputError,
)
from multitask_link_prediction.graph import read_graph_tsv, write_graph_tsv

logger = logging.getLogger(__name__)

ROLES = ("train", "valid", "test")


class DatasetSplit:
    """ Observable graph and the missing triplets to predict from it. """

    def __init__(self, observable, missing, role="train", relation_names=None):
        """ Constructor.

        Parameters
        ----------
        observable : Multigraph
            The graph available for message passing.

        missing : Multigraph
            The target triplets, disjoint from ``observable``.

        role : str, default "train"
            One of "train", "valid" or "test".

        relation_names : list of str, optional
            Name of every relation id.
        """
        if role not in ROLES:
            raise ContractViolation(f"Unknown split role: {role}")
        if (observable.num_nodes, observable.num_relations) != (
            missing.num_nodes,
            missing.num_relations,
        ):
            raise ContractViolation(
                "Observable and missing graphs differ in N or R"
            )
        if np.any(observable.contains(missing.triplets)):
            raise ContractViolation("Observable and missing graphs overlap")
        if relation_names is not None and (
            len(relation_names) != observable.num_relations
        ):
            raise ContractViolation("One name per relation type required")

        self.observable = observable
        self.missing = missing
        self.role = role
        self.relation_names = relation_names

    def __eq__(self, other):
        return (
            isinstance(other, DatasetSplit)
            and self.role == other.role
            and self.observable == other.observable
            and self.missing == other.missing
        )

    def __repr__(self):
        return (
            f"DatasetSplit(role={self.role!r}, N={self.num_nodes}, "
            f"R={self.num_relations}, observable={len(self.observable)}, "
            f"missing={len(self.missing)})"
        )

    @property
    def num_nodes(self):
        return self.observable.num_nodes

    @property
    def num_relations(self):
        return self.observable.num_relations

    def stats(self):
        """ Entity, relation and triplet counts of this split. """
        return {
            "split": self.role,
            "entities": self.num_nodes,
            "relations": self.num_relations,
            "observable": len(self.observable),
            "missing": len(self.missing),
        }


def save_tsv(split, folder):
    """ Save a split as ``<role>_observable.tsv`` and ``<role>_missing.tsv``.

    Parameters
    ----------
    split : DatasetSplit
        The split to save.

    folder : str or pathlib.Path
        Existing output folder.
    """
    folder = Path(folder).expanduser()
    if not folder.is_dir():
        raise FileNotFoundError(f"No such folder: {folder}")

    write_graph_tsv(split.observable, folder / f"{split.role}_observable.tsv")
    write_graph_tsv(split.missing, folder / f"{split.role}_missing.tsv")

    logger.debug(f"Saved {split!r} to {folder}")


def load_tsv(folder, role):
    """ Load a split saved with :func:`save_tsv`.

    Parameters
    ----------
    folder : str or pathlib.Path
        Folder containing the TSV files.

    role : str
        Split role, one of "train", "valid" or "test".

    Returns
    -------
    DatasetSplit
        The loaded split.
    """
    folder = Path(folder).expanduser()
    if not folder.is_dir():
        raise FileNotFoundError(f"No such folder: {folder}")

    observable = read_graph_tsv(folder / f"{role}_observable.tsv")
    missing = read_graph_tsv(folder / f"{role}_missing.tsv")

    names = None
    for path in (folder / f"{role}_ontology.txt", folder / "ontology.txt"):
        if path.exists():
            names = read_ontology(path)
            break
    if names is not None and len(names) != observable.num_relations:
        logger.warning(
            f"{path.name} lists {len(names)} relations, split has "
            f"{observable.num_relations}"
        )
        names = None

    return DatasetSplit(observable, missing, role=role, relation_names=names)


def read_ontology(path):
    """ Read relation names in id order, one per line.

    ``path`` may be an ontology file or a split folder holding
    ``ontology.txt``.
    """
    path = Path(path)
    if path.is_dir():
        path = path / "ontology.txt"
    with open(path) as f:
        return [line for line in f.read().split("\n") if line != ""]


def write_stats(splits, path):
    """ Write entity, relation and triplet counts of splits as CSV. """
    df = pd.DataFrame([split.stats() for split in splits])
    df.to_csv(path, index=False)

    return df


def _write_ontology(names, path):
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(names) + "\n")


def save_split_dir(splits, folder, relation_names=None):
    """ Save splits with their ontology and statistics to a folder.

    Parameters
    ----------
    splits : iterable of DatasetSplit
        Splits with distinct roles.

    folder : str or pathlib.Path
        Output folder, created if it does not exist.

    relation_names : list of str, optional
        Relation names written to ``ontology.txt`` in id order. Splits
        whose own relation names differ also get a
        ``<role>_ontology.txt``.
    """
    folder = Path(folder).expanduser()
    folder.mkdir(parents=True, exist_ok=True)

    splits = list(splits)
    for split in splits:
        save_tsv(split, folder)

    if relation_names is not None:
        _write_ontology(relation_names, folder / "ontology.txt")
        for split in splits:
            names = split.relation_names
            if names is not None and list(names) != list(relation_names):
                _write_ontology(names, folder / f"{split.role}_ontology.txt")

    write_stats(splits, folder / "stats.csv")

    logger.info(f"Wrote {len(splits)} split(s) to {folder}")


def load_split_dir(folder, roles=ROLES):
    """ Load all splits of the given roles present in a folder. """
    folder = Path(folder).expanduser()
    if not folder.is_dir():
        raise FileNotFoundError(f"No such folder: {folder}")

    return {
        role: load_tsv(folder, role)
        for role in roles
        if (folder / f"{role}_observable.tsv").exists()
    }


class NegativeBatch:
    """ Positive triplets with their tail- and relation-corrupted negatives.
    """

    def __init__(self, positives, tail_negatives, relation_negatives):
        """ Constructor.

        Parameters
        ----------
        positives : numpy.ndarray, shape (B, 3)
            Positive triplets.

        tail_negatives : numpy.ndarray, shape (B, n, 3)
            Negatives sharing head and relation with their positive.

        relation_negatives : numpy.ndarray, shape (B, m, 3)
            Negatives sharing head and tail with their positive.
        """
        self.positives = positives
        self.tail_negatives = tail_negatives
        self.relation_negatives = relation_negatives

    def __len__(self):
        return len(self.positives)

    @property
    def n(self):
        return self.tail_negatives.shape[1]

    @property
    def m(self):
        return self.relation_negatives.shape[1]

    def triplets(self):
        """ All triplets: positives, then tail and relation negatives. """
        return np.concatenate(
            [
                self.positives,
                self.tail_negatives.reshape(-1, 3),
                self.relation_negatives.reshape(-1, 3),
            ]
        )


def sample_negatives(observable, positives, n, m, rng):
    """ Corrupt positives by their tail and by their relation.

    Parameters
    ----------
    observable : Multigraph
        Graph defining the node and relation sets.

    positives : array_like, shape (B, 3)
        Positive triplets.

    n : int
        Number of tail corruptions per positive. Tails are drawn uniformly
        from all nodes and may equal the original tail.

    m : int
        Number of relation corruptions per positive, drawn uniformly from the
        relation types other than the original one.

    rng : numpy.random.Generator
        Random generator.

    Returns
    -------
    NegativeBatch
        The negatives. Sampling is with replacement and unfiltered.
    """
    if n < 0 or m < 0:
        raise ContractViolation("Negative counts must be non-negative")

    positives = np.asarray(positives, dtype=np.int64).reshape(-1, 3)
    num_nodes = observable.num_nodes
    num_relations = observable.num_relations

    tails = np.repeat(positives[:, None, :], n, axis=1)
    tails[:, :, 2] = rng.integers(0, num_nodes, size=(len(positives), n))

    relations = np.repeat(positives[:, None, :], m, axis=1)
    shift = rng.integers(1, num_relations, size=(len(positives), m))
    relations[:, :, 1] = (relations[:, :, 1] + shift) % num_relations

    return NegativeBatch(positives, tails, relations)


def self_supervised_split(observable, holdout_fraction, rng):
    """ Hold out a uniformly random fraction of the observable triplets.

    Parameters
    ----------
    observable : Multigraph
        The graph to split.

    holdout_fraction : float
        Fraction of triplets used as targets, in (0, 1).

    rng : numpy.random.Generator
        Random generator.

    Returns
    -------
    context : Multigraph
        The remaining triplets.

    targets : Multigraph
        The held-out triplets, ``round(holdout_fraction * T)`` of them.
    """
    if not 0 < holdout_fraction < 1:
        raise ContractViolation("holdout_fraction must be in (0, 1)")

    num_triplets = len(observable)
    k = int(round(holdout_fraction * num_triplets))
    if k == 0 or k >= num_triplets:
        raise DegenerateInputError(
            f"Cannot hold out {k} of {num_triplets} triplets"
        )

    is_target = np.zeros(num_triplets, dtype=bool)
    is_target[rng.permutation(num_triplets)[:k]] = True

    return (
        observable.subgraph(observable.triplets[~is_target]),
        observable.subgraph(observable.triplets[is_target]),
    )


from multitask_link_prediction.datasets.kinship import (  # noqa: E402
    FamilyTree,
    KinshipOntology,
    kinship_closure,
)
from multitask_link_prediction.datasets.metafam import (  # noqa: E402
    metafam_generate,
)
