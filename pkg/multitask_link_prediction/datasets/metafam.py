""" Synthetic family-tree dataset with two conflicting predictive patterns.

Training trees hide either some parent triplets (``mother_of``,
``father_of``) or some child triplets (``son_of``, ``daughter_of``), so
predicting the hidden triplets requires two different patterns. Test trees
use a random relabeling of the relation types and only hide the relabeled
parent triplets.
"""
import logging

import numpy as np

from multitask_link_prediction.datasets import DatasetSplit
from multitask_link_prediction.datasets.kinship import (
    FamilyTree,
    KinshipOntology,
    kinship_closure,
)
from multitask_link_prediction.errors import ContractViolation, GenerationError
from multitask_link_prediction.graph import (
    Multigraph,
    Perm,
    TripletMask,
    apply_perms,
    mask_split,
)
from multitask_link_prediction.utils import rng_stream

logger = logging.getLogger(__name__)

PARENT_RELATIONS = ("mother_of", "father_of")
CHILD_RELATIONS = ("son_of", "daughter_of")


def generate_trees(
    num_trees,
    rng,
    max_attempts=None,
    max_size=26,
    max_depth=5,
    max_children=5,
):
    """ Generate pairwise non-isomorphic family trees.

    Parameters
    ----------
    num_trees : int
        Number of trees.

    rng : numpy.random.Generator
        Random generator.

    max_attempts : int, optional
        Maximum number of grown trees, by default ``100 * num_trees``.

    Returns
    -------
    list of FamilyTree
        The trees, in generation order.
    """
    max_attempts = max_attempts or 100 * num_trees
    trees = []
    seen = set()

    for _ in range(max_attempts):
        if len(trees) == num_trees:
            break
        tree = FamilyTree.grow(
            rng,
            max_size=max_size,
            max_depth=max_depth,
            max_children=max_children,
        )
        form = tree.canonical_form()
        if form not in seen:
            seen.add(form)
            trees.append(tree)

    if len(trees) < num_trees:
        raise GenerationError(
            f"Only {len(trees)} of {num_trees} non-isomorphic trees found "
            f"after {max_attempts} attempts"
        )

    return trees


def disjoint_union(graphs):
    """ Union of graphs with shared relation types and renumbered nodes. """
    offsets = np.cumsum([0] + [g.num_nodes for g in graphs])
    triplets = np.concatenate(
        [
            g.triplets + [offset, 0, offset]
            for g, offset in zip(graphs, offsets)
        ]
    )

    return Multigraph(
        int(offsets[-1]), graphs[0].num_relations, triplets.reshape(-1, 3)
    )


def mask_relations(graph, relations, fraction, rng):
    """ Hide a random fraction of the triplets of some relation types.

    At least one triplet is hidden if any is eligible.
    """
    eligible = graph.triplets[np.isin(graph.triplets[:, 1], relations)]
    if len(eligible) == 0:
        return TripletMask()

    k = max(1, int(round(fraction * len(eligible))))
    hidden = eligible[np.sort(rng.choice(len(eligible), k, replace=False))]

    return TripletMask(hidden)


def _split_from_trees(graphs, masks, role, relation_names):
    """ Combine per-tree observable and hidden graphs into one split. """
    parts = [mask_split(g, mask) for g, mask in zip(graphs, masks)]

    return DatasetSplit(
        disjoint_union([observable for observable, _ in parts]),
        disjoint_union([hidden for _, hidden in parts]),
        role=role,
        relation_names=relation_names,
    )


def metafam_generate(
    seed,
    n_train_trees=50,
    n_test_trees=25,
    valid_fraction=0.2,
    mask_fraction=0.5,
    ontology=None,
):
    """ Generate the train, validation and test splits.

    Parameters
    ----------
    seed : int
        Seed fixing all randomness.

    n_train_trees : int, default 50
        Number of trees for training and validation.

    n_test_trees : int, default 25
        Number of test trees.

    valid_fraction : float, default 0.2
        Fraction of the training trees held out whole for validation.

    mask_fraction : float, default 0.5
        Fraction of the eligible triplets hidden in each tree.

    ontology : KinshipOntology, optional
        The kinship relation table.

    Returns
    -------
    train, valid, test : DatasetSplit
        The splits. Test relation ids are permuted; ``test.relation_names``
        holds the name of every permuted id.
    """
    if n_train_trees < 2 or n_test_trees < 1:
        raise ContractViolation(
            "Need at least 2 training trees and 1 test tree"
        )
    if not 0 < valid_fraction < 1 or not 0 < mask_fraction <= 1:
        raise ContractViolation("Fractions must be in (0, 1)")

    ontology = ontology or KinshipOntology()
    names = ontology.relation_names
    parent_ids = [names.index(name) for name in PARENT_RELATIONS]
    child_ids = [names.index(name) for name in CHILD_RELATIONS]

    trees = generate_trees(
        n_train_trees + n_test_trees, rng_stream(seed, "metafam.trees")
    )
    graphs = [kinship_closure(tree, ontology) for tree in trees]
    train_graphs, test_graphs = (
        graphs[:n_train_trees],
        graphs[n_train_trees:],
    )

    n_valid = min(
        n_train_trees - 1, max(1, int(round(valid_fraction * n_train_trees)))
    )
    n_train = n_train_trees - n_valid

    # coin flip per tree: hide parent or child triplets
    mask_rng = rng_stream(seed, "metafam.masks")
    modes = mask_rng.integers(2, size=n_train_trees)
    if n_train > 1 and np.all(modes[:n_train] == modes[0]):
        modes[n_train - 1] = 1 - modes[0]
    masks = [
        mask_relations(
            g, child_ids if mode else parent_ids, mask_fraction, mask_rng
        )
        for g, mode in zip(train_graphs, modes)
    ]

    train = _split_from_trees(
        train_graphs[:n_train], masks[:n_train], "train", names
    )
    valid = _split_from_trees(
        train_graphs[n_train:], masks[n_train:], "valid", names
    )

    rel_perm = Perm.random(len(ontology), rng_stream(seed, "metafam.perm"))
    test_graphs = [
        apply_perms(g, Perm.identity(g.num_nodes), rel_perm)
        for g in test_graphs
    ]
    test_names = [None] * len(names)
    for rel, name in enumerate(names):
        test_names[rel_perm(rel)] = name

    test_rng = rng_stream(seed, "metafam.test_masks")
    test_masks = [
        mask_relations(g, rel_perm(parent_ids), mask_fraction, test_rng)
        for g in test_graphs
    ]
    test = _split_from_trees(test_graphs, test_masks, "test", test_names)

    logger.info(
        f"Generated MetaFam with seed {seed}: {train!r}, {valid!r}, {test!r}"
    )

    return train, valid, test
