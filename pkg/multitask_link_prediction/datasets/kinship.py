""" Family trees and the kinship relations derived from them.

Every relation reads "head is REL of tail"; gendered variants are selected
by the gender of the head.

====  ======================  ===================================
 id    relation                head is ... of tail
====  ======================  ===================================
 0     mother_of               female parent
 1     father_of               male parent
 2     parent_of               parent
 3     son_of                  male child
 4     daughter_of             female child
 5     child_of                child
 6     sister_of               female sibling
 7     brother_of              male sibling
 8     sibling_of              sibling
 9     grandmother_of          female grandparent
 10    grandfather_of          male grandparent
 11    grandparent_of          grandparent
 12    grandson_of             male grandchild
 13    granddaughter_of        female grandchild
 14    grandchild_of           grandchild
 15    aunt_of                 female sibling of a parent
 16    uncle_of                male sibling of a parent
 17    niece_of                female child of a sibling
 18    nephew_of               male child of a sibling
 19    girl_cousin_of          female child of a parent's sibling
 20    boy_cousin_of           male child of a parent's sibling
 21    cousin_of               child of a parent's sibling
 22    great_grandmother_of    female parent of a grandparent
 23    great_grandfather_of    male parent of a grandparent
 24    great_granddaughter_of  female grandchild of a child
 25    great_grandson_of       male grandchild of a child
 26    great_aunt_of           female sibling of a grandparent
 27    great_uncle_of          male sibling of a grandparent
 28    second_cousin_of        grandchild of a grandparent's sibling
====  ======================  ===================================
"""
import logging

import numpy as np

from multitask_link_prediction.errors import ContractViolation
from multitask_link_prediction.graph import Multigraph

logger = logging.getLogger(__name__)

FEMALE = 0
MALE = 1

# name, kinship matrix, head gender (None for both)
KINSHIP_RELATIONS = (
    ("mother_of", "parent", FEMALE),
    ("father_of", "parent", MALE),
    ("parent_of", "parent", None),
    ("son_of", "child", MALE),
    ("daughter_of", "child", FEMALE),
    ("child_of", "child", None),
    ("sister_of", "sibling", FEMALE),
    ("brother_of", "sibling", MALE),
    ("sibling_of", "sibling", None),
    ("grandmother_of", "grandparent", FEMALE),
    ("grandfather_of", "grandparent", MALE),
    ("grandparent_of", "grandparent", None),
    ("grandson_of", "grandchild", MALE),
    ("granddaughter_of", "grandchild", FEMALE),
    ("grandchild_of", "grandchild", None),
    ("aunt_of", "aunt_uncle", FEMALE),
    ("uncle_of", "aunt_uncle", MALE),
    ("niece_of", "niece_nephew", FEMALE),
    ("nephew_of", "niece_nephew", MALE),
    ("girl_cousin_of", "cousin", FEMALE),
    ("boy_cousin_of", "cousin", MALE),
    ("cousin_of", "cousin", None),
    ("great_grandmother_of", "great_grandparent", FEMALE),
    ("great_grandfather_of", "great_grandparent", MALE),
    ("great_granddaughter_of", "great_grandchild", FEMALE),
    ("great_grandson_of", "great_grandchild", MALE),
    ("great_aunt_of", "great_aunt_uncle", FEMALE),
    ("great_uncle_of", "great_aunt_uncle", MALE),
    ("second_cousin_of", "second_cousin", None),
)


class FamilyTree:
    """ Rooted tree of persons where every person but the root has one
    recorded parent. """

    def __init__(self, parents, genders):
        """ Constructor.

        Parameters
        ----------
        parents : array_like of int
            Parent of every person, -1 for the root. Parents must precede
            their children.

        genders : array_like of int
            ``FEMALE`` or ``MALE`` for every person.
        """
        parents = np.asarray(parents, dtype=np.int64)
        genders = np.asarray(genders, dtype=np.int64)

        if len(parents) == 0 or len(parents) != len(genders):
            raise ContractViolation("One parent and gender per person")
        if parents[0] != -1 or np.any(parents[1:] < 0):
            raise ContractViolation("Person 0 must be the single root")
        if np.any(parents[1:] >= np.arange(1, len(parents))):
            raise ContractViolation("Parents must precede their children")
        if not np.all(np.isin(genders, (FEMALE, MALE))):
            raise ContractViolation("Unknown gender")

        self.parents = parents
        self.genders = genders

    def __len__(self):
        return len(self.parents)

    def children(self, person):
        """ Children of a person in increasing id order. """
        return np.flatnonzero(self.parents == person)

    def num_children(self):
        """ Number of children of every person. """
        return np.bincount(self.parents[1:], minlength=len(self))

    def generations(self):
        """ Generation of every person, the root being generation 1. """
        generations = np.ones(len(self), dtype=np.int64)
        for person in range(1, len(self)):
            generations[person] = generations[self.parents[person]] + 1

        return generations

    def depth(self):
        """ Number of generations in the tree. """
        return int(self.generations().max())

    def parent_matrix(self):
        """ Indicator matrix with ``[h, t]`` set iff h is the parent of t. """
        matrix = np.zeros((len(self), len(self)), dtype=np.int64)
        children = np.arange(1, len(self))
        matrix[self.parents[1:], children] = 1

        return matrix

    def canonical_form(self):
        """ String that is equal for two trees iff they are isomorphic as
        rooted trees with gendered persons. """
        forms = [None] * len(self)
        for person in range(len(self) - 1, -1, -1):
            inner = "".join(sorted(forms[c] for c in self.children(person)))
            forms[person] = "FM"[self.genders[person]] + f"({inner})"

        return forms[0]

    @classmethod
    def grow(cls, rng, max_size=26, max_depth=5, max_children=5):
        """ Grow a random tree from a single person.

        Children are attached one at a time to a uniformly chosen person that
        is above the last generation and has fewer than ``max_children``
        children, until the tree has ``max_size`` persons or nobody is
        eligible.
        """
        parents = [-1]
        genders = [int(rng.integers(2))]
        generations = [1]
        num_children = [0]

        while len(parents) < max_size:
            eligible = [
                p
                for p in range(len(parents))
                if generations[p] < max_depth
                and num_children[p] < max_children
            ]
            if len(eligible) == 0:
                break
            parent = eligible[int(rng.integers(len(eligible)))]
            parents.append(parent)
            genders.append(int(rng.integers(2)))
            generations.append(generations[parent] + 1)
            num_children[parent] += 1
            num_children.append(0)

        return cls(parents, genders)


class KinshipOntology:
    """ Fixed table of kinship relation types. """

    def __init__(self, relations=KINSHIP_RELATIONS):
        """ Constructor.

        Parameters
        ----------
        relations : sequence of (str, str, int or None)
            Name, kinship matrix and head gender of every relation type.
        """
        self.relations = tuple(relations)

    def __len__(self):
        return len(self.relations)

    @property
    def relation_names(self):
        return [name for name, _, _ in self.relations]

    def relation_id(self, name):
        """ Id of a relation given its name. """
        return self.relation_names.index(name)

    @staticmethod
    def kinship_matrices(tree):
        """ Kinship indicator matrices of a tree.

        Returns
        -------
        dict
            Mapping from kinship name to a boolean (N, N) matrix with
            ``[h, t]`` set iff h has this kinship to t.
        """
        parent = tree.parent_matrix()
        grandparent = parent @ parent
        sibling = parent.T @ parent
        np.fill_diagonal(sibling, 0)

        matrices = {
            "parent": parent,
            "grandparent": grandparent,
            "sibling": sibling,
            "aunt_uncle": sibling @ parent,
            "cousin": parent.T @ sibling @ parent,
            "great_grandparent": grandparent @ parent,
            "great_aunt_uncle": sibling @ grandparent,
            "second_cousin": grandparent.T @ sibling @ grandparent,
        }
        matrices["child"] = matrices["parent"].T
        matrices["grandchild"] = matrices["grandparent"].T
        matrices["niece_nephew"] = matrices["aunt_uncle"].T
        matrices["great_grandchild"] = matrices["great_grandparent"].T

        return {k: v > 0 for k, v in matrices.items()}


def kinship_closure(tree, ontology=None):
    """ Derive every kinship triplet of a family tree.

    Parameters
    ----------
    tree : FamilyTree
        The tree, with at least 2 persons.

    ontology : KinshipOntology, optional
        The relation table, the default 29 kinship relations if not
        specified.

    Returns
    -------
    Multigraph
        Graph on the persons of the tree with one relation type per ontology
        entry.
    """
    ontology = ontology or KinshipOntology()
    matrices = ontology.kinship_matrices(tree)

    blocks = []
    for rel, (_, kinship, gender) in enumerate(ontology.relations):
        matrix = matrices[kinship]
        if gender is not None:
            matrix = matrix & (tree.genders == gender)[:, None]
        heads, tails = np.nonzero(matrix)
        blocks.append(
            np.stack([heads, np.full_like(heads, rel), tails], axis=1)
        )

    return Multigraph(len(tree), len(ontology), np.concatenate(blocks))
