import numpy as np
import numpy.testing as npt
import pytest

from multitask_link_prediction.errors import ContractViolation, ParseError
from multitask_link_prediction.graph import (
    Multigraph,
    Perm,
    TaskPartition,
    TripletMask,
    apply_perms,
    mask_split,
    perms_commute_check,
    read_graph_tsv,
    write_graph_tsv,
)


class TestMultigraph:
    def test_constructor(self, triplets):
        """"""
        graph = Multigraph(5, 3, triplets[::-1])
        assert len(graph) == 7
        npt.assert_equal(graph.triplets, np.unique(triplets, axis=0))
        assert graph == Multigraph(5, 3, triplets)
        assert hash(graph) == hash(Multigraph(5, 3, triplets))
        assert not graph.triplets.flags.writeable

    def test_contracts(self, triplets):
        """"""
        with pytest.raises(ContractViolation):
            Multigraph(1, 3)

        with pytest.raises(ContractViolation):
            Multigraph(5, 1)

        with pytest.raises(ContractViolation):
            Multigraph(5, 3, [[0, 3, 1]])

        with pytest.raises(ContractViolation):
            Multigraph(5, 3, [[0, 0, 5]])

        with pytest.raises(ContractViolation):
            Multigraph(5, 3, np.concatenate([triplets, triplets[:1]]))

    def test_empty(self):
        """"""
        graph = Multigraph(3, 2)
        assert len(graph) == 0
        assert graph.triplets.shape == (0, 3)
        npt.assert_equal(graph.relation_counts(), [0, 0])

    def test_random(self, rng):
        """"""
        graph = Multigraph.random(4, 3, 20, rng)
        assert len(graph) == 20
        assert graph.triplets.max(axis=0).tolist() <= [3, 2, 3]

        assert len(Multigraph.random(2, 2, 8, rng)) == 8

        with pytest.raises(ContractViolation):
            Multigraph.random(2, 2, 9, rng)

    def test_encode_contains(self, graph):
        """"""
        npt.assert_equal(graph.encode([[0, 0, 1], [1, 2, 3]]), [1, 28])
        npt.assert_equal(
            graph.contains([[0, 0, 1], [1, 0, 1], [4, 2, 0]]),
            [True, False, True],
        )

    def test_relation_counts(self, graph):
        """"""
        npt.assert_equal(graph.relation_counts(), [2, 3, 2])

    def test_propagation_matrix(self, graph):
        """"""
        matrix = graph.propagation_matrix()
        assert matrix.shape == (15, 15)

        # node 1 in relation 0 neighbors nodes 0 and 2
        npt.assert_allclose(matrix[1].toarray().ravel()[[0, 2]], [0.5, 0.5])

        # node 3 has no edge of relation 0
        assert matrix[3].nnz == 0

        row_sums = np.asarray(matrix.sum(axis=1)).ravel()
        npt.assert_allclose(row_sums[row_sums > 0], 1.0)

        merged = graph.propagation_matrix(merge_relations=True)
        assert merged.shape == (5, 5)
        npt.assert_allclose(
            merged[0].toarray().ravel(), [0, 1 / 3, 1 / 3, 0, 1 / 3]
        )

        assert graph.propagation_matrix() is matrix

    def test_propagation_matrix_antiparallel(self):
        """"""
        graph = Multigraph(3, 2, [[0, 0, 1], [1, 0, 0]])
        row = graph.propagation_matrix()[0].toarray().ravel()
        npt.assert_allclose(row, [0, 1, 0, 0, 0, 0])


class TestPerm:
    def test_constructor(self):
        """"""
        perm = Perm([2, 0, 1])
        npt.assert_equal(perm([0, 1, 2]), [2, 0, 1])
        assert len(perm) == 3

        with pytest.raises(ContractViolation):
            Perm([0, 0, 1])

    def test_compose_inverse(self, rng):
        """"""
        a = Perm.random(6, rng)
        b = Perm.random(6, rng)
        npt.assert_equal(a.compose(b)(np.arange(6)), a(b(np.arange(6))))
        assert a.compose(a.inverse()) == Perm.identity(6)
        assert a.inverse().compose(a) == Perm.identity(6)

        with pytest.raises(ContractViolation):
            a.compose(Perm.identity(5))


class TestTaskPartition:
    def test_constructor(self):
        """"""
        partition = TaskPartition([1, 0, 1])
        assert partition.num_tasks == 2
        assert partition.num_relations == 3
        assert partition.task_of(2) == 1
        assert partition.classes() == [[1], [0, 2]]
        npt.assert_equal(partition.one_hot(), [[0, 1], [1, 0], [0, 1]])

    def test_contracts(self):
        """"""
        with pytest.raises(ContractViolation):
            TaskPartition([])

        with pytest.raises(ContractViolation):
            TaskPartition([0, 2])

        with pytest.raises(ContractViolation):
            TaskPartition([0, 0], num_tasks=2)

    def test_canonical(self):
        """"""
        partition = TaskPartition.from_classes([[3], [1, 2], [0]])
        assert partition.canonical() == TaskPartition([0, 1, 1, 2])
        assert partition.canonical().canonical() == partition.canonical()


class TestRelabeling:
    def test_apply_perms(self, graph):
        """"""
        node_perm = Perm([1, 2, 3, 4, 0])
        rel_perm = Perm([2, 0, 1])
        relabeled = apply_perms(graph, node_perm, rel_perm)

        assert len(relabeled) == len(graph)
        assert relabeled.contains([[1, 2, 2]])[0]
        assert (
            apply_perms(relabeled, node_perm.inverse(), rel_perm.inverse())
            == graph
        )
        npt.assert_equal(
            np.sort(relabeled.relation_counts()),
            np.sort(graph.relation_counts()),
        )

    def test_apply_perms_contracts(self, graph):
        """"""
        with pytest.raises(ContractViolation):
            apply_perms(graph, Perm.identity(4), Perm.identity(3))

        with pytest.raises(ContractViolation):
            apply_perms(graph, Perm.identity(5), Perm.identity(2))

    def test_commute(self, graph, rng):
        """"""
        for _ in range(5):
            assert perms_commute_check(
                graph, Perm.random(5, rng), Perm.random(3, rng)
            )


class TestMaskSplit:
    def test_mask_split(self, graph, triplets):
        """"""
        observable, hidden = mask_split(graph, TripletMask(triplets[:2]))
        assert len(observable) == 5
        assert len(hidden) == 2
        assert not np.any(observable.contains(hidden.triplets))
        assert observable.num_nodes == hidden.num_nodes == 5

        observable, hidden = mask_split(graph, TripletMask())
        assert observable == graph
        assert len(hidden) == 0

    def test_unknown_triplet(self, graph):
        """"""
        with pytest.raises(ContractViolation):
            mask_split(graph, TripletMask([[0, 0, 4]]))


class TestTsv:
    def test_round_trip(self, graph, tmp_path):
        """"""
        write_graph_tsv(graph, tmp_path / "graph.tsv")
        lines = (tmp_path / "graph.tsv").read_text().split("\n")
        assert lines[0] == "5\t3"
        assert lines[1] == "0\t0\t1"
        assert read_graph_tsv(tmp_path / "graph.tsv") == graph

    def test_parse_errors(self, tmp_path):
        """"""
        path = tmp_path / "bad.tsv"

        path.write_text("5\t3\n0\t0\t1\n0\t1\n")
        with pytest.raises(ParseError) as e:
            read_graph_tsv(path)
        assert e.value.line_number == 3

        path.write_text("5\t3\n0\tx\t1\n")
        with pytest.raises(ParseError) as e:
            read_graph_tsv(path)
        assert e.value.line_number == 2

        path.write_text("")
        with pytest.raises(ParseError):
            read_graph_tsv(path)

        path.write_text("5\t3\n0\t7\t1\n")
        with pytest.raises(ContractViolation):
            read_graph_tsv(path)

    def test_missing_file(self, tmp_path):
        """"""
        with pytest.raises(FileNotFoundError):
            read_graph_tsv(tmp_path / "missing.tsv")
