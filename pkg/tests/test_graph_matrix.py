import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robusteig import (EdgeList, InputError, SparseStochasticMatrix,
                       edge_list, from_edge_list, parse_edge_list, residual,
                       uniform_vector, validate)
from robusteig.graph_matrix import edge_list_text, out_degrees

from conftest import SEVEN_NODE_DENSE, SEVEN_NODE_EDGES, SEVEN_NODE_XBAR


class TestFromEdgeList:
    def test_seven_node_matrix_matches_hand_written_entries(self, seven_node):
        np.testing.assert_array_equal(seven_node.to_dense(), SEVEN_NODE_DENSE)
        # spot entries, 1-based (i, j) of the source description: P_32, P_13, P_54
        dense = seven_node.to_dense()
        assert dense[2, 1] == 1.0
        assert dense[0, 2] == 1.0 / 3.0
        assert dense[4, 3] == 0.5

    def test_single_dangling_node_becomes_identity(self):
        P = from_edge_list(EdgeList((), 1))
        np.testing.assert_array_equal(P.to_dense(), [[1.0]])
        assert P.dangling_columns == {0}

    def test_dangling_columns_repaired_to_uniform(self):
        P = from_edge_list(edge_list([(0, 1), (0, 2)], 3))
        dense = P.to_dense()
        np.testing.assert_allclose(dense[:, 1], 1 / 3)
        np.testing.assert_allclose(dense[:, 2], 1 / 3)
        assert P.dangling_columns == {1, 2}

    def test_duplicate_edges_collapse_to_one_link(self):
        once = from_edge_list(edge_list([(0, 1), (1, 0)], 2))
        twice = from_edge_list(edge_list([(0, 1), (0, 1), (1, 0)], 2))
        np.testing.assert_array_equal(once.to_dense(), twice.to_dense())

    def test_self_loops_are_ordinary_links(self):
        P = from_edge_list(edge_list([(0, 0), (0, 1), (1, 0)], 2))
        np.testing.assert_allclose(P.to_dense(), [[0.5, 1.0], [0.5, 0.0]])

    def test_endpoint_out_of_range_rejected(self):
        with pytest.raises(InputError):
            EdgeList(((0, 5),), 3)

    def test_empty_graph_rejected(self):
        with pytest.raises(InputError):
            EdgeList((), 0)

    def test_out_degrees_count_links_and_repair(self, seven_node):
        np.testing.assert_array_equal(out_degrees(seven_node), [2, 1, 3, 2, 1, 1, 1])
        P = from_edge_list(edge_list([(0, 1), (0, 2)], 3))
        np.testing.assert_array_equal(out_degrees(P), [2, 3, 3])


class TestMatvec:
    def test_identity_fixes_any_vector(self):
        P = SparseStochasticMatrix.from_dense(np.eye(2))
        np.testing.assert_array_equal(P.matvec([0.3, 0.7]), [0.3, 0.7])

    def test_seven_node_fixes_xbar_exactly(self, seven_node):
        np.testing.assert_array_equal(seven_node.matvec(SEVEN_NODE_XBAR), SEVEN_NODE_XBAR)

    def test_seven_node_on_uniform_gives_row_sums(self, seven_node):
        y = seven_node.matvec(uniform_vector(7))
        row_sums = np.array([1 / 3, 1 / 2, 2, 1, 5 / 6, 1, 4 / 3])
        np.testing.assert_allclose(y, row_sums / 7, atol=1e-15)
        assert abs(y[2] - 2 / 7) < 1e-15

    def test_dimension_mismatch_raises(self, seven_node):
        with pytest.raises(InputError):
            seven_node.matvec(np.ones(5) / 5)

    def test_rmatvec_matches_dense_transpose(self, seven_node):
        rng = np.random.default_rng(3)
        v = rng.standard_normal(7)
        np.testing.assert_allclose(seven_node.rmatvec(v),
                                   seven_node.to_dense().T @ v, atol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_matvec_maps_simplex_to_simplex(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 12))
        edges = [(int(s), int(d)) for s, d in
                 rng.integers(0, n, size=(int(rng.integers(0, 3 * n + 1)), 2))]
        P = from_edge_list(EdgeList(tuple(edges), n))
        x = rng.dirichlet(np.ones(n))
        y = P.matvec(x)
        assert y.min() >= 0
        assert abs(y.sum() - 1.0) <= 1e-12


class TestValidate:
    def test_seven_node_passes_with_zero_deviation(self, seven_node):
        report = validate(seven_node, tol=1e-12)
        assert report.passed
        assert report.max_column_sum_deviation == 0.0
        assert report.negative_entry_count == 0
        assert report.empty_columns == ()

    def test_zeroed_column_reported_with_index(self):
        M = SEVEN_NODE_DENSE.copy()
        M[:, 3] = 0.0
        report = validate(SparseStochasticMatrix.from_dense(M))
        assert not report.passed
        assert report.worst_column == 3
        assert 3 in report.empty_columns

    def test_small_perturbation_shows_up_as_deviation(self):
        M = SEVEN_NODE_DENSE.copy()
        M[0, 0] += 1e-6
        report = validate(SparseStochasticMatrix.from_dense(M))
        assert not report.passed
        assert report.max_column_sum_deviation == pytest.approx(1e-6, rel=1e-6)
        assert report.worst_column == 0

    def test_negative_entry_reported(self):
        M = np.array([[0.5, 1.2], [0.5, -0.2]])
        report = validate(SparseStochasticMatrix.from_dense(M))
        assert not report.passed
        assert report.negative_entry_count == 1
        assert report.first_negative == (1, 1, pytest.approx(-0.2))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_from_edge_list_always_validates_at_1e12(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 40))
        edges = [(int(s), int(d)) for s, d in
                 rng.integers(0, n, size=(int(rng.integers(0, 5 * n)), 2))]
        P = from_edge_list(EdgeList(tuple(edges), n))
        assert validate(P, tol=1e-12).passed


class TestResidual:
    def test_zero_at_the_dominant_eigenvector(self, seven_node):
        assert residual(seven_node, SEVEN_NODE_XBAR, "l1") == 0.0
        assert residual(seven_node, SEVEN_NODE_XBAR, "l2") == 0.0

    def test_swap_matrix_vertex_has_l1_residual_two(self):
        P = SparseStochasticMatrix.from_dense([[0, 1], [1, 0]])
        assert residual(P, np.array([1.0, 0.0]), "l1") == pytest.approx(2.0)

    def test_uniform_l2_residual_on_seven_node(self, seven_node):
        expected = np.sqrt(11 / 6) / 7        # cross-checked by hand row sums
        assert residual(seven_node, uniform_vector(7), "l2") == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.19343, abs=5e-6)

    def test_unknown_norm_rejected(self, seven_node):
        with pytest.raises(InputError):
            residual(seven_node, uniform_vector(7), "linf")

    def test_bounded_by_two_on_the_simplex(self, seven_node):
        rng = np.random.default_rng(11)
        for _ in range(100):
            x = rng.dirichlet(np.ones(7))
            r = residual(seven_node, x, "l1")
            assert 0.0 <= r <= 2.0 + 1e-12


class TestEdgeListText:
    def test_parses_tabs_comments_and_header(self):
        text = "# a comment\nn=4\n0\t1\n1\t2\n"
        el = parse_edge_list(text)
        assert el.n == 4
        assert el.edges == ((0, 1), (1, 2))

    def test_node_count_defaults_to_max_id_plus_one(self):
        assert parse_edge_list("0\t5\n").n == 6

    def test_dangling_directive_extends_node_count(self):
        el = parse_edge_list("0\t1\ndangling:3\n")
        assert el.n == 4
        P = from_edge_list(el)
        assert {1, 2, 3} <= P.dangling_columns

    def test_bad_lines_rejected(self):
        for text in ("0\n", "a\tb\n", "n=x\n", "dangling:z\n"):
            with pytest.raises(InputError):
                parse_edge_list(text)

    def test_roundtrip_preserves_the_matrix(self, seven_node):
        el = edge_list(SEVEN_NODE_EDGES, 7)
        back = parse_edge_list(edge_list_text(el))
        assert back.n == 7
        np.testing.assert_array_equal(from_edge_list(back).to_dense(),
                                      seven_node.to_dense())
