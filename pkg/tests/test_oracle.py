import numpy as np
import pytest

from patminer import oracle
from patminer.graph import from_edges
from patminer.pattern import Pattern, automorphisms, generate_all_motifs, generate_clique
from util import complete, diamond, er


class TestBruteForce:
    def test_triangle_on_k4(self):
        assert oracle.brute_force_count(complete(4), generate_clique(3)) == 4

    def test_diamond_on_k4_hand_count(self):
        # one diamond per choice of the adjacent hub pair: C(4,2) = 6
        assert oracle.brute_force_count(complete(4), diamond()) == 6

    def test_edgeless_graph(self):
        g = from_edges(np.empty((0, 2), dtype=np.int64), num_vertices=5)
        assert oracle.brute_force_count(g, generate_clique(3)) == 0

    def test_assignment_count_is_aut_multiple(self):
        g = er(25, 0.3, 1)
        for p in generate_all_motifs(4):
            total = oracle.brute_force_assignment_count(g, p)
            distinct = oracle.brute_force_count(g, p)
            assert total == distinct * len(automorphisms(p))

    def test_scale_guard(self):
        g = er(250, 0.01, 2)
        with pytest.raises(oracle.OracleScaleError):
            oracle.brute_force_count(g, generate_clique(5))

    def test_labeled_matching(self):
        g = from_edges([(0, 1), (1, 2)], labels=np.array([0, 1, 0]))
        p = Pattern(2, [(0, 1)], labels=(0, 1))
        assert oracle.brute_force_count(g, p) == 2  # both edges carry {0,1}


class TestFsmOracle:
    def test_empty_graph(self):
        g = from_edges(np.empty((0, 2), dtype=np.int64), num_vertices=3)
        g = from_edges(np.empty((0, 2), dtype=np.int64), num_vertices=3,
                       labels=np.zeros(3, dtype=np.uint32))
        assert oracle.brute_force_fsm(g, 2, 1) == {}

    def test_two_disjoint_edges(self):
        g = from_edges([(0, 1), (2, 3)], labels=np.array([0, 1, 0, 1]))
        res = oracle.brute_force_fsm(g, 1, 2)
        assert len(res) == 1
        (key, support), = res.items()
        assert support == 2
        assert key[0] == 2  # a single-edge pattern

    def test_sigma_zero_keeps_every_pattern(self):
        g = from_edges([(0, 1), (1, 2)], labels=np.array([0, 0, 1]))
        res = oracle.brute_force_fsm(g, 2, 0)
        assert len(res) == 3  # AA edge, AB edge, and the 2-edge path

    def test_requires_labels(self):
        with pytest.raises(ValueError):
            oracle.brute_force_fsm(complete(3), 1, 1)
