import numpy as np
import pytest

from patminer import apps, oracle
from patminer.executor import ExecutionConfig
from patminer.graph import from_edges, orient
from patminer.pattern import Pattern, generate_all_motifs, generate_clique
from util import complete, cycle4, diamond, er


class TestTriangleCount:
    def test_k4(self):
        assert apps.triangle_count(complete(4)) == 4

    def test_five_cycle(self):
        g = from_edges([(i, (i + 1) % 5) for i in range(5)])
        assert apps.triangle_count(g) == 0

    def test_random_vs_oracle(self):
        g = er(200, 0.1, 17)
        assert apps.triangle_count(g) == oracle.brute_force_count(g, generate_clique(3))

    def test_orientation_logged(self):
        res = apps.run_job(apps.MiningJob(graph=complete(4),
                                          patterns=[generate_clique(3)]))
        assert res.applied("orientation")

    def test_accepts_preoriented_graph(self):
        og = orient(complete(4))
        res = apps.run_job(apps.MiningJob(graph=og, patterns=[generate_clique(3)]))
        assert res.counts["triangle"] == 4


class TestKClique:
    def test_k6_five_cliques(self):
        assert apps.k_clique(complete(6), 5).counts["5-clique"] == 6

    def test_triangle_free_bipartite(self):
        g = from_edges([(i, 3 + j) for i in range(3) for j in range(3)])
        assert apps.k_clique(g, 3).counts["triangle"] == 0

    def test_random_vs_oracle(self):
        g = er(200, 0.1, 23)
        assert apps.k_clique(g, 4).counts["4-clique"] == \
            oracle.brute_force_count(g, generate_clique(4))

    def test_range_validation(self):
        for bad in (2, 9):
            with pytest.raises(ValueError):
                apps.k_clique(complete(4), bad)

    def test_lgs_auto_gating(self):
        g = er(60, 0.2, 3)
        on = apps.k_clique(g, 4, cfg=ExecutionConfig(lgs="auto", lgs_delta_threshold=10 ** 6))
        off = apps.k_clique(g, 4, cfg=ExecutionConfig(lgs="auto", lgs_delta_threshold=1))
        assert on.applied("local-graph-search")
        assert not off.applied("local-graph-search")
        assert on.counts == off.counts

    def test_large_cliques(self):
        g = complete(9)
        from math import comb
        for k in (6, 7, 8):
            assert apps.k_clique(g, k).counts[f"{k}-clique"] == comb(9, k)

    def test_granularity_agreement(self):
        g = er(50, 0.2, 29)
        for gran in ("edge", "vertex"):
            assert apps.k_clique(g, 4, granularity=gran).counts == \
                apps.k_clique(g, 4).counts
            assert apps.subgraph_listing(g, diamond(), mode="count",
                                         granularity=gran).counts == \
                apps.subgraph_listing(g, diamond(), mode="count").counts


class TestSubgraphListing:
    def test_four_cycles_on_k4(self):
        assert apps.subgraph_listing(complete(4), cycle4(), mode="count").counts["4-cycle"] == 3

    def test_diamonds_on_k4(self):
        assert apps.subgraph_listing(complete(4), diamond(), mode="count").counts["diamond"] == 6

    def test_diamond_on_triangle_graph(self):
        assert apps.subgraph_listing(complete(3), diamond(), mode="count").counts["diamond"] == 0

    def test_vertex_induced_pattern_coerced_to_edge_induced(self):
        p = Pattern(4, [(0, 1), (1, 2), (2, 3), (3, 0)], induced="vertex")
        res = apps.subgraph_listing(complete(4), p, mode="count")
        assert res.counts["4-cycle"] == 3

    def test_edgelist_reduction_logged(self):
        res = apps.subgraph_listing(er(40, 0.2, 5), diamond(), mode="count")
        assert res.applied("edgelist-reduction")

    def test_count_equals_list_stream(self):
        g = er(60, 0.15, 7)
        for p in (diamond(), cycle4()):
            count = apps.subgraph_listing(g, p, mode="count").counts[p.name]
            seen = []
            apps.subgraph_listing(g, p, mode="list",
                                  sink=lambda pid, m: (seen.append(m), False)[1])
            assert len(seen) == count

    def test_early_termination(self):
        g = er(60, 0.2, 8)
        res = apps.subgraph_listing(g, diamond(), mode="list", sink=lambda pid, m: True)
        assert res.run.stopped_early and sum(res.counts.values()) == 1


class TestKMotif:
    def test_k4_three_motifs(self):
        counts = {p.name: c for p, c in apps.k_motif(complete(4), 3).items()}
        assert counts == {"wedge": 0, "triangle": 4}

    def test_path_three_motifs(self):
        g = from_edges([(0, 1), (1, 2)])
        counts = {p.name: c for p, c in apps.k_motif(g, 3).items()}
        assert counts == {"wedge": 1, "triangle": 0}

    def test_four_motifs_vs_oracle_and_subset_identity(self):
        import itertools
        g = er(100, 0.1, 31)
        result = apps.k_motif(g, 4)
        for p, c in result.items():
            assert c == oracle.brute_force_count(g, p), p.name
        adj = [set(int(x) for x in g.neighbors_of(v)) for v in range(g.num_vertices)]

        def connected(sub):
            seen, frontier = {sub[0]}, [sub[0]]
            while frontier:
                u = frontier.pop()
                for w in adj[u]:
                    if w in sub and w not in seen:
                        seen.add(w)
                        frontier.append(w)
            return len(seen) == 4
        total = sum(1 for sub in itertools.combinations(range(g.num_vertices), 4)
                    if connected(sub))
        assert sum(result.values()) == total

    def test_three_motifs_run_vertex_parallel(self):
        res = apps.run_job(apps.MiningJob(graph=complete(4),
                                          patterns=generate_all_motifs(3)))
        assert any(d.name == "worker-groups" and "vertex" in d.reason
                   for d in res.optimization_log)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            apps.k_motif(complete(4), 6)


class TestKFsm:
    def test_single_label_k4(self):
        g = complete(4, labels=np.zeros(4, dtype=np.uint32))
        res = apps.k_fsm(g, 1, 4)
        assert list(res.counts.values()) == [4]
        (p,) = res.patterns.values()
        assert p.size == 2 and p.num_edges == 1

    def test_sigma_above_vertex_count_empty(self):
        g = complete(4, labels=np.zeros(4, dtype=np.uint32))
        assert apps.k_fsm(g, 2, 5).counts == {}

    def test_three_edge_patterns_vs_oracle(self):
        g = er(30, 0.15, 41, labels=3)
        res = apps.k_fsm(g, 3, 2)
        want = oracle.brute_force_fsm(g, 3, 2)
        got = {p.canonical_form(): s for p, s in res.fsm.frequent_patterns().items()}
        want_forms = {oracle.pattern_from_canonical(k).canonical_form(): s
                      for k, s in want.items()}
        assert got == want_forms

    def test_unlabeled_rejected(self):
        with pytest.raises(ValueError):
            apps.k_fsm(complete(4), 2, 1)

    def test_bounded_bfs_logged(self):
        g = complete(4, labels=np.zeros(4, dtype=np.uint32))
        res = apps.k_fsm(g, 1, 1)
        assert res.applied("bounded-bfs")
        assert res.applied("label-frequency-pruning")
        res2 = apps.k_fsm(g, 1, 1, label_pruning=False)
        assert not res2.applied("label-frequency-pruning")


class TestJobValidation:
    def test_pattern_only_requires_fsm(self):
        with pytest.raises(ValueError):
            apps.run_job(apps.MiningJob(graph=complete(4),
                                        patterns=[generate_clique(3)],
                                        mode="pattern_only"))

    def test_no_patterns_rejected(self):
        with pytest.raises(ValueError):
            apps.run_job(apps.MiningJob(graph=complete(4)))

    def test_oriented_graph_non_clique_rejected(self):
        og = orient(complete(4))
        with pytest.raises(ValueError):
            apps.run_job(apps.MiningJob(graph=og, patterns=[diamond()]))

    def test_multi_device_job(self):
        g = er(60, 0.2, 13)
        res = apps.run_job(apps.MiningJob(graph=g, patterns=[diamond()],
                                          devices=2, parallel_devices=False))
        single = apps.run_job(apps.MiningJob(graph=g, patterns=[diamond()]))
        assert res.counts == single.counts
        assert res.devices is not None and len(res.devices.reports) == 2
