import numpy as np
import pytest

from patminer import fsm, oracle
from patminer.executor import (BudgetError, ExecutionConfig, WorkerContext,
                               merge_results, resolve_worker_count, run_dfs,
                               run_dfs_lgs)
from patminer.graph import EdgeTaskList, Graph, build_edge_tasks, from_edges, orient
from patminer.pattern import Pattern, generate_all_motifs, generate_clique
from util import analyze, complete, cycle4, diamond, er, make_plan


class TestRunDfs:
    def test_triangle_k4(self):
        assert run_dfs(complete(4), make_plan(generate_clique(3))).counts["triangle"] == 4

    def test_diamond_k4(self):
        assert run_dfs(complete(4), make_plan(diamond())).counts["diamond"] == 6

    def test_three_triangle_graph(self):
        g = from_edges([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4),
                        (4, 5), (5, 6), (4, 6)])
        tri = generate_clique(3)
        assert oracle.brute_force_count(g, tri) == 3
        assert run_dfs(g, make_plan(tri)).counts["triangle"] == 3

    def test_orientation_mismatch_rejected(self):
        og = orient(complete(4))
        with pytest.raises(ValueError, match="orientation"):
            run_dfs(og, make_plan(generate_clique(3)))  # plan expects undirected
        with pytest.raises(ValueError, match="orientation"):
            run_dfs(complete(4), make_plan(generate_clique(3), oriented=True))

    def test_task_granularity_mismatch(self):
        pl = make_plan(diamond(), granularity="vertex")
        tasks = build_edge_tasks(complete(4), make_plan(diamond()))
        with pytest.raises(ValueError):
            run_dfs(complete(4), pl, tasks=tasks)

    def test_determinism_across_workers_and_order(self):
        g = er(45, 0.25, 12)
        pl = make_plan(diamond(), g)
        tasks = build_edge_tasks(g, pl)
        base = run_dfs(g, pl, tasks=tasks).counts
        for w in (1, 4, 16):
            cfg = ExecutionConfig(workers=w)
            assert run_dfs(g, pl, tasks=tasks, cfg=cfg).counts == base
        rng = np.random.default_rng(0)
        for _ in range(10):
            perm = rng.permutation(len(tasks.edges))
            shuffled = EdgeTaskList(tasks.edges[perm], reduced=tasks.reduced)
            assert run_dfs(g, pl, tasks=shuffled).counts == base

    def test_vertex_and_edge_parallel_agree(self):
        g = er(40, 0.25, 3)
        for p in [diamond(), cycle4(), generate_clique(3)] + generate_all_motifs(4):
            ce = run_dfs(g, make_plan(p, g, granularity="edge")).counts
            cv = run_dfs(g, make_plan(p, g, granularity="vertex")).counts
            assert ce == cv

    def test_list_count_agreement_with_sink(self):
        g = er(30, 0.3, 8)
        for p in (diamond(), cycle4()):
            count = run_dfs(g, make_plan(p, g, mode="count")).counts[p.name]
            seen = []
            run_dfs(g, make_plan(p, g, mode="list"),
                    sink=lambda pid, m: (seen.append(m), False)[1])
            assert len(seen) == count

    def test_early_termination(self):
        g = er(30, 0.3, 8)
        res = run_dfs(g, make_plan(diamond(), g, mode="list"),
                      sink=lambda pid, m: True)
        assert res.stopped_early and sum(res.counts.values()) == 1

    def test_single_edge_pattern(self):
        g = er(30, 0.2, 15)
        pl = make_plan(generate_clique(2))
        assert run_dfs(g, pl).counts["edge"] == g.num_edges // 2

    def test_labeled_patterns(self):
        g = er(40, 0.25, 16, labels=3)
        for edges, labels in ([( (0, 1),), (0, 1)],
                              [((0, 1), (0, 2)), (2, 0, 1)],
                              [((0, 1), (0, 2), (1, 2)), (1, 1, 2)]):
            p = Pattern(len(labels), edges, labels=labels)
            for gran in ("edge", "vertex"):
                pl = make_plan(p, g, granularity=gran)
                assert run_dfs(g, pl).counts[p.name] == \
                    oracle.brute_force_count(g, p), (labels, gran)

    def test_empty_graph(self):
        g = from_edges(np.empty((0, 2), dtype=np.int64), num_vertices=0)
        assert run_dfs(g, make_plan(diamond())).counts["diamond"] == 0
        gv = from_edges(np.empty((0, 2), dtype=np.int64), num_vertices=5)
        assert run_dfs(gv, make_plan(generate_clique(3))).counts["triangle"] == 0

    def test_randomized_patterns_cross_validation(self):
        """Random connected patterns in both induced modes, random graphs:
        the planned engine must always agree with the brute-force oracle."""
        rng = np.random.default_rng(2024)
        cases = 0
        while cases < 30:
            k = int(rng.integers(3, 6))
            pairs = [(a, b) for a in range(k) for b in range(a + 1, k)]
            keep = [e for e in pairs if rng.random() < 0.55]
            induced = "vertex" if rng.random() < 0.5 else "edge"
            try:
                p = Pattern(k, keep, induced=induced)
            except ValueError:
                continue  # disconnected draw
            cases += 1
            g = er(26 if k == 5 else 34, 0.25, int(rng.integers(1 << 30)))
            gran = "vertex" if rng.random() < 0.5 else "edge"
            pl = make_plan(p, g, granularity=gran)
            assert run_dfs(g, pl).counts[p.name] == \
                oracle.brute_force_count(g, p), (k, keep, induced, gran)


class TestWorkerFormula:
    def test_resolver(self):
        cfg = ExecutionConfig(memory_budget=4096)
        assert resolve_worker_count(cfg, 2, 16, 1000) == 4096 // (2 * 16 * 4)
        assert resolve_worker_count(cfg, 2, 16, 3) == 3
        with pytest.raises(BudgetError):
            resolve_worker_count(ExecutionConfig(memory_budget=10), 2, 16, 5)

    def test_budgeted_run_matches_formula(self):
        g = er(60, 0.2, 5)
        pl = make_plan(generate_clique(4), g, mode="list")  # X = 1
        tasks = build_edge_tasks(g, pl)
        for budget in (g.max_degree * 4, g.max_degree * 4 * 5, g.max_degree * 4 * 10 ** 6):
            res = run_dfs(g, pl, tasks=tasks, cfg=ExecutionConfig(memory_budget=budget))
            want = min(budget // (pl.num_buffers * g.max_degree * 4), len(tasks))
            assert res.stats.workers == max(1, want)
            assert all(h <= g.max_degree for h in res.stats.buffer_high_water)

    def test_merge_results(self):
        a = WorkerContext(0, 1, ["p"]); a.counts["p"] = 5
        b = WorkerContext(0, 1, ["p"]); b.counts["p"] = 7
        assert merge_results([a])["p"] == 5
        assert merge_results([a, b])["p"] == 12
        zeros = [WorkerContext(0, 1, ["p"]) for _ in range(4)]
        assert merge_results(zeros) == {"p": 0}


class TestLocalGraphSearch:
    def test_clique_counts_match(self):
        g = er(200, 0.08, 21)
        og = orient(g)
        for k in (4, 5):
            pl = make_plan(generate_clique(k), g, oriented=True)
            want = run_dfs(og, pl).counts[pl.pattern_id]
            got = run_dfs_lgs(og, pl).counts[pl.pattern_id]
            assert got == want == oracle.brute_force_count(g, generate_clique(k))

    def test_five_clique_on_k6(self):
        og = orient(complete(6))
        pl = make_plan(generate_clique(5), oriented=True)
        assert run_dfs_lgs(og, pl).counts["5-clique"] == 6
        assert run_dfs(og, pl).counts["5-clique"] == 6

    def test_diamond_list_and_count(self):
        g = er(60, 0.25, 2)
        for mode in ("count", "list"):
            pl = make_plan(diamond(), g, mode=mode)
            assert run_dfs_lgs(g, pl).counts["diamond"] == \
                run_dfs(g, pl).counts["diamond"]

    def test_single_hub_vertex_parallel(self):
        g = er(60, 0.25, 4)
        tailed = Pattern(4, [(0, 1), (0, 2), (0, 3), (1, 2)], induced="vertex")
        pl = make_plan(tailed, g, granularity="vertex")
        assert run_dfs_lgs(g, pl).counts[tailed.name] == \
            run_dfs(g, pl).counts[tailed.name]

    def test_non_hub_plan_rejected(self):
        pl = make_plan(cycle4())
        with pytest.raises(ValueError, match="hub"):
            run_dfs_lgs(complete(4), pl)

    def test_single_hub_edge_parallel_rejected(self):
        tailed = Pattern(4, [(0, 1), (0, 2), (0, 3), (1, 2)])
        pl = make_plan(tailed, granularity="edge")
        with pytest.raises(ValueError, match="vertex granularity"):
            run_dfs_lgs(complete(4), pl)

    def test_early_termination_in_local_search(self):
        g = er(40, 0.3, 19)
        pl = make_plan(diamond(), g, mode="list")
        res = run_dfs_lgs(g, pl, sink=lambda pid, m: True)
        assert res.stopped_early and sum(res.counts.values()) == 1

    def test_list_stream_matches_plain_path(self):
        g = er(40, 0.3, 20)
        pl = make_plan(diamond(), g, mode="list")
        a, b = [], []
        run_dfs(g, pl, sink=lambda pid, m: (a.append(m), False)[1])
        run_dfs_lgs(g, pl, sink=lambda pid, m: (b.append(m), False)[1])
        assert sorted(a) == sorted(b)


def reference_bfs_count(g, p, mo, so):
    """Level-synchronous execution of the same constraints: every partial
    match list is materialized per level and extended by one vertex."""
    adj = [set(int(x) for x in g.neighbors_of(v)) for v in range(g.num_vertices)]
    current = [(v,) for v in range(g.num_vertices)]
    for level in range(2, p.size + 1):
        conn = mo.conn[level - 1]
        anti = mo.anti[level - 1]
        upper = [i for i, j in so.constraints if j == level]
        nxt = []
        for sg in current:
            for w in range(g.num_vertices):
                if w in sg:
                    continue
                if any(sg[j - 1] not in adj[w] for j in conn):
                    continue
                if any(sg[j - 1] in adj[w] for j in anti):
                    continue
                if any(w >= sg[i - 1] for i in upper):
                    continue
                nxt.append(sg + (w,))
        current = nxt
    return len(current)


class TestBfsDfsAgreement:
    def test_reference_bfs_equals_dfs(self):
        g = er(28, 0.25, 33)
        for p in [generate_clique(3), diamond(), cycle4()] + generate_all_motifs(3):
            mo, so = analyze(p)
            from patminer.plan import build_plan
            pl = build_plan(p, mo, so, "count")
            assert run_dfs(g, pl).counts[p.name] == reference_bfs_count(g, p, mo, so)


class TestBoundedBfs:
    def test_tiny_labeled_graph(self):
        g = from_edges([(0, 1), (1, 2)], labels=np.array([0, 0, 1]))
        res = fsm.run_bounded_bfs(g, 1, 1)
        by_support = sorted(res.frequent.values())
        assert by_support == [1, 2]

    def test_sigma_above_vertex_count(self):
        g = complete(4, labels=np.zeros(4, dtype=np.uint32))
        assert fsm.run_bounded_bfs(g, 2, 5).frequent == {}

    def test_label_pruning_no_result_change(self):
        for seed in (1, 2, 3):
            g = er(30, 0.15, seed, labels=5)
            for sigma in (2, 3):
                on = fsm.run_bounded_bfs(g, 3, sigma, label_pruning=True)
                off = fsm.run_bounded_bfs(g, 3, sigma, label_pruning=False)
                assert on.frequent == off.frequent

    def test_matches_oracle(self):
        for seed in (4, 5):
            g = er(26, 0.15, seed, labels=3)
            for sigma in (1, 2):
                got = fsm.run_bounded_bfs(g, 3, sigma).frequent
                want = oracle.brute_force_fsm(g, 3, sigma)
                assert got == want

    def test_anti_monotone_pairs(self):
        g = er(32, 0.15, 6, labels=3)
        res = fsm.run_bounded_bfs(g, 3, 2)
        assert res.parent_child
        for parent, child in res.parent_child:
            assert res.all_supports[child] <= res.all_supports[parent]

    def test_unlabeled_rejected(self):
        with pytest.raises(ValueError):
            fsm.run_bounded_bfs(complete(3), 2, 1)

    def test_block_size_bounds_rows(self):
        g = er(24, 0.2, 7, labels=3)
        small = fsm.run_bounded_bfs(g, 2, 1, cfg=ExecutionConfig(bfs_block_size=8))
        large = fsm.run_bounded_bfs(g, 2, 1)
        assert small.frequent == large.frequent
        assert small.blocks_processed > large.blocks_processed

    def test_custom_hooks(self):
        g = from_edges([(0, 1), (1, 2)], labels=np.array([0, 0, 1]))
        # filter keeps only patterns whose support is exactly 2
        res = fsm.run_bounded_bfs(g, 1, 1,
                                  pattern_filter=lambda key, s: s == 2)
        assert list(res.frequent.values()) == [2]
        seen = []
        fsm.run_bounded_bfs(g, 1, 1,
                            support_aggregator=lambda key, doms:
                            (seen.append(key), fsm.min_image_support(doms))[1])
        assert seen

    def test_subgraph_filter_hook(self):
        g = from_edges([(0, 1), (1, 2)], labels=np.array([0, 0, 1]))
        # rejecting subgraphs touching vertex 2 hides the mixed-label edge
        res = fsm.run_bounded_bfs(g, 1, 1,
                                  subgraph_filter=lambda verts, edges: 2 not in verts)
        assert list(res.frequent.values()) == [2]
