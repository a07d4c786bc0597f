"""Pattern-aware graph pattern mining on CPU.

Analysis turns each pattern into a pruned search plan (matching order,
symmetry order, buffers, counting rewrites); execution runs the plans with
DFS or bounded BFS over a CSR graph using sorted-list and bitmap kernels;
scheduling spreads the edge task list across simulated devices.
"""

from .apps import (JobResult, MiningJob, k_clique, k_fsm, k_motif, run_job,
                   subgraph_listing, triangle_count)
from .executor import (ExecutionConfig, WorkerContext, merge_results, run_dfs,
                       run_dfs_lgs)
from .fsm import FsmResult, SubgraphBlock, run_bounded_bfs
from .graph import (EdgeTaskList, Graph, LabelStats, build_edge_tasks,
                    from_edges, label_frequency, load_csr, load_edgelist,
                    orient, reorder_by_degree, save_csr)
from .pattern import (MatchingOrder, Pattern, PatternProperties, SymmetryOrder,
                      automorphisms, detect_properties,
                      enumerate_matching_orders, generate_all_motifs,
                      generate_clique, generate_symmetry_order, parse_pattern,
                      select_matching_order)
from .plan import (PlanForest, SearchPlan, apply_counting_rewrite, build_plan,
                   emit_source, fuse_multi_pattern)

__version__ = "0.1.0"
