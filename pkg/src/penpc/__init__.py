"""Two-step DAG skeleton estimation: log-penalised neighbourhood selection
followed by a modified PC-stable pruning of co-parent edges."""

from .citest import CorrelationMatrix, ci_test, fisher_z, partial_correlation, sample_correlation
from .evaluate import Confusion, confusion, fpr, hamming, roc_points, tpr
from .graph import (Cpdag, DirectedGraph, UndirectedGraph, connected_to_set, d_separated,
                    gen_ba_dag, gen_er_dag, is_acyclic, skeleton_of, topological_order,
                    true_ggm_of)
from .penreg import (PenaltyParams, PenRegConfig, RegressionFit, coord_descent, ebic,
                     grid_search_fit, log_penalty, log_penalty_deriv, neighborhood_select)
from .pipeline import RunConfig, estimate
from .simulate import DataMatrix, SemSpec, analytic_covariance, simulate_sem, standardize
from .skeleton import (CandidateSets, SepSetMap, candidate_conditioning_sets, candidate_sets,
                       modified_pc_stable, orient_cpdag, pc_stable)

__version__ = "0.1.0"
