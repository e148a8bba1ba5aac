"""Rule covering for interpretation (MIRCO) and boosting (RCBoost) of tree ensembles."""

__version__ = "0.1.0"

from .cover import CoverProblem, CoverSolution, exact_cover, greedy_cover, remove_redundant
from .dataset import Dataset, FoldPlan, grid_search, load_csv, stratified_kfold
from .forest import Forest, ForestParams, fit_forest, forest_predict
from .lp import LPSolution, reduced_cost, solve_covering_lp
from .mirco import MircoResult, evaluate_mirco, run_mirco
from .rcboost import RcbParams, RcbTrace, rcb_predict, run_rcboost
from .rules import Clause, Rule, RulePool, build_coverage, dedup, extract_rules, predict, satisfies
from .tree import TreeParams, fit_tree, find_best_split, weighted_impurity

__all__ = [
    "Clause", "CoverProblem", "CoverSolution", "Dataset", "FoldPlan", "Forest", "ForestParams",
    "LPSolution", "MircoResult", "RcbParams", "RcbTrace", "Rule", "RulePool", "TreeParams",
    "build_coverage", "dedup", "evaluate_mirco", "exact_cover", "extract_rules", "find_best_split",
    "fit_forest", "fit_tree", "forest_predict", "greedy_cover", "grid_search", "load_csv", "predict",
    "rcb_predict", "reduced_cost", "remove_redundant", "run_mirco", "run_rcboost", "satisfies",
    "solve_covering_lp", "stratified_kfold", "weighted_impurity",
]
