"""Causal DAG recovery from collider triples with Negative Percentage Mapping."""

__version__ = "0.1.0"

from ._backend import default_backend
from .dataset import Dataset, GroundTruth, SynthSpec, load_csv, sample_distribution, synth_dataset
from .errors import (
    ColliderDagError,
    DatasetError,
    DegenerateDenominatorError,
    DegenerateTripleError,
    EmptyResultError,
    UndefinedContributionError,
)
from .graph import CausalDag, Edge, break_cycles, export_dot, is_acyclic, score_against_truth, to_dag
from .learner import (
    LearnConfig,
    LearnOutput,
    LearnState,
    anti_cycle_sweep,
    enumerate_triples,
    learn,
    score_triple,
    update_threshold,
)
from .npm import ContributionVector, npm_map, percent_contributions
from .regression import SingleFit, TripleFit, TripleIndex, fit_triple, solve_normal_equations
