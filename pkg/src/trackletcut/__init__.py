"""Tracklet association by constrained minimum-cost multicut."""
from .affinity import (
    BaselineScorer,
    BaselineScorerConfig,
    OracleScorer,
    OracleScorerConfig,
    affinity_from_cost,
    cost_from_affinity,
)
from .core import BoundingBox, Detection, SequenceMeta, Tracklet, tracklet_new
from .edgegen import MotionStats, candidate_edges, compute_motion_stats
from .hierarchy import Phase, Schedule, run
from .metrics import clear_metrics, pairwise_f1
from .multicut import Decomposition, Graph, brute_force_optimum, cklj_solve, objective
from .samplegen import GenConfig, TrackletPairSample, gen_dataset
from .synth import SynthConfig, synth_generate

__version__ = "0.1.0"

__all__ = [
    "BaselineScorer", "BaselineScorerConfig", "BoundingBox", "Decomposition", "Detection",
    "GenConfig", "Graph", "MotionStats", "OracleScorer", "OracleScorerConfig", "Phase",
    "Schedule", "SequenceMeta", "SynthConfig", "Tracklet", "TrackletPairSample",
    "affinity_from_cost", "brute_force_optimum", "candidate_edges", "cklj_solve",
    "clear_metrics", "compute_motion_stats", "cost_from_affinity", "gen_dataset",
    "objective", "pairwise_f1", "run", "synth_generate", "tracklet_new",
]
