"""Iterative tracklet clustering with a staged frame-gap schedule.

Each iteration builds a graph over the current tracklets, decomposes it
with :func:`~trackletcut.multicut.cklj_solve` and merges every component
into one longer tracklet. The admissible frame gap widens in three stages:
a fixed list of gaps, then a multiple of the tracklet length, then a larger
multiple once nothing more merges.
"""
from __future__ import annotations

import csv
import enum
import io
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .affinity import Scorer, cost_from_affinity
from .core import Detection, SequenceMeta, Tracklet, merge_all, tracklet_new
from .edgegen import DEFAULT_INFLATION, MotionStats, candidate_edges
from .multicut import Graph, cklj_solve

log = logging.getLogger(__name__)

HISTORY_COLUMNS = ("iteration", "phase", "n_vertices", "n_edges", "n_merges", "wall_ms")


class Phase(enum.Enum):
    FIXED = "fixed"
    PHASE_A = "phase_a"
    PHASE_B = "phase_b"
    CONVERGED = "converged"


@dataclass(frozen=True)
class Schedule:
    fixed_gaps: Tuple[int, ...] = (1, 2, 4)
    phase_a_multiplier: int = 4
    phase_b_multiplier: int = 6

    def __post_init__(self):
        gaps = tuple(int(g) for g in self.fixed_gaps)
        if any(g < 1 for g in gaps) or list(gaps) != sorted(gaps):
            raise ValueError(f"fixed_gaps must be positive and ascending, got {gaps}")
        if self.phase_a_multiplier < 1 or self.phase_b_multiplier < self.phase_a_multiplier:
            raise ValueError("need 1 <= phase_a_multiplier <= phase_b_multiplier")
        object.__setattr__(self, "fixed_gaps", gaps)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    phase: Phase
    n_vertices: int
    n_edges: int
    n_merges: int
    wall_ms: float


@dataclass
class ClusterState:
    tracklets: List[Tracklet]
    iteration: int = 0
    phase: Phase = Phase.FIXED
    history: List[IterationRecord] = field(default_factory=list)
    next_id: int = 0

    @property
    def n_detections(self) -> int:
        return sum(len(t) for t in self.tracklets)


def initial_state(detections: Sequence[Detection], schedule: Optional[Schedule] = None) -> ClusterState:
    """One singleton tracklet per detection, ids taken from the detection ids."""
    dets = sorted(detections, key=lambda d: (d.frame, d.det_id))
    tracklets = [tracklet_new([d], d.det_id) for d in dets]
    phase = Phase.FIXED if (schedule is None or schedule.fixed_gaps) else Phase.PHASE_A
    next_id = max((d.det_id for d in dets), default=-1) + 1
    return ClusterState(tracklets=tracklets, phase=phase, next_id=next_id)


def max_gap(schedule: Schedule, iteration: int, phase: Phase, len_u: int, len_v: int) -> int:
    if iteration < 1:
        raise ValueError("iterations are numbered from 1")
    if phase is Phase.FIXED:
        return schedule.fixed_gaps[min(iteration, len(schedule.fixed_gaps)) - 1]
    if phase is Phase.PHASE_A:
        return schedule.phase_a_multiplier * min(len_u, len_v)
    if phase is Phase.PHASE_B:
        return schedule.phase_b_multiplier * min(len_u, len_v)
    raise ValueError("a converged state has no gap limit")


def conflict_constraints(tracklets: Sequence[Tracklet]) -> Set[Tuple[int, int]]:
    """Id pairs of tracklets that share at least one frame."""
    by_frame: Dict[int, List[int]] = {}
    for t in tracklets:
        for f in t.frames:
            by_frame.setdefault(f, []).append(t.tracklet_id)
    out = set()
    for ids in by_frame.values():
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                out.add((a, b) if a < b else (b, a))
    return out


def _ordered(tracklets: Sequence[Tracklet]) -> List[Tracklet]:
    return sorted(tracklets, key=lambda t: (t.first_frame, t.tracklet_id))


def build_graph(
    state: ClusterState,
    scorer: Scorer,
    stats: Optional[MotionStats],
    schedule: Schedule,
    meta: SequenceMeta,
    *,
    inflation: float = DEFAULT_INFLATION,
    workers: int = 1,
) -> Graph:
    """Graph over ``state.tracklets`` (vertex k is the k-th tracklet in list order)."""
    if state.phase is Phase.CONVERGED:
        raise ValueError("state has already converged")
    iteration, phase = state.iteration + 1, state.phase
    if phase is Phase.FIXED:
        limit = max_gap(schedule, iteration, phase, 1, 1)
    else:
        def limit(tu: Tracklet, tv: Tracklet) -> int:
            return max_gap(schedule, iteration, phase, len(tu), len(tv))

    index = {t.tracklet_id: k for k, t in enumerate(state.tracklets)}
    cands = candidate_edges(state.tracklets, limit, stats, meta, inflation)
    pairs = [(state.tracklets[index[e.u]], state.tracklets[index[e.v]]) for e in cands]
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(lambda p: scorer.score(p[0], p[1], meta), pairs))
    else:
        scores = [scorer.score(tu, tv, meta) for tu, tv in pairs]
    edges = tuple(
        (index[e.u], index[e.v], cost_from_affinity(a)) for e, a in zip(cands, scores)
    )
    cons = frozenset((index[a], index[b]) for a, b in conflict_constraints(state.tracklets))
    return Graph(len(state.tracklets), edges, cons)


def _advance(phase: Phase, iteration: int, merged: bool, schedule: Schedule) -> Phase:
    if phase is Phase.FIXED:
        return Phase.PHASE_A if iteration >= len(schedule.fixed_gaps) else Phase.FIXED
    if merged:
        return phase
    return Phase.PHASE_B if phase is Phase.PHASE_A else Phase.CONVERGED


def iterate(
    state: ClusterState,
    scorer: Scorer,
    stats: Optional[MotionStats],
    schedule: Schedule,
    meta: SequenceMeta,
    *,
    inflation: float = DEFAULT_INFLATION,
    workers: int = 1,
) -> ClusterState:
    """One build-solve-merge round; returns a new state."""
    start = time.perf_counter()
    tracklets = state.tracklets
    graph = build_graph(state, scorer, stats, schedule, meta, inflation=inflation, workers=workers)
    decomposition, _ = cklj_solve(graph)

    next_id = state.next_id
    merged: List[Tracklet] = []
    for comp in decomposition.components():
        if len(comp) == 1:
            merged.append(tracklets[comp[0]])
        else:
            # a frame collision here means the constraint set missed a conflict
            merged.append(merge_all([tracklets[v] for v in comp], next_id))
            next_id += 1
    merged = _ordered(merged)
    n_merges = len(tracklets) - len(merged)
    assert sum(len(t) for t in merged) == state.n_detections

    iteration = state.iteration + 1
    record = IterationRecord(
        iteration=iteration,
        phase=state.phase,
        n_vertices=len(tracklets),
        n_edges=len(graph.edges),
        n_merges=n_merges,
        wall_ms=(time.perf_counter() - start) * 1e3,
    )
    log.debug("iteration %d (%s): %d vertices, %d edges, %d merges",
              iteration, state.phase.value, record.n_vertices, record.n_edges, n_merges)
    return ClusterState(
        tracklets=merged,
        iteration=iteration,
        phase=_advance(state.phase, iteration, n_merges > 0, schedule),
        history=state.history + [record],
        next_id=next_id,
    )


def run(
    detections: Sequence[Detection],
    scorer: Scorer,
    stats: Optional[MotionStats],
    schedule: Optional[Schedule],
    meta: SequenceMeta,
    *,
    inflation: float = DEFAULT_INFLATION,
    workers: int = 1,
) -> Tuple[List[Tracklet], List[IterationRecord]]:
    """Cluster detections into identity tracks numbered 1..K by first appearance."""
    schedule = schedule or Schedule()
    state = initial_state(detections, schedule)
    bound = len(state.tracklets) + len(schedule.fixed_gaps) + 2
    while state.phase is not Phase.CONVERGED:
        if state.iteration >= bound:
            raise RuntimeError(f"clustering did not converge within {bound} iterations")
        state = iterate(state, scorer, stats, schedule, meta, inflation=inflation, workers=workers)
    tracks = [t.with_id(k) for k, t in enumerate(_ordered(state.tracklets), 1)]
    return tracks, state.history


def format_history(history: Sequence[IterationRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HISTORY_COLUMNS)
    for r in history:
        writer.writerow([r.iteration, r.phase.value, r.n_vertices, r.n_edges, r.n_merges, f"{r.wall_ms:.3f}"])
    return buf.getvalue()


def write_history(history: Sequence[IterationRecord], path) -> None:
    Path(path).write_text(format_history(history))
