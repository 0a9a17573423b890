import pytest
from helpers import det, track

from trackletcut.affinity import OracleScorer
from trackletcut.core import SequenceMeta
from trackletcut.hierarchy import (
    Phase,
    Schedule,
    build_graph,
    conflict_constraints,
    format_history,
    initial_state,
    iterate,
    max_gap,
    run,
)
from trackletcut.synth import SynthConfig, synth_generate

META = SequenceMeta(1920, 1080, 30)
SCHED = Schedule()
ORACLE = OracleScorer()


def test_max_gap_examples():
    assert max_gap(SCHED, 2, Phase.FIXED, 1, 1) == 2
    assert max_gap(SCHED, 1, Phase.FIXED, 1, 1) == 1
    assert max_gap(SCHED, 3, Phase.FIXED, 1, 1) == 4
    assert max_gap(SCHED, 5, Phase.PHASE_A, 5, 7) == 20
    assert max_gap(SCHED, 6, Phase.PHASE_B, 1, 1) == 6
    with pytest.raises(ValueError):
        max_gap(SCHED, 0, Phase.FIXED, 1, 1)


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(fixed_gaps=(2, 1))
    with pytest.raises(ValueError):
        Schedule(phase_a_multiplier=6, phase_b_multiplier=4)


def test_conflicts():
    assert conflict_constraints([track([1, 2, 3], 1), track([3, 4], 2)]) == {(1, 2)}
    assert conflict_constraints([track([1, 2], 1), track([3, 4], 2)]) == set()


def conflict_dets():
    i = det(1, 100, 100, gt=1, det_id=0)
    j = det(1, 900, 100, gt=2, det_id=1)
    k = det(2, 102, 100, gt=1, det_id=2)
    return [i, j, k]


def test_conflict_topology():
    state = initial_state(conflict_dets())
    assert conflict_constraints(state.tracklets) == {(0, 1)}
    g = build_graph(state, ORACLE, None, SCHED, META)
    assert g.n_vertices == 3 and len(g.edges) == 2 and g.constraints == frozenset({(0, 1)})


def test_build_graph_trivial():
    g = build_graph(initial_state([]), ORACLE, None, SCHED, META)
    assert g.n_vertices == 0
    g = build_graph(initial_state([det(1, gt=1)]), ORACLE, None, SCHED, META)
    assert g.n_vertices == 1 and g.edges == ()


def test_iterate_merges_same_person():
    s = iterate(initial_state([det(1, gt=1, det_id=0), det(2, gt=1, det_id=1)]), ORACLE, None, SCHED, META)
    assert len(s.tracklets) == 1 and s.history[0].n_merges == 1


def test_iterate_keeps_different_people():
    s = iterate(initial_state([det(1, gt=1, det_id=0), det(2, gt=2, det_id=1)]), ORACLE, None, SCHED, META)
    assert len(s.tracklets) == 2 and s.phase is Phase.FIXED and s.iteration == 1


def test_phase_b_no_merge_converges():
    s = initial_state([det(1, gt=1, det_id=0), det(2, gt=2, det_id=1)])
    s.phase = Phase.PHASE_B
    assert iterate(s, ORACLE, None, SCHED, META).phase is Phase.CONVERGED


def test_phase_progression():
    dets = [det(f, gt=1, det_id=f) for f in (1, 2)] + [det(9, gt=2, det_id=9)]
    _, hist = run(dets, ORACLE, None, SCHED, META)
    phases = [h.phase for h in hist]
    assert phases[:3] == [Phase.FIXED] * 3
    assert phases[3:] == [Phase.PHASE_A, Phase.PHASE_B]


def test_run_trivial():
    assert run([], ORACLE, None, SCHED, META)[0] == []
    (t,), _ = run([det(4, gt=3)], ORACLE, None, SCHED, META)
    assert len(t) == 1 and t.tracklet_id == 1


def test_run_recovers_synthetic_identities():
    cfg = SynthConfig(n_identities=4, n_frames=30, occlusions=((2, 10, 13),), rng_seed=1)
    dets, gt = synth_generate(cfg)
    tracks, hist = run(dets, ORACLE, None, SCHED, cfg.meta)
    got = sorted(sorted(d.det_id for d in t.detections) for t in tracks)
    by_id = {}
    for d in dets:
        by_id.setdefault(d.gt_id, []).append(d.det_id)
    assert got == sorted(sorted(v) for v in by_id.values())
    assert [t.tracklet_id for t in tracks] == list(range(1, len(tracks) + 1))
    counts = [h.n_vertices for h in hist]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_history_csv():
    _, hist = run([det(1, gt=1, det_id=0), det(2, gt=1, det_id=1)], ORACLE, None, SCHED, META)
    lines = format_history(hist).splitlines()
    assert lines[0] == "iteration,phase,n_vertices,n_edges,n_merges,wall_ms"
    assert lines[1].startswith("1,fixed,2,1,1,")
