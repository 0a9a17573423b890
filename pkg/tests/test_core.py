import pytest
from helpers import det, track

from trackletcut.core import (
    BoundingBox,
    DuplicateFrame,
    EmptyTracklet,
    FrameCollision,
    LengthMismatch,
    NotPreceding,
    SequenceMeta,
    merge,
    merge_all,
    normalize_pair,
    pair_sequence,
    precedes,
    prune_pair,
    tracklet_new,
)


def test_tracklet_sorts_by_frame():
    t = tracklet_new([det(3), det(1), det(2)])
    assert t.frames == (1, 2, 3)


def test_tracklet_duplicate_frame():
    with pytest.raises(DuplicateFrame):
        tracklet_new([det(1), det(1)])


def test_tracklet_single_and_empty():
    assert len(tracklet_new([det(5)])) == 1
    with pytest.raises(EmptyTracklet):
        tracklet_new([])


def test_box_validation():
    with pytest.raises(ValueError):
        BoundingBox(0, 0, 0, 1)
    with pytest.raises(ValueError):
        BoundingBox(float("nan"), 0, 1, 1)


@pytest.mark.parametrize("a,b,expected", [
    ((1, 2, 3), (4, 5, 6), True),
    ((1, 2, 3), (3, 4, 5), False),
    ((4, 5, 6), (1, 2, 3), False),
])
def test_precedes(a, b, expected):
    assert precedes(track(a), track(b)) is expected


def test_prune_drops_first_detection_of_earlier():
    # four detections before, three after: the earliest one goes
    ti, tj = track([1, 2, 3, 4]), track([6, 7, 8])
    pi, pj = prune_pair(ti, tj, 20)
    assert pi.frames == (2, 3, 4) and pj.frames == (6, 7, 8)


def test_prune_singletons_unchanged():
    ti, tj = track([1]), track([2])
    assert prune_pair(ti, tj) == (ti, tj)


def test_prune_caps_at_n_max():
    ti, tj = track(range(1, 31)), track(range(31, 61))
    pi, pj = prune_pair(ti, tj, 20)
    assert pi.frames == tuple(range(11, 31))
    assert pj.frames == tuple(range(31, 51))


def test_prune_requires_order():
    with pytest.raises(NotPreceding):
        prune_pair(track([3, 4]), track([1, 2]))


def test_pair_sequence_index_formula():
    ti, tj = track([1, 2, 3]), track([4, 5, 6])
    seq = pair_sequence(ti, tj)
    d_i, d_j = ti.detections, tj.detections
    # k-th pair is (D_i^{N-k+1}, D_j^k) with 1-based indices
    assert seq == [(d_i[2], d_j[0]), (d_i[1], d_j[1]), (d_i[0], d_j[2])]


def test_pair_sequence_single_and_mismatch():
    ti, tj = track([1]), track([2])
    assert pair_sequence(ti, tj) == [(ti.first, tj.first)]
    with pytest.raises(LengthMismatch):
        pair_sequence(track([1, 2]), track([3, 4, 5]))


def test_pair_sequence_backward_direction():
    ti, tj = track([1, 2, 3, 4]), track([7, 8, 9, 10])
    fwd = pair_sequence(ti, tj)
    n = len(ti)
    backward = [(ti.detections[k - 1], tj.detections[n - k]) for k in range(1, n + 1)]
    assert list(reversed(fwd)) == backward


def test_normalize_pair_arithmetic():
    meta = SequenceMeta(1280, 720, 30)
    first = det(10, 600, 350, 64, 128)
    other = det(13, 640, 360, 64, 128)
    ti, tj = tracklet_new([first]), tracklet_new([other])
    (feat,) = normalize_pair(ti, tj, meta)
    assert feat.earlier == pytest.approx((0, 0, 64 / 1280, 128 / 720, 0))
    expected = ((640 - 600) / 1280, (360 - 350) / 720, 64 / 1280, 128 / 720, 3 / 30)
    assert feat.later == pytest.approx(expected)
    assert feat.later == pytest.approx((0.03125, 0.0138889, 0.05, 0.1777778, 0.1), abs=1e-7)


def test_normalize_time_uses_frame_rate():
    meta = SequenceMeta(100, 100, 25)
    (feat,) = normalize_pair(tracklet_new([det(5)]), tracklet_new([det(30)]), meta)
    assert feat.earlier[4] == 0 and feat.later[4] == 1


def test_merge():
    m = merge(track([1, 2]), track([4, 5]), 9)
    assert m.frames == (1, 2, 4, 5) and m.tracklet_id == 9
    with pytest.raises(FrameCollision):
        merge(track([1, 2]), track([2, 3]), 9)


def test_merge_associative():
    a, b, c = track([1, 2]), track([5]), track([3, 9])
    left = merge(merge(a, b, 0), c, 0)
    right = merge(a, merge(b, c, 0), 0)
    assert left.detections == right.detections


def test_merge_all_orders_by_first_frame():
    parts = [track([7, 8]), track([1]), track([3, 4])]
    m = merge_all(parts, 5)
    assert m.frames == (1, 3, 4, 7, 8) and m.tracklet_id == 5
