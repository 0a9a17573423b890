from trackletcut.core import BoundingBox, Detection, tracklet_new

_next = [10_000]


def det(frame, x=0.0, y=0.0, w=10.0, h=20.0, gt=None, det_id=None, desc=None):
    if det_id is None:
        _next[0] += 1
        det_id = _next[0]
    return Detection(det_id, frame, BoundingBox(x, y, w, h), 1.0, gt_id=gt, descriptor=desc)


def track(frames, tid=0, gt=None, **kw):
    return tracklet_new([det(f, gt=gt, **kw) for f in frames], tid)


def all_partitions(n):
    """Set partitions of range(n) as label tuples, built by inserting one element at a time."""
    parts = [[]]
    for v in range(n):
        nxt = []
        for blocks in parts:
            for i in range(len(blocks)):
                nxt.append(blocks[:i] + [blocks[i] + [v]] + blocks[i + 1:])
            nxt.append(blocks + [[v]])
        parts = nxt
    out = []
    for blocks in parts:
        lab = [0] * n
        for b, members in enumerate(blocks):
            for v in members:
                lab[v] = b
        out.append(tuple(lab))
    return out
