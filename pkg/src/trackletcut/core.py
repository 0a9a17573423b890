"""Detections, tracklets and the pairwise preprocessing applied before scoring."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple


class TrackletError(ValueError):
    """Base class for tracklet construction and pairing errors."""


class EmptyTracklet(TrackletError):
    pass


class DuplicateFrame(TrackletError):
    pass


class NotPreceding(TrackletError):
    pass


class LengthMismatch(TrackletError):
    pass


class FrameCollision(TrackletError):
    pass


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box; (x, y) is the top-left corner in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h)):
            raise ValueError(f"non-finite box {self}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box needs positive size, got w={self.w} h={self.h}")

    @property
    def center(self) -> Tuple[float, float]:
        return self.x + 0.5 * self.w, self.y + 0.5 * self.h

    @property
    def diag(self) -> float:
        return math.hypot(self.w, self.h)

    @property
    def area(self) -> float:
        return self.w * self.h

    def shifted(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    @classmethod
    def from_center(cls, cx: float, cy: float, w: float, h: float) -> "BoundingBox":
        return cls(cx - 0.5 * w, cy - 0.5 * h, w, h)


@dataclass(frozen=True)
class Detection:
    det_id: int
    frame: int
    box: BoundingBox
    confidence: float = 1.0
    gt_id: Optional[int] = None
    descriptor: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.frame < 1:
            raise ValueError(f"frame numbers start at 1, got {self.frame}")
        if self.descriptor is not None and not isinstance(self.descriptor, tuple):
            object.__setattr__(self, "descriptor", tuple(float(v) for v in self.descriptor))


@dataclass(frozen=True)
class Tracklet:
    """Frame-ordered detections with at most one detection per frame.

    Build through :func:`tracklet_new` (or :func:`merge`), which sort and
    validate; the constructor only re-checks the invariant.
    """

    tracklet_id: int
    detections: Tuple[Detection, ...]

    def __post_init__(self):
        if not self.detections:
            raise EmptyTracklet("a tracklet needs at least one detection")
        frames = [d.frame for d in self.detections]
        for a, b in zip(frames, frames[1:]):
            if b <= a:
                raise DuplicateFrame(f"frames must be strictly ascending, got {frames}")

    def __len__(self) -> int:
        return len(self.detections)

    @property
    def frames(self) -> Tuple[int, ...]:
        return tuple(d.frame for d in self.detections)

    @property
    def first(self) -> Detection:
        return self.detections[0]

    @property
    def last(self) -> Detection:
        return self.detections[-1]

    @property
    def first_frame(self) -> int:
        return self.detections[0].frame

    @property
    def last_frame(self) -> int:
        return self.detections[-1].frame

    def with_id(self, tracklet_id: int) -> "Tracklet":
        return Tracklet(tracklet_id, self.detections)


@dataclass(frozen=True)
class SequenceMeta:
    image_width: float
    image_height: float
    fps: float
    moving_camera: bool = False
    n_max: int = 20

    def __post_init__(self):
        if self.image_width <= 0 or self.image_height <= 0 or self.fps <= 0:
            raise ValueError("image dimensions and frame rate must be positive")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")


@dataclass(frozen=True)
class NormalizedPairFeature:
    """Normalized (x, y, w, h, t) of the two detections at one pair index."""

    earlier: Tuple[float, float, float, float, float]
    later: Tuple[float, float, float, float, float]


def iou(a: BoundingBox, b: BoundingBox) -> float:
    # overlap as own size minus offset, so a contained side is exact
    x0, y0 = max(a.x, b.x), max(a.y, b.y)
    iw = min(a.w - (x0 - a.x), b.w - (x0 - b.x))
    ih = min(a.h - (y0 - a.y), b.h - (y0 - b.y))
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return min(inter / (a.area + b.area - inter), 1.0)


def tracklet_new(detections: Iterable[Detection], tracklet_id: int = 0) -> Tracklet:
    dets = sorted(detections, key=lambda d: d.frame)
    if not dets:
        raise EmptyTracklet("cannot build a tracklet from no detections")
    for a, b in zip(dets, dets[1:]):
        if a.frame == b.frame:
            raise DuplicateFrame(f"detections {a.det_id} and {b.det_id} share frame {a.frame}")
    return Tracklet(tracklet_id, tuple(dets))


def precedes(t_i: Tracklet, t_j: Tracklet) -> bool:
    return t_i.last_frame < t_j.first_frame


def frame_gap(t_i: Tracklet, t_j: Tracklet) -> int:
    return t_j.first_frame - t_i.last_frame


def prune_pair(t_i: Tracklet, t_j: Tracklet, n_max: int = 20) -> Tuple[Tracklet, Tracklet]:
    """Cut both tracklets to a common length, keeping the detections nearest the gap."""
    if not precedes(t_i, t_j):
        raise NotPreceding(f"tracklet {t_i.tracklet_id} does not precede {t_j.tracklet_id}")
    n = min(len(t_i), len(t_j), n_max)
    return (
        Tracklet(t_i.tracklet_id, t_i.detections[len(t_i) - n:]),
        Tracklet(t_j.tracklet_id, t_j.detections[:n]),
    )


def pair_sequence(t_i: Tracklet, t_j: Tracklet) -> list[tuple[Detection, Detection]]:
    """Pairs the k-th detection of ``t_j`` with the k-th-from-last of ``t_i``."""
    if len(t_i) != len(t_j):
        raise LengthMismatch(f"pruned tracklets differ in length: {len(t_i)} vs {len(t_j)}")
    n = len(t_i)
    return [(t_i.detections[n - k], t_j.detections[k - 1]) for k in range(1, n + 1)]


def _normalize(det: Detection, origin: Detection, meta: SequenceMeta):
    return (
        (det.box.x - origin.box.x) / meta.image_width,
        (det.box.y - origin.box.y) / meta.image_height,
        det.box.w / meta.image_width,
        det.box.h / meta.image_height,
        (det.frame - origin.frame) / meta.fps,
    )


def normalize_pair(t_i: Tracklet, t_j: Tracklet, meta: SequenceMeta) -> list[NormalizedPairFeature]:
    if not precedes(t_i, t_j):
        raise NotPreceding(f"tracklet {t_i.tracklet_id} does not precede {t_j.tracklet_id}")
    origin = t_i.first
    return [
        NormalizedPairFeature(_normalize(a, origin, meta), _normalize(b, origin, meta))
        for a, b in pair_sequence(t_i, t_j)
    ]


def merge(t_i: Tracklet, t_j: Tracklet, tracklet_id: int) -> Tracklet:
    shared = set(t_i.frames) & set(t_j.frames)
    if shared:
        raise FrameCollision(
            f"tracklets {t_i.tracklet_id} and {t_j.tracklet_id} share frames {sorted(shared)}"
        )
    return tracklet_new(t_i.detections + t_j.detections, tracklet_id)


def merge_all(tracklets: Sequence[Tracklet], tracklet_id: int) -> Tracklet:
    """Merge several tracklets in ascending first-frame order."""
    ordered = sorted(tracklets, key=lambda t: (t.first_frame, t.tracklet_id))
    out = ordered[0]
    for t in ordered[1:]:
        out = merge(out, t, tracklet_id)
    return out.with_id(tracklet_id)
