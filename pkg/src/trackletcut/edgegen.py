"""Motion statistics and radius-gated candidate edges between tracklets.

Displacements are measured in box diagonals per second, so statistics
gathered on one sequence transfer to another with a different frame rate or
person scale.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

from .core import Detection, SequenceMeta, Tracklet

CAMERA_CLASSES = ("static", "moving")
DEFAULT_INFLATION = 2.0
SPREAD_SIGMAS = 3.0


class NoSamples(ValueError):
    pass


class NoStats(ValueError):
    pass


@dataclass(frozen=True)
class ClassStats:
    mean_disp: float = 0.0
    std_disp: float = 0.0
    sample_count: int = 0

    def pooled(self, other: "ClassStats") -> "ClassStats":
        n = self.sample_count + other.sample_count
        if n == 0:
            return ClassStats()
        mean = (self.mean_disp * self.sample_count + other.mean_disp * other.sample_count) / n
        second = (
            self.sample_count * (self.std_disp ** 2 + self.mean_disp ** 2)
            + other.sample_count * (other.std_disp ** 2 + other.mean_disp ** 2)
        ) / n
        return ClassStats(mean, math.sqrt(max(second - mean * mean, 0.0)), n)


@dataclass(frozen=True)
class MotionStats:
    static: ClassStats = field(default_factory=ClassStats)
    moving: ClassStats = field(default_factory=ClassStats)

    def for_camera(self, moving_camera: bool) -> ClassStats:
        return self.moving if moving_camera else self.static

    def pooled(self, other: "MotionStats") -> "MotionStats":
        return MotionStats(self.static.pooled(other.static), self.moving.pooled(other.moving))


@dataclass(frozen=True)
class EdgeCandidate:
    u: int
    v: int
    gap: int


def displacement_samples(tracks: Sequence[Tracklet], fps: float) -> List[float]:
    """Center displacement per second, in units of the earlier box's diagonal."""
    out = []
    for t in tracks:
        for a, b in zip(t.detections, t.detections[1:]):
            (ax, ay), (bx, by) = a.box.center, b.box.center
            per_frame = math.hypot(bx - ax, by - ay) / (b.frame - a.frame)
            out.append(per_frame / a.box.diag * fps)
    return out


def compute_motion_stats(gt_tracks: Sequence[Tracklet], meta: SequenceMeta) -> MotionStats:
    samples = displacement_samples(gt_tracks, meta.fps)
    if not samples:
        raise NoSamples("no consecutive detection pairs in the ground-truth tracks")
    n = len(samples)
    mean = math.fsum(samples) / n
    std = math.sqrt(math.fsum((s - mean) ** 2 for s in samples) / n)
    cls = ClassStats(mean, std, n)
    return MotionStats(moving=cls) if meta.moving_camera else MotionStats(static=cls)


def feasible_radius(
    det: Detection, gap: int, stats: MotionStats, meta: SequenceMeta, inflation: float = DEFAULT_INFLATION
) -> float:
    """Pixel radius a person starting at ``det`` can plausibly cover in ``gap`` frames."""
    if gap < 1:
        raise ValueError(f"frame gap must be >= 1, got {gap}")
    cls = stats.for_camera(meta.moving_camera)
    if cls.sample_count == 0:
        kind = "moving" if meta.moving_camera else "static"
        raise NoStats(f"no motion statistics for {kind} cameras")
    speed = cls.mean_disp + SPREAD_SIGMAS * cls.std_disp
    return inflation * speed * (gap / meta.fps) * det.box.diag


GapLimit = Union[int, Callable[[Tracklet, Tracklet], int]]


def candidate_edges(
    tracklets: Sequence[Tracklet],
    gap_limit: GapLimit,
    stats: Optional[MotionStats],
    meta: SequenceMeta,
    inflation: float = DEFAULT_INFLATION,
) -> List[EdgeCandidate]:
    """Edges from each tracklet to later tracklets within the gap limit and motion radius.

    ``gap_limit`` is a fixed frame count or a per-pair rule. With
    ``stats=None`` the radius test is skipped and every pair within the gap
    limit becomes an edge.
    """
    ordered = sorted(tracklets, key=lambda t: t.first_frame)
    starts = [t.first_frame for t in ordered]
    fixed = gap_limit if isinstance(gap_limit, int) else None
    out = []
    for tu in tracklets:
        lo = bisect.bisect_right(starts, tu.last_frame)
        hi = bisect.bisect_right(starts, tu.last_frame + fixed) if fixed is not None else len(ordered)
        ux, uy = tu.last.box.center
        for tv in ordered[lo:hi]:
            gap = tv.first_frame - tu.last_frame
            limit = fixed if fixed is not None else gap_limit(tu, tv)
            if gap > limit:
                continue
            if stats is not None:
                vx, vy = tv.first.box.center
                radius = feasible_radius(tu.last, gap, stats, meta, inflation)
                if math.hypot(vx - ux, vy - uy) > radius:
                    continue
            out.append(EdgeCandidate(tu.tracklet_id, tv.tracklet_id, gap))
    out.sort(key=lambda e: (e.u, e.v))
    return out


def format_stats(stats: MotionStats) -> str:
    lines = []
    for name in CAMERA_CLASSES:
        cls: ClassStats = getattr(stats, name)
        lines.append(f"{name} {cls.mean_disp!r} {cls.std_disp!r} {cls.sample_count}")
    return "\n".join(lines) + "\n"


def write_stats(stats: MotionStats, path) -> None:
    Path(path).write_text(format_stats(stats))


def read_stats(path) -> MotionStats:
    found: Dict[str, ClassStats] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 4 or parts[0] not in CAMERA_CLASSES:
                raise ValueError(f"{path}:{lineno}: expected 'class mean std count', got {line.strip()!r}")
            found[parts[0]] = ClassStats(float(parts[1]), float(parts[2]), int(parts[3]))
    return MotionStats(**found)
