"""Tracklet-pair training corpus: positive splits and three kinds of negatives.

A draw fixes an anchor segment of ``length`` detections, a number of skipped
frames, and the target frame right after the skip. Positives continue the
anchor's own track from the target frame; negatives take an equally long
segment from another identity that is present at the target frame, chosen by
center distance or by image quadrant relative to the anchor identity's own
detection in that frame.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .core import Detection, Tracklet, tracklet_new

STRATEGIES = ("split", "nearest", "same_quadrant", "other_quadrant")
NEGATIVE_STRATEGIES = STRATEGIES[1:]


class TrackTooShort(ValueError):
    pass


class NoCandidate(LookupError):
    pass


class Exhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class TrackletPairSample:
    first: Tracklet
    second: Tracklet
    label: str
    strategy: str
    gap: int

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if (self.label == "positive") != (self.strategy == "split") or self.label not in ("positive", "negative"):
            raise ValueError(f"label {self.label!r} does not match strategy {self.strategy!r}")
        if self.second.first_frame - self.first.last_frame != self.gap or self.gap < 1:
            raise ValueError("gap must equal the frame difference between the segments and be >= 1")


@dataclass(frozen=True)
class Anchor:
    """First segment of a sample plus its own identity's detection at the target frame."""
    segment: Tracklet
    reference: Detection
    track: Tracklet

    @property
    def length(self) -> int:
        return len(self.segment)

    @property
    def target_frame(self) -> int:
        return self.reference.frame

    @property
    def identity(self) -> int:
        return self.reference.gt_id


@dataclass(frozen=True)
class GenConfig:
    n_samples: int = 1000
    len_range: Tuple[int, int] = (1, 20)
    gap_factor_range: Tuple[float, float] = (0.0, 4.0)
    mix: Tuple[float, float, float] = (0.5, 0.25, 0.25)
    positive_fraction: float = 0.5
    rng_seed: int = 0
    max_attempts: int = 200

    def __post_init__(self):
        lo, hi = self.len_range
        if self.n_samples < 0 or not 1 <= lo <= hi:
            raise ValueError("need n_samples >= 0 and 1 <= min length <= max length")
        flo, fhi = self.gap_factor_range
        if not 0 <= flo <= fhi:
            raise ValueError("need 0 <= min gap factor <= max gap factor")
        if len(self.mix) != 3 or min(self.mix) < 0 or not math.isclose(sum(self.mix), 1.0, abs_tol=1e-9):
            raise ValueError(f"mix must be three non-negative weights summing to 1, got {self.mix}")
        if not 0 <= self.positive_fraction <= 1:
            raise ValueError("positive_fraction must lie in [0, 1]")


def _identity(track: Tracklet) -> int:
    ident = track.detections[0].gt_id
    if ident is None:
        raise ValueError(f"track {track.tracklet_id} has no gt_id")
    return ident


def _segment(track: Tracklet, start: int, length: int) -> Tracklet:
    return tracklet_new(track.detections[start:start + length], track.tracklet_id)


def _anchor_starts(track: Tracklet, length: int, skipped: int) -> List[Tuple[int, int]]:
    """(anchor start index, target index) pairs that leave room for a second segment."""
    index = {d.frame: k for k, d in enumerate(track.detections)}
    n = len(track)
    out = []
    for s in range(0, n - length + 1):
        target = track.detections[s + length - 1].frame + skipped + 1
        j = index.get(target)
        if j is not None and j + length <= n:
            out.append((s, j))
    return out


def draw_anchor(track: Tracklet, length: int, skipped: int, rng: np.random.Generator) -> Anchor:
    """Random anchor on ``track``; ``skipped`` frames separate it from the target frame."""
    if length < 1 or skipped < 0:
        raise ValueError("need length >= 1 and skipped >= 0")
    starts = _anchor_starts(track, length, skipped)
    if not starts:
        raise TrackTooShort(
            f"track {track.tracklet_id} ({len(track)} detections) has no room for two "
            f"{length}-detection segments {skipped} frames apart"
        )
    s, j = starts[int(rng.integers(len(starts)))]
    _identity(track)
    return Anchor(_segment(track, s, length), track.detections[j], track)


def _sample(anchor: Anchor, second: Tracklet, strategy: str) -> TrackletPairSample:
    label = "positive" if strategy == "split" else "negative"
    return TrackletPairSample(anchor.segment, second, label, strategy, second.first_frame - anchor.segment.last_frame)


def gen_positive(track: Tracklet, length: int, gap: int, rng: np.random.Generator) -> TrackletPairSample:
    """Split ``track`` into two ``length``-detection segments with ``gap`` frames skipped between."""
    anchor = draw_anchor(track, length, gap, rng)
    j = anchor.track.detections.index(anchor.reference)
    return _sample(anchor, _segment(anchor.track, j, length), "split")


def _partners(tracks: Sequence[Tracklet], anchor: Anchor) -> List[Tuple[Tracklet, Detection]]:
    """Other identities' (segment, detection at target frame), by ascending identity."""
    out = []
    for t in sorted(tracks, key=lambda t: (_identity(t), t.tracklet_id)):
        if _identity(t) == anchor.identity:
            continue
        for k, d in enumerate(t.detections):
            if d.frame == anchor.target_frame:
                if k + anchor.length <= len(t):
                    out.append((_segment(t, k, anchor.length), d))
                break
    return out


def _pick(candidates: list, rng: np.random.Generator):
    return candidates[int(rng.integers(len(candidates)))]


def gen_negative_nearest(tracks: Sequence[Tracklet], anchor: Anchor, rng: np.random.Generator) -> TrackletPairSample:
    partners = _partners(tracks, anchor)
    if not partners:
        raise NoCandidate(f"no other identity can supply a segment at frame {anchor.target_frame}")
    rx, ry = anchor.reference.box.center
    dist = [math.hypot(d.box.center[0] - rx, d.box.center[1] - ry) for _, d in partners]
    best = min(dist)
    tied = [seg for (seg, _), x in zip(partners, dist) if math.isclose(x, best, rel_tol=1e-12, abs_tol=1e-12)]
    return _sample(anchor, _pick(tied, rng), "nearest")


def quadrant(x: float, y: float, image_size: Tuple[float, float]) -> Tuple[int, int]:
    """Quadrant of a point; midlines belong to the right/bottom halves."""
    w, h = image_size
    return int(x >= w / 2), int(y >= h / 2)


def _by_quadrant(tracks, anchor, rng, image_size, same: bool, strategy: str) -> TrackletPairSample:
    q = quadrant(*anchor.reference.box.center, image_size)
    cands = [seg for seg, d in _partners(tracks, anchor) if (quadrant(*d.box.center, image_size) == q) == same]
    if not cands:
        where = "the same" if same else "another"
        raise NoCandidate(f"no other identity in {where} quadrant at frame {anchor.target_frame}")
    return _sample(anchor, _pick(cands, rng), strategy)


def gen_negative_same_quadrant(tracks, anchor: Anchor, rng, image_size) -> TrackletPairSample:
    return _by_quadrant(tracks, anchor, rng, image_size, True, "same_quadrant")


def gen_negative_other_quadrant(tracks, anchor: Anchor, rng, image_size) -> TrackletPairSample:
    return _by_quadrant(tracks, anchor, rng, image_size, False, "other_quadrant")


def _negative(strategy, tracks, anchor, rng, image_size):
    if strategy == "nearest":
        return gen_negative_nearest(tracks, anchor, rng)
    if strategy == "same_quadrant":
        return gen_negative_same_quadrant(tracks, anchor, rng, image_size)
    return gen_negative_other_quadrant(tracks, anchor, rng, image_size)


def gen_dataset(tracks: Sequence[Tracklet], config: GenConfig, image_size: Tuple[float, float]) -> List[TrackletPairSample]:
    """Seeded corpus of ``config.n_samples`` pairs.

    Each sample is positive with probability ``positive_fraction``; a negative
    picks its strategy by ``mix``. A draw that finds no candidate is redrawn
    with the same strategy, so the mix is preserved; after ``max_attempts``
    failed draws for one sample the run raises :class:`Exhausted`.
    """
    rng = np.random.default_rng(config.rng_seed)
    tracks = [t for t in tracks if len(t) >= 2]
    for t in tracks:
        _identity(t)
    out: List[TrackletPairSample] = []
    lo, hi = config.len_range
    flo, fhi = config.gap_factor_range
    for _ in range(config.n_samples):
        positive = rng.random() < config.positive_fraction
        strategy = "split" if positive else NEGATIVE_STRATEGIES[int(rng.choice(3, p=config.mix))]
        for _attempt in range(config.max_attempts):
            if not tracks:
                break
            length = int(rng.integers(lo, hi + 1))
            skipped = int(rng.integers(math.ceil(flo * length), math.floor(fhi * length) + 1))
            track = tracks[int(rng.integers(len(tracks)))]
            try:
                anchor = draw_anchor(track, length, skipped, rng)
                if positive:
                    j = track.detections.index(anchor.reference)
                    sample = _sample(anchor, _segment(track, j, length), "split")
                else:
                    sample = _negative(strategy, tracks, anchor, rng, image_size)
            except (TrackTooShort, NoCandidate):
                continue
            out.append(sample)
            break
        else:
            raise Exhausted(f"no {strategy} sample found in {config.max_attempts} draws")
        if not tracks:
            raise Exhausted("no track has two or more detections")
    return out


def mix_report(samples: Sequence[TrackletPairSample]) -> Dict[str, float]:
    """Positive fraction and each negative strategy's share of the negatives."""
    counts = Counter(s.strategy for s in samples)
    n_neg = sum(counts[k] for k in NEGATIVE_STRATEGIES)
    report = {"n": len(samples), "positive": counts["split"] / len(samples) if samples else 0.0}
    for k in NEGATIVE_STRATEGIES:
        report[k] = counts[k] / n_neg if n_neg else 0.0
    return report


def _dets_json(t: Tracklet) -> list:
    return [{"frame": d.frame, "box": [d.box.x, d.box.y, d.box.w, d.box.h], "gt_id": d.gt_id} for d in t.detections]


def format_samples(samples: Sequence[TrackletPairSample]) -> str:
    lines = []
    for s in samples:
        row = {"label": s.label, "strategy": s.strategy, "gap": s.gap,
               "first": _dets_json(s.first), "second": _dets_json(s.second)}
        lines.append(json.dumps(row, sort_keys=True))
    return "".join(line + "\n" for line in lines)


def write_samples(samples: Sequence[TrackletPairSample], path) -> None:
    Path(path).write_text(format_samples(samples))
