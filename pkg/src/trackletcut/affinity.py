"""Tracklet affinity scorers and the affinity <-> edge-cost mapping.

An affinity is the probability in [0, 1] that two tracklets show the same
person. The solver works on signed costs: similar pairs get positive costs
(keeping them together is cheap), dissimilar pairs negative ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Optional, Protocol, Sequence, Tuple

import numpy as np

from .core import BoundingBox, Detection, SequenceMeta, Tracklet, iou, precedes

DEFAULT_EPS = 1e-6


class MissingGroundTruth(ValueError):
    pass


class ImpureTracklet(ValueError):
    pass


def cost_from_affinity(a: float, eps: float = DEFAULT_EPS) -> float:
    """Log-odds of the clamped affinity."""
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 0.5), got {eps}")
    x = min(max(float(a), eps), 1.0 - eps)
    # snap x so that both x and 1 - x are exact floats; then f(x) == -f(1 - x) bit for bit
    upper = 1.0 - x
    lower = 1.0 - upper
    return math.log(lower) - math.log(upper)


def affinity_from_cost(c: float) -> float:
    if c >= 0:
        return 1.0 / (1.0 + math.exp(-c))
    e = math.exp(c)
    return e / (1.0 + e)


class Scorer(Protocol):
    """Anything that scores an ordered, non-overlapping tracklet pair.

    Implementations must be safe to call concurrently.
    """

    def score(self, t_i: Tracklet, t_j: Tracklet, meta: SequenceMeta) -> float: ...


@dataclass(frozen=True)
class OracleScorerConfig:
    delta: float = 0.01
    flip_prob: float = 0.0
    rng_seed: int = 0
    # "raise" rejects tracklets mixing identities; "majority" votes on gt_id
    impure: str = "raise"

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 0.5)")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ValueError("flip_prob must lie in [0, 1]")
        if self.impure not in ("raise", "majority"):
            raise ValueError(f"unknown impurity policy {self.impure!r}")


def _identity(t: Tracklet, policy: str) -> int:
    ids = [d.gt_id for d in t.detections]
    if any(i is None for i in ids):
        raise MissingGroundTruth(f"tracklet {t.tracklet_id} has detections without gt_id")
    distinct = set(ids)
    if len(distinct) == 1:
        return ids[0]
    if policy == "raise":
        raise ImpureTracklet(f"tracklet {t.tracklet_id} mixes identities {sorted(distinct)}")
    counts: Dict[int, int] = {}
    for i in ids:
        counts[i] = counts.get(i, 0) + 1
    return min(counts, key=lambda k: (-counts[k], k))


def _flip_draw(seed: int, a: int, b: int) -> float:
    lo, hi = (a, b) if a <= b else (b, a)
    # entropy must be non-negative; fold signed ids into that range
    ss = np.random.SeedSequence([seed & 0xFFFFFFFF, lo & 0xFFFFFFFFFFFF, hi & 0xFFFFFFFFFFFF])
    return float(np.random.default_rng(ss).random())


def oracle_score(config: OracleScorerConfig, t_i: Tracklet, t_j: Tracklet) -> float:
    same = _identity(t_i, config.impure) == _identity(t_j, config.impure)
    if config.flip_prob > 0 and _flip_draw(config.rng_seed, t_i.tracklet_id, t_j.tracklet_id) < config.flip_prob:
        same = not same
    return 1.0 - config.delta if same else config.delta


class OracleScorer:
    """Ground-truth scorer used to verify the clustering machinery."""

    def __init__(self, config: Optional[OracleScorerConfig] = None):
        self.config = config or OracleScorerConfig()

    def score(self, t_i: Tracklet, t_j: Tracklet, meta: SequenceMeta) -> float:
        return oracle_score(self.config, t_i, t_j)


@dataclass(frozen=True)
class BaselineScorerConfig:
    gap_decay: float = 0.5
    descriptor_weight: float = 0.5
    velocity_window: int = 5

    def __post_init__(self):
        if self.gap_decay <= 0:
            raise ValueError("gap_decay must be positive")
        if not 0.0 <= self.descriptor_weight <= 1.0:
            raise ValueError("descriptor_weight must lie in [0, 1]")
        if self.velocity_window < 1:
            raise ValueError("velocity_window must be >= 1")


def predict_box(t_i: Tracklet, frame: int, window: int) -> BoundingBox:
    """Constant-velocity extrapolation of the box center to ``frame``.

    The velocity is a least-squares fit over the last ``window`` detections;
    the box keeps the size of the last detection.
    """
    tail = t_i.detections[-window:]
    last = tail[-1].box
    cx, cy = last.center
    if len(tail) >= 2:
        f = np.array([d.frame for d in tail], dtype=float)
        centers = np.array([d.box.center for d in tail], dtype=float)
        vx = np.polyfit(f, centers[:, 0], 1)[0]
        vy = np.polyfit(f, centers[:, 1], 1)[0]
        dt = frame - tail[-1].frame
        cx, cy = cx + vx * dt, cy + vy * dt
    return BoundingBox.from_center(cx, cy, last.w, last.h)


def _mean_descriptor(t: Tracklet) -> Optional[np.ndarray]:
    vecs = [d.descriptor for d in t.detections if d.descriptor is not None]
    if not vecs:
        return None
    return np.mean(np.asarray(vecs, dtype=float), axis=0)


def baseline_score(config: BaselineScorerConfig, t_i: Tracklet, t_j: Tracklet, meta: SequenceMeta) -> float:
    if not precedes(t_i, t_j):
        raise ValueError(f"tracklet {t_i.tracklet_id} does not precede {t_j.tracklet_id}")
    singletons = len(t_i) == 1 and len(t_j) == 1
    window = 1 if singletons else config.velocity_window
    predicted = predict_box(t_i, t_j.first_frame, window)
    dt = (t_j.first_frame - t_i.last_frame) / meta.fps
    motion = iou(predicted, t_j.first.box) * math.exp(-config.gap_decay * dt)

    lam = config.descriptor_weight
    d_i, d_j = _mean_descriptor(t_i), _mean_descriptor(t_j)
    if singletons or d_i is None or d_j is None or lam == 0.0:
        return min(max(motion, 0.0), 1.0)
    norm = float(np.linalg.norm(d_i) * np.linalg.norm(d_j))
    cos = float(d_i @ d_j) / norm if norm > 0 else 0.0
    appearance = min(max(0.5 * (cos + 1.0), 0.0), 1.0)
    value = motion ** (1.0 - lam) * appearance ** lam
    return min(max(value, 0.0), 1.0)


class BaselineScorer:
    """Hand-crafted motion (and optional appearance) affinity."""

    def __init__(self, config: Optional[BaselineScorerConfig] = None):
        self.config = config or BaselineScorerConfig()

    def score(self, t_i: Tracklet, t_j: Tracklet, meta: SequenceMeta) -> float:
        return baseline_score(self.config, t_i, t_j, meta)


def read_descriptors(path) -> Dict[int, Tuple[float, ...]]:
    """Read a ``#dim D`` headed CSV of ``det_id,v1..vD`` rows."""
    out: Dict[int, Tuple[float, ...]] = {}
    dim = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "dim":
                    dim = int(parts[1])
                continue
            if dim is None:
                raise ValueError(f"{path}:{lineno}: descriptor rows before '#dim' header")
            fields = line.split(",")
            if len(fields) != dim + 1:
                raise ValueError(f"{path}:{lineno}: expected {dim + 1} fields, got {len(fields)}")
            out[int(fields[0])] = tuple(float(v) for v in fields[1:])
    return out


def write_descriptors(descriptors: Dict[int, Sequence[float]], path) -> None:
    dims = {len(v) for v in descriptors.values()}
    if len(dims) > 1:
        raise ValueError(f"descriptors must share one dimension, got {sorted(dims)}")
    dim = dims.pop() if dims else 0
    lines = [f"#dim {dim}"]
    for det_id in sorted(descriptors):
        lines.append(",".join([str(det_id)] + [repr(float(v)) for v in descriptors[det_id]]))
    Path(path).write_text("\n".join(lines) + "\n")


def attach_descriptors(detections: Sequence[Detection], descriptors: Dict[int, Tuple[float, ...]]) -> list[Detection]:
    return [replace(d, descriptor=descriptors.get(d.det_id, d.descriptor)) for d in detections]
