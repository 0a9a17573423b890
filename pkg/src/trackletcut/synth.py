"""Seeded synthetic pedestrian sequences for end-to-end checks."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .core import BoundingBox, Detection, SequenceMeta, Tracklet, tracklet_new


@dataclass(frozen=True)
class SynthConfig:
    n_identities: int = 5
    n_frames: int = 60
    image_width: int = 1920
    image_height: int = 1080
    fps: float = 30.0
    min_box_width: float = 40.0
    max_box_width: float = 90.0
    aspect: float = 2.5
    max_speed: float = 6.0        # px per frame
    jitter: float = 0.5           # px, per-frame center noise
    box_noise: float = 1.0        # px, detection box noise
    # (gt_id, first_frame, last_frame) intervals with no detections
    occlusions: Tuple[Tuple[int, int, int], ...] = ()
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_identities < 0 or self.n_frames < 1:
            raise ValueError("need n_identities >= 0 and n_frames >= 1")
        occ = tuple((int(i), int(a), int(b)) for i, a, b in self.occlusions)
        for ident, a, b in occ:
            if not (1 <= a <= b <= self.n_frames):
                raise ValueError(f"occlusion [{a}, {b}] of identity {ident} outside [1, {self.n_frames}]")
            if not 1 <= ident <= self.n_identities:
                raise ValueError(f"occlusion refers to unknown identity {ident}")
        object.__setattr__(self, "occlusions", occ)

    @property
    def meta(self) -> SequenceMeta:
        return SequenceMeta(self.image_width, self.image_height, self.fps)


def synth_generate(config: SynthConfig) -> Tuple[List[Detection], List[Tracklet]]:
    """Generate detections and ground-truth tracks.

    Identities are numbered 1..n and move at constant velocity (reflected at
    the image border) with per-frame center jitter. Occluded frames are
    absent from both outputs; ground truth holds the clean boxes and
    detections add box noise. Detections keep their ``gt_id`` in memory so an oracle scorer can
    use it; the MOT writers drop it.
    """
    rng = np.random.default_rng(config.rng_seed)
    W, H = config.image_width, config.image_height
    occluded: Dict[int, List[Tuple[int, int]]] = {}
    for ident, a, b in config.occlusions:
        occluded.setdefault(ident, []).append((a, b))

    gt_boxes: Dict[int, List[Tuple[int, BoundingBox]]] = {}
    for ident in range(1, config.n_identities + 1):
        w = rng.uniform(config.min_box_width, config.max_box_width)
        h = w * config.aspect
        lo = np.array([w / 2, h / 2])
        hi = np.array([W - w / 2, H - h / 2])
        pos = rng.uniform(lo, hi)
        vel = rng.uniform(-config.max_speed, config.max_speed, size=2)
        boxes = []
        for frame in range(1, config.n_frames + 1):
            c = pos + rng.normal(0.0, config.jitter, size=2) if config.jitter > 0 else pos
            boxes.append((frame, BoundingBox.from_center(float(c[0]), float(c[1]), float(w), float(h))))
            pos = pos + vel
            for k in range(2):
                if pos[k] < lo[k] or pos[k] > hi[k]:
                    vel[k] = -vel[k]
                    pos[k] = np.clip(pos[k], lo[k], hi[k])
        gt_boxes[ident] = boxes

    detections: List[Detection] = []
    gt_dets: Dict[int, List[Detection]] = {i: [] for i in gt_boxes}
    gt_counter = 0
    for frame in range(1, config.n_frames + 1):
        for ident in sorted(gt_boxes):
            if any(a <= frame <= b for a, b in occluded.get(ident, ())):
                continue
            box = gt_boxes[ident][frame - 1][1]
            gt_dets[ident].append(Detection(gt_counter, frame, box, 1.0, gt_id=ident))
            gt_counter += 1
            if config.box_noise > 0:
                n = rng.normal(0.0, config.box_noise, size=4)
                box = BoundingBox(box.x + n[0], box.y + n[1], max(box.w + n[2], 1.0), max(box.h + n[3], 1.0))
            detections.append(Detection(len(detections), frame, box, 1.0, gt_id=ident))
    tracks = [tracklet_new(gt_dets[i], i) for i in sorted(gt_dets) if gt_dets[i]]
    return detections, tracks


def _parse_occlusions(text: str) -> Tuple[Tuple[int, int, int], ...]:
    out = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        ident, span = item.split(":")
        a, b = span.split("-")
        out.append((int(ident), int(a), int(b)))
    return tuple(out)


def read_synth_config(path) -> SynthConfig:
    """Flat ``key = value`` file; ``occlusions = 1:10-15, 3:30-34``."""
    fields = {f.name: f for f in dataclasses.fields(SynthConfig)}
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, raw = (s.strip() for s in line.split("=", 1))
            if key not in fields:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key == "occlusions":
                values[key] = _parse_occlusions(raw)
            elif key in ("n_identities", "n_frames", "image_width", "image_height", "rng_seed"):
                values[key] = int(raw)
            else:
                values[key] = float(raw)
    return SynthConfig(**values)


def format_synth_config(config: SynthConfig) -> str:
    lines = []
    for f in dataclasses.fields(SynthConfig):
        v = getattr(config, f.name)
        if f.name == "occlusions":
            v = ", ".join(f"{i}:{a}-{b}" for i, a, b in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
