"""MOT Challenge file formats: detection/ground-truth CSV, seqinfo.ini, track output."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import BoundingBox, Detection, SequenceMeta, Tracklet, iou, tracklet_new


class Malformed(ValueError):
    def __init__(self, path, lineno: int, reason: str):
        super().__init__(f"{path}:{lineno}: {reason}")
        self.lineno = lineno


@dataclass(frozen=True)
class SeqInfo:
    name: str
    frame_rate: float
    image_width: int
    image_height: int
    seq_length: int
    moving_camera: bool = False

    def __post_init__(self):
        if min(self.frame_rate, self.image_width, self.image_height) <= 0:
            raise ValueError("frame rate and image size must be positive")

    def meta(self, n_max: int = 20) -> SequenceMeta:
        return SequenceMeta(self.image_width, self.image_height, self.frame_rate, self.moving_camera, n_max)


def read_seqinfo(path, moving_camera: bool = False) -> SeqInfo:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(path):
        raise FileNotFoundError(path)
    sec = parser["Sequence"]
    return SeqInfo(
        name=sec.get("name", Path(path).parent.name),
        frame_rate=float(sec["frameRate"]),
        image_width=int(sec["imWidth"]),
        image_height=int(sec["imHeight"]),
        seq_length=int(sec.get("seqLength", "0")),
        moving_camera=moving_camera,
    )


def write_seqinfo(info: SeqInfo, path) -> None:
    Path(path).write_text(
        "[Sequence]\n"
        f"name={info.name}\n"
        f"frameRate={_num(info.frame_rate)}\n"
        f"seqLength={info.seq_length}\n"
        f"imWidth={info.image_width}\n"
        f"imHeight={info.image_height}\n"
    )


def parse_mot_csv(path, kind: str = "detections") -> List[Detection]:
    """Read MOT rows ``frame,id,left,top,width,height,conf[,x,y,z]``.

    Detection ids are assigned densely in file order. For ground truth the
    id column becomes ``gt_id`` and rows flagged with conf 0 are dropped.
    """
    if kind not in ("detections", "ground_truth"):
        raise ValueError(f"kind must be 'detections' or 'ground_truth', got {kind!r}")
    out: List[Detection] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if not 7 <= len(fields) <= 10:
                raise Malformed(path, lineno, f"expected 7-10 fields, got {len(fields)}")
            try:
                frame = int(float(fields[0]))
                ident = int(float(fields[1]))
                x, y, w, h, conf = (float(v) for v in fields[2:7])
                box = BoundingBox(x, y, w, h)
            except ValueError as exc:
                raise Malformed(path, lineno, str(exc)) from exc
            if frame < 1:
                raise Malformed(path, lineno, f"frame {frame} < 1")
            if kind == "ground_truth":
                if conf == 0:
                    continue
                out.append(Detection(len(out), frame, box, conf, gt_id=ident))
            else:
                out.append(Detection(len(out), frame, box, conf))
    return out


def _num(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def format_tracks(tracks: Sequence[Tracklet]) -> str:
    rows = []
    for t in tracks:
        for d in t.detections:
            b = d.box
            rows.append((d.frame, t.tracklet_id, f"{d.frame},{t.tracklet_id},{_num(b.x)},{_num(b.y)},{_num(b.w)},{_num(b.h)},1,-1,-1,-1"))
    rows.sort(key=lambda r: (r[0], r[1]))
    return "".join(r[2] + "\n" for r in rows)


def write_tracks(tracks: Sequence[Tracklet], path) -> None:
    Path(path).write_text(format_tracks(tracks))


def format_detections(detections: Sequence[Detection], with_ids: bool = False) -> str:
    """MOT rows for raw detections; ``with_ids`` writes gt ids (ground-truth style)."""
    rows = []
    for d in sorted(detections, key=lambda d: (d.frame, d.gt_id if with_ids else 0, d.det_id)):
        ident = d.gt_id if with_ids else -1
        b = d.box
        rows.append(f"{d.frame},{ident},{_num(b.x)},{_num(b.y)},{_num(b.w)},{_num(b.h)},{_num(d.confidence)},-1,-1,-1\n")
    return "".join(rows)


def tracks_from_detections(detections: Sequence[Detection]) -> List[Tracklet]:
    """Group labeled detections by ``gt_id`` into tracklets whose id is that gt_id."""
    groups: Dict[int, List[Detection]] = {}
    for d in detections:
        if d.gt_id is None:
            raise ValueError(f"detection {d.det_id} has no identity")
        groups.setdefault(d.gt_id, []).append(d)
    return [tracklet_new(groups[k], k) for k in sorted(groups)]


def attach_ground_truth(
    detections: Sequence[Detection], gt: Sequence[Detection], iou_threshold: float = 0.5
) -> List[Detection]:
    """Label detections with the gt identity they overlap best, frame by frame.

    Detections left unmatched get a fresh negative identity of their own, so
    an oracle treats them as distinct people.
    """
    gt_by_frame: Dict[int, List[Detection]] = {}
    for g in gt:
        gt_by_frame.setdefault(g.frame, []).append(g)
    det_by_frame: Dict[int, List[Detection]] = {}
    for d in detections:
        det_by_frame.setdefault(d.frame, []).append(d)

    labeled: Dict[int, Detection] = {}
    for frame, dets in det_by_frame.items():
        gts = gt_by_frame.get(frame, [])
        assigned: Dict[int, int] = {}
        if gts:
            overlap = np.array([[iou(d.box, g.box) for g in gts] for d in dets])
            rows, cols = linear_sum_assignment(-overlap)
            for r, c in zip(rows, cols):
                if overlap[r, c] >= iou_threshold:
                    assigned[r] = gts[c].gt_id
        for r, d in enumerate(dets):
            labeled[d.det_id] = replace(d, gt_id=assigned.get(r, -(d.det_id + 1)))
    return [labeled[d.det_id] for d in detections]
