"""Desk-scale CLEAR MOT metrics and pairwise association scores.

This is a compact re-implementation (per-frame optimal IoU assignment with
match persistence), labeled "CLEAR-desk"; it is not guaranteed to agree
with the official benchmark toolkit in every corner case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import BoundingBox, Tracklet, iou

_INFEASIBLE = 1e6


@dataclass(frozen=True)
class ClearReport:
    mota: float
    motp: float
    fp: int
    fn: int
    id_switches: int
    fragmentations: int
    mostly_tracked: float
    mostly_lost: float
    total_gt: int
    matches: int

    def summary(self) -> str:
        return (
            "CLEAR-desk "
            f"MOTA={self.mota:.4f} MOTP={self.motp:.4f} FP={self.fp} FN={self.fn} "
            f"IDSW={self.id_switches} Frag={self.fragmentations} "
            f"MT={self.mostly_tracked:.4f} ML={self.mostly_lost:.4f} GT={self.total_gt}"
        )


def _by_frame(tracks: Sequence[Tracklet]) -> Dict[int, Dict[int, BoundingBox]]:
    out: Dict[int, Dict[int, BoundingBox]] = {}
    for t in tracks:
        for d in t.detections:
            out.setdefault(d.frame, {})[t.tracklet_id] = d.box
    return out


def clear_metrics(pred: Sequence[Tracklet], gt: Sequence[Tracklet], iou_threshold: float = 0.5) -> ClearReport:
    """CLEAR MOT scores; track identity is ``tracklet_id`` on both sides."""
    pred_frames, gt_frames = _by_frame(pred), _by_frame(gt)
    prev: Dict[int, int] = {}          # gt -> pred matched in the previous frame
    last_pred: Dict[int, int] = {}     # gt -> most recent pred it was matched to
    was_tracked: Dict[int, bool] = {}  # gt -> matched in its previous present frame
    ever_tracked: Dict[int, bool] = {}
    matched_frames: Dict[int, int] = {g.tracklet_id: 0 for g in gt}
    fp = fn = idsw = frag = n_matches = 0
    overlap_sum = 0.0

    for frame in sorted(set(pred_frames) | set(gt_frames)):
        gboxes = gt_frames.get(frame, {})
        pboxes = pred_frames.get(frame, {})
        match: Dict[int, int] = {}
        for g, p in prev.items():
            if g in gboxes and p in pboxes and iou(gboxes[g], pboxes[p]) >= iou_threshold:
                match[g] = p
        free_g = [g for g in sorted(gboxes) if g not in match]
        used = set(match.values())
        free_p = [p for p in sorted(pboxes) if p not in used]
        if free_g and free_p:
            cost = np.full((len(free_g), len(free_p)), _INFEASIBLE)
            for i, g in enumerate(free_g):
                for j, p in enumerate(free_p):
                    o = iou(gboxes[g], pboxes[p])
                    if o >= iou_threshold:
                        cost[i, j] = 1.0 - o
            for i, j in zip(*linear_sum_assignment(cost)):
                if cost[i, j] < _INFEASIBLE:
                    match[free_g[i]] = free_p[j]

        for g in gboxes:
            if g in match:
                p = match[g]
                if g in last_pred and last_pred[g] != p:
                    idsw += 1
                if ever_tracked.get(g) and not was_tracked.get(g, False):
                    frag += 1
                last_pred[g] = p
                was_tracked[g] = ever_tracked[g] = True
                matched_frames[g] += 1
                overlap_sum += iou(gboxes[g], pboxes[p])
            else:
                was_tracked[g] = False
        n_matches += len(match)
        fn += len(gboxes) - len(match)
        fp += len(pboxes) - len(match)
        prev = match

    total_gt = sum(len(t) for t in gt)
    mota = 1.0 - (fp + fn + idsw) / total_gt if total_gt else math.nan
    motp = overlap_sum / n_matches if n_matches else 0.0
    coverage = [matched_frames[g.tracklet_id] / len(g) for g in gt]
    n_gt = len(gt)
    return ClearReport(
        mota=mota,
        motp=motp,
        fp=fp,
        fn=fn,
        id_switches=idsw,
        fragmentations=frag,
        mostly_tracked=sum(c >= 0.8 for c in coverage) / n_gt if n_gt else 0.0,
        mostly_lost=sum(c <= 0.2 for c in coverage) / n_gt if n_gt else 0.0,
        total_gt=total_gt,
        matches=n_matches,
    )


def pairwise_f1(pred: Sequence[Tracklet]) -> Tuple[float, float, float]:
    """Precision, recall and F1 over detection pairs placed in the same track.

    Ground truth comes from each detection's ``gt_id``.
    """
    track_of: Dict[int, int] = {}
    ident_of: Dict[int, int] = {}
    for t in pred:
        for d in t.detections:
            track_of[d.det_id] = t.tracklet_id
            ident_of[d.det_id] = d.gt_id
    tp = fp = fn = 0
    for a, b in combinations(sorted(track_of), 2):
        same_pred = track_of[a] == track_of[b]
        same_gt = ident_of[a] == ident_of[b]
        tp += same_pred and same_gt
        fp += same_pred and not same_gt
        fn += same_gt and not same_pred
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1
