"""Command-line entry point: ``trackletcut <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import affinity, edgegen, hierarchy, metrics, motio, multicut, samplegen, synth


def _cmd_track(args) -> int:
    info = motio.read_seqinfo(args.seqinfo, moving_camera=args.moving)
    meta = info.meta(args.n_max)
    dets = motio.parse_mot_csv(args.det, "detections")
    if args.scorer == "oracle":
        if not args.gt:
            raise SystemExit("--scorer oracle needs --gt for identity labels")
        dets = motio.attach_ground_truth(dets, motio.parse_mot_csv(args.gt, "ground_truth"))
        scorer = affinity.OracleScorer(affinity.OracleScorerConfig(
            flip_prob=args.flip_prob, rng_seed=args.seed, impure=args.impure))
    else:
        if args.descriptors:
            dets = affinity.attach_descriptors(dets, affinity.read_descriptors(args.descriptors))
        scorer = affinity.BaselineScorer(affinity.BaselineScorerConfig())
    stats = edgegen.read_stats(args.stats) if args.stats else None
    tracks, history = hierarchy.run(dets, scorer, stats, hierarchy.Schedule(), meta,
                                    inflation=args.inflation, workers=args.workers)
    motio.write_tracks(tracks, args.out)
    if args.history:
        hierarchy.write_history(history, args.history)
    print(f"{len(dets)} detections -> {len(tracks)} tracks in {len(history)} iterations")
    return 0


def _cmd_solve(args) -> int:
    g = multicut.read_instance(args.graph)
    d, report = multicut.cklj_solve(g)
    text = multicut.format_solution(d, report.objective)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_eval(args) -> int:
    pred = motio.tracks_from_detections(motio.parse_mot_csv(args.pred, "ground_truth"))
    gt = motio.tracks_from_detections(motio.parse_mot_csv(args.gt, "ground_truth"))
    print(metrics.clear_metrics(pred, gt, args.iou).summary())
    return 0


def _cmd_stats(args) -> int:
    info = motio.read_seqinfo(args.seqinfo, moving_camera=args.moving)
    gt = motio.tracks_from_detections(motio.parse_mot_csv(args.gt, "ground_truth"))
    stats = edgegen.compute_motion_stats(gt, info.meta())
    text = edgegen.format_stats(stats)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_samples(args) -> int:
    gt = motio.tracks_from_detections(motio.parse_mot_csv(args.gt, "ground_truth"))
    if args.seqinfo:
        info = motio.read_seqinfo(args.seqinfo)
        size = (info.image_width, info.image_height)
    else:
        size = (args.width, args.height)
    config = samplegen.GenConfig(n_samples=args.n, rng_seed=args.seed)
    samples = samplegen.gen_dataset(gt, config, size)
    samplegen.write_samples(samples, args.out)
    report = samplegen.mix_report(samples)
    print(" ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in report.items()))
    return 0


def _cmd_synth(args) -> int:
    config = synth.read_synth_config(args.config)
    dets, gt = synth.synth_generate(config)
    Path(args.out_det).write_text(motio.format_detections(dets))
    Path(args.out_gt).write_text(motio.format_detections([d for t in gt for d in t.detections], with_ids=True))
    if args.out_seqinfo:
        motio.write_seqinfo(motio.SeqInfo("synth", config.fps, config.image_width,
                                          config.image_height, config.n_frames), args.out_seqinfo)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trackletcut", description="Tracklet association by constrained multicut.")
    p.add_argument("-v", "--verbose", action="store_true", help="log per-iteration progress")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("track", help="cluster MOT detections into tracks")
    t.add_argument("--det", required=True)
    t.add_argument("--seqinfo", required=True)
    t.add_argument("--scorer", choices=("oracle", "baseline"), default="baseline")
    t.add_argument("--stats", help="motion statistics file; omit for ungated edges")
    t.add_argument("--out", required=True)
    t.add_argument("--history", help="per-iteration CSV")
    t.add_argument("--gt", help="ground truth (oracle scorer only)")
    t.add_argument("--moving", action="store_true", help="sequence has a moving camera")
    t.add_argument("--flip-prob", type=float, default=0.0)
    t.add_argument("--impure", choices=("raise", "majority"), default="raise")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--descriptors", help="appearance descriptor file (baseline scorer)")
    t.add_argument("--inflation", type=float, default=edgegen.DEFAULT_INFLATION)
    t.add_argument("--n-max", type=int, default=20)
    t.add_argument("--workers", type=int, default=1)
    t.set_defaults(func=_cmd_track)

    s = sub.add_parser("solve", help="solve a standalone multicut instance")
    s.add_argument("--graph", required=True)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_solve)

    e = sub.add_parser("eval", help="CLEAR-desk metrics of predicted tracks")
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--iou", type=float, default=0.5)
    e.set_defaults(func=_cmd_eval)

    m = sub.add_parser("stats", help="motion statistics from ground truth")
    m.add_argument("--gt", required=True)
    m.add_argument("--seqinfo", required=True)
    m.add_argument("--moving", action="store_true")
    m.add_argument("--out")
    m.set_defaults(func=_cmd_stats)

    g = sub.add_parser("samples", help="tracklet-pair corpus from ground truth")
    g.add_argument("--gt", required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--seqinfo", help="image size source; else --width/--height")
    g.add_argument("--width", type=int, default=1920)
    g.add_argument("--height", type=int, default=1080)
    g.set_defaults(func=_cmd_samples)

    y = sub.add_parser("synth", help="synthetic detections and ground truth")
    y.add_argument("--config", required=True)
    y.add_argument("--out-det", required=True)
    y.add_argument("--out-gt", required=True)
    y.add_argument("--out-seqinfo")
    y.set_defaults(func=_cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, LookupError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
