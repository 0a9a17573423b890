import pytest
from helpers import det

from trackletcut.core import BoundingBox, Detection, iou, tracklet_new
from trackletcut.metrics import clear_metrics, pairwise_f1
from trackletcut.motio import (
    Malformed,
    SeqInfo,
    attach_ground_truth,
    format_tracks,
    parse_mot_csv,
    read_seqinfo,
    tracks_from_detections,
    write_seqinfo,
    write_tracks,
)
from trackletcut.synth import SynthConfig, format_synth_config, read_synth_config, synth_generate


def write(tmp_path, text, name="f.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_detection_row(tmp_path):
    (d,) = parse_mot_csv(write(tmp_path, "1,-1,10,20,30,40,0.9,-1,-1,-1\n"))
    assert (d.frame, d.box, d.confidence, d.gt_id, d.det_id) == (1, BoundingBox(10, 20, 30, 40), 0.9, None, 0)


def test_parse_ground_truth(tmp_path):
    p = write(tmp_path, "1,7,10,20,30,40,1,-1,-1,-1\n2,7,10,20,30,40,0,-1,-1,-1\n")
    (d,) = parse_mot_csv(p, "ground_truth")
    assert d.gt_id == 7


def test_parse_malformed(tmp_path):
    with pytest.raises(Malformed) as err:
        parse_mot_csv(write(tmp_path, "1,-1,10,20,30,40,1\n1,-1,10,20,30,40\n"))
    assert err.value.lineno == 2
    with pytest.raises(Malformed):
        parse_mot_csv(write(tmp_path, "1,-1,10,20,0,40,1\n"))


def test_write_tracks(tmp_path):
    t = tracklet_new([det(1, 1, 2, 3, 4), det(2, 1.5, 2, 3, 4)], 1)
    p = tmp_path / "out.txt"
    write_tracks([t], p)
    assert p.read_text() == "1,1,1,2,3,4,1,-1,-1,-1\n2,1,1.5,2,3,4,1,-1,-1,-1\n"
    write_tracks([], p)
    assert p.read_text() == ""


def test_tracks_sorted_by_frame_then_id():
    a = tracklet_new([det(2), det(1)], 2)
    b = tracklet_new([det(1)], 1)
    rows = [tuple(map(int, r.split(",")[:2])) for r in format_tracks([a, b]).splitlines()]
    assert rows == [(1, 1), (1, 2), (2, 2)]


def test_track_round_trip(tmp_path):
    tracks = [tracklet_new([det(f, 0.1 * f + 3, 7.25, 11, 30) for f in (1, 2, 5)], 1),
              tracklet_new([det(f, 400 - f, 9, 12.5, 31) for f in (2, 3)], 2)]
    p = tmp_path / "t.txt"
    write_tracks(tracks, p)
    back = tracks_from_detections(parse_mot_csv(p, "ground_truth"))
    assert [t.tracklet_id for t in back] == [1, 2]
    for a, b in zip(tracks, back):
        assert [(d.frame, d.box) for d in a.detections] == [(d.frame, d.box) for d in b.detections]


def test_seqinfo_round_trip(tmp_path):
    info = SeqInfo("seq", 25.0, 640, 480, 100)
    p = tmp_path / "seqinfo.ini"
    write_seqinfo(info, p)
    assert read_seqinfo(p) == info
    assert read_seqinfo(p, moving_camera=True).meta().moving_camera


def test_attach_ground_truth():
    gt = [Detection(0, 1, BoundingBox(0, 0, 10, 10), gt_id=5)]
    dets = [Detection(0, 1, BoundingBox(1, 0, 10, 10)), Detection(1, 1, BoundingBox(300, 0, 10, 10))]
    out = attach_ground_truth(dets, gt)
    assert out[0].gt_id == 5 and out[1].gt_id == -2


def test_iou_examples():
    a = BoundingBox(0, 0, 2, 2)
    assert iou(a, a) == 1
    assert iou(a, BoundingBox(5, 5, 2, 2)) == 0
    assert iou(a, BoundingBox(1, 1, 2, 2)) == pytest.approx(1 / 7)


def gt_tracks():
    return [tracklet_new([det(f, 10 * f, 0, 20, 40) for f in range(1, 5)], 1),
            tracklet_new([det(f, 10 * f, 300, 20, 40) for f in range(1, 5)], 2)]


def test_clear_identity():
    gt = gt_tracks()
    r = clear_metrics(gt, gt)
    assert (r.mota, r.motp, r.fp, r.fn, r.id_switches, r.fragmentations) == (1.0, 1.0, 0, 0, 0, 0)
    assert r.mostly_tracked == 1.0 and r.mostly_lost == 0.0


def test_clear_empty_prediction():
    gt = gt_tracks()
    r = clear_metrics([], gt)
    assert r.fn == 8 and r.mota == 0.0 and r.mostly_lost == 1.0


def test_clear_split_track_switches_once():
    gt = [gt_tracks()[0]]
    d = gt[0].detections
    pred = [tracklet_new(d[:2], 7), tracklet_new(d[2:], 8)]
    r = clear_metrics(pred, gt)
    assert r.id_switches == 1 and r.mota == pytest.approx(0.75)


def test_clear_fragmentation():
    gt = [gt_tracks()[0]]
    d = gt[0].detections
    r = clear_metrics([tracklet_new([d[0], d[1], d[3]], 1)], gt)
    assert r.fragmentations == 1 and r.fn == 1 and r.id_switches == 0


def test_pairwise_f1():
    a = [det(f, gt=1) for f in (1, 2)]
    b = [det(f, gt=2) for f in (1, 2)]
    assert pairwise_f1([tracklet_new(a, 1), tracklet_new(b, 2)]) == (1.0, 1.0, 1.0)
    p, r, f = pairwise_f1([tracklet_new([a[0], b[1]], 1), tracklet_new([b[0], a[1]], 2)])
    assert p == 0 and r == 0 and f == 0


def test_synth_basic():
    dets, gt = synth_generate(SynthConfig(n_identities=1, n_frames=10))
    assert len(dets) == 10 and len(gt) == 1


def test_synth_occlusion_and_determinism():
    cfg = SynthConfig(n_identities=2, n_frames=10, occlusions=((1, 4, 6),), rng_seed=3)
    dets, gt = synth_generate(cfg)
    frames = sorted(d.frame for d in dets if d.gt_id == 1)
    assert frames == [1, 2, 3, 7, 8, 9, 10]
    assert gt[0].frames == tuple(frames)
    assert synth_generate(cfg) == (dets, gt)


def test_synth_config_validation_and_io(tmp_path):
    with pytest.raises(ValueError):
        SynthConfig(n_frames=5, occlusions=((1, 4, 9),))
    cfg = SynthConfig(n_identities=3, occlusions=((1, 2, 3), (3, 5, 6)), rng_seed=4)
    p = write(tmp_path, format_synth_config(cfg), "synth.cfg")
    assert read_synth_config(p) == cfg
