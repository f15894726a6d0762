import math
import os
from pathlib import Path

import pytest

import bodyctl

ROOT = Path(os.environ.get("BODYCTL_SOURCE_DIR", Path(__file__).resolve().parents[2]))
CONFIG = ROOT / "configs" / "example.json"
SESSION = ROOT / "data" / "sessions" / "synthetic_10s.jsonl"


def test_keypoints():
    assert len(bodyctl.KEYPOINTS) == 17
    assert bodyctl.KEYPOINTS[10] == "right_wrist"


def test_wire_round_trip():
    rec = '{"t":33.5,"kp":{"right_wrist":[0.58,0.7,0.91]}}'
    frame = bodyctl.parse_frame(rec)
    assert frame["t"] == 33.5
    assert frame["kp"]["right_wrist"] == (0.58, 0.7, 0.91)
    assert bodyctl.serialize_frame(frame) == rec
    with pytest.raises(bodyctl.ParseError):
        bodyctl.parse_frame('{"t":0,"kp":{"right_hand":[0.5,0.5,1]}}')


def test_mappings():
    assert bodyctl.map_exp_db(0.5) == pytest.approx(0.0316228, rel=1e-6)
    assert bodyctl.map_exp_db(0.01) == 0.0
    assert bodyctl.map_exp_norm(0.5) == pytest.approx((math.e**2 - 1) / (math.e**4 - 1))
    assert bodyctl.map_pitch(0.5) == pytest.approx(440.0)
    assert bodyctl.normalize_speed(3.0) == 0.5
    assert bodyctl.calibrate(list(range(1, 101))) == 95.0
    with pytest.raises(bodyctl.Error):
        bodyctl.calibrate([1.0] * 10)


def test_jnd():
    lin = bodyctl.jnd_analyze("linear")
    assert not any(lin["perceptible"])
    assert all(abs(s - 20 * math.log10(1.1)) < 1e-9 for s in lin["step_db"])
    db = bodyctl.jnd_analyze("exp_db", {"db_floor": -60.0})
    onset = min(s for s, p in zip(db["s"], db["perceptible"]) if p)
    assert abs(onset - 1 / 6) <= 1 / 200
    with pytest.raises(bodyctl.ConfigError):
        bodyctl.jnd_analyze("cubic")


def test_encode_osc():
    assert bodyctl.encode_osc("/amp", 0.5) == bytes.fromhex("2F616D70000000002C6600003F000000")
    assert bodyctl.encode_osc("/a", 1.0) == bytes.fromhex("2F6100002C6600003F800000")
    with pytest.raises(bodyctl.Error):
        bodyctl.encode_osc("amp", 0.5)


def test_normalize_frame():
    rec = (
        '{"t":0,"kp":{"left_shoulder":[0.4,0.4,0.9],"right_shoulder":[0.6,0.4,0.9],'
        '"left_hip":[0.42,0.7,0.9],"right_hip":[0.58,0.7,0.9],"right_wrist":[0.6,0.4,0.9]}}'
    )
    pos = bodyctl.normalize_frame(rec)
    u, v = pos["right_wrist"]
    assert u == pytest.approx(1.5 / 3.5)
    assert v == pytest.approx(0.5)
    cam = bodyctl.normalize_frame(rec, strategy="camera_center")
    assert cam["right_wrist"] == pytest.approx((0.6, 0.6))


def test_replay_is_deterministic(tmp_path):
    assert bodyctl.validate_config(str(CONFIG)) == 4
    a, b = tmp_path / "a.cap", tmp_path / "b.cap"
    stats = bodyctl.replay(str(CONFIG), str(SESSION), f"capture:{a}")
    bodyctl.replay(str(CONFIG), str(SESSION), f"capture:{b}")
    assert stats["frames"] == 300
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_bytes()) > 0
