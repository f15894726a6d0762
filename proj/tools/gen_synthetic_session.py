#!/usr/bin/env python3
"""Writes a deterministic 10 s, 30 fps synthetic performer session as JSONL."""

import argparse
import json
import math

NAMES = [
    "nose", "left_eye", "right_eye", "left_ear", "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist", "left_hip", "right_hip",
    "left_knee", "right_knee", "left_ankle", "right_ankle",
]


def clamp(v):
    return min(1.0, max(0.0, v))


def frame(i, fps):
    t = i * 1000.0 / fps
    s = t / 1000.0
    sway = 0.02 * math.sin(0.5 * math.pi * s)
    scale = 1.0 + 0.15 * math.sin(0.2 * math.pi * s)  # walks toward and away from the camera
    cx = 0.5 + sway
    w = 0.10 * scale
    pts = {
        "nose": (cx, 0.22),
        "left_eye": (cx - 0.015, 0.21),
        "right_eye": (cx + 0.015, 0.21),
        "left_ear": (cx - 0.03, 0.22),
        "right_ear": (cx + 0.03, 0.22),
        "left_shoulder": (cx - w, 0.32),
        "right_shoulder": (cx + w, 0.32),
        "left_hip": (cx - 0.8 * w, 0.32 + 2.6 * w),
        "right_hip": (cx + 0.8 * w, 0.32 + 2.6 * w),
    }
    rx = cx + w + 0.25 * w * (1 + math.sin(1.3 * math.pi * s))
    ry = 0.32 + 1.2 * w * math.cos(0.9 * math.pi * s)
    lx = cx - w - 0.3 * w * (1 + math.sin(0.7 * math.pi * s + 1.0))
    ly = 0.32 - 1.0 * w * math.sin(1.1 * math.pi * s)
    pts["right_wrist"] = (rx, ry)
    pts["left_wrist"] = (lx, ly)
    pts["right_elbow"] = ((rx + pts["right_shoulder"][0]) / 2, (ry + 0.32) / 2)
    pts["left_elbow"] = ((lx + pts["left_shoulder"][0]) / 2, (ly + 0.32) / 2)
    hip_y = 0.32 + 2.6 * w
    step = 0.3 * w * math.sin(2.0 * math.pi * s)
    pts["left_knee"] = (cx - 0.8 * w, hip_y + 1.3 * w)
    pts["right_knee"] = (cx + 0.8 * w + 0.5 * step, hip_y + 1.3 * w)
    pts["left_ankle"] = (cx - 0.8 * w, hip_y + 2.6 * w)
    pts["right_ankle"] = (cx + 0.8 * w + step, hip_y + 2.6 * w - abs(step))

    kp = {}
    for k, name in enumerate(NAMES):
        x, y = pts[name]
        c = 0.9
        if name == "left_wrist" and 150 <= i < 165:
            c = 0.1  # brief occlusion
        kp[name] = [round(clamp(x), 5), round(clamp(y), 5), c]
    return {"t": round(t, 3), "kp": kp}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output")
    ap.add_argument("--seconds", type=float, default=10.0)
    ap.add_argument("--fps", type=float, default=30.0)
    args = ap.parse_args()
    n = int(round(args.seconds * args.fps))
    with open(args.output, "w", encoding="utf-8") as f:
        for i in range(n):
            f.write(json.dumps(frame(i, args.fps), separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
