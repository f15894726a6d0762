"""Body-keypoint to OSC control engine."""

from ._core import (
    KEYPOINTS,
    ConfigError,
    Error,
    ParseError,
    calibrate,
    encode_osc,
    jnd_analyze,
    map_exp_db,
    map_exp_norm,
    map_linear,
    map_pitch,
    normalize_frame,
    normalize_speed,
    parse_frame,
    replay,
    serialize_frame,
    validate_config,
)

__all__ = [
    "KEYPOINTS",
    "ConfigError",
    "Error",
    "ParseError",
    "calibrate",
    "encode_osc",
    "jnd_analyze",
    "map_exp_db",
    "map_exp_norm",
    "map_linear",
    "map_pitch",
    "normalize_frame",
    "normalize_speed",
    "parse_frame",
    "replay",
    "serialize_frame",
    "validate_config",
]
