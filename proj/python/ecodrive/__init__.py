"""Eco-driving telemetry scoring, OBD decoding, trip simulation and gamification."""

from ._core import (
    Error,
    accept_mission,
    apply_trip,
    decode_frame,
    decode_hex_log,
    decode_trip_csv,
    default_config_text,
    default_rules_text,
    encode_trip_csv,
    leaderboard,
    new_profile,
    replay,
    score_csv,
    sigmoid,
    simulate,
)

__all__ = [
    "Error",
    "accept_mission",
    "apply_trip",
    "decode_frame",
    "decode_hex_log",
    "decode_trip_csv",
    "default_config_text",
    "default_rules_text",
    "encode_trip_csv",
    "leaderboard",
    "new_profile",
    "replay",
    "score_csv",
    "sigmoid",
    "simulate",
]
