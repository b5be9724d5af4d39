"""Reference E2 frames: 4-byte big-endian payload length, 1-byte tag, payload.

Writes frames.bin (the concatenated stream) next to this file.
"""
import json
import struct
from pathlib import Path


def frame(tag, payload):
    if not isinstance(payload, bytes):
        payload = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return struct.pack(">IB", len(payload), tag) + payload


FRAMES = [
    frame(0, b"1"),
    frame(1, {"rnti": 17921, "rsrp_dbm": -87.25, "seq": 3, "timestamp_ms": 150}),
    frame(1, {"seq": 4, "timestamp_ms": 200}),
    frame(2, {"beam_index": 7, "seq": 1, "target": "RIS"}),
    frame(2, {"beam_index": 2, "seq": 9, "target": "UE"}),
    frame(3, {"applied_index": 7, "seq": 1, "target": "RIS", "timestamp_ms": 50}),
    frame(3, {"applied_index": 0, "error": "beam 99 outside codebook", "seq": 10, "target": "GNB", "timestamp_ms": 500}),
]

if __name__ == "__main__":
    Path(__file__).with_name("frames.bin").write_bytes(b"".join(FRAMES))
