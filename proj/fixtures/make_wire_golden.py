#!/usr/bin/env python3
"""Hand-assembles wire_golden.bin (one message of each kind) with struct.

Independent of the C++ encoder on purpose: the C++ tests decode this file and
re-encode it, and the bytes must match. wire_golden.json lists the same values.
"""
import json
import pathlib
import struct

HERE = pathlib.Path(__file__).resolve().parent


def message(kind, payload):
    return struct.pack(">IB", 1 + len(payload), kind) + payload


hello = message(0x00, b"CKAR" + bytes([1]))

frame_pixels = bytes([0x3B, 0xE8, 0xB0, 0xFC, 0x62, 0x6A])
frame = message(0x01, struct.pack(">QQHHBB", 7, 123456789, 2, 1, 0, 0) + frame_pixels)

instances = [
    # class_id, role, confidence x 10000, rings
    (1, 0, 9876, [[(10, 20), (50, 20), (50, 60), (10, 60)]]),
    (0xFF, 1, 4000, [[(100, 100), (200, 100), (200, 180), (100, 180)], [(120, 120), (160, 120), (140, 160)]]),
]
result_payload = struct.pack(">QIH", 7, 15950, len(instances))
for class_id, role, conf, rings in instances:
    result_payload += struct.pack(">BBHB", class_id, role, conf, len(rings))
    for ring in rings:
        result_payload += struct.pack(">H", len(ring))
        for x, y in ring:
            result_payload += struct.pack(">HH", x, y)
result = message(0x02, result_payload)

error_text = b"provider failed"
error = message(0x03, struct.pack(">HQH", 500, 7, len(error_text)) + error_text)

(HERE / "wire_golden.bin").write_bytes(hello + frame + result + error)
(HERE / "wire_golden.json").write_text(json.dumps({
    "hello": {"version": 1},
    "frame": {"frame_id": 7, "timestamp_us": 123456789, "width": 2, "height": 1, "eye": "left",
              "pixels": list(frame_pixels)},
    "result": {"frame_id": 7, "inference_us": 15950, "instances": [
        {"class_id": c if c != 0xFF else None, "role": ["grabbable", "hazardous"][r], "confidence": conf / 10000,
         "rings": [[list(p) for p in ring] for ring in rings]} for c, r, conf, rings in instances]},
    "error": {"code": 500, "frame_id": 7, "message": error_text.decode()},
}, indent=2) + "\n")
