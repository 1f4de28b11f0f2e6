"""JSON file formats for point sets and angle vectors."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import AngleVector, PointSet, TripletIndexer


def point_set_to_json(points: PointSet) -> dict:
    return {"d": points.dim, "n": points.n, "points": points.points.tolist()}


def point_set_from_json(obj: dict) -> PointSet:
    pts = np.asarray(obj["points"], dtype=float)
    if obj.get("d", 2) != 2 or len(pts) != obj.get("n", len(pts)):
        raise ValueError("point file: inconsistent 'd'/'n' fields")
    return PointSet(pts)


def angles_to_json(theta: AngleVector, **extra) -> dict:
    return {"n": theta.n_points, "order": "canonical", "angles": theta.values.tolist(), **extra}


def angles_from_json(obj: dict) -> AngleVector:
    if obj.get("order", "canonical") != "canonical":
        raise ValueError(f"unsupported angle order {obj['order']!r}")
    return AngleVector(TripletIndexer(int(obj["n"])), np.asarray(obj["angles"], dtype=float))


def load_json(path):
    return json.loads(Path(path).read_text())


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
