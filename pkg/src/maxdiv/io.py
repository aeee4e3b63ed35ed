"""Reading spaces and measures, writing profiles and results.

Matrix and point files are headerless CSV with one row per line; the token
``inf`` is accepted (useful for distance matrices).  A JSON space
descriptor looks like::

    {"kind": "points", "path": "cloud.csv", "metric": "euclidean", "scale": 2.0}

with ``kind`` one of ``kernel``, ``points`` or ``distances``; relative paths
are resolved against the descriptor's directory.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .spaces import Measure, SimilaritySpace, build_finite_space, space_from_points

KINDS = ("kernel", "points", "distances")


def format_float(x: float) -> str:
    """17 significant digits (round-trips every double); ``inf``/``-inf``/``nan`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    rows.append([float(c) for c in row])
                except ValueError:
                    raise ValidationError(f"{path}:{lineno}: non-numeric entry in {row!r}") from None
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise ValidationError(f"{path}: no data")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError(f"{path}: rows have differing lengths {sorted(widths)}")
    return np.array(rows, dtype=float)


def write_matrix_csv(path, M) -> None:
    with open(path, "w", newline="") as fh:
        for row in np.atleast_2d(M):
            fh.write(",".join(format_float(x) for x in row) + "\n")


@dataclass(frozen=True)
class SpaceSource:
    """What a descriptor pointed at, before any kernel is built."""

    kind: str
    data: np.ndarray
    metric: str = "euclidean"
    scale: float = 1.0
    labels: tuple | None = None

    def build(self) -> SimilaritySpace:
        if self.kind == "kernel":
            return build_finite_space(self.data, self.labels)
        metric = "precomputed" if self.kind == "distances" else self.metric
        return space_from_points(self.data, metric=metric, t=self.scale, labels=self.labels)


def read_space_source(descriptor, kind: str | None = None, metric: str = "euclidean",
                      scale: float = 1.0) -> SpaceSource:
    """Resolve a JSON descriptor (path or dict) or a bare CSV path.

    For a bare CSV the ``kind``, ``metric`` and ``scale`` arguments apply;
    ``kind`` defaults to ``kernel``.
    """
    if isinstance(descriptor, (str, os.PathLike)) and str(descriptor).endswith(".json"):
        base = Path(descriptor).parent
        try:
            desc_obj = json.loads(Path(descriptor).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read space descriptor {descriptor}: {exc}") from None
        if not isinstance(desc_obj, dict):
            raise ValidationError("space descriptor must be a JSON object")
        data_path = desc_obj.get("path")
        if data_path is None:
            raise ValidationError("space descriptor has no 'path'")
        data_path = base / data_path
        kind = desc_obj.get("kind", "kernel")
        metric = desc_obj.get("metric", metric)
        scale = float(desc_obj.get("scale", scale))
        labels = desc_obj.get("labels")
    elif isinstance(descriptor, dict):
        data_path = descriptor.get("path")
        kind = descriptor.get("kind", "kernel")
        metric = descriptor.get("metric", metric)
        scale = float(descriptor.get("scale", scale))
        labels = descriptor.get("labels")
    else:
        data_path, kind, labels = descriptor, kind or "kernel", None
    if kind not in KINDS:
        raise ValidationError(f"unknown space kind {kind!r}; expected one of {KINDS}")
    data = read_matrix_csv(data_path)
    return SpaceSource(kind=kind, data=data, metric=metric, scale=scale,
                       labels=None if labels is None else tuple(labels))


def load_space(descriptor, **kwargs) -> SimilaritySpace:
    return read_space_source(descriptor, **kwargs).build()


def save_space(space: SimilaritySpace, directory, stem: str = "space") -> Path:
    """Write a space as CSV plus JSON descriptor; returns the descriptor path.

    Metric-origin spaces are stored by their distances, others by kernel,
    so that reloading reproduces the kernel bit for bit.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if space.metric_origin:
        kind, M = "distances", space.distances
    else:
        kind, M = "kernel", space.kernel
    write_matrix_csv(directory / f"{stem}.csv", M)
    desc = {"kind": kind, "path": f"{stem}.csv", "labels": list(space.labels)}
    out = directory / f"{stem}.json"
    out.write_text(dumps(desc) + "\n")
    return out


def read_measure(source, space: SimilaritySpace, normalize: bool = False) -> Measure:
    """``"uniform"`` or a CSV of ``label,weight`` rows (unlisted labels get weight 0)."""
    if str(source) == "uniform":
        return Measure.uniform(space.n)
    index = {lab: i for i, lab in enumerate(space.labels)}
    w = np.zeros(space.n)
    try:
        with open(source, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 2:
                    raise ValidationError(f"{source}:{lineno}: expected 'label,weight'")
                lab, val = row[0].strip(), row[1].strip()
                if lab not in index:
                    if lineno == 1:
                        continue  # header line
                    raise ValidationError(f"{source}:{lineno}: unknown label {lab!r}")
                try:
                    w[index[lab]] = float(val)
                except ValueError:
                    raise ValidationError(f"{source}:{lineno}: bad weight {val!r}") from None
    except OSError as exc:
        raise ValidationError(f"cannot read measure {source}: {exc}") from None
    mu = Measure(w)
    return mu.normalized() if normalize else mu


def write_profile_csv(fh, profile) -> None:
    fh.write("q,diversity,entropy\n")
    for q, d, h in profile.rows():
        fh.write(f"{format_float(q)},{format_float(d)},{format_float(h)}\n")


def write_weighting_csv(fh, space: SimilaritySpace, weights) -> None:
    fh.write("label,weight\n")
    for lab, w in zip(space.labels, weights):
        fh.write(f"{lab},{format_float(w)}\n")


def write_scaling_csv(fh, profile) -> None:
    fh.write("t,dmax,magnitude,tv_step\n")
    for t, d, m, tv in zip(profile.t_grid, profile.dmax_values, profile.magnitudes,
                           profile.tv_steps):
        fh.write(",".join(format_float(x) for x in (t, d, m, tv)) + "\n")


def write_trace_csv(fh, gaps) -> None:
    fh.write("iteration,gap\n")
    for i, g in enumerate(gaps):
        fh.write(f"{i},{format_float(g)}\n")


def measure_dict(space: SimilaritySpace, mu: Measure) -> dict:
    return {lab: float(w) for lab, w in zip(space.labels, mu.weights)}


def result_to_dict(result, space: SimilaritySpace) -> dict:
    diag = {k: v for k, v in result.diagnostics.items() if k != "gap_trace"}
    if "subset" in diag:
        diag["subset"] = [space.labels[i] for i in diag["subset"]]
    return {
        "value": result.value,
        "entropy": result.entropy,
        "method": result.method,
        "support": [space.labels[i] for i in result.support],
        "measure": measure_dict(space, result.measure),
        "certificates": result.certificate.as_dict() if result.certificate else {},
        "diagnostics": diag,
    }


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "null"
        return json.dumps(format_float(x)) if math.isinf(x) else format_float(x)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float at 17 significant digits; infinities as ``"inf"``."""
    return _encode(obj, indent, 0)
