"""Deterministic text serialization: CSV columns and JSON documents.

Every float is written with 17 significant digits so that files round-trip
exactly and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError
from .spectral import BiphotonField, ChannelLabel, FrequencyGrid


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path, header: Sequence[str], columns: Sequence[Iterable]) -> Path:
    path = Path(path)
    cols = [np.asarray(c).ravel() for c in columns]
    n = {len(c) for c in cols}
    if len(n) != 1:
        raise ValueError("CSV columns must have equal length")
    lines = [",".join(header)]
    lines.extend(",".join(fmt(c[k]) for c in cols) for k in range(n.pop()))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(len(body), len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt(obj)
        return s if math.isfinite(float(obj)) else json.dumps(s)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with sorted keys and 17-digit floats."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def save_field(field: BiphotonField, path, extra: Mapping | None = None) -> tuple[Path, Path]:
    """Write ``omega,omega_prime,re,im`` rows plus a JSON sidecar."""
    path = Path(path)
    w, wp = field.grid.mesh()
    v = field.values
    write_csv(path, ["omega", "omega_prime", "re", "im"], [w, wp, v.real, v.imag])
    sidecar = {
        "grid": field.grid.to_dict(),
        "channel": field.channel.key,
        "polarization": field.channel.sigma_prime + field.channel.sigma,
        "normalized": field.normalized,
    }
    if extra:
        sidecar.update(extra)
    side = write_json(path.with_suffix(".json"), sidecar)
    return path, side


def load_field(path) -> BiphotonField:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    grid = FrequencyGrid(**meta["grid"])
    cols = read_csv(path)
    if len(cols["re"]) != grid.n_omega * grid.n_omega_prime:
        raise DomainError("field CSV row count does not match its grid")
    values = (cols["re"] + 1j * cols["im"]).reshape(grid.shape)
    return BiphotonField(grid, values, ChannelLabel.parse(meta["channel"]),
                         bool(meta.get("normalized", False)))
