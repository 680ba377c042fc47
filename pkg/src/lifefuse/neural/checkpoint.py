"""Checkpoint files: one JSON header line, then little-endian float32 parameters.

The header lists layers in order, each with its kind, constructor sizes and
the shape / byte offset of every parameter tensor. Offsets count from the
first byte after the header's terminating newline.
"""

import json
from pathlib import Path

import numpy as np

from ..errors import InvalidArgumentError, ParseError

FORMAT = "lifefuse-checkpoint"
VERSION = 1


def save_checkpoint(path, named_layers, meta=None):
    layers, blobs, offset = [], [], 0
    for name, layer in named_layers:
        spec = layer.spec
        entry = {"name": name, "kind": spec.kind, "sizes": spec.params, "tensors": []}
        for pname, p in layer.params.items():
            raw = np.ascontiguousarray(p, dtype="<f4").tobytes()
            entry["tensors"].append({"name": pname, "shape": list(p.shape), "offset": offset,
                                     "nbytes": len(raw)})
            blobs.append(raw)
            offset += len(raw)
        layers.append(entry)
    header = {"format": FORMAT, "version": VERSION, "dtype": "<f4", "meta": meta or {},
              "layers": layers}
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for raw in blobs:
            fh.write(raw)
    return path


def read_checkpoint(path):
    """Return ``(header, {layer_name: {param_name: float64 array}})``."""
    blob = Path(path).read_bytes()
    cut = blob.find(b"\n")
    if cut < 0:
        raise ParseError(f"{path}: missing checkpoint header")
    try:
        header = json.loads(blob[:cut])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: bad checkpoint header ({exc})") from None
    if header.get("format") != FORMAT:
        raise ParseError(f"{path}: not a {FORMAT} file")
    body = blob[cut + 1 :]
    params = {}
    for entry in header["layers"]:
        tensors = {}
        for t in entry["tensors"]:
            chunk = body[t["offset"] : t["offset"] + t["nbytes"]]
            if len(chunk) != t["nbytes"]:
                raise ParseError(f"{path}: truncated tensor {entry['name']}.{t['name']}")
            tensors[t["name"]] = np.frombuffer(chunk, dtype="<f4").astype(np.float64).reshape(
                t["shape"])
        params[entry["name"]] = tensors
    return header, params


def load_into(named_layers, params):
    for name, layer in named_layers:
        if name not in params:
            raise InvalidArgumentError(f"checkpoint has no layer {name!r}")
        for pname, p in layer.params.items():
            src = params[name].get(pname)
            if src is None or src.shape != p.shape:
                raise InvalidArgumentError(f"checkpoint tensor {name}.{pname} does not match")
            p[...] = src
