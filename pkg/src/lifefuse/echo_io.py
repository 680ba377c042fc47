"""Binary echo-matrix files.

Layout: 24-byte header of three little-endian uint64 (M, N, reserved = 0),
then M*N little-endian float64 in row-major order. Sampling intervals live
in a JSON sidecar ``<file>.json``.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ParseError
from .simulate import EchoMatrix

_HEADER = struct.Struct("<QQQ")


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_echo_matrix(echo, path):
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(echo.M, echo.N, 0))
        fh.write(np.ascontiguousarray(echo.data, dtype="<f8").tobytes())
    sidecar_path(path).write_text(json.dumps(
        {"T_s": echo.slow_interval, "T_f": echo.fast_interval, "M": echo.M, "N": echo.N},
        sort_keys=True, indent=2) + "\n")
    return path


def read_echo_matrix(path):
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise ParseError(f"{path}: shorter than the 24-byte header")
    m, n, _ = _HEADER.unpack_from(blob)
    if len(blob) != _HEADER.size + 8 * m * n:
        raise ParseError(f"{path}: expected {m}x{n} float64 payload")
    data = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(m, n).copy()
    meta = json.loads(sidecar_path(path).read_text())
    return EchoMatrix(data, float(meta["T_s"]), float(meta["T_f"]))
