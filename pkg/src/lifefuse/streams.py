"""Probability streams and their CSV form.

Tri-sensor files use the header ``t,prob_uwb,prob_ir,prob_ac,label``;
single-sensor files use ``t,prob,label``. Probabilities are written with six
decimals.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, ParseError, ValidationError

TRI_HEADER = ["t", "prob_uwb", "prob_ir", "prob_ac", "label"]
SINGLE_HEADER = ["t", "prob", "label"]
_COLUMN = {"uwb": "prob_uwb", "infrared": "prob_ir", "ir": "prob_ir", "acoustic": "prob_ac",
           "ac": "prob_ac"}


@dataclass
class ProbabilityStream:
    timestamps: np.ndarray
    probs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        n = self.timestamps.size
        if self.probs.shape != (n,) or self.labels.shape != (n,):
            raise InvalidArgumentError("timestamps, probs and labels must share one length")
        if n and (np.any(~np.isfinite(self.probs)) or self.probs.min() < 0 or self.probs.max() > 1):
            raise InvalidArgumentError("probabilities must lie in [0, 1]")
        if n and not np.all((self.labels == 0) | (self.labels == 1)):
            raise InvalidArgumentError("labels must be 0 or 1")

    def __len__(self):
        return self.timestamps.size


@dataclass
class SensorStreams:
    timestamps: np.ndarray
    uwb: ProbabilityStream
    infrared: ProbabilityStream
    acoustic: ProbabilityStream

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        n = self.timestamps.size
        for s in self.sensors:
            if len(s) != n:
                raise InvalidArgumentError("all sensor streams must share the timestamp length")
        if not (np.array_equal(self.uwb.labels, self.infrared.labels)
                and np.array_equal(self.uwb.labels, self.acoustic.labels)):
            raise InvalidArgumentError("sensor streams must share one label sequence")

    @property
    def sensors(self):
        return (self.uwb, self.infrared, self.acoustic)

    @property
    def labels(self):
        return self.uwb.labels

    @property
    def probs(self):
        """(3, L) array in (uwb, infrared, acoustic) order."""
        return np.stack([s.probs for s in self.sensors])

    def __len__(self):
        return self.timestamps.size

    @classmethod
    def from_arrays(cls, timestamps, probs, labels):
        probs = np.asarray(probs)
        return cls(timestamps, *(ProbabilityStream(timestamps, p, labels) for p in probs))


def _fmt_t(t):
    return repr(float(t)) if float(t) != int(t) else f"{float(t):.1f}"


def write_streams_csv(streams, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRI_HEADER)
        for i, t in enumerate(streams.timestamps):
            w.writerow([_fmt_t(t)] + [f"{s.probs[i]:.6f}" for s in streams.sensors]
                       + [int(streams.labels[i])])
    return path


def write_stream_csv(stream, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SINGLE_HEADER)
        for t, p, y in zip(stream.timestamps, stream.probs, stream.labels):
            w.writerow([_fmt_t(t), f"{p:.6f}", int(y)])
    return path


def _read_rows(path):
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: empty file", line=1)
    return rows


def _parse(rows, n_cols, has_header):
    start = 1 if has_header else 0
    out = []
    for lineno, row in rows[start:]:
        if len(row) != n_cols:
            raise ParseError(f"expected {n_cols} fields, got {len(row)}", line=lineno)
        try:
            values = [float(c) for c in row[:-1]]
            label = float(row[-1])
        except ValueError:
            raise ParseError(f"non-numeric field in {row!r}", line=lineno) from None
        for p in values[1:]:
            if not (0.0 <= p <= 1.0):
                raise ValidationError(f"probability {p} outside [0, 1]", line=lineno)
        if label not in (0.0, 1.0):
            raise ValidationError(f"label {row[-1]!r} is not 0 or 1", line=lineno)
        out.append(values + [label])
    if not out:
        raise ParseError("no data rows", line=rows[0][0])
    return np.asarray(out, dtype=np.float64)


def _is_header(row):
    try:
        [float(c) for c in row]
        return False
    except ValueError:
        return True


def load_probability_stream(path, sensor=None):
    """Read a single-sensor CSV, or one column of a tri-sensor CSV.

    Headerless three-column rows (``t,prob,label``) are accepted as well.
    """
    rows = _read_rows(path)
    first = [c.strip() for c in rows[0][1]]
    header = _is_header(first)
    if header and first == TRI_HEADER:
        col = _COLUMN.get(sensor or "infrared")
        if col is None:
            raise InvalidArgumentError(f"unknown sensor {sensor!r}")
        data = _parse(rows, 5, True)
        j = TRI_HEADER.index(col)
        return ProbabilityStream(data[:, 0], data[:, j], data[:, -1].astype(np.int64))
    if header and first != SINGLE_HEADER:
        raise ParseError(f"unrecognised header {first!r}", line=rows[0][0])
    data = _parse(rows, 3, header)
    return ProbabilityStream(data[:, 0], data[:, 1], data[:, 2].astype(np.int64))


def load_streams_csv(path):
    rows = _read_rows(path)
    first = [c.strip() for c in rows[0][1]]
    if first != TRI_HEADER:
        raise ParseError(f"expected header {','.join(TRI_HEADER)}", line=rows[0][0])
    data = _parse(rows, 5, True)
    return SensorStreams.from_arrays(data[:, 0], data[:, 1:4].T, data[:, 4].astype(np.int64))
