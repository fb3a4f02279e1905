"""Flat result records and their CSV serialization."""

from __future__ import annotations

import csv
import dataclasses
import typing
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np


def derive_seed(master_seed: int, tag: str, n: int, label: str, index: int) -> int:
    """64-bit seed as a pure function of its arguments.

    The strings are reduced with CRC-32 and the tuple is hashed by numpy's
    ``SeedSequence`` (``entropy=master_seed``, ``spawn_key=(crc(tag), n,
    crc(label), index)``); the first 64-bit word of its state is the seed.
    """
    key = (zlib.crc32(tag.encode()), int(n), zlib.crc32(label.encode()), int(index))
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass
class ExperimentRecord:
    experiment: str
    dataset: str
    n: int
    method: str
    m: Optional[int]
    d: int
    replicate_index: int
    seed: int
    approx_error: Optional[float]
    estimation_error: Optional[float]
    test_mse: Optional[float]
    sketch_time_ms: float
    fit_time_ms: float
    predict_time_ms: float
    failure: Optional[str] = None


@dataclass
class DiagnosticRecord:
    instance: str
    n: int
    delta: float
    d_delta: int
    d_stat: float
    M_uniform: float
    M_leverage: float
    d: int
    m: int
    trials: int
    pass_rate_cond1: float
    pass_rate_both: float


@dataclass
class BenchRecord:
    n: int
    d: int
    m: int
    ks_structured_ms: float
    ks_dense_ms: float
    stks_structured_ms: float
    stks_dense_ms: float
    ks_speedup: float
    max_rel_error: float


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _write_rows(fh, records, record_type):
    names = [f.name for f in dataclasses.fields(record_type)]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(names)
    for rec in records:
        writer.writerow([_format(getattr(rec, name)) for name in names])


def emit_csv(records: Iterable, path, record_type=ExperimentRecord):
    """Write a header plus one row per record (UTF-8, LF line endings).

    ``path`` may also be an open text stream, which is left open.
    """
    if hasattr(path, "write"):
        _write_rows(path, records, record_type)
        return path
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(fh, records, record_type)
    return path


def _parser(tp):
    if typing.get_origin(tp) is typing.Union:
        inner = next(a for a in typing.get_args(tp) if a is not type(None))
        base = _parser(inner)
        return lambda s: None if s == "" else base(s)
    return tp


def read_csv(path, record_type=ExperimentRecord) -> list:
    hints = typing.get_type_hints(record_type)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        parsers = {name: _parser(hints[name]) for name in reader.fieldnames}
        return [record_type(**{k: parsers[k](v) for k, v in row.items()}) for row in reader]
