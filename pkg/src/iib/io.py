"""Channel files, pair files and JSON reports.

A channel file is one JSON object::

    {
      "schema_version": 1,
      "mode": "exact",                 # or "float"
      "x_size": 2, "y_size": 2,
      "p_y_given_x": [["4/5", "1/5"],  # row y, column x; columns sum to 1
                      ["1/5", "4/5"]],
      "p_x": ["1/2", "1/2"],           # optional
      "labels": {"x": ["a", "b"], "y": ["0", "1"]}   # optional
    }

Exact-mode numbers are ``"num/den"`` strings (integers also accepted) so no
binary rounding enters the file.  Float-mode numbers are JSON numbers and
round-trip exactly through ``repr``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .foundation import (
    EXACT,
    FLOAT,
    Alphabet,
    Channel,
    Dist,
    IIBError,
    parse_fraction,
)
from .info_measures import ExactNats

SCHEMA_VERSION = 1


class InvalidFile(IIBError, ValueError):
    pass


@dataclass
class ChannelFile:
    channel: Channel
    p_x: Dist | None = None

    @property
    def mode(self) -> str:
        return self.channel.mode


# ---------------------------------------------------------------------------
# numbers
# ---------------------------------------------------------------------------


def _parse_number(v, mode: str):
    if mode == EXACT:
        if isinstance(v, float):
            raise InvalidFile(f"exact-mode entries must be 'num/den' strings or integers, got {v!r}")
        try:
            return parse_fraction(v)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InvalidFile(f"cannot parse rational {v!r}: {exc}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidFile(f"float-mode entries must be numbers, got {v!r}")
    if not math.isfinite(v):
        raise InvalidFile(f"non-finite entry {v!r}")
    return float(v)


def number_to_json(v, mode: str | None = None):
    """Fractions become ``"num/den"`` strings, everything else a float."""
    if isinstance(v, Fraction) and mode != FLOAT:
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    return float(v)


def nats_expression(v) -> str | None:
    """``ExactNats`` as a sum of rational multiples of prime logarithms."""
    if not isinstance(v, ExactNats):
        return None
    if v.is_zero():
        return "0"
    return " + ".join(f"({c})*log({p})" for p, c in sorted(v.coeffs.items()))


# ---------------------------------------------------------------------------
# channel files
# ---------------------------------------------------------------------------


def _require(obj: dict, key: str):
    if key not in obj:
        raise InvalidFile(f"missing required field {key!r}")
    return obj[key]


def parse_channel_document(obj) -> ChannelFile:
    if not isinstance(obj, dict):
        raise InvalidFile("a channel file holds one JSON object")
    version = _require(obj, "schema_version")
    if version != SCHEMA_VERSION:
        raise InvalidFile(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    mode = _require(obj, "mode")
    if mode not in (EXACT, FLOAT):
        raise InvalidFile(f"mode must be 'exact' or 'float', got {mode!r}")
    nx, ny = _require(obj, "x_size"), _require(obj, "y_size")
    if not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in (nx, ny)):
        raise InvalidFile("x_size and y_size must be positive integers")
    rows = _require(obj, "p_y_given_x")
    if not isinstance(rows, list) or len(rows) != ny or not all(
            isinstance(r, list) and len(r) == nx for r in rows):
        raise InvalidFile(f"p_y_given_x must be a {ny} x {nx} matrix (row y, column x)")
    matrix = np.empty((ny, nx), dtype=object if mode == EXACT else float)
    for y, row in enumerate(rows):
        for x, v in enumerate(row):
            matrix[y, x] = _parse_number(v, mode)
    labels = obj.get("labels") or {}
    if not isinstance(labels, dict):
        raise InvalidFile("labels must be an object with optional 'x' and 'y' lists")
    try:
        x_alph = Alphabet(nx, labels.get("x"))
        y_alph = Alphabet(ny, labels.get("y"))
        ch = Channel(matrix, x_alph, y_alph, mode=mode)
    except (ValueError, TypeError) as exc:
        raise InvalidFile(str(exc)) from None
    p_x = None
    if obj.get("p_x") is not None:
        raw = obj["p_x"]
        if not isinstance(raw, list) or len(raw) != nx:
            raise InvalidFile(f"p_x must be a list of {nx} entries")
        vals = np.array([_parse_number(v, mode) for v in raw], dtype=object if mode == EXACT else float)
        try:
            p_x = Dist(vals, x_alph, mode=mode)
        except (ValueError, TypeError) as exc:
            raise InvalidFile(f"p_x: {exc}") from None
    return ChannelFile(ch, p_x)


def read_channel_file(path) -> ChannelFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidFile(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidFile(f"{path} is not valid JSON: {exc}") from None
    return parse_channel_document(obj)


def channel_document(ch: Channel, p_x: Dist | None = None) -> dict:
    mode = ch.mode
    doc = {
        "schema_version": SCHEMA_VERSION,
        "mode": mode,
        "x_size": ch.n_in,
        "y_size": ch.n_out,
        "p_y_given_x": [[number_to_json(v, mode) for v in row] for row in ch.matrix],
    }
    if p_x is not None:
        doc["p_x"] = [number_to_json(v, mode) for v in p_x.mass]
    labels = {}
    if ch.input.labels:
        labels["x"] = list(ch.input.labels)
    if ch.output.labels:
        labels["y"] = list(ch.output.labels)
    if labels:
        doc["labels"] = labels
    return doc


def write_channel_file(path, ch: Channel, p_x: Dist | None = None):
    Path(path).write_text(json.dumps(channel_document(ch, p_x), indent=2) + "\n")


# ---------------------------------------------------------------------------
# pair files: {"schema_version": 1, "mode": ..., "mu": [[...]], "eta": [[...]]}
# ---------------------------------------------------------------------------


def _matrix(raw, mode: str, name: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) for r in raw):
        raise InvalidFile(f"{name} must be a matrix")
    width = len(raw[0])
    if any(len(r) != width for r in raw):
        raise InvalidFile(f"{name} rows have different lengths")
    out = np.empty((len(raw), width), dtype=object if mode == EXACT else float)
    for i, row in enumerate(raw):
        for k, v in enumerate(row):
            out[i, k] = _parse_number(v, mode)
    return out


def read_pair_matrices(path) -> tuple[Channel, Channel]:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidFile(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidFile(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or obj.get("schema_version") != SCHEMA_VERSION:
        raise InvalidFile("pair file must be an object with schema_version 1")
    mode = obj.get("mode", FLOAT)
    if mode not in (EXACT, FLOAT):
        raise InvalidFile(f"mode must be 'exact' or 'float', got {mode!r}")
    try:
        mu = Channel(_matrix(_require(obj, "mu"), mode, "mu"), mode=mode)
        eta = Channel(_matrix(_require(obj, "eta"), mode, "eta"), mode=mode)
    except (ValueError, TypeError) as exc:
        raise InvalidFile(str(exc)) from None
    return mu, eta


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def file_digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def make_report(command: str, argv: list[str], input_digest: str | None, results: dict,
                timings: dict, units: str = "nats") -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "argv": list(argv),
        "input_digest": input_digest,
        "units": units,
        "results": results,
        "timings": timings,
    }


def report_schema() -> dict:
    """The JSON schema every ``--json`` report validates against."""
    text = resources.files("iib").joinpath("schemas/report.schema.json").read_text()
    return json.loads(text)


def channel_schema() -> dict:
    text = resources.files("iib").joinpath("schemas/channel.schema.json").read_text()
    return json.loads(text)
