"""Versioned result envelopes and the emit/load pair.

Every artifact written by the CLI is either a JSON envelope or a plain CSV
with a JSON sidecar (`<name>.meta.json`) carrying the same envelope metadata,
so machine-readable outputs stay bare while runs remain self-describing.

Byte stability is a contract: identical config and seed must reproduce
identical bytes, so envelopes carry no wall-clock timestamp unless one is
injected explicitly, keys are sorted, and floats are serialized with their
shortest round-trip representation.  Integers that may exceed 2**53 are
written as decimal strings.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__

SCHEMA_VERSION = 1


class EnvelopeVersionError(RuntimeError):
    """Loaded envelope was written under an incompatible schema version."""


@dataclass
class ResultEnvelope:
    kind: str
    config: dict
    payload: object          # dict, or {"header": [...], "rows": [[...]]} for CSV
    notes: tuple = ()
    schema_version: int = SCHEMA_VERSION
    created_utc: Optional[str] = None   # injected only on request
    build_id: str = ""

    def __post_init__(self):
        if not self.build_id:
            cfg = json.dumps(_jsonify(self.config), sort_keys=True)
            digest = hashlib.sha256(cfg.encode()).hexdigest()[:12]
            self.build_id = f"orbitlab-{__version__}+cfg.{digest}"


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.integer,)):
        obj = int(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (float, str)):
        return obj
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, int):
        return obj if abs(obj) < (1 << 53) else str(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def format_cell(v, round_digits: Optional[int] = None) -> str:
    """CSV cell text: exact decimal for ints, shortest round-trip repr for
    floats (or half-even rounding when requested)."""
    if isinstance(v, (bool,)):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if round_digits is None:
            return repr(f)
        q = Decimal(1).scaleb(-round_digits)
        return str(Decimal(repr(f)).quantize(q, rounding=ROUND_HALF_EVEN))
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def _parse_cell(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def envelope_to_dict(env: ResultEnvelope) -> dict:
    return {
        "schema_version": env.schema_version,
        "kind": env.kind,
        "build_id": env.build_id,
        "created_utc": env.created_utc,
        "config": _jsonify(env.config),
        "notes": list(env.notes),
        "payload": _jsonify(env.payload),
    }


def emit(env: ResultEnvelope, path, fmt: Optional[str] = None,
         round_digits: Optional[int] = None) -> Path:
    """Write the envelope as JSON, or as CSV plus a metadata sidecar.

    Identical envelopes produce identical bytes.
    """
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
    try:
        if fmt == "json":
            text = json.dumps(envelope_to_dict(env), indent=2, sort_keys=True) + "\n"
            path.write_text(text)
        elif fmt == "csv":
            payload = env.payload
            if not (isinstance(payload, dict) and "header" in payload and "rows" in payload):
                raise ValueError("CSV emission needs a payload with header and rows")
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(payload["header"])
            for row in payload["rows"]:
                writer.writerow([format_cell(v, round_digits) for v in row])
            path.write_text(buf.getvalue())
            side = env_sidecar_path(path)
            meta = dict(envelope_to_dict(env))
            meta["payload"] = {"csv": path.name, "header": list(payload["header"]),
                               "row_count": len(payload["rows"])}
            side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc
    return path


def env_sidecar_path(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.name + ".meta.json")


def load(path) -> ResultEnvelope:
    """Read back an emitted artifact (JSON envelope or CSV + sidecar)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        side = env_sidecar_path(path)
        try:
            meta = json.loads(side.read_text())
        except OSError as exc:
            raise OSError(f"missing sidecar for {path}: {exc}") from exc
        _check_version(meta, side)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, data = rows[0], rows[1:]
        payload = {"header": header,
                   "rows": [[_parse_cell(c) for c in row] for row in data]}
        return ResultEnvelope(kind=meta["kind"], config=meta["config"],
                              payload=payload, notes=tuple(meta["notes"]),
                              schema_version=meta["schema_version"],
                              created_utc=meta["created_utc"],
                              build_id=meta["build_id"])
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"failed reading {path}: {exc}") from exc
    _check_version(doc, path)
    return ResultEnvelope(kind=doc["kind"], config=doc["config"],
                          payload=doc["payload"], notes=tuple(doc["notes"]),
                          schema_version=doc["schema_version"],
                          created_utc=doc["created_utc"],
                          build_id=doc["build_id"])


def _check_version(doc: dict, path) -> None:
    got = doc.get("schema_version")
    if got != SCHEMA_VERSION:
        raise EnvelopeVersionError(
            f"{path}: schema version {got} unsupported (expected {SCHEMA_VERSION})")
