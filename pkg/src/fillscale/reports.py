"""Run artifacts: canonical JSON reports keyed by config hash, plus CSV.

A report separates the deterministic payload (everything a reproduction
must match byte for byte) from environmental metadata (timestamps, host
details), so determinism checks can compare payloads directly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
import time
from pathlib import Path

import numpy as np

from . import kernels
from .errors import NumericError


def plainify(obj):
    """Recursively strip numpy types so json sees only builtins."""
    if isinstance(obj, dict):
        return {str(k): plainify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plainify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plainify(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, NaN rejected: one byte form per value."""
    try:
        return json.dumps(plainify(obj), sort_keys=True,
                          separators=(",", ":"), allow_nan=False)
    except ValueError as exc:
        raise NumericError(f"non-finite value in report: {exc}") from exc


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("ascii")).hexdigest()


def make_report(config: dict, payload: dict) -> dict:
    return {
        "config_hash": config_hash(config),
        "config": plainify(config),
        "payload": plainify(payload),
        "meta": {
            "created_unix": time.time(),
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "backend": kernels.BACKEND,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }


def write_report(path, report: dict) -> None:
    text = json.dumps(report, sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="ascii")


def read_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="ascii"))


def deterministic_bytes(report: dict) -> bytes:
    """The byte string two reproductions of a run must share exactly."""
    core = {"config_hash": report["config_hash"],
            "config": report["config"],
            "payload": report["payload"]}
    return canonical_json(core).encode("ascii")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def run_payload(result) -> dict:
    """Deterministic view of a RunResult (wall clock stays out)."""
    return {
        "algorithm": result.algorithm,
        "final_scores": result.final_scores,
        "best_index": result.best_index,
        "best_score": result.best_score,
        "mean_score": result.mean_score,
        "oracle_calls": result.oracle_calls,
        "expected_oracle_calls": result.expected_oracle_calls,
        "genealogy": result.genealogy,
        "checkpoints": [
            {
                "index": cp.index,
                "raw_fill": cp.raw_fill,
                "raw_div": cp.raw_div,
                "norm_fill": cp.norm_fill,
                "norm_div": cp.norm_div,
                "weight": cp.weight,
                "weight_adjusted": cp.weight_adjusted,
                "fill_variance": cp.fill_variance,
                "unified": cp.unified,
                "parents": cp.parents,
            }
            for cp in result.checkpoints
        ],
    }


def correlation_payload(table) -> dict:
    return {
        "checkpoint_rows": table.checkpoint_rows,
        "total_rows": table.total_rows,
        "final_scores": table.final_scores,
        "cells": [
            {"strategy": c.strategy, "checkpoint": c.checkpoint,
             "rho": c.rho, "n": c.n, "note": c.note}
            for c in table.cells
        ],
    }
