"""File formats for matrices, vectors, chains, and reports.

CSV holds one dense matrix, comma-separated, written with %.17g so float64
round-trips exactly. JSON matrix files carry the hierarchy level alongside
the entries: {"level": k, "matrix": [[...], ...]}. Reduction chains and
solver reports serialize to JSON only.
"""
from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .reduction import ReductionChain
from .solver import PortfolioReport


def read_matrix(path: str | Path) -> tuple[np.ndarray, int | None]:
    """Load a dense matrix; returns (matrix, level) with level None for CSV."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            with open(path) as fh:
                payload = json.load(fh)
            if not isinstance(payload, dict) or "matrix" not in payload:
                raise ValidationError(f"{path}: expected a JSON object with a 'matrix' key")
            matrix = np.asarray(payload["matrix"], dtype=np.float64)
            level = payload.get("level")
            if level is not None and not isinstance(level, int):
                raise ValidationError(f"{path}: 'level' must be an integer if present")
        else:
            matrix = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
            level = None
    except ValueError as exc:
        raise ValidationError(f"{path}: could not parse matrix data: {exc}") from exc
    if matrix.ndim != 2:
        raise ValidationError(f"{path}: expected a 2-d matrix, got shape {matrix.shape}")
    return matrix, level


def write_matrix(path: str | Path, matrix: np.ndarray, level: int | None = None) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        payload = {"level": level, "matrix": matrix.tolist()}
        with open(path, "w") as fh:
            json.dump(payload, fh)
            fh.write("\n")
    else:
        np.savetxt(path, matrix, delimiter=",", fmt="%.17g")


def read_vector(path: str | Path) -> np.ndarray:
    """Load a vector from CSV (one value per line or comma-separated)."""
    try:
        values = np.loadtxt(path, delimiter=",", dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{path}: could not parse vector data: {exc}") from exc
    return np.atleast_1d(values.ravel())


def chain_to_dict(chain: ReductionChain) -> dict:
    """Inspection form of a chain: dense matrix and right-hand side per level."""
    from .covariance import to_dense

    levels = []
    for entry in chain.entries:
        levels.append({
            "level": entry.cov.level,
            "matrix": to_dense(entry.cov).tolist(),
            "rhs": entry.rhs.values.tolist(),
        })
    return {"levels": levels}


def report_to_dict(report: PortfolioReport) -> dict:
    return {
        "weights": report.weights.values.tolist(),
        "total_variance": report.total_variance,
        "normalizer": report.normalizer,
        "per_level": [dataclasses.asdict(entry) for entry in report.per_level],
        "diagnostics": dict(report.diagnostics),
    }


def write_json(payload: dict, path: str | Path | None) -> None:
    """Write JSON to a path, or to stdout when path is None or '-'."""
    text = json.dumps(payload, indent=2)
    if path is None or str(path) == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")
