"""Quantities reported per run: penalty ratios, similarity, sparsity, dB maps."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateReference, ZeroVector
from .penalties import PenaltyConfig, apply_operator, psi_value

__all__ = [
    "SweepRecord",
    "penalty_ratio",
    "cosine_similarity",
    "normalized_l1",
    "db_magnitude",
    "write_sweep_csv",
    "read_sweep_csv",
    "SWEEP_CSV_FIELDS",
]

SWEEP_CSV_FIELDS = ("lambda", "penalty_ratio", "cosine_sim", "normalized_l1", "feasibility_residual")


@dataclass(frozen=True)
class SweepRecord:
    """One row of a lambda sweep. cosine_sim lies in [0, 1] for nonnegative inputs."""

    lam: float
    penalty_ratio: float
    cosine_sim: float
    normalized_l1: float
    feasibility_residual: float

    def as_row(self) -> list[str]:
        return [
            repr(float(v))
            for v in (
                self.lam,
                self.penalty_ratio,
                self.cosine_sim,
                self.normalized_l1,
                self.feasibility_residual,
            )
        ]


def penalty_ratio(cfg: PenaltyConfig, x_star: np.ndarray, reference: np.ndarray) -> float:
    """psi(B |x_star|) / psi(B |reference|) for the configured penalty."""
    num = psi_value(cfg, apply_operator(cfg.operator, np.abs(x_star)))
    den = psi_value(cfg, apply_operator(cfg.operator, np.abs(reference)))
    if den <= 0.0:
        raise DegenerateReference(f"reference penalty value {den} is not positive")
    return num / den


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """<a, b> / (||a|| ||b||); both arguments must be nonzero."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity needs two nonzero vectors")
    return float(np.dot(a, b) / (na * nb))


def normalized_l1(x_star: np.ndarray, reference: np.ndarray) -> float:
    """||x_star||_1 / ||reference||_1 over entrywise magnitudes."""
    den = float(np.sum(np.abs(reference)))
    if den <= 0.0:
        raise DegenerateReference("reference has zero l1 mass")
    return float(np.sum(np.abs(x_star))) / den


def db_magnitude(grid: np.ndarray, range_db: float = 100.0) -> np.ndarray:
    """20 log10 |entry|, peak-shifted to 0 and clipped to [-range_db, 0].

    Zero entries map to the floor. An all-zero grid returns a uniform floor
    and emits a warning instead of raising.
    """
    if range_db <= 0.0:
        raise ValueError(f"range_db must be > 0, got {range_db}")
    mag = np.abs(np.asarray(grid))
    peak = mag.max() if mag.size else 0.0
    if peak == 0.0:
        warnings.warn("all-zero grid: dB magnitude rendered at the floor", stacklevel=2)
        return np.full(mag.shape, -range_db)
    out = np.full(mag.shape, -range_db)
    nz = mag > 0.0
    with np.errstate(divide="ignore"):
        out[nz] = 20.0 * np.log10(mag[nz] / peak)
    return np.maximum(out, -range_db)


def write_sweep_csv(path, records) -> None:
    """Write sweep rows with the fixed header; '.' is the decimal separator."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_FIELDS)
        for rec in records:
            writer.writerow(rec.as_row())


def read_sweep_csv(path) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SWEEP_CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {header}")
        return [SweepRecord(*(float(v) for v in row)) for row in reader if row]
