"""Synthetic signature generation, dataset splits and matrix file IO.

The generator stands in for real biometric feature pipelines: every identity
gets a mean drawn uniformly on the unit sphere and every sample is the unit
normalization of mean + Gaussian noise.  One sample per enrolled identity is
enrolled; the remaining samples become genuine queries; impostor identities
are generated separately and never enrolled.

Matrices are stored as plain CSV, one signature per row, full round-trip
precision, with an optional leading header line ``# d=<d> n=<n>``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .core import SignatureMatrix, UNIT_NORM_TOL
from .errors import ConfigError, InvalidInputError, ParseError

ENROLLED_FILE = "enrolled.csv"
GENUINE_FILE = "genuine.csv"
IMPOSTORS_FILE = "impostors.csv"


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the synthetic signature family."""

    num_identities: int
    samples_per_identity: int
    dim: int
    noise_sigma: float
    impostor_fraction: float
    seed: int = 0

    def __post_init__(self):
        if self.num_identities < 1 or self.dim < 1:
            raise ConfigError("num_identities and dim must be positive")
        if self.samples_per_identity < 2:
            raise ConfigError("samples_per_identity must be at least 2 (one enrolled + one genuine query)")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")
        if not 0 < self.impostor_fraction < 1:
            raise ConfigError("impostor_fraction must lie in (0, 1)")

    @property
    def num_impostor_identities(self) -> int:
        return max(1, round(self.num_identities * self.impostor_fraction))


@dataclass(frozen=True)
class Dataset:
    """Enrolled signatures plus held-out genuine and impostor queries.

    ``genuine_queries`` pairs each query vector with the enrolled column
    index of its identity.  Impostor identities are disjoint from enrolled
    ones by construction.
    """

    enrolled: SignatureMatrix
    genuine_queries: tuple[tuple[np.ndarray, int], ...]
    impostors: tuple[np.ndarray, ...]

    def __post_init__(self):
        d = self.enrolled.dim
        n = self.enrolled.num_signatures
        for vec, idx in self.genuine_queries:
            if vec.shape != (d,):
                raise ConfigError("genuine query dimension mismatch")
            if not 0 <= idx < n:
                raise ConfigError(f"genuine query identity {idx} out of range")
            if abs(float(np.linalg.norm(vec)) - 1.0) > UNIT_NORM_TOL:
                raise InvalidInputError("genuine query is not unit norm")
        for vec in self.impostors:
            if vec.shape != (d,):
                raise ConfigError("impostor dimension mismatch")
            if abs(float(np.linalg.norm(vec)) - 1.0) > UNIT_NORM_TOL:
                raise InvalidInputError("impostor query is not unit norm")


def _unit(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise InvalidInputError("cannot normalize a zero vector")
    return v / norm


def generate(spec: SyntheticSpec) -> Dataset:
    """Draw a full dataset; bit-deterministic under ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    enrolled_cols = []
    genuine = []
    for i in range(spec.num_identities):
        mean = _unit(rng.standard_normal(spec.dim))
        samples = [
            _unit(mean + spec.noise_sigma * rng.standard_normal(spec.dim))
            for _ in range(spec.samples_per_identity)
        ]
        enrolled_cols.append(samples[0])
        genuine.extend((s, i) for s in samples[1:])
    impostors = []
    for _ in range(spec.num_impostor_identities):
        mean = _unit(rng.standard_normal(spec.dim))
        impostors.extend(
            _unit(mean + spec.noise_sigma * rng.standard_normal(spec.dim))
            for _ in range(spec.samples_per_identity)
        )
    return Dataset(SignatureMatrix(np.column_stack(enrolled_cols)), tuple(genuine), tuple(impostors))


def _format_row(row: np.ndarray) -> str:
    return ",".join(repr(float(v)) for v in row)


def save_matrix(path: str, matrix: np.ndarray, header: bool = True) -> None:
    """Write a matrix as CSV, one row per line, shortest round-trip floats."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ParseError(f"can only save 2-D matrices, got shape {m.shape}")
    lines = []
    if header:
        lines.append(f"# d={m.shape[1]} n={m.shape[0]}")
    lines.extend(_format_row(row) for row in m)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_matrix(path: str) -> np.ndarray:
    """Read a CSV matrix written by :func:`save_matrix`.

    Raises :class:`ParseError` naming the offending row (and column for bad
    tokens) on empty files, ragged rows or non-numeric entries.
    """
    with open(path, "r", encoding="ascii") as fh:
        raw = fh.read()
    rows: list[list[float]] = []
    width = None
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        values = []
        for colno, token in enumerate(line.split(","), start=1):
            try:
                values.append(float(token))
            except ValueError:
                raise ParseError(f"{path}: row {lineno}, column {colno}: bad number {token!r}") from None
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"{path}: row {lineno} has {len(values)} columns, expected {width}")
        rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def save_dataset(directory: str, dataset: Dataset) -> None:
    """Write the dataset bundle (enrolled / genuine / impostors CSVs)."""
    os.makedirs(directory, exist_ok=True)
    save_matrix(os.path.join(directory, ENROLLED_FILE), dataset.enrolled.data.T)
    genuine_rows = [
        [float(idx)] + [float(v) for v in vec] for vec, idx in dataset.genuine_queries
    ]
    d = dataset.enrolled.dim
    with open(os.path.join(directory, GENUINE_FILE), "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"# identity column + d={d} coordinates, n={len(genuine_rows)}\n")
        for row in genuine_rows:
            fh.write(str(int(row[0])) + "," + _format_row(np.array(row[1:])) + "\n")
    save_matrix(
        os.path.join(directory, IMPOSTORS_FILE),
        np.vstack(dataset.impostors) if dataset.impostors else np.empty((0, d)),
    )


def load_dataset(directory: str) -> Dataset:
    """Read a dataset bundle written by :func:`save_dataset`."""
    enrolled = SignatureMatrix(load_matrix(os.path.join(directory, ENROLLED_FILE)).T)
    genuine_raw = load_matrix(os.path.join(directory, GENUINE_FILE))
    genuine = tuple((row[1:].copy(), int(row[0])) for row in genuine_raw)
    impostors_raw = load_matrix(os.path.join(directory, IMPOSTORS_FILE))
    impostors = tuple(row.copy() for row in impostors_raw)
    return Dataset(enrolled, genuine, impostors)
