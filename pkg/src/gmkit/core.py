"""Domain types and the sparse ternary code primitives.

A signature is a unit-norm column of a real d x N matrix.  Codes live in
{-1, 0, +1}^l with exactly ``sparsity`` nonzero symbols; they are produced by
projecting onto an orthonormal-column matrix and keeping the largest
magnitudes.  Everything here is immutable and side-effect free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    InvalidInputError,
    InvalidSparsityError,
)

UNIT_NORM_TOL = 1e-6
ORTHONORMAL_TOL = 1e-8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SignatureMatrix:
    """Enrolled signatures, one unit-norm column per enrollee (d x N)."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionError(f"signature matrix must be 2-D and nonempty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("signature matrix contains non-finite entries")
        norms = np.linalg.norm(a, axis=0)
        worst = float(np.max(np.abs(norms - 1.0)))
        if worst > UNIT_NORM_TOL:
            raise InvalidInputError(f"signature columns must have unit norm (worst deviation {worst:.3g})")
        object.__setattr__(self, "data", _frozen(a))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def num_signatures(self) -> int:
        return self.data.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.data[:, i]


@dataclass(frozen=True)
class ProjectionMatrix:
    """Real d x l matrix with orthonormal columns, l < d."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionError(f"projection must be 2-D, got shape {a.shape}")
        d, code_len = a.shape
        if not code_len < d:
            raise DimensionError(f"projection needs fewer columns than rows, got {d} x {code_len}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("projection contains non-finite entries")
        gram = a.T @ a
        worst = float(np.max(np.abs(gram - np.eye(code_len))))
        if worst > ORTHONORMAL_TOL:
            raise InvalidInputError(f"projection columns must be orthonormal (worst deviation {worst:.3g})")
        object.__setattr__(self, "data", _frozen(a))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def code_length(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class TernaryCode:
    """Length-l vector over {-1, 0, +1} with exactly ``sparsity`` nonzeros."""

    symbols: np.ndarray
    sparsity: int

    def __post_init__(self):
        s = np.asarray(self.symbols)
        if s.ndim != 1:
            raise DimensionError(f"code must be 1-D, got shape {s.shape}")
        if not np.all(np.isin(s, (-1, 0, 1))):
            raise InvalidInputError("code symbols must lie in {-1, 0, +1}")
        s = s.astype(np.int8)
        if not 1 <= self.sparsity < s.size:
            raise InvalidSparsityError(f"need 1 <= sparsity < length, got sparsity={self.sparsity} length={s.size}")
        nnz = int(np.count_nonzero(s))
        if nnz != self.sparsity:
            raise InvalidSparsityError(f"code has {nnz} nonzeros, declared sparsity {self.sparsity}")
        object.__setattr__(self, "symbols", _frozen(s))

    @property
    def length(self) -> int:
        return self.symbols.size

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.symbols)


@dataclass(frozen=True)
class ModelConfig:
    """Hyper-parameters of the joint embedding / grouping optimization.

    ``within_weight`` and ``between_weight`` weigh the within-group and
    between-group scatter terms; the grouping step rescales codes by
    within/(within - between), so ``within_weight > between_weight > 0`` is
    required.

    ``convergence_tol`` stops training early when the total objective moves
    less than the tolerance between outer iterations.  It defaults to 0 (no
    early stop): the grouping step reseeds its clustering every iteration,
    so transient objective ties are common and do not mean a fixed point.
    """

    code_length: int
    sparsity: int
    num_groups: int
    within_weight: float = 1.0
    between_weight: float = 0.1
    max_outer_iters: int = 30
    convergence_tol: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.sparsity < self.code_length:
            raise ConfigError(f"need 1 <= sparsity < code_length, got {self.sparsity} vs {self.code_length}")
        if self.num_groups < 1:
            raise ConfigError("num_groups must be positive")
        if not self.within_weight > self.between_weight > 0:
            raise ConfigError(
                f"need within_weight > between_weight > 0, got {self.within_weight} vs {self.between_weight}"
            )
        if self.max_outer_iters < 1:
            raise ConfigError("max_outer_iters must be positive")
        if self.convergence_tol < 0:
            raise ConfigError("convergence_tol must be nonnegative")


def ternarize_dense(values: np.ndarray, sparsity: int) -> np.ndarray:
    """Ternary quantization of a real vector, returned as a raw int8 array.

    The ``sparsity`` largest-magnitude components become +/-1 by sign, the
    rest 0.  Ties are broken toward the lowest index and sign(0) is +1, so
    the result is deterministic for any input.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("cannot ternarize non-finite values")
    if not 1 <= sparsity < v.size:
        raise InvalidSparsityError(f"need 1 <= sparsity < length, got sparsity={sparsity} length={v.size}")
    # stable sort on -|v|: equal magnitudes keep ascending index order
    order = np.argsort(-np.abs(v), kind="stable")
    keep = order[:sparsity]
    out = np.zeros(v.size, dtype=np.int8)
    out[keep] = np.where(v[keep] < 0, -1, 1)
    return out


def ternarize(values: np.ndarray, sparsity: int) -> TernaryCode:
    """Quantize a real vector to a :class:`TernaryCode` with exact sparsity."""
    return TernaryCode(ternarize_dense(values, sparsity), sparsity)


def ternarize_columns(matrix: np.ndarray, sparsity: int) -> np.ndarray:
    """Columnwise ternarization of an l x N real matrix (int8 result)."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    return np.column_stack([ternarize_dense(m[:, j], sparsity) for j in range(m.shape[1])])


def embed(projection: ProjectionMatrix, signature: np.ndarray, sparsity: int) -> TernaryCode:
    """Sparsifying transform coding: ternarize the projection of a signature."""
    x = np.asarray(signature, dtype=np.float64)
    if x.ndim != 1 or x.size != projection.dim:
        raise DimensionError(f"signature of length {x.size} does not match projection rows {projection.dim}")
    return ternarize(projection.data.T @ x, sparsity)


def correlation(a: TernaryCode, b: TernaryCode) -> int:
    """Inner product of two ternary codes (in [-S, S] for exactly-S codes)."""
    if a.length != b.length:
        raise DimensionError(f"code lengths differ: {a.length} vs {b.length}")
    return int(a.symbols.astype(np.int64) @ b.symbols.astype(np.int64))


def squared_distance(a: TernaryCode, b: TernaryCode) -> int:
    """Integer squared Euclidean distance between two ternary codes.

    For codes with exactly S nonzeros this equals 2S - 2*correlation(a, b)
    and ranges over [0, 4S] (opposed signs on a shared support reach 4S).
    """
    if a.length != b.length:
        raise DimensionError(f"code lengths differ: {a.length} vs {b.length}")
    diff = a.symbols.astype(np.int64) - b.symbols.astype(np.int64)
    return int(diff @ diff)
