"""Block-diagonal truncated operators with eigenvalue law (1 + k/n^p)/n^3.

Block n is the rank-one sum ``sum_k lambda_{n,k} v_{n,k} (x) conj(v_{n,k})``
over the Fourier or Hartley family of size n; the truncated operator is the
direct sum of blocks n = 1..N.  Blocks are stored densely and independently;
the global matrix is only materialized on explicit request below the
configured dimension cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from . import bases
from .errors import (DomainError, NumericalError, ParameterError,
                     ResourceLimitError)

#: default cap on the operator dimension N(N+1)/2; 20100 corresponds to N = 200
DIM_CAP_DEFAULT = 20100


def require_p(p: float) -> None:
    if not p > 1:
        raise ParameterError(f"spectral parameter must satisfy p > 1, got p={p}")


def eigenvalue(n: int, k: int, p: float) -> float:
    """(1 + k/n^p) / n^3."""
    require_p(p)
    bases.require_index(n, k)
    return (1.0 + k / n ** p) / n ** 3


def block_eigenvalues(n: int, p: float) -> np.ndarray:
    """All n eigenvalues of block n, ascending in k."""
    require_p(p)
    if n < 1:
        raise DomainError(f"block size must be a positive integer, got n={n}")
    return (1.0 + np.arange(n) / n ** p) / n ** 3


@dataclass(frozen=True)
class EigenSpec:
    """One (n, k) eigenvalue of the family, with its value carried along."""

    n: int
    k: int
    p: float
    value: float

    def __post_init__(self) -> None:
        bases.require_index(self.n, self.k)
        require_p(self.p)
        expected = (1.0 + self.k / self.n ** self.p) / self.n ** 3
        if abs(self.value - expected) > 1e-15 * expected:
            raise ParameterError(
                f"eigenvalue {self.value!r} does not match (1 + k/n^p)/n^3 "
                f"for (n={self.n}, k={self.k}, p={self.p})")

    @classmethod
    def from_indices(cls, n: int, k: int, p: float) -> "EigenSpec":
        return cls(n, k, p, eigenvalue(n, k, p))


def block_specs(n_max: int, p: float) -> list[EigenSpec]:
    """EigenSpecs for every (n, k) with n <= n_max, in global index order."""
    return [EigenSpec.from_indices(n, k, p)
            for n in range(1, n_max + 1) for k in range(n)]


@dataclass(frozen=True, eq=False)
class Block:
    n: int
    p: float
    kind: str
    matrix: np.ndarray


def build_block(n: int, p: float, kind: str) -> Block:
    """Dense n x n block equal to the weighted rank-one sum over the family."""
    lam = block_eigenvalues(n, p)
    V = bases.family_matrix(n, kind)
    matrix = (V * lam) @ V.conj().T
    return Block(n, p, kind, matrix)


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    n_max: int
    p: float
    kind: str
    blocks: tuple[Block, ...]
    dimension: int


def operator_dimension(n_max: int) -> int:
    return n_max * (n_max + 1) // 2


def assemble(n_max: int, p: float, kind: str,
             cap: int = DIM_CAP_DEFAULT) -> TruncatedOperator:
    """Direct sum of blocks n = 1..n_max; block n occupies global coordinates
    n(n-1)/2 + 1 .. n(n+1)/2 (1-based)."""
    require_p(p)
    bases.require_kind(kind)
    if n_max < 1:
        raise ParameterError(f"n_max must be a positive integer, got {n_max}")
    dim = operator_dimension(n_max)
    if dim > cap:
        raise ResourceLimitError(
            f"operator dimension {dim} (n_max={n_max}) exceeds the cap {cap}; "
            f"set OPSPEC_DIM_CAP to at least {dim} to allow this")
    blocks = tuple(build_block(n, p, kind) for n in range(1, n_max + 1))
    return TruncatedOperator(n_max, p, kind, blocks, dim)


def global_index(n: int, l: int) -> int:
    """1-based global position of in-block coordinate l (0-based) of block n."""
    bases.require_index(n, l)
    return n * (n - 1) // 2 + l + 1


def block_coords(index: int) -> tuple[int, int]:
    """Inverse of :func:`global_index`: 1-based global index -> (n, l)."""
    if index < 1:
        raise DomainError(f"global index must be >= 1, got {index}")
    n = (math.isqrt(8 * index - 7) + 1) // 2
    return n, index - n * (n - 1) // 2 - 1


def global_matrix(op: TruncatedOperator) -> np.ndarray:
    """Dense dimension x dimension matrix; real for hartley, complex for fourier."""
    dtype = float if op.kind == "hartley" else complex
    out = np.zeros((op.dimension, op.dimension), dtype=dtype)
    for b in op.blocks:
        start = b.n * (b.n - 1) // 2
        out[start:start + b.n, start:start + b.n] = b.matrix
    return out


def trace_matrix(op: TruncatedOperator) -> float:
    """Sum of the diagonal entries of all blocks."""
    return float(sum(np.trace(b.matrix).real for b in op.blocks))


def trace_terms(n_max: int, p: float) -> np.ndarray:
    """Per-block closed-form traces 1/n^2 + (n-1)/(2 n^(2+p)), n = 1..n_max."""
    require_p(p)
    n = np.arange(1, n_max + 1, dtype=float)
    return 1.0 / n ** 2 + (n - 1.0) / (2.0 * n ** (2.0 + p))


def trace_closed_form(n_max: int, p: float) -> float:
    """sum_{n<=n_max} (1/n^3)(n + n(n-1)/(2 n^p)), summed smallest terms first."""
    return float(trace_terms(n_max, p)[::-1].sum())


def eigendecompose_block(block: Block) -> tuple[np.ndarray, np.ndarray]:
    """Full Hermitian eigendecomposition (values ascending, vectors as columns)."""
    try:
        w, V = np.linalg.eigh(block.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed for block n={block.n}: {exc}") from exc
    return w, V


def eigen_recovery(block: Block) -> tuple[float, float]:
    """(max |computed - formula| eigenvalue deviation, min eigenvector overlap).

    Overlap is |<computed, expected>|, which quotients out the unimodular
    (fourier) or sign (hartley) ambiguity of eigenvectors.  Pairing by
    ascending eigenvalue is unambiguous because lambda_{n,k} is strictly
    increasing in k within a block.
    """
    w, V = eigendecompose_block(block)
    expected = block_eigenvalues(block.n, block.p)
    value_dev = float(np.abs(w - expected).max())
    F = bases.family_matrix(block.n, block.kind)
    overlaps = np.abs(np.einsum("ij,ij->j", F.conj(), V))
    return value_dev, float(overlaps.min())


def block_min_eigenvalue(block: Block) -> float:
    return float(np.linalg.eigvalsh(block.matrix)[0])


def eigenvalue_collisions(
    n_max: int, p: float, rel_tol: float = 1e-15,
) -> list[tuple[tuple[int, int], tuple[int, int], float]]:
    """All pairs (n,k) != (n',k') with |lambda - lambda'| < rel_tol * max(...).

    An empty list certifies eigenvalue simplicity at this truncation.  The
    threshold is relative because the values span many orders of magnitude.
    """
    require_p(p)
    pairs = [(n, k) for n in range(1, n_max + 1) for k in range(n)]
    values = np.concatenate([block_eigenvalues(n, p)
                             for n in range(1, n_max + 1)])
    order = np.argsort(values, kind="stable")
    sv = values[order]
    collisions = []
    for i in range(len(sv)):
        j = i + 1
        while j < len(sv) and sv[j] - sv[i] < rel_tol * sv[j]:
            collisions.append((pairs[order[i]], pairs[order[j]],
                               float(sv[j] - sv[i])))
            j += 1
    return collisions


def entrywise_abs_sum(op: TruncatedOperator) -> float:
    """Sum of |entry| over all block entries (off-block entries are zero)."""
    return float(sum(np.abs(b.matrix).sum() for b in op.blocks))


# --- CSV export ---------------------------------------------------------------

_CSV_HEADER = "row,col,real,imag\n"


def write_block_csv(block: Block, stream: TextIO) -> None:
    """One row per entry, row-major, 1-based in-block coordinates."""
    stream.write(_CSV_HEADER)
    m = np.asarray(block.matrix, dtype=complex)
    for r in range(block.n):
        for c in range(block.n):
            v = m[r, c]
            stream.write(f"{r + 1},{c + 1},{v.real:.17g},{v.imag:.17g}\n")


def write_global_csv(op: TruncatedOperator, stream: TextIO) -> None:
    """Block entries of the global matrix, ascending n then row-major, with
    1-based global coordinates.  Off-block zeros are implied and not emitted."""
    stream.write(_CSV_HEADER)
    for b in op.blocks:
        start = b.n * (b.n - 1) // 2
        m = np.asarray(b.matrix, dtype=complex)
        for r in range(b.n):
            for c in range(b.n):
                v = m[r, c]
                stream.write(
                    f"{start + r + 1},{start + c + 1},{v.real:.17g},{v.imag:.17g}\n")
