"""Fourier and Hartley orthonormal families on blocks of size n.

Both families are indexed by a frequency k in [0, n).  Entries are evaluated
from exactly reduced angles 2*pi*((k*l) mod n)/n, which keeps Gram deviations
near machine precision up to n = 512.  The coordinate l1 norm (sum of entry
moduli) is the quantity the rest of the package tracks: it equals sqrt(n)
exactly for every Fourier vector and lies in [sqrt(n/2), sqrt(n)] for every
Hartley vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import DomainError, ParameterError

KINDS = ("fourier", "hartley")

#: absolute l1 tolerance is this factor times sqrt(n); l1 magnitudes grow as sqrt(n)
L1_TOL_SCALE = 1e-10


def require_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ParameterError(f"unknown basis kind {kind!r}; expected one of {KINDS}")


def require_index(n: int, k: int) -> None:
    if n < 1:
        raise DomainError(f"block size must be a positive integer, got n={n}")
    if not 0 <= k < n:
        raise DomainError(f"index k={k} out of range [0, {n - 1}] for block n={n}")


def _angles(n: int, k: int) -> np.ndarray:
    residues = (k * np.arange(n, dtype=np.int64)) % n
    return residues * (2.0 * np.pi / n)


@dataclass(frozen=True, eq=False)
class BasisVector:
    """One member of a block family, with entries stored densely."""

    n: int
    k: int
    kind: str
    entries: np.ndarray

    def __post_init__(self) -> None:
        require_kind(self.kind)
        require_index(self.n, self.k)
        if self.entries.shape != (self.n,):
            raise DomainError(
                f"expected {self.n} entries, got shape {self.entries.shape}")


def fourier_vector(n: int, k: int) -> BasisVector:
    """Unit vector with entries exp(-2*pi*i*k*l/n)/sqrt(n), l = 0..n-1."""
    require_index(n, k)
    entries = np.exp(-1j * _angles(n, k)) / sqrt(n)
    return BasisVector(n, k, "fourier", entries)


def hartley_vector(n: int, k: int) -> BasisVector:
    """Unit vector with entries (cos + sin)(2*pi*k*l/n)/sqrt(n), l = 0..n-1."""
    require_index(n, k)
    a = _angles(n, k)
    entries = (np.cos(a) + np.sin(a)) / sqrt(n)
    return BasisVector(n, k, "hartley", entries)


def basis_vector(n: int, k: int, kind: str) -> BasisVector:
    require_kind(kind)
    return fourier_vector(n, k) if kind == "fourier" else hartley_vector(n, k)


def family_matrix(n: int, kind: str) -> np.ndarray:
    """All n family vectors as the columns of an n x n matrix."""
    require_kind(kind)
    if n < 1:
        raise DomainError(f"block size must be a positive integer, got n={n}")
    idx = np.arange(n, dtype=np.int64)
    angles = (np.outer(idx, idx) % n) * (2.0 * np.pi / n)
    if kind == "fourier":
        return np.exp(-1j * angles) / sqrt(n)
    return (np.cos(angles) + np.sin(angles)) / sqrt(n)


def l1_norm(v: BasisVector) -> float:
    """Sum of entry moduli (the coordinate l1 norm of the vector)."""
    return float(np.abs(v.entries).sum())


def check_orthonormal(n: int, kind: str) -> float:
    """Max |<v_k, v_k'> - delta_kk'| over the family; compare to your tolerance."""
    V = family_matrix(n, kind)
    gram = V.conj().T @ V
    return float(np.abs(gram - np.eye(n)).max())


def resolution_of_identity(n: int, kind: str) -> float:
    """Max-entry deviation of sum_k v_k (x) conj(v_k) from the n x n identity."""
    V = family_matrix(n, kind)
    proj = V @ V.conj().T
    return float(np.abs(proj - np.eye(n)).max())


# --- fast Hartley l1 profile ------------------------------------------------
#
# The entries of h_{n,k} visit |cas(2*pi*j/m)| for j < m = n/gcd(k, n), each
# value exactly gcd(k, n) times, so a single table of cas totals serves every
# (n, k).  The table grows on demand; rebinding under the GIL keeps concurrent
# readers consistent.

_cas_totals = np.array([0.0, 1.0])


def _ensure_cas_totals(limit: int) -> np.ndarray:
    global _cas_totals
    table = _cas_totals
    if len(table) > limit:
        return table
    new = np.empty(limit + 1)
    new[: len(table)] = table
    for m in range(len(table), limit + 1):
        a = np.arange(m) * (2.0 * np.pi / m)
        new[m] = np.abs(np.cos(a) + np.sin(a)).sum()
    _cas_totals = new
    return new


def hartley_l1_profile(n: int) -> np.ndarray:
    """l1 norms of all n Hartley vectors of block n, k = 0..n-1.

    Exact rewrite of the direct entry sums using the gcd reduction above;
    cross-checked against :func:`l1_norm` in the test suite.
    """
    if n < 1:
        raise DomainError(f"block size must be a positive integer, got n={n}")
    totals = _ensure_cas_totals(n)
    d = np.gcd(np.arange(n, dtype=np.int64), n)
    return d * totals[n // d] / sqrt(n)


# --- l1 bound reports ---------------------------------------------------------


@dataclass(frozen=True)
class L1Report:
    n: int
    k: int
    kind: str
    l1_value: float
    lower_bound: float
    upper_bound: float
    within_bounds: bool


def l1_report_for_block(n: int, kind: str) -> list[L1Report]:
    """Measured l1 norms of one block family against the window bounds."""
    require_kind(kind)
    values = np.abs(family_matrix(n, kind)).sum(axis=0)
    lower = sqrt(n / 2.0) if kind == "hartley" else sqrt(n)
    upper = sqrt(n)
    tol = L1_TOL_SCALE * sqrt(n)
    return [
        L1Report(n, k, kind, float(v), lower, upper,
                 bool(lower - tol <= v <= upper + tol))
        for k, v in enumerate(values)
    ]


def l1_bounds_report(n_max: int) -> list[L1Report]:
    """Reports for every 1 <= n <= n_max, 0 <= k < n, both kinds."""
    if n_max < 1:
        raise DomainError(f"n_max must be a positive integer, got {n_max}")
    reports: list[L1Report] = []
    for n in range(1, n_max + 1):
        for kind in KINDS:
            reports.extend(l1_report_for_block(n, kind))
    return reports
