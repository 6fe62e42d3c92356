"""Sampled time-frequency layer on a periodic grid.

Functions live on L equispaced samples of [0, period); inner products carry
the step weight so grid objects track their continuum counterparts.  The
module provides periodized Gaussian windows, full-grid STFTs with the exact
discrete energy identity, canonical tight Gabor windows at redundancy 2
(a*b = 1/2), the cosine/sine Wilson family built from the tight window, the
block eigenfunctions h_{n,k} as Hartley-weighted member combinations, and the
expansion of rank-one kernels in the tensor Wilson basis.

Discrete modulation norms are Riemann sums over the sampled time-frequency
plane with cell area step/period; all l1-style assertions downstream go
through the Wilson coefficient route (exact finite sums), with the STFT route
used for cross-validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import sqrt
from typing import Sequence, TextIO

import numpy as np

from . import bases, operators
from .errors import (DomainError, NumericalError, ParameterError, UsageError)

#: orthonormality budget for sampled Wilson families
GRAM_TOL = 1e-8


@dataclass(frozen=True)
class SampleGrid:
    """L equispaced samples of the circle of circumference ``period``."""

    period: float
    samples: int

    def __post_init__(self) -> None:
        if self.samples <= 0 or self.samples % 4:
            raise ParameterError(
                f"samples must be a positive multiple of 4, got {self.samples}")
        if self.period < 8:
            raise ParameterError(
                f"period must be at least 8 for window decay headroom, got {self.period}")

    @property
    def step(self) -> float:
        return self.period / self.samples

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.samples) * self.step


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: SampleGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.samples,):
            raise DomainError(
                f"expected {self.grid.samples} samples, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("sampled function has non-finite values")

    def inner(self, other: "SampledFunction") -> complex:
        """<f, g> = step * sum f * conj(g)."""
        _same_grid(self, other)
        return complex(self.grid.step * np.vdot(other.values, self.values))

    def norm(self) -> float:
        return float(np.sqrt(self.grid.step * (np.abs(self.values) ** 2).sum()))


def _same_grid(f: SampledFunction, g: SampledFunction) -> None:
    if f.grid != g.grid:
        raise UsageError("sampled functions live on different grids")


def sample_gaussian(grid: SampleGrid) -> SampledFunction:
    """Periodized unit-norm Gaussian exp(-pi x^2) centered at 0 (= period).

    With period >= 8 the r != 0 images contribute less than exp(-pi*(period/2)^2)
    relative to the peak, far below double precision.
    """
    x = grid.points
    acc = np.zeros(grid.samples)
    for r in range(-4, 5):
        acc += np.exp(-np.pi * (x - r * grid.period) ** 2)
    acc /= np.sqrt(grid.step * (acc ** 2).sum())
    return SampledFunction(grid, acc)


# --- STFT and modulation norms ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class StftMatrix:
    """coefficients[j, m] = V_g f(x_j, m/period) over the full grid."""

    grid: SampleGrid
    time_step: float
    freq_step: float
    coefficients: np.ndarray


def stft(f: SampledFunction, g: SampledFunction) -> StftMatrix:
    """V[j, m] = step * sum_t f[t] conj(g[t - j]) exp(-2 pi i m t / L)."""
    _same_grid(f, g)
    L = f.grid.samples
    shifted = (np.arange(L)[None, :] - np.arange(L)[:, None]) % L
    windowed = f.values[None, :] * np.conj(g.values[shifted])
    coefficients = f.grid.step * np.fft.fft(windowed, axis=1)
    return StftMatrix(f.grid, f.grid.step, 1.0 / f.grid.period, coefficients)


def stft_energy(matrix: StftMatrix) -> float:
    """Riemann sum of |V|^2 over the sampled plane (cell area step/period).

    Equals ||f||^2 ||g||^2 exactly on the periodic grid, up to roundoff.
    """
    cell = matrix.time_step * matrix.freq_step
    return float(cell * (np.abs(matrix.coefficients) ** 2).sum())


def mp_norm_stft(f: SampledFunction, g: SampledFunction, p: int) -> float:
    """Riemann-sum modulation norm (integral of |V_g f|^p) ** (1/p), p in {1, 2}."""
    if p not in (1, 2):
        raise ParameterError(f"p must be 1 or 2, got {p}")
    matrix = stft(f, g)
    cell = matrix.time_step * matrix.freq_step
    return float((cell * (np.abs(matrix.coefficients) ** p).sum()) ** (1.0 / p))


# --- Gabor lattice and tight window ----------------------------------------------


def _lattice_geometry(grid: SampleGrid, a: float, b: float) -> tuple[int, int, int]:
    """(time shift in samples, number of time shifts, number of modulations)."""
    if abs(a * b - 0.5) > 1e-12:
        raise ParameterError(
            f"lattice must have redundancy 2 (a*b = 1/2), got a*b = {a * b}")
    step = grid.step
    shift_samples = a / step
    if abs(shift_samples - round(shift_samples)) > 1e-9:
        raise UsageError(
            f"time shift a={a} is not an integer multiple of the grid step {step}")
    inv_b_samples = (1.0 / b) / step
    if abs(inv_b_samples - round(inv_b_samples)) > 1e-9:
        raise UsageError(
            f"1/b = {1.0 / b} is not an integer multiple of the grid step {step}")
    n_time = grid.period / a
    if abs(n_time - round(n_time)) > 1e-9:
        raise UsageError(f"period/a = {n_time} must be an integer")
    n_freq = grid.samples / (grid.period * b)
    if abs(n_freq - round(n_freq)) > 1e-9:
        raise UsageError(
            f"samples/(period*b) = {n_freq} must be an integer")
    return int(round(shift_samples)), int(round(n_time)), int(round(n_freq))


def gabor_atoms(window: SampledFunction, a: float, b: float) -> np.ndarray:
    """Columns are the lattice atoms M_{mb} T_{na} window, time-major order."""
    grid = window.grid
    shift, n_time, n_freq = _lattice_geometry(grid, a, b)
    x = grid.points
    atoms = np.empty((grid.samples, n_time * n_freq), dtype=complex)
    col = 0
    for nt in range(n_time):
        translated = np.roll(window.values, nt * shift)
        for mf in range(n_freq):
            atoms[:, col] = translated * np.exp(2j * np.pi * (b * mf) * x)
            col += 1
    return atoms


def frame_operator(window: SampledFunction, a: float, b: float) -> np.ndarray:
    """Dense positive frame operator S of the lattice Gabor system.

    For real windows the modulation sum makes S exactly real symmetric; the
    tiny imaginary roundoff is dropped in that case.
    """
    atoms = gabor_atoms(window, a, b)
    S = window.grid.step * (atoms @ atoms.conj().T)
    if np.isrealobj(window.values):
        return S.real
    return S


def frame_operator_deviation(window: SampledFunction, a: float, b: float) -> float:
    """Max-entry deviation of the frame operator from the identity."""
    S = frame_operator(window, a, b)
    return float(np.abs(S - np.eye(window.grid.samples)).max())


def tight_window(g: SampledFunction, a: float, b: float) -> SampledFunction:
    """Canonical tight window S^{-1/2} g for the lattice (a, b), a*b = 1/2.

    The output's own frame operator is the identity up to roundoff, so its
    lattice coefficients satisfy sum |<f, atom>|^2 = ||f||^2.
    """
    S = frame_operator(g, a, b)
    try:
        w, U = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"frame operator eigendecomposition failed: {exc}") from exc
    if w[0] < 1e-10 * w[-1]:
        raise NumericalError(
            f"frame operator numerically singular: eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}]")
    inv_sqrt = (U * w ** -0.5) @ U.conj().T
    values = inv_sqrt @ g.values
    if np.isrealobj(g.values):
        values = values.real
    return SampledFunction(g.grid, values)


# --- Wilson family -----------------------------------------------------------------


@dataclass(frozen=True)
class WilsonLabel:
    """Two-index Wilson label.

    ``mod`` is the modulation index m >= 0.  For m = 0 the member is the
    integer translate by ``shift`` of the unit-norm window; for m >= 1 it is
    sqrt(2) * cos(2 pi m x) (shift + mod even) or sqrt(2) * sin(2 pi m x)
    (shift + mod odd) times the translate by ``shift``/2.
    """

    shift: int
    mod: int

    @property
    def flavor(self) -> str:
        if self.mod == 0:
            return "translate"
        return "cosine" if (self.shift + self.mod) % 2 == 0 else "sine"


def _wilson_geometry(grid: SampleGrid) -> tuple[int, int]:
    """(integer period, samples per half-integer translate)."""
    period = int(round(grid.period))
    if abs(grid.period - period) > 1e-12:
        raise UsageError(
            f"the Wilson enumeration needs an integer period, got {grid.period}")
    if grid.samples % (2 * period):
        raise UsageError(
            f"samples={grid.samples} must be a multiple of 2*period={2 * period}")
    return period, grid.samples // (2 * period)


def wilson_labels(grid: SampleGrid, count: int) -> list[WilsonLabel]:
    """First ``count`` labels ordered by (mod + |shift|), then (mod, shift).

    Signed shifts keep early members near the origin of the time-frequency
    plane: shift runs over [-period/2, period/2) for mod = 0 and over
    [-period, period) (half-integer units) for mod >= 1.
    """
    period, _ = _wilson_geometry(grid)
    nyquist = grid.samples // (2 * period)
    labels: list[WilsonLabel] = []
    shell = 0
    while len(labels) < count:
        for m in range(0, shell + 1):
            if m >= nyquist:
                raise UsageError(
                    f"count={count} needs modulation {m} at or beyond the grid "
                    f"Nyquist index {nyquist}")
            offset = shell - m
            reach = period if m >= 1 else period // 2
            candidates = [0] if offset == 0 else [-offset, offset]
            for l in candidates:
                if -reach <= l < reach:
                    labels.append(WilsonLabel(l, m))
        shell += 1
    return labels[:count]


@dataclass(frozen=True, eq=False)
class WilsonFamily:
    """Ordered orthonormal Wilson members w_1, w_2, ... on a periodic grid."""

    grid: SampleGrid
    window: SampledFunction
    labels: tuple[WilsonLabel, ...]
    members: tuple[SampledFunction, ...]
    member_matrix: np.ndarray
    gram_deviation: float

    def member(self, index: int) -> SampledFunction:
        """1-based access matching the w_1, w_2, ... enumeration."""
        if not 1 <= index <= len(self.members):
            raise DomainError(
                f"member index {index} out of range [1, {len(self.members)}]")
        return self.members[index - 1]

    def coefficients(self, f: SampledFunction) -> np.ndarray:
        """<f, w_i> for every member, as one array."""
        _same_grid(f, self.window)
        return self.grid.step * (self.member_matrix.conj() @ f.values)

    def residual(self, f: SampledFunction) -> float:
        """Relative distance of f from the numeric span of the members."""
        c = self.coefficients(f)
        rec = c @ self.member_matrix
        scale = float(np.linalg.norm(f.values))
        if scale == 0.0:
            return 0.0
        return float(np.linalg.norm(f.values - rec) / scale)


def wilson_family(window: SampledFunction, count: int) -> WilsonFamily:
    """Cosine/sine Wilson family built from a tight window at (a, b) = (1/2, 1).

    Accepts the identity-frame tight window and rescales it to unit norm
    internally; orthonormality of the members is verified numerically rather
    than assumed, and a Gram deviation above 1e-8 raises.
    """
    if count < 1:
        raise ParameterError(f"count must be a positive integer, got {count}")
    grid = window.grid
    if count > grid.samples // 2:
        raise UsageError(
            f"count={count} exceeds the grid capacity {grid.samples // 2}")
    _, half = _wilson_geometry(grid)
    u = window.values / window.norm()
    labels = wilson_labels(grid, count)
    x = grid.points
    rows = np.empty((count, grid.samples))
    for i, lab in enumerate(labels):
        if lab.mod == 0:
            rows[i] = np.roll(u, 2 * half * lab.shift)
        else:
            translated = np.roll(u, half * lab.shift)
            phase = 2.0 * np.pi * lab.mod * x
            trig = np.cos(phase) if lab.flavor == "cosine" else np.sin(phase)
            rows[i] = sqrt(2.0) * trig * translated
    gram = grid.step * (rows @ rows.T)
    deviation = float(np.abs(gram - np.eye(count)).max())
    if deviation > GRAM_TOL:
        raise NumericalError(
            f"wilson family gram deviation {deviation:.3e} exceeds {GRAM_TOL:.0e}")
    members = tuple(SampledFunction(grid, rows[i]) for i in range(count))
    return WilsonFamily(grid, SampledFunction(grid, u), tuple(labels),
                        members, rows, deviation)


# --- block eigenfunctions and kernel expansion ---------------------------------------


def build_h_nk(family: WilsonFamily, n: int, k: int) -> SampledFunction:
    """Hartley-weighted combination of members n(n-1)/2 + l + 1, l = 0..n-1."""
    bases.require_index(n, k)
    need = n * (n + 1) // 2
    if len(family.members) < need:
        raise UsageError(
            f"family has {len(family.members)} members; block n={n} needs {need}")
    coeffs = bases.hartley_vector(n, k).entries
    start = n * (n - 1) // 2
    values = coeffs @ family.member_matrix[start:start + n]
    return SampledFunction(family.grid, values)


def m1_coefficient_norm(f: SampledFunction, family: WilsonFamily) -> float:
    """sum_i |<f, w_i>| over the family members.

    Only meaningful for functions in the numeric span of the family; a
    relative projection residual above 1e-6 raises.
    """
    residual = family.residual(f)
    if residual > 1e-6:
        raise DomainError(
            f"function is outside the family span: relative residual {residual:.3e}")
    return float(np.abs(family.coefficients(f)).sum())


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Coefficients <kernel, w_m (x) conj(w_n)> of a rank-one eigen-sum kernel."""

    coefficients: np.ndarray
    specs: tuple[operators.EigenSpec, ...]


def kernel_expand(specs: Sequence[operators.EigenSpec],
                  family: WilsonFamily) -> KernelMatrix:
    """Expand sum lambda_{n,k} h_{n,k} (x) conj(h_{n,k}) in the tensor basis.

    The coefficient matrix equals the block-diagonal global matrix of the
    assembled hartley operator, up to the family's Gram deviation.
    """
    specs = tuple(specs)
    if not specs:
        raise ParameterError("need at least one eigenvalue spec")
    dim = max(spec.n * (spec.n + 1) // 2 for spec in specs)
    if len(family.members) < dim:
        raise UsageError(
            f"family has {len(family.members)} members; the expansion needs {dim}")
    out = np.zeros((dim, dim))
    for spec in specs:
        h = build_h_nk(family, spec.n, spec.k)
        c = family.coefficients(h)[:dim].real
        out += spec.value * np.outer(c, c)
    return KernelMatrix(out, specs)


def kernel_abs_sum(kernel: KernelMatrix) -> float:
    """Entrywise absolute coefficient sum (finite by construction)."""
    return float(np.abs(kernel.coefficients).sum())


# --- export ------------------------------------------------------------------------


def write_family_manifest(family: WilsonFamily, stream: TextIO) -> None:
    """JSON manifest: grid, lattice, enumeration map, measured Gram deviation."""
    doc = {
        "grid": {
            "period": family.grid.period,
            "samples": family.grid.samples,
            "step": family.grid.step,
        },
        "lattice": {"a": 0.5, "b": 1.0},
        "count": len(family.members),
        "gram_deviation": float(f"{family.gram_deviation:.15g}"),
        "enumeration": [
            {"index": i + 1, "shift": lab.shift, "mod": lab.mod,
             "flavor": lab.flavor}
            for i, lab in enumerate(family.labels)
        ],
    }
    json.dump(doc, stream, indent=2, sort_keys=True)
    stream.write("\n")


def write_members_csv(family: WilsonFamily, stream: TextIO) -> None:
    """member,sample,value rows for every member, sample-major within member."""
    stream.write("member,sample,value\n")
    for i, member in enumerate(family.members):
        for j, v in enumerate(member.values):
            stream.write(f"{i + 1},{j},{v:.17g}\n")


def write_kernel_csv(kernel: KernelMatrix, stream: TextIO) -> None:
    """m,n,real,imag rows in row-major order."""
    stream.write("m,n,real,imag\n")
    m = np.asarray(kernel.coefficients, dtype=complex)
    for r in range(m.shape[0]):
        for c in range(m.shape[1]):
            stream.write(f"{r + 1},{c + 1},{m[r, c].real:.17g},{m[r, c].imag:.17g}\n")
