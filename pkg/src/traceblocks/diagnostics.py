"""Partial-sum diagnostics and the machine-checkable verdict bundle.

Three series are tracked against the truncation size N:

* ``trace``:  sum of all eigenvalues, 1/n^2 + (n-1)/(2 n^(2+p)) per block;
* ``type_a``: eigenvector-route l1 bookkeeping sum_k lambda_{n,k} * l1(v_{n,k})^2,
  which dominates the harmonic series and diverges logarithmically;
* ``type_b``: free-decomposition bookkeeping 1/n^2 + (n-1)/(2 n^(1+p)) per
  block, which converges for every p > 1.

All partial sums are accumulated from n = N down to 1 (smallest terms first)
in double precision; the test suite pins them against extended-precision
oracles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from scipy.special import zeta

from . import bases, operators
from .errors import DomainError, ParameterError, UsageError

SERIES_LABELS = ("trace", "type_a", "type_b")

#: a type_a series counts as divergence-consistent when its slope against
#: ln N reaches this fraction of the guaranteed harmonic coefficient
SLOPE_FRACTION = 0.9

#: guaranteed coefficient of the harmonic lower bound per kind: the fourier
#: l1 norms are exactly sqrt(n), the hartley ones at least sqrt(n/2)
HARMONIC_COEFFICIENT = {"fourier": 1.0, "hartley": 0.5}


def _require_n(n_max: int) -> None:
    if n_max < 1:
        raise ParameterError(f"n_max must be a positive integer, got {n_max}")


def harmonic_number(n_max: int) -> float:
    """H_N = sum_{n<=N} 1/n, summed smallest terms first."""
    _require_n(n_max)
    return float((1.0 / np.arange(n_max, 0, -1, dtype=float)).sum())


def harmonic_numbers(n_max: int) -> np.ndarray:
    """H_1..H_N as one array (cumulative sweep; use harmonic_number for a
    single smallest-terms-first value)."""
    _require_n(n_max)
    return np.cumsum(1.0 / np.arange(1, n_max + 1, dtype=float))


def type_a_terms(n_max: int, p: float, kind: str) -> np.ndarray:
    """Per-block contributions sum_k lambda_{n,k} * l1(v_{n,k})^2, n = 1..n_max.

    Fourier blocks use the closed form 1/n + (n-1)/(2 n^(1+p)); Hartley blocks
    use the measured l1 profile from :mod:`traceblocks.bases`.
    """
    operators.require_p(p)
    bases.require_kind(kind)
    _require_n(n_max)
    if kind == "fourier":
        n = np.arange(1, n_max + 1, dtype=float)
        return 1.0 / n + (n - 1.0) / (2.0 * n ** (1.0 + p))
    bases._ensure_cas_totals(n_max)
    terms = np.empty(n_max)
    for n in range(1, n_max + 1):
        lam = operators.block_eigenvalues(n, p)
        l1 = bases.hartley_l1_profile(n)
        terms[n - 1] = float((lam * l1 ** 2)[::-1].sum())
    return terms


def type_a_partial_sum(n_max: int, p: float, kind: str) -> float:
    return float(type_a_terms(n_max, p, kind)[::-1].sum())


def type_b_terms(n_max: int, p: float) -> np.ndarray:
    """Per-block bookkeeping 1/n^2 + (n-1)/(2 n^(1+p)), n = 1..n_max."""
    operators.require_p(p)
    _require_n(n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    return 1.0 / n ** 2 + (n - 1.0) / (2.0 * n ** (1.0 + p))


def type_b_partial_sum(n_max: int, p: float) -> float:
    return float(type_b_terms(n_max, p)[::-1].sum())


def type_b_block_closed_form(n: int, p: float) -> float:
    """The n-th type_b term as a scalar."""
    operators.require_p(p)
    return 1.0 / n ** 2 + (n - 1.0) / (2.0 * n ** (1.0 + p))


_TERMS = {
    "trace": lambda n_max, p, kind: operators.trace_terms(n_max, p),
    "type_a": type_a_terms,
    "type_b": lambda n_max, p, kind: type_b_terms(n_max, p),
}


@dataclass(frozen=True)
class PartialSumSeries:
    label: str
    p: float
    kind: str
    points: tuple[tuple[int, float], ...]


def log_spaced(n_max: int, per_decade: int = 25, start: int = 1) -> list[int]:
    """Integer checkpoints, roughly per_decade per decade, within [start, n_max]."""
    _require_n(n_max)
    if start < 1 or start > n_max:
        raise ParameterError(f"start={start} must lie in [1, {n_max}]")
    exponents = np.arange(0.0, per_decade * np.log10(max(n_max, 2)) + 1.0)
    grid = {int(round(10.0 ** (e / per_decade))) for e in exponents}
    return sorted(v for v in grid | {start, n_max} if start <= v <= n_max)


def partial_sum_series(label: str, p: float, kind: str,
                       checkpoints: list[int]) -> PartialSumSeries:
    """Series of smallest-terms-first partial sums at the given checkpoints."""
    if label not in SERIES_LABELS:
        raise ParameterError(f"unknown series label {label!r}")
    if not checkpoints:
        raise ParameterError("need at least one checkpoint")
    ns = sorted(set(int(v) for v in checkpoints))
    terms = _TERMS[label](ns[-1], p, kind)
    points = tuple((n, float(terms[:n][::-1].sum())) for n in ns)
    return PartialSumSeries(label, p, kind, points)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float


def divergence_fit(series: PartialSumSeries) -> FitResult:
    """Least-squares fit of S(N) against ln N.

    A divergence-consistent type_a series has slope near its harmonic
    coefficient; a convergent series has slope near zero.
    """
    pts = series.points
    if len(pts) < 10:
        raise UsageError(f"need at least 10 points to fit, got {len(pts)}")
    n = np.array([q[0] for q in pts], dtype=float)
    s = np.array([q[1] for q in pts], dtype=float)
    if n.max() < 10 * n.min():
        raise UsageError(
            f"checkpoints must span at least a 10x range, got [{n.min():g}, {n.max():g}]")
    x = np.log(n)
    slope, intercept = np.polyfit(x, s, 1)
    ss_res = float(((s - (slope * x + intercept)) ** 2).sum())
    ss_tot = float(((s - s.mean()) ** 2).sum())
    # variance at roundoff scale means a constant series: a perfect flat fit
    degenerate = (1e-14 * max(1.0, float(np.abs(s).max()))) ** 2 * len(s)
    if ss_tot <= degenerate:
        r2 = 1.0 if ss_res <= degenerate else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return FitResult(float(slope), float(intercept), float(r2))


# --- explicit type-B decomposition --------------------------------------------


@dataclass(frozen=True, eq=False)
class TypeBDecomposition:
    """2n-1 scaled vectors whose rank-one sum rebuilds block n.

    n identity-part vectors n^{-3/2} delta_l plus n-1 correction vectors
    sqrt(k/n^{3+p}) v_{n,k}; the k = 0 correction is the zero vector and is
    dropped.
    """

    n: int
    p: float
    kind: str
    vectors: tuple[np.ndarray, ...]


def type_b_decomposition(n: int, p: float, kind: str) -> TypeBDecomposition:
    operators.require_p(p)
    bases.require_kind(kind)
    if n < 1:
        raise DomainError(f"block size must be a positive integer, got n={n}")
    vectors: list[np.ndarray] = []
    scale = n ** -1.5
    for l in range(n):
        v = np.zeros(n)
        v[l] = scale
        vectors.append(v)
    for k in range(1, n):
        weight = np.sqrt(k / float(n) ** (3.0 + p))
        vectors.append(weight * bases.basis_vector(n, k, kind).entries)
    return TypeBDecomposition(n, p, kind, tuple(vectors))


def reconstruction(decomp: TypeBDecomposition) -> np.ndarray:
    """sum_v v (x) conj(v) over the decomposition's vectors."""
    dtype = complex if decomp.kind == "fourier" else float
    acc = np.zeros((decomp.n, decomp.n), dtype=dtype)
    for v in decomp.vectors:
        acc += np.outer(v, np.conj(v))
    return acc


def reconstruction_deviation(decomp: TypeBDecomposition) -> float:
    """Max-entry deviation of the rank-one sum from the assembled block."""
    block = operators.build_block(decomp.n, decomp.p, decomp.kind)
    return float(np.abs(reconstruction(decomp) - block.matrix).max())


def l1_weighted_sum(decomp: TypeBDecomposition) -> float:
    """sum_v l1(v)^2; equals 1/n^2 + (n-1)/(2 n^(1+p)) exactly for fourier,
    and is bounded by it (within a factor of two on the correction part) for
    hartley."""
    return float(sum(np.abs(v).sum() ** 2 for v in decomp.vectors))


# --- the verdict bundle ---------------------------------------------------------


@dataclass(frozen=True)
class CounterexampleCertificate:
    """Numeric evidence that the family is type_b-summable but type_a-divergent.

    Divergence is evidenced, never proved, at truncation scale; the verdict
    wording is "divergence-consistent".  The criteria (tail-bound rule, slope
    threshold) are recorded so downstream readers see them.
    """

    p: float
    n_max: int
    kind: str
    trace_value: float
    trace_limit: float
    trace_tail_bound: float
    type_b_value: float
    type_b_limit: float
    type_b_tail_bound: float
    type_a_value: float
    type_a_lower_bound: float
    divergence_slope: float | None
    trace_finite_evidence: bool
    type_b_convergent_evidence: bool
    type_a_divergent_evidence: bool
    criteria: dict


def _fit_window(n_max: int) -> list[int] | None:
    if n_max < 10:
        return None
    return log_spaced(n_max, start=max(1, n_max // 20))


def make_certificate(n_max: int, p: float, kind: str) -> CounterexampleCertificate:
    operators.require_p(p)
    bases.require_kind(kind)
    _require_n(n_max)

    trace_value = operators.trace_closed_form(n_max, p)
    type_b_value = type_b_partial_sum(n_max, p)
    type_a_value = type_a_partial_sum(n_max, p, kind)

    coefficient = HARMONIC_COEFFICIENT[kind]
    type_a_lower_bound = coefficient * harmonic_number(n_max)

    # closed-form limits and analytic tail bounds, valid for every p > 1
    trace_limit = float(zeta(2.0) + 0.5 * (zeta(1.0 + p) - zeta(2.0 + p)))
    trace_tail_bound = 1.0 / n_max + n_max ** (-p) / (2.0 * p)
    type_b_limit = float(zeta(2.0) + 0.5 * (zeta(p) - zeta(1.0 + p)))
    type_b_tail_bound = max(2.0 / n_max,
                            1.0 / n_max + n_max ** (1.0 - p) / (2.0 * (p - 1.0)))

    slope: float | None = None
    window = _fit_window(n_max)
    if window is not None:
        slope = divergence_fit(
            partial_sum_series("type_a", p, kind, window)).slope

    trace_gap = trace_limit - trace_value
    type_b_gap = type_b_limit - type_b_value
    slope_threshold = SLOPE_FRACTION * coefficient
    slope_ok = True if slope is None else slope >= slope_threshold

    cert = CounterexampleCertificate(
        p=p,
        n_max=n_max,
        kind=kind,
        trace_value=trace_value,
        trace_limit=trace_limit,
        trace_tail_bound=trace_tail_bound,
        type_b_value=type_b_value,
        type_b_limit=type_b_limit,
        type_b_tail_bound=type_b_tail_bound,
        type_a_value=type_a_value,
        type_a_lower_bound=type_a_lower_bound,
        divergence_slope=slope,
        trace_finite_evidence=bool(
            -1e-9 <= trace_gap <= trace_tail_bound + 1e-9),
        type_b_convergent_evidence=bool(
            -1e-9 <= type_b_gap <= type_b_tail_bound + 1e-9),
        type_a_divergent_evidence=bool(
            type_a_value >= type_a_lower_bound - 1e-9 and slope_ok),
        criteria={
            "trace_tail_rule": "1/N + N^(-p)/(2p)",
            "type_b_tail_rule": "max(2/N, 1/N + N^(1-p)/(2(p-1)))",
            "type_a_lower_bound_rule": "coefficient * H_N",
            "harmonic_coefficient": coefficient,
            "slope_threshold": slope_threshold,
            "fit_window": [window[0], window[-1]] if window else None,
            "wording": "divergence-consistent at truncation scale",
        },
    )
    return cert


# --- emission -------------------------------------------------------------------


def _round15(x: float) -> float:
    return float(f"{x:.15g}")


def _jsonable(value):
    if value is None:
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _round15(float(value))
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def certificate_to_dict(cert: CounterexampleCertificate,
                        config: dict | None = None) -> dict:
    """JSON-ready dictionary; floats carry 15 significant digits."""
    doc = {
        "p": cert.p,
        "n_max": cert.n_max,
        "kind": cert.kind,
        "trace_value": cert.trace_value,
        "trace_limit": cert.trace_limit,
        "trace_tail_bound": cert.trace_tail_bound,
        "type_b_value": cert.type_b_value,
        "type_b_limit": cert.type_b_limit,
        "type_b_tail_bound": cert.type_b_tail_bound,
        "type_a_value": cert.type_a_value,
        "type_a_lower_bound": cert.type_a_lower_bound,
        "divergence_slope": cert.divergence_slope,
        "trace_finite_evidence": cert.trace_finite_evidence,
        "type_b_convergent_evidence": cert.type_b_convergent_evidence,
        "type_a_divergent_evidence": cert.type_a_divergent_evidence,
        "criteria": cert.criteria,
    }
    if config is not None:
        doc["config"] = config
    return _jsonable(doc)


def write_certificate_json(cert: CounterexampleCertificate, stream: TextIO,
                           config: dict | None = None) -> None:
    json.dump(certificate_to_dict(cert, config), stream,
              indent=2, sort_keys=True)
    stream.write("\n")


def write_series_csv(series_list: list[PartialSumSeries], stream: TextIO) -> None:
    """CSV with header ``N,value,label,p,kind`` and one row per point."""
    stream.write("N,value,label,p,kind\n")
    for series in series_list:
        for n, value in series.points:
            stream.write(
                f"{n},{value:.15g},{series.label},{series.p:.15g},{series.kind}\n")
