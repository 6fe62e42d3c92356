"""Command-line harness: verification suites, series emission, certificates,
and the sampled Wilson realization report.

Exit codes: 0 all checks pass, 1 numerical failure, 2 parameter/usage error,
3 I/O error.  Identical configuration and seed produce byte-identical output
files.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, bases, diagnostics, operators, timefreq
from .errors import (DomainError, NumericalError, ParameterError,
                     ResourceLimitError, UsageError)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_PARAMETER = 2
EXIT_IO = 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    p: float = 2.0
    n_max: int = 1
    kind: str = "fourier"
    tol: float | None = None
    out: str | None = None
    emit: str = "csv"
    grid: int = 512
    period: float = 16.0
    seed: int = 0
    dim_cap: int = operators.DIM_CAP_DEFAULT

    def __post_init__(self) -> None:
        operators.require_p(self.p)
        if self.n_max < 1:
            raise ParameterError(f"nmax must be a positive integer, got {self.n_max}")
        bases.require_kind(self.kind)
        if self.emit not in ("csv", "json"):
            raise ParameterError(f"emit must be csv or json, got {self.emit!r}")
        if self.tol is not None and not self.tol > 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")

    def echo(self) -> dict:
        doc = asdict(self)
        doc["version"] = __version__
        return doc


def _dim_cap() -> int:
    raw = os.environ.get("OPSPEC_DIM_CAP")
    if raw is None:
        return operators.DIM_CAP_DEFAULT
    try:
        return int(raw)
    except ValueError as exc:
        raise ParameterError(f"OPSPEC_DIM_CAP must be an integer, got {raw!r}") from exc


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as stream:
            yield stream


# --- verify -----------------------------------------------------------------------


def _suite_line(name: str, value: float, tol: float, ok: bool) -> str:
    status = "ok" if ok else "FAIL"
    return f"{name:<24} max deviation {value:.3e}  tol {tol:.1e}  {status}"


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    """Orthonormality, resolution-of-identity, l1-bounds, PSD, trace, and
    eigen-recovery suites over n = 1..nmax for the chosen kind."""
    tol_gram = config.tol if config.tol is not None else 1e-10
    gram_max = res_max = 0.0
    gram_at = res_at = 1
    l1_fourier_rel = 0.0
    l1_violation: tuple[int, int, float] | None = None
    psd_worst = 0.0  # most negative min eigenvalue, scaled by its bound
    psd_at = 1
    val_dev_max = 0.0
    overlap_min = 1.0
    eig_at = 1
    trace_sum = 0.0

    for n in range(1, config.n_max + 1):
        g = bases.check_orthonormal(n, config.kind)
        r = bases.resolution_of_identity(n, config.kind)
        if g > gram_max:
            gram_max, gram_at = g, n
        if r > res_max:
            res_max, res_at = r, n
        for report in bases.l1_report_for_block(n, config.kind):
            if config.kind == "fourier":
                rel = abs(report.l1_value - report.upper_bound) / report.upper_bound
                l1_fourier_rel = max(l1_fourier_rel, rel)
                if rel > 1e-12 and l1_violation is None:
                    l1_violation = (n, report.k, rel)
            elif not report.within_bounds and l1_violation is None:
                l1_violation = (n, report.k, report.l1_value)
        block = operators.build_block(n, config.p, config.kind)
        trace_sum += float(np.trace(block.matrix).real)
        min_eig = operators.block_min_eigenvalue(block)
        scaled = -min_eig / (2.0 / n ** 3)
        if scaled > psd_worst:
            psd_worst, psd_at = scaled, n
        value_dev, overlap = operators.eigen_recovery(block)
        if value_dev > val_dev_max:
            val_dev_max, eig_at = value_dev, n
        overlap_min = min(overlap_min, overlap)

    closed = operators.trace_closed_form(config.n_max, config.p)
    trace_rel = abs(trace_sum - closed) / closed

    suites = [
        ("orthonormality", gram_max, tol_gram, gram_max <= tol_gram,
         f"n={gram_at}"),
        ("resolution-of-identity", res_max, tol_gram, res_max <= tol_gram,
         f"n={res_at}"),
        ("l1-bounds", l1_fourier_rel if config.kind == "fourier" else 0.0,
         1e-12 if config.kind == "fourier" else bases.L1_TOL_SCALE,
         l1_violation is None,
         f"first violation {l1_violation}" if l1_violation else "all within bounds"),
        ("positive-semidefinite", psd_worst, 1e-12, psd_worst <= 1e-12,
         f"n={psd_at}"),
        ("trace-consistency", trace_rel, 1e-12, trace_rel <= 1e-12,
         f"N={config.n_max}"),
        ("eigenvalue-recovery", val_dev_max, 1e-11, val_dev_max <= 1e-11,
         f"n={eig_at}"),
        ("eigenvector-overlap", 1.0 - overlap_min, 1e-9,
         1.0 - overlap_min <= 1e-9, f"min overlap {overlap_min:.12f}"),
    ]

    failed = False
    for name, value, tol, ok, detail in suites:
        print(_suite_line(name, value, tol, ok))
        if not ok and not failed:
            failed = True
            print(f"first failure: suite={name} {detail} deviation={value:.6e}")

    if args.export_matrix:
        op = operators.assemble(config.n_max, config.p, config.kind,
                                cap=config.dim_cap)
        with open(args.export_matrix, "w", encoding="utf-8", newline="\n") as fh:
            operators.write_global_csv(op, fh)
        print(f"global matrix CSV written to {args.export_matrix}")

    return EXIT_NUMERICAL if failed else EXIT_OK


# --- sums -------------------------------------------------------------------------


def cmd_sums(config: RunConfig, args: argparse.Namespace) -> int:
    """Emit trace, type_a, type_b series at logarithmically spaced N."""
    checkpoints = diagnostics.log_spaced(config.n_max)
    series = [diagnostics.partial_sum_series(label, config.p, config.kind,
                                             checkpoints)
              for label in diagnostics.SERIES_LABELS]
    with _open_out(config.out) as stream:
        if config.emit == "csv":
            diagnostics.write_series_csv(series, stream)
        else:
            doc = {
                "config": config.echo(),
                "series": [
                    {"label": s.label, "p": s.p, "kind": s.kind,
                     "points": [[n, float(f"{v:.15g}")] for n, v in s.points]}
                    for s in series
                ],
            }
            json.dump(doc, stream, indent=2, sort_keys=True)
            stream.write("\n")
    return EXIT_OK


# --- certificate ------------------------------------------------------------------


def cmd_certificate(config: RunConfig, args: argparse.Namespace) -> int:
    """Emit the counterexample certificate as JSON."""
    cert = diagnostics.make_certificate(config.n_max, config.p, config.kind)
    with _open_out(config.out) as stream:
        diagnostics.write_certificate_json(cert, stream, config=config.echo())
    all_true = (cert.trace_finite_evidence and cert.type_b_convergent_evidence
                and cert.type_a_divergent_evidence)
    return EXIT_OK if all_true else EXIT_NUMERICAL


# --- wilson -----------------------------------------------------------------------


def cmd_wilson(config: RunConfig, args: argparse.Namespace) -> int:
    """Tight window, Wilson family, h_{n,k} realization, and kernel cross-check."""
    grid = timefreq.SampleGrid(config.period, config.grid)
    count = config.n_max * (config.n_max + 1) // 2
    gauss = timefreq.sample_gaussian(grid)
    gamma = timefreq.tight_window(gauss, 0.5, 1.0)
    frame_dev = timefreq.frame_operator_deviation(gamma, 0.5, 1.0)
    family = timefreq.wilson_family(gamma, count)

    h_rows = np.empty((count, grid.samples))
    m1_rows = []
    bound_ok = True
    index = 0
    for n in range(1, config.n_max + 1):
        lam = operators.block_eigenvalues(n, config.p)
        for k in range(n):
            h = timefreq.build_h_nk(family, n, k)
            h_rows[index] = h.values.real
            index += 1
            m1 = timefreq.m1_coefficient_norm(h, family)
            lower = np.sqrt(n / 2.0)
            upper = np.sqrt(float(n))
            ok = lower - 1e-8 <= m1 <= upper + 1e-8
            per_term_ok = lam[k] * m1 <= lam[k] * upper + 1e-8
            bound_ok = bound_ok and ok and per_term_ok
            m1_rows.append((n, k, m1, lower, upper, ok))
    h_gram = grid.step * (h_rows @ h_rows.T)
    h_dev = float(np.abs(h_gram - np.eye(count)).max())

    rng = np.random.default_rng(config.seed)
    energy_dev = 0.0
    for _ in range(10):
        f = timefreq.SampledFunction(
            grid, rng.standard_normal(grid.samples)
            + 1j * rng.standard_normal(grid.samples))
        energy = timefreq.stft_energy(timefreq.stft(f, gauss))
        expected = f.norm() ** 2
        energy_dev = max(energy_dev, abs(energy - expected) / expected)

    specs = operators.block_specs(config.n_max, config.p)
    kernel = timefreq.kernel_expand(specs, family)
    op = operators.assemble(config.n_max, config.p, "hartley",
                            cap=config.dim_cap)
    kernel_dev = float(np.abs(kernel.coefficients
                              - operators.global_matrix(op)).max())

    checks = [
        ("tight-frame", frame_dev, 1e-8),
        ("family-gram", family.gram_deviation, 1e-8),
        ("h-orthonormality", h_dev, 1e-8),
        ("stft-energy", energy_dev, 1e-8),
        ("kernel-crosscheck", kernel_dev, 1e-8),
    ]
    failed = not bound_ok
    print(f"wilson family: {count} members on grid {grid.samples} @ period {grid.period:g}")
    for name, value, tol in checks:
        ok = value <= tol
        failed = failed or not ok
        print(_suite_line(name, value, tol, ok))
    print(f"l1 coefficient bounds: {'ok' if bound_ok else 'FAIL'} "
          f"({len(m1_rows)} members, window [sqrt(n/2), sqrt(n)])")

    if config.out:
        doc = {
            "config": config.echo(),
            "frame_deviation": frame_dev,
            "family_gram_deviation": family.gram_deviation,
            "h_gram_deviation": h_dev,
            "stft_energy_deviation": energy_dev,
            "kernel_crosscheck_deviation": kernel_dev,
            "m1_norms": [
                {"n": n, "k": k, "value": v, "lower": lo, "upper": up, "ok": ok}
                for (n, k, v, lo, up, ok) in m1_rows
            ],
        }
        with _open_out(config.out) as stream:
            json.dump(diagnostics._jsonable(doc), stream, indent=2, sort_keys=True)
            stream.write("\n")

    if args.export_family:
        with open(args.export_family + ".json", "w", encoding="utf-8",
                  newline="\n") as fh:
            timefreq.write_family_manifest(family, fh)
        with open(args.export_family + ".csv", "w", encoding="utf-8",
                  newline="\n") as fh:
            timefreq.write_members_csv(family, fh)
        print(f"family manifest and members written to {args.export_family}.json/.csv")
    if args.export_kernel:
        with open(args.export_kernel, "w", encoding="utf-8", newline="\n") as fh:
            timefreq.write_kernel_csv(kernel, fh)
        print(f"kernel coefficients written to {args.export_kernel}")

    return EXIT_NUMERICAL if failed else EXIT_OK


# --- parser -----------------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--p", type=float, default=2.0,
                    help="spectral parameter, must exceed 1 (default 2)")
    sp.add_argument("--nmax", type=int, default=1,
                    help="truncation size N (default 1)")
    sp.add_argument("--kind", choices=list(bases.KINDS), default="fourier",
                    help="basis family (default fourier)")
    sp.add_argument("--tol", type=float, default=None,
                    help="override the Gram/resolution tolerance (default 1e-10)")
    sp.add_argument("--out", default=None,
                    help="output path (default: stdout)")
    sp.add_argument("--emit", choices=["csv", "json"], default="csv",
                    help="output format where applicable (default csv)")
    sp.add_argument("--grid", type=int, default=512,
                    help="samples per period for time-frequency commands (default 512)")
    sp.add_argument("--period", type=float, default=16.0,
                    help="periodization interval length (default 16)")
    sp.add_argument("--seed", type=int, default=0,
                    help="seed for randomized spot checks (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="traceblocks",
        description="Construct and verify block-diagonal trace-class operators "
                    "with Fourier/Hartley eigenblocks.")
    parser.add_argument("--version", action="version",
                        version=f"traceblocks {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify", help="run the basis/operator verification suites")
    _add_common(sp)
    sp.add_argument("--export-matrix", default=None,
                    help="also write the global matrix as CSV to this path")

    sp = sub.add_parser("sums", help="emit trace/type_a/type_b partial-sum series")
    _add_common(sp)

    sp = sub.add_parser("certificate", help="emit the counterexample certificate JSON")
    _add_common(sp)

    sp = sub.add_parser("wilson", help="run the sampled Wilson realization report")
    _add_common(sp)
    sp.add_argument("--export-family", default=None,
                    help="write family manifest (.json) and member samples (.csv) "
                         "to this path prefix")
    sp.add_argument("--export-kernel", default=None,
                    help="write kernel coefficients as CSV to this path")

    return parser


_DISPATCH = {
    "verify": cmd_verify,
    "sums": cmd_sums,
    "certificate": cmd_certificate,
    "wilson": cmd_wilson,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            p=args.p,
            n_max=args.nmax,
            kind=args.kind,
            tol=args.tol,
            out=args.out,
            emit=args.emit,
            grid=args.grid,
            period=args.period,
            seed=args.seed,
            dim_cap=_dim_cap(),
        )
        return _DISPATCH[args.command](config, args)
    except (ParameterError, DomainError, UsageError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
