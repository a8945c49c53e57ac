"""Command-line front end.

Exit codes: 0 success, 2 invalid problem, 3 numerical failure,
4 precondition unmet.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis, oracle
from .coeffmodel import load_problem, validate_problem
from .complexspec import ContourBox, complex_spectrum
from .controls import Controls
from .errors import NumericalError, PreconditionError, ProblemError
from .expr import ExpressionError
from .realspec import real_roots, real_spectrum
from .records import COMPLEX_GHOSTS, build_record, write_spectrum_csv
from .shoot import CharFunction, fmt, write_eigenfunction_csv

EXIT_OK, EXIT_PROBLEM, EXIT_NUMERICAL, EXIT_PRECONDITION = 0, 2, 3, 4
DEFAULT_WINDOW = (-100.0, 100.0)
DEFAULT_BOX = (-20.0, 20.0, -20.0, 20.0)
COMMANDS = ("solve", "scan", "indices", "asymptotics", "oracle", "classify", "eigenfunction")

log = logging.getLogger("ndsl")


@dataclass
class RunConfig:
    command: str
    problem: Path
    real_window: tuple[float, float] = DEFAULT_WINDOW
    complex_box: tuple[float, float, float, float] = DEFAULT_BOX
    controls: Controls = field(default_factory=Controls)
    out: Path | None = None
    emit_plot: Path | None = None
    oracle_n: int = 400
    lam: complex | None = None
    points: int = 401
    n_max: int = 40
    scan_complex: bool = False

    def __post_init__(self):
        lo, hi = self.real_window
        r0, r1, i0, i1 = self.complex_box
        if not lo < hi:
            raise ValueError(f"real window must satisfy A < B, got {self.real_window}")
        if not (r0 < r1 and i0 < i1):
            raise ValueError(f"complex box must satisfy R0 < R1 and I0 < I1, got {self.complex_box}")

    def describe(self) -> list[str]:
        return [f"problem={self.problem}",
                f"real_window={fmt(self.real_window[0])} {fmt(self.real_window[1])}",
                "complex_box=" + " ".join(fmt(v) for v in self.complex_box),
                self.controls.describe()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ndsl", description="Spectra of non-definite Sturm-Liouville problems.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("problem", type=Path, help="problem file (JSON)")
    ap.add_argument("--real-window", nargs=2, type=float, metavar=("A", "B"), default=DEFAULT_WINDOW)
    ap.add_argument("--complex-box", nargs=4, type=float, metavar=("R0", "R1", "I0", "I1"), default=None)
    ap.add_argument("--tol-lambda", type=float, default=Controls.tol_lambda)
    ap.add_argument("--tol-f", type=float, default=Controls.tol_f)
    ap.add_argument("--rk-tol", type=float, default=Controls.rk_tol)
    ap.add_argument("--tol-ghost", type=float, default=Controls.tol_ghost)
    ap.add_argument("--oracle-n", type=int, default=400)
    ap.add_argument("--emit-plot", type=Path, metavar="DIR", default=None)
    ap.add_argument("--out", type=Path, metavar="FILE", default=None)
    ap.add_argument("--lambda", dest="lam", nargs=2, type=float, metavar=("RE", "IM"), default=None,
                    help="eigenvalue estimate for the eigenfunction command")
    ap.add_argument("--points", type=int, default=401, help="grid points per axis for scan")
    ap.add_argument("--n-max", type=int, default=40, help="largest count for asymptotics")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    controls = Controls(tol_lambda=args.tol_lambda, tol_f=args.tol_f, rk_tol=args.rk_tol,
                        tol_ghost=args.tol_ghost)
    return RunConfig(
        command=args.command, problem=args.problem, real_window=tuple(args.real_window),
        complex_box=tuple(args.complex_box) if args.complex_box else DEFAULT_BOX,
        controls=controls, out=args.out, emit_plot=args.emit_plot, oracle_n=args.oracle_n,
        lam=complex(*args.lam) if args.lam else None, points=args.points, n_max=args.n_max,
        scan_complex=args.complex_box is not None)


# -- commands ----------------------------------------------------------------

def _box(cfg: RunConfig) -> ContourBox:
    return ContourBox(*cfg.complex_box)


def _emit(cfg: RunConfig, name: str, header: Sequence[str], rows) -> None:
    if cfg.emit_plot is None:
        return
    cfg.emit_plot.mkdir(parents=True, exist_ok=True)
    with (cfg.emit_plot / name).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_solve(prob, cfg: RunConfig, out, report) -> int:
    F = CharFunction(prob, rk_tol=cfg.controls.rk_tol)
    real = real_spectrum(prob, cfg.real_window, cfg.controls, F)
    search = complex_spectrum(prob, _box(cfg), cfg.controls, F, details=True)
    nonreal = [r for r in search.records if not r.is_real]
    in_box = [r for r in real if cfg.complex_box[0] <= r.lam <= cfg.complex_box[1]]
    records = real + nonreal
    write_spectrum_csv(records, out)
    report.append(f"real eigenvalues={len(real)} non_real={len(nonreal)}")
    report.append(f"box winding={search.full_count} real_axis_winding={search.real_axis_count} "
                  f"real_in_box={sum(r.multiplicity for r in in_box)}")
    for b, count, depth in search.audit:
        report.append("box " + " ".join(fmt(v) for v in (b.re0, b.re1, b.im0, b.im1)) +
                      f" count={count} depth={depth}")
    for r in records:
        report.extend(f"warning: {w}" for w in r.warnings)
    _emit(cfg, "spectrum_plot.csv", ["re_lambda", "im_lambda", "class"],
          [[fmt(complex(r.lam).real), fmt(complex(r.lam).imag), r.kind] for r in records])
    return EXIT_OK


def cmd_scan(prob, cfg: RunConfig, out, report) -> int:
    F = CharFunction(prob, rk_tol=cfg.controls.rk_tol)
    if cfg.scan_complex:
        r0, r1, i0, i1 = cfg.complex_box
        grid = [complex(x, y) for y in np.linspace(i0, i1, cfg.points) for x in np.linspace(r0, r1, cfg.points)]
    else:
        grid = [complex(x) for x in np.linspace(*cfg.real_window, cfg.points)]
    rows = []
    for lam in grid:
        f = complex(F(lam))
        rows.append([fmt(lam.real), fmt(lam.imag), fmt(f.real), fmt(f.imag)])
    header = ["re_lambda", "im_lambda", "re_F", "im_F"]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    report.append(f"samples={len(rows)}")
    _emit(cfg, "scan_plot.csv", header, rows)
    return EXIT_OK


def cmd_indices(prob, cfg: RunConfig, out, report) -> int:
    rep = analysis.indices(prob, cfg.controls, complex_box=_box(cfg))
    for line in report + rep.lines():
        print(line, file=out)
    report.clear()
    return EXIT_OK


def cmd_asymptotics(prob, cfg: RunConfig, out, report) -> int:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["side", "n", "lambda", "ratio"])
    plot = []
    for side, label in ((+1, "+"), (-1, "-")):
        try:
            tab = analysis.asymptotic_check(prob, cfg.n_max, side, cfg.controls)
        except PreconditionError as exc:
            report.append(f"side {label}: {exc}")
            continue
        for row in tab.rows:
            cells = [label, str(row.n), "" if row.lam is None else fmt(row.lam),
                     "" if row.ratio is None else fmt(row.ratio)]
            w.writerow(cells)
            plot.append(cells)
        report.append(f"side {label}: C={fmt(tab.C)} at_lambda={'' if tab.at_lambda is None else fmt(tab.at_lambda)} "
                      f"zero_count_ratio={'' if tab.jorgens is None else fmt(tab.jorgens)} "
                      f"counting_ratio={'' if tab.counting is None else fmt(tab.counting)}")
    _emit(cfg, "asymptotics_plot.csv", ["side", "n", "lambda", "ratio"], plot)
    return EXIT_OK


def cmd_oracle(prob, cfg: RunConfig, out, report) -> int:
    pen = oracle.build_pencil(prob, cfg.oracle_n)
    vals = oracle.pencil_eigenvalues(pen)
    F = CharFunction(prob, rk_tol=cfg.controls.rk_tol)
    shooting = [lam for lam, _ in real_roots(prob, cfg.real_window, cfg.controls, F)]
    shooting += [r.lam for r in complex_spectrum(prob, _box(cfg), cfg.controls, F)]
    lines = report + [f"oracle_n={pen.n} h={fmt(pen.h)} pencil_eigenvalues={len(vals)}"]
    worst = 0.0
    for m in oracle.match_eigenvalues(shooting, vals):
        worst = max(worst, m.rel_error)
        lines.append(f"match shooting={_cfmt(m.shooting)} pencil={_cfmt(m.pencil)} rel_error={fmt(m.rel_error)}")
    lines.append(f"worst_rel_error={fmt(worst)}")
    for line in lines:
        print(line, file=out)
    report.clear()
    return EXIT_OK


def cmd_classify(prob, cfg: RunConfig, out, report) -> int:
    cls = analysis.classify_definiteness(prob, controls=cfg.controls)
    lines = report + [cls.kind, f"nu0={'not computed' if cls.nu0 is None else fmt(cls.nu0)}"]
    lines += [f"r on [{fmt(lo)}, {fmt(hi)}]: {sign}" for lo, hi, sign in cls.r_profile]
    for line in lines:
        print(line, file=out)
    report.clear()
    return EXIT_OK


def cmd_eigenfunction(prob, cfg: RunConfig, out, report) -> int:
    from .complexspec import polish
    if cfg.lam is None:
        raise PreconditionError("eigenfunction needs --lambda RE IM")
    lam = polish(prob, cfg.lam, cfg.controls)
    if abs(lam.imag) <= cfg.controls.eps_axis * max(1.0, abs(lam)):
        lam = complex(lam.real)
    _, fp = CharFunction(prob, rk_tol=cfg.controls.rk_tol).with_derivative(lam)
    rec = build_record(prob, lam, 1, cfg.controls, fprime=fp)
    write_eigenfunction_csv(rec.eigenfunction, out)
    report.append(f"lambda={_cfmt(rec.lam)} class={rec.kind} krein={fmt(rec.krein)} "
                  f"bilinear={_cfmt(rec.bilinear)}")
    if rec.kind in COMPLEX_GHOSTS:
        verdict = analysis.interlacing_check(prob, rec)
        report.append(f"interlacing={verdict.status} ({verdict.details})")
    ef = rec.eigenfunction
    _emit(cfg, "eigenfunction_plot.csv", ["x", "u", "v", "abs_y"],
          [[fmt(x), fmt(u.real), fmt(u.imag), fmt(abs(u))] for x, u in zip(ef.x, ef.u)])
    return EXIT_OK


def _cfmt(z: complex) -> str:
    z = complex(z)
    return f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}i"


HANDLERS = {"solve": cmd_solve, "scan": cmd_scan, "indices": cmd_indices,
            "asymptotics": cmd_asymptotics, "oracle": cmd_oracle, "classify": cmd_classify,
            "eigenfunction": cmd_eigenfunction}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        prob = load_problem(cfg.problem)
        validation = validate_problem(prob)
        if not validation.valid:
            for err in validation.errors:
                print(f"error [validate]: {err}", file=stderr)
            return EXIT_PROBLEM
    except (OSError, ValueError) as exc:
        # ValueError covers JSON decoding, ProblemError and ExpressionError
        print(f"error [load]: {exc}", file=stderr)
        return EXIT_PROBLEM
    report = cfg.describe()
    buf = io.StringIO()
    try:
        code = HANDLERS[cfg.command](prob, cfg, buf, report)
    except PreconditionError as exc:
        print(f"error [precondition]: {exc}", file=stderr)
        return EXIT_PRECONDITION
    except NumericalError as exc:
        print(f"error [numerical]: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except (ProblemError, ExpressionError) as exc:
        print(f"error [problem]: {exc}", file=stderr)
        return EXIT_PROBLEM
    if cfg.out is not None:
        cfg.out.write_text(buf.getvalue())
    else:
        stdout.write(buf.getvalue())
    for line in report:
        print(line, file=stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return EXIT_PROBLEM
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
