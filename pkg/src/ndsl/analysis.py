"""Definiteness, Haupt-Richardson indices, asymptotic laws and bound audits."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .coeffmodel import SLProblem, piece_sign, r_sign_profile, sqrt_weight_ratio
from .controls import DEFAULT, Controls
from .errors import NumericalError, PreconditionError
from .realspec import (BoundaryCase, ghost_counts, haupt_n0, lowest_eigenvalue, neg_count_51,
                       real_roots, real_spectrum)
from .records import COMPLEX_GHOSTS, EigenvalueRecord
from .shoot import CharFunction, eigen_osc_count, prufer_oscillation

log = logging.getLogger(__name__)

RIGHT_DEFINITE = "right_definite"
LEFT_DEFINITE = "left_definite"
NON_DEFINITE = "non_definite"
BORDERLINE = "degenerate_borderline"


# -- definiteness ----------------------------------------------------------------

@dataclass
class DefinitenessClass:
    kind: str
    r_profile: list[tuple[float, float, str]]
    nu0: float | None = None

    def __str__(self) -> str:
        nu = "not computed" if self.nu0 is None else f"{self.nu0:.15g}"
        return f"{self.kind} (nu0={nu})"


def classify_definiteness(prob: SLProblem, tol: float = 1e-8,
                          controls: Controls = DEFAULT) -> DefinitenessClass:
    profile = r_sign_profile(prob)
    signs = {s for _, _, s in profile}
    if "mixed" not in signs and not ({"+", "-"} <= signs):
        return DefinitenessClass(RIGHT_DEFINITE, profile)
    nu0 = lowest_eigenvalue(prob.unit_weight(), controls)
    if nu0 > tol:
        kind = LEFT_DEFINITE
    elif nu0 < -tol:
        kind = NON_DEFINITE
    else:
        kind = BORDERLINE
    return DefinitenessClass(kind, profile, nu0)


def r_sign_changes(prob: SLProblem, band: float = 1e-12, samples: int = 2048) -> tuple[int, str]:
    """Number of sign changes of r in (a, b) and the sign it starts with."""
    seq: list[str] = []
    for lo, hi, expr in zip(prob.r.breakpoints, prob.r.breakpoints[1:], prob.r.pieces):
        s = piece_sign(expr, lo, hi, band)
        if s in "+-":
            seq.append(s)
        elif s == "mixed":
            vals = np.asarray(expr(np.linspace(lo, hi, samples)))
            state = None
            for v in vals:
                if v > band and state != "+":
                    state = "+"
                    seq.append("+")
                elif v < -band and state != "-":
                    state = "-"
                    seq.append("-")
        else:
            seq.append("0")
    first = seq[0] if seq else "0"
    nonzero = [s for s in seq if s != "0"]
    changes = sum(1 for s0, s1 in zip(nonzero, nonzero[1:]) if s0 != s1)
    return changes, first


# -- Haupt-Richardson indices ---------------------------------------------------------

@dataclass
class BoundCheck:
    theorem: str
    status: str
    details: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass
class IndicesReport:
    n_R: int | None
    n_H: int | None
    window_used: tuple[float, float]
    counts_table: dict[int, list[float]]
    n0: int | None
    k51: int | str
    bound_checks: list[BoundCheck] = field(default_factory=list)
    validated: bool = False
    history: list[tuple[float, int | None, int | None, int]] = field(default_factory=list)
    records: list[EigenvalueRecord] = field(default_factory=list, repr=False)
    complex_records: list[EigenvalueRecord] = field(default_factory=list, repr=False)
    top_count: int = -1

    def lines(self) -> list[str]:
        out = [f"n_R={self.n_R}", f"n_H={self.n_H}", f"validated={str(self.validated).lower()}",
               f"window={self.window_used[0]:.15g} {self.window_used[1]:.15g}",
               f"validated_counts=0..{self.top_count}",
               f"n0={self.n0}", f"k51={self.k51}"]
        for n in sorted(self.counts_table):
            lams = " ".join(f"{lam:.15g}" for lam in self.counts_table[n])
            out.append(f"count {n}: {len(self.counts_table[n])} [{lams}]")
        for chk in self.bound_checks:
            out.append(f"check {chk.theorem}: {chk.status}" + (f" ({chk.details})" if chk.details else ""))
        return out


def _table(records) -> dict[int, list[float]]:
    table: dict[int, list[float]] = {}
    for r in records:
        if r.osc_count is not None:
            table.setdefault(r.osc_count, []).append(float(complex(r.lam).real))
    return {n: sorted(v) for n, v in sorted(table.items())}


def _indices_from_table(table: dict[int, list[float]], top: int, width: int) -> tuple[int | None, int | None]:
    if not table:
        return None, None
    n_r = min(table)
    if top < n_r:
        return n_r, None
    for m in range(n_r, top + 1):
        if top - m + 1 < width:
            return n_r, None
        if all(len(table.get(n, ())) == 2 for n in range(m, top + 1)):
            return n_r, m
    return n_r, None


def _complete_below(prob: SLProblem, lam_lo: float, lam_hi: float, controls: Controls) -> int:
    """Largest count assumed complete: the window edges already carry more zeros."""
    n_lo = prufer_oscillation(prob, lam_lo, rk_tol=controls.rk_tol).N
    n_hi = prufer_oscillation(prob, lam_hi, rk_tol=controls.rk_tol).N
    return min(n_lo, n_hi) - 1


def initial_half_width(prob: SLProblem, width: int) -> float:
    c = min(sqrt_weight_ratio(prob, +1), sqrt_weight_ratio(prob, -1))
    return max(100.0, 1.5 * ((width + 2) * math.pi / c) ** 2)


def indices(prob: SLProblem, controls: Controls = DEFAULT, half_width: float | None = None,
            width: int | None = None, max_extensions: int = 8,
            with_audit: bool = True, complex_box=None) -> IndicesReport:
    """Richardson and Haupt indices from the oscillation counts of the real
    eigenvalues.

    The window [-L, L] doubles until (n_R, n_H) stay the same over two
    consecutive extensions.  Counts are trusted only below the number of
    zeros the solution already has at both window edges.
    """
    width = width or controls.validation_width
    definiteness = classify_definiteness(prob, controls=controls)
    if definiteness.kind != NON_DEFINITE:
        raise PreconditionError(f"indices need a non-definite problem; this one is {definiteness.kind}")
    F = CharFunction(prob, rk_tol=controls.rk_tol)
    L = half_width or initial_half_width(prob, width)
    records = real_spectrum(prob, (-L, L), controls, F)
    history = []
    window_sizes = [(L, _side_counts(records))]
    validated = False
    for step in range(max_extensions + 1):
        table = _table(records)
        top = _complete_below(prob, -L, L, controls)
        n_r, n_h = _indices_from_table(table, top, width)
        history.append((L, n_r, n_h, top))
        if len(history) >= 3 and n_h is not None and len({(h[1], h[2]) for h in history[-3:]}) == 1:
            validated = True
            break
        if step == max_extensions:
            break
        new_l = 2 * L
        records += real_spectrum(prob, (-new_l, -L), controls, F)
        records += real_spectrum(prob, (L, new_l), controls, F)
        records = _dedupe(records)
        L = new_l
        window_sizes.append((L, _side_counts(records)))
    report = IndicesReport(n_r, n_h, (-L, L), table, None, "unavailable", validated=validated,
                           history=history, records=records, top_count=top)
    if not validated:
        log.warning("index window extension did not converge: %s", history)
    if with_audit:
        grid = np.linspace(-L, L, 401)
        report.n0, _ = haupt_n0(prob, grid, controls)
        try:
            report.k51 = neg_count_51(prob, controls).count
        except (BoundaryCase, NumericalError) as exc:
            log.warning("k51 unavailable: %s", exc)
        if complex_box is not None:
            from .complexspec import complex_spectrum
            report.complex_records = complex_spectrum(prob, complex_box, controls, F)
        report.bound_checks = theorem_audit(prob, records, report.complex_records, controls,
                                            k51=report.k51, extensions=window_sizes)
    return report


def _side_counts(records) -> tuple[int, int]:
    pos = sum(1 for r in records if complex(r.lam).real > 0)
    neg = sum(1 for r in records if complex(r.lam).real < 0)
    return pos, neg


def _dedupe(records):
    out = []
    for r in sorted(records, key=lambda rec: complex(rec.lam).real):
        if out and abs(complex(out[-1].lam) - complex(r.lam)) <= 1e-9 * max(1.0, abs(complex(r.lam))):
            continue
        out.append(r)
    return out


# -- asymptotic laws ---------------------------------------------------------------

@dataclass
class AsymptoticRow:
    n: int
    lam: float | None
    ratio: float | None


@dataclass
class AsymptoticTable:
    side: int
    C: float
    rows: list[AsymptoticRow]
    eigenvalues: list[tuple[float, int]]
    jorgens: float | None
    counting: float | None
    at_lambda: float | None

    def ratios(self, n_lo: int, n_hi: int) -> list[float | None]:
        by_n = {row.n: row.ratio for row in self.rows}
        return [by_n.get(n) for n in range(n_lo, n_hi + 1)]


def _eigs_with_counts(prob, lo, hi, controls, F):
    return [(lam, eigen_osc_count(prob, lam, rk_tol=controls.rk_tol))
            for lam, _ in real_roots(prob, (lo, hi), controls, F)]


def asymptotic_check(prob: SLProblem, n_max: int, side: int = +1, controls: Controls = DEFAULT,
                     max_extensions: int = 8) -> AsymptoticTable:
    """Compare eigenvalues labelled by zero count with n^2 pi^2 / C^2.

    ``C`` is the integral of sqrt(max(side * r/p, 0)).  The table also holds
    N(lam) pi / (sqrt|lam| C) and n(lam) pi / (sqrt|lam| C) at lam = the
    count-``n_max`` eigenvalue, where n(lam) counts eigenvalues strictly
    between 0 and lam on the chosen side.
    """
    C = sqrt_weight_ratio(prob, side)
    if C <= 0:
        raise PreconditionError(f"no {'positive' if side > 0 else 'negative'} part of r/p; C = 0")
    F = CharFunction(prob, rk_tol=controls.rk_tol)
    L = 1.2 * ((n_max + 2) * math.pi / C) ** 2 + 4 * _q_scale(prob)
    found = _eigs_with_counts(prob, *_side_window(0.0, L, side), controls, F)
    for _ in range(max_extensions):
        if any(n > n_max for _, n in found):
            break
        found += _eigs_with_counts(prob, *_side_window(L, 2 * L, side), controls, F)
        L *= 2
    found = sorted(((lam, n) for lam, n in found if side * lam > 0), key=lambda t: abs(t[0]))
    rows = []
    for n in range(1, n_max + 1):
        cands = [lam for lam, k in found if k == n]
        lam = max(cands, key=abs) if cands else None
        ratio = abs(lam) * C * C / (n * n * math.pi ** 2) if lam is not None else None
        rows.append(AsymptoticRow(n, lam, ratio))
    at = rows[-1].lam
    jorgens = counting = None
    if at is not None:
        jorgens = zero_count_ratio(prob, at, side, controls)
        below = sum(1 for lam, _ in found if abs(lam) < abs(at))
        counting = below * math.pi / (math.sqrt(abs(at)) * C)
    return AsymptoticTable(side, C, rows, found, jorgens, counting, at)


def _side_window(a: float, b: float, side: int) -> tuple[float, float]:
    return (a, b) if side > 0 else (-b, -a)


def _q_scale(prob: SLProblem) -> float:
    best = 0.0
    for seg in prob.segments:
        xs = np.linspace(seg.lo, seg.hi, 17)
        best = max(best, float(np.max(np.abs(np.broadcast_to(seg.q(xs), xs.shape)))))
    return best


def zero_count_ratio(prob: SLProblem, lam: float, side: int = +1, controls: Controls = DEFAULT) -> float:
    """N(lam) pi / (sqrt|lam| C): the zero-count law, which tends to 1."""
    C = sqrt_weight_ratio(prob, side)
    N = prufer_oscillation(prob, lam, rk_tol=controls.rk_tol).N
    return N * math.pi / (math.sqrt(abs(lam)) * C)


# -- interlacing ---------------------------------------------------------------------

@dataclass
class Verdict:
    status: str
    details: str = ""
    u_zeros: list[float] = field(default_factory=list)
    v_zeros: list[float] = field(default_factory=list)
    min_abs_y: float | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _sign_changes(x: np.ndarray, f: np.ndarray) -> list[float]:
    out = []
    for i in range(len(f) - 1):
        f0, f1 = f[i], f[i + 1]
        if f0 == 0:
            out.append(float(x[i]))
        elif f0 * f1 < 0:
            out.append(float(x[i] - f0 * (x[i + 1] - x[i]) / (f1 - f0)))
    return out


def interlacing_check(prob: SLProblem, rec: EigenvalueRecord | None) -> Verdict:
    """Zeros of Re y and Im y of a non-real eigenfunction must alternate,
    and y must not vanish inside (a, b), when r changes sign exactly once."""
    changes, first = r_sign_changes(prob)
    if changes != 1 or first == "0":
        return Verdict("not_applicable", f"r changes sign {changes} times; starts with {first!r}")
    if rec is None or complex(rec.lam).imag == 0 or rec.eigenfunction is None:
        return Verdict("not_applicable", "no non-real eigenfunction")
    ef = rec.eigenfunction
    x, y = ef.x[1:-1], ef.u[1:-1]
    uz = _sign_changes(x, y.real)
    vz = _sign_changes(x, y.imag)
    min_abs = float(np.min(np.abs(y)))
    merged = sorted([(z, "u") for z in uz] + [(z, "v") for z in vz])
    alternating = all(a[1] != b[1] and a[0] < b[0] for a, b in zip(merged, merged[1:]))
    ok = alternating and min_abs > 0
    details = f"{len(uz)} zeros of Re y, {len(vz)} zeros of Im y, min|y|={min_abs:.3e}"
    return Verdict("pass" if ok else "fail", details, uz, vz, min_abs)


# -- bound audit -------------------------------------------------------------------

def theorem_audit(prob: SLProblem, real_records, complex_records, controls: Controls = DEFAULT,
                  k51: int | str | None = None, extensions=None) -> list[BoundCheck]:
    """Pass/fail verdicts for the counting statements checkable on a
    computed spectrum; checks whose hypotheses fail are reported skipped."""
    checks = []
    nonreal = [r for r in complex_records if complex(r.lam).imag != 0]
    total = sum(r.multiplicity for r in nonreal)
    closed = all(any(abs(complex(s.lam) - complex(r.lam).conjugate()) <= 1e-8 * max(1.0, abs(r.lam))
                     for s in nonreal) for r in nonreal)
    checks.append(BoundCheck("non-real count even", "pass" if total % 2 == 0 and closed else "fail",
                             f"{total} non-real, conjugation closed={closed}"))

    if k51 is None:
        try:
            k51 = neg_count_51(prob, controls).count
        except (BoundaryCase, NumericalError) as exc:
            k51 = "unavailable"
            log.warning("k51 unavailable: %s", exc)
    pairs = total // 2
    if isinstance(k51, int):
        checks.append(BoundCheck("non-real pairs <= k51", "pass" if pairs <= k51 else "fail",
                                 f"{pairs} pairs, k51={k51}"))
    else:
        checks.append(BoundCheck("non-real pairs <= k51", "skipped: precondition",
                                 "zero is an eigenvalue of the (r + 1)-weight problem"))

    f0 = CharFunction(prob, rk_tol=controls.rk_tol)(0.0)
    zero_is_eig = abs(math.sin(prufer_oscillation(prob, 0.0, rk_tol=controls.rk_tol).theta_b + prob.beta)) <= controls.tol_f
    ghosts = ghost_counts(real_records)
    if isinstance(k51, int) and not zero_is_eig:
        g = ghosts["positive_real_ghosts"]
        checks.append(BoundCheck("positive real ghosts <= k51", "pass" if g <= k51 else "fail",
                                 f"{g} ghosts, k51={k51}"))
    else:
        checks.append(BoundCheck("positive real ghosts <= k51", "skipped: precondition",
                                 f"F(0)={f0:.3e}, k51={k51}"))
    try:
        mirrored = prob.replace(r=prob.r.scaled(-1.0))
        k51_neg = neg_count_51(mirrored, controls).count
        g = ghosts["negative_real_ghosts"]
        checks.append(BoundCheck("negative real ghosts <= k51(-r)", "pass" if g <= k51_neg else "fail",
                                 f"{g} ghosts, k51(-r)={k51_neg}"))
    except (BoundaryCase, NumericalError) as exc:
        checks.append(BoundCheck("negative real ghosts <= k51(-r)", "skipped: precondition", str(exc)))

    c_pos, c_neg = sqrt_weight_ratio(prob, +1), sqrt_weight_ratio(prob, -1)
    if c_pos > 0 and c_neg > 0:
        if extensions and len(extensions) >= 2:
            grows = all(b[1][0] > a[1][0] and b[1][1] > a[1][1] for a, b in zip(extensions, extensions[1:]))
            detail = " -> ".join(f"L={L:.6g}: +{p}/-{n}" for L, (p, n) in extensions)
        else:
            pos = sum(1 for r in real_records if complex(r.lam).real > 0)
            neg = sum(1 for r in real_records if complex(r.lam).real < 0)
            grows = pos > 0 and neg > 0
            detail = f"{pos} positive, {neg} negative"
        checks.append(BoundCheck("real eigenvalues on both sides", "pass" if grows else "fail", detail))
    else:
        checks.append(BoundCheck("real eigenvalues on both sides", "skipped: precondition",
                                 "r does not take both signs"))

    top = sorted((r for r in real_records if complex(r.lam).imag == 0), key=lambda r: abs(r.lam))[-4:]
    signs = ", ".join(f"{r.lam:.6g}:{'+' if r.krein > 0 else '-'}" for r in top)
    checks.append(BoundCheck("observation: Krein signs of largest |lambda|", "observation",
                             signs or "no real eigenvalues"))
    return checks
