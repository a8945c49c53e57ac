"""Non-real eigenvalues from the argument principle applied to F."""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, replace

from .coeffmodel import SLProblem
from .controls import DEFAULT, Controls
from .errors import NumericalError
from .records import EigenvalueRecord, build_record, sort_key
from .shoot import CharFunction

log = logging.getLogger(__name__)

_EDGE_SAMPLES = 16
_SPLITS = ((0.5131, 0.4871), (0.4617, 0.5383), (0.5722, 0.4458), (0.4291, 0.5613))


class ZeroOnContour(NumericalError):
    pass


@dataclass(frozen=True)
class ContourBox:
    re0: float
    re1: float
    im0: float
    im1: float
    count: int | None = None

    def __post_init__(self):
        if not (self.re0 < self.re1 and self.im0 < self.im1):
            raise ValueError(f"degenerate box {self}")

    @classmethod
    def around(cls, center: complex, radius: float) -> "ContourBox":
        return cls(center.real - radius, center.real + radius, center.imag - radius, center.imag + radius)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))

    @property
    def diameter(self) -> float:
        return math.hypot(self.re1 - self.re0, self.im1 - self.im0)

    def contains(self, z: complex) -> bool:
        return self.re0 <= z.real <= self.re1 and self.im0 <= z.imag <= self.im1

    def inflated(self, factor: float) -> "ContourBox":
        c = self.center
        hw, hh = 0.5 * (self.re1 - self.re0) * factor, 0.5 * (self.im1 - self.im0) * factor
        return ContourBox(c.real - hw, c.real + hw, c.imag - hh, c.imag + hh, self.count)

    def corners(self) -> list[complex]:
        return [complex(self.re0, self.im0), complex(self.re1, self.im0),
                complex(self.re1, self.im1), complex(self.re0, self.im1)]

    def split(self, fx: float, fy: float) -> list["ContourBox"]:
        xm = self.re0 + fx * (self.re1 - self.re0)
        ym = self.im0 + fy * (self.im1 - self.im0)
        return [ContourBox(self.re0, xm, self.im0, ym), ContourBox(xm, self.re1, self.im0, ym),
                ContourBox(self.re0, xm, ym, self.im1), ContourBox(xm, self.re1, ym, self.im1)]

    def upper_part(self, eps: float) -> "ContourBox | None":
        lo = max(self.im0, eps)
        return ContourBox(self.re0, self.re1, lo, self.im1) if self.im1 > lo else None


def _evaluator(prob_or_f, controls: Controls) -> CharFunction:
    if isinstance(prob_or_f, CharFunction):
        return prob_or_f
    return CharFunction(prob_or_f, rk_tol=controls.rk_tol)


def _phase_sum(F: CharFunction, box: ContourBox, budget: int) -> float:
    """Sum of phase increments of F around the box, counter-clockwise.

    A contour segment is bisected while the phase step between its ends is
    pi/2 or more, or while |F'/F| * |dz| at either end reaches 1.  The second
    test keeps segments short next to zeros, where two nearby zeros could
    otherwise rotate the phase by a full turn between samples unseen.
    """
    corners = box.corners()
    start = F.evals
    # |F| can vary by many orders of magnitude along one contour, so a zero
    # on the contour is judged locally: a sample negligible next to its
    # neighbours, or a phase jump that survives bisection down to min_dt
    min_dt = 1e-13
    total = 0.0
    for k in range(4):
        z0, z1 = corners[k], corners[(k + 1) % 4]
        length = abs(z1 - z0)

        def sample(t):
            f, fp = F.with_derivative(z0 + (z1 - z0) * t)
            if f == 0 or not cmath.isfinite(f):
                raise ZeroOnContour(f"F vanishes or overflows on the contour of {box}", "winding")
            return t, f, abs(fp / f)

        pts = [sample(j / _EDGE_SAMPLES) for j in range(_EDGE_SAMPLES + 1)]
        stack = [(pts[j], pts[j + 1]) for j in range(len(pts) - 1)][::-1]
        while stack:
            (t0, f0, g0), (t1, f1, g1) = stack.pop()
            d = cmath.phase(f1 / f0)
            dz = (t1 - t0) * length
            if abs(d) < 0.5 * math.pi and g0 * dz < 1.0 and g1 * dz < 1.0:
                total += d
                continue
            if t1 - t0 < min_dt:
                if abs(d) < 0.5 * math.pi:
                    total += d
                    continue
                raise ZeroOnContour(f"phase jump does not resolve on the contour of {box}", "winding")
            if F.evals - start > budget:
                raise NumericalError(f"winding budget of {budget} evaluations exhausted on {box}", "winding")
            mid = sample(0.5 * (t0 + t1))
            if abs(mid[1]) <= 1e-15 * max(abs(f0), abs(f1)):
                raise ZeroOnContour(f"|F| negligible on the contour of {box}", "winding")
            stack.append((mid, (t1, f1, g1)))
            stack.append(((t0, f0, g0), mid))
    return total


def _winding_raw(F: CharFunction, box: ContourBox, budget: int) -> int:
    total = _phase_sum(F, box, budget) / (2 * math.pi)
    n = round(total)
    if abs(total - n) >= 0.1:
        raise NumericalError(f"winding residual {total - n:.3f} on {box}", "winding")
    return int(n)


def winding_number(prob, box: ContourBox, controls: Controls = DEFAULT, retries: int = 8) -> int:
    """Number of zeros of F inside ``box`` (with multiplicity).

    A zero sitting on the contour is handled by inflating the box by a
    factor 1 + 1e-6 and trying again.
    """
    F = _evaluator(prob, controls)
    current = box
    for attempt in range(retries + 1):
        try:
            return _winding_raw(F, current, controls.winding_budget)
        except ZeroOnContour:
            if attempt == retries:
                raise
            current = current.inflated(1 + 1e-6)
    raise AssertionError("unreachable")


def isolate_zeros(prob, box: ContourBox, controls: Controls = DEFAULT, count: int | None = None,
                  max_depth: int = 80, audit: list | None = None) -> list[ContourBox]:
    """Quadrisect ``box`` until every box holds one zero or has shrunk below
    tol_lambda (a multiple zero).  Returned boxes carry their count."""
    F = _evaluator(prob, controls)
    if count is None:
        count = winding_number(F, box, controls)
    if audit is not None:
        audit.append((box, count, 0))
    if count == 0:
        return []
    out = []
    stack = [(replace(box, count=count), 0)]
    while stack:
        b, depth = stack.pop()
        if b.count == 1 or b.diameter < controls.tol_lambda * (1 + abs(b.center)):
            out.append(b)
            continue
        if depth >= max_depth:
            raise NumericalError(f"subdivision depth exceeded; stuck box {b} with count {b.count}", "isolate")
        children = None
        for fx, fy in _SPLITS:
            try:
                kids = b.split(fx, fy)
                counts = [_winding_raw(F, k, controls.winding_budget) for k in kids]
            except ZeroOnContour:
                continue
            if sum(counts) == b.count:
                children = [replace(k, count=c) for k, c in zip(kids, counts)]
                break
            log.debug("additivity failed on %s: %s vs %d", b, counts, b.count)
        if children is None:
            raise NumericalError(f"could not subdivide {b} consistently", "isolate")
        for child in children:
            if audit is not None:
                audit.append((child, child.count, depth + 1))
            if child.count:
                stack.append((child, depth + 1))
    return sorted(out, key=lambda bx: (bx.center.real, bx.center.imag))


class PolishDivergence(NumericalError):
    pass


def polish(prob, lam0: complex, controls: Controls = DEFAULT, box: ContourBox | None = None,
           multiplicity: int = 1, max_iter: int = 100) -> complex:
    """Newton iteration on F from ``lam0``; a secant step is taken where F'
    is too small to divide by."""
    F = _evaluator(prob, controls)
    lam = complex(lam0)
    fence = box.inflated(2.0) if box is not None else None
    prev = None
    for _ in range(max_iter):
        f, fp = F.with_derivative(lam)
        if f == 0:
            return lam
        if abs(fp) > controls.tol_fprime * (1 + abs(f)) or prev is None:
            if fp == 0:
                raise PolishDivergence(f"F' vanishes at {lam}", "polish")
            step = multiplicity * f / fp
        else:
            lam_p, f_p = prev
            if f == f_p:
                return lam
            step = f * (lam - lam_p) / (f - f_p)
        prev = (lam, f)
        new = lam - step
        if lam.imag == 0 and abs(new.imag) < 1e-300:
            new = complex(new.real, 0.0)
        if fence is not None and not fence.contains(new):
            raise PolishDivergence(f"Newton left {fence} at {new}", "polish")
        if abs(new - lam) <= controls.tol_lambda * max(1.0, abs(new)):
            return new
        lam = new
    raise PolishDivergence(f"no convergence from {lam0}", "polish")


def confirm_multiplicity(prob, lam: complex, controls: Controls = DEFAULT, radius: float | None = None) -> int:
    F = _evaluator(prob, controls)
    if radius is None:
        radius = 10 * controls.tol_lambda * max(1.0, abs(lam))
    return winding_number(F, ContourBox.around(complex(lam), radius), controls)


def _polish_box(F: CharFunction, b: ContourBox, controls: Controls, depth: int = 0) -> list[tuple[complex, int]]:
    """Roots in a terminal box as (lambda, multiplicity) pairs."""
    try:
        lam = polish(F, b.center, controls, box=b, multiplicity=b.count)
        return [(lam, b.count)]
    except PolishDivergence:
        if depth > 6:
            raise
    found = []
    for child in isolate_zeros(F, b.inflated(1.0), controls, count=b.count, max_depth=80):
        shrunk = child
        for _ in range(4):
            if shrunk.count != 1:
                break
            kids = [k for k in isolate_zeros(F, shrunk, controls, count=1)]
            shrunk = kids[0]
        found.extend(_polish_box(F, ContourBox(*_shrink(shrunk), count=shrunk.count), controls, depth + 1))
    return found


def _shrink(b: ContourBox) -> tuple[float, float, float, float]:
    c = b.center
    hw, hh = 0.25 * (b.re1 - b.re0), 0.25 * (b.im1 - b.im0)
    return c.real - hw, c.real + hw, c.imag - hh, c.imag + hh


@dataclass
class ComplexSearch:
    box: ContourBox
    records: list[EigenvalueRecord]
    full_count: int
    real_axis_count: int
    audit: list


def complex_spectrum(prob: SLProblem, box: ContourBox, controls: Controls = DEFAULT,
                     F: CharFunction | None = None, details: bool = False):
    """All non-real eigenvalues inside ``box``.

    Only the part with Im > eps_axis is searched; every root found there is
    mirrored to its conjugate.  The even total is cross-checked against the
    winding of the whole box minus a thin box around the real axis.
    """
    F = F or CharFunction(prob, rk_tol=controls.rk_tol)
    audit: list = []
    upper = box.upper_part(controls.eps_axis)
    roots: list[tuple[complex, int]] = []
    if upper is not None:
        for b in isolate_zeros(F, upper, controls, audit=audit):
            roots.extend(_polish_box(F, b, controls))
    records = []
    for lam, mult in roots:
        if abs(lam.imag) < controls.eps_axis:
            continue
        try:
            confirmed = confirm_multiplicity(F, lam, controls)
        except NumericalError:
            confirmed = mult
        if confirmed != mult:
            log.warning("multiplicity of %s: box says %d, tight winding says %d", lam, mult, confirmed)
            mult = max(confirmed, 1)
        for z in (lam, lam.conjugate()):
            _, fp = F.with_derivative(z)
            records.append(build_record(prob, z, mult, controls, fprime=fp))
    records.sort(key=sort_key)

    full = real_axis = None
    if box.im0 < 0 < box.im1 and box.im0 <= -controls.eps_axis and box.im1 >= controls.eps_axis:
        full = winding_number(F, box, controls)
        thin = ContourBox(box.re0, box.re1, -controls.eps_axis, controls.eps_axis)
        real_axis = winding_number(F, thin, controls)
        nonreal = sum(r.multiplicity for r in records)
        if full - real_axis != nonreal:
            raise NumericalError(
                f"non-real count {nonreal} disagrees with winding {full} - {real_axis} on {box}",
                "complex_spectrum")
    if details:
        return ComplexSearch(box, records, full, real_axis, audit)
    return records
