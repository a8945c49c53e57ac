"""Real eigenvalues, Haupt's counting function and the (r + 1)-weight count."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .coeffmodel import SLProblem, sqrt_weight_ratio
from .complexspec import ContourBox, confirm_multiplicity, winding_number
from .controls import DEFAULT, Controls
from .errors import NumericalError, PreconditionError
from .records import (COMPLEX_GHOSTS, REAL_GHOSTS, EigenvalueRecord, build_record,
                      classify_record, sort_key)
from .shoot import CharFunction, prufer_oscillation

log = logging.getLogger(__name__)

__all__ = ["real_spectrum", "real_roots", "classify_record", "haupt_n", "haupt_n0",
           "neg_count_51", "lowest_eigenvalue", "count_below", "completeness_check",
           "EigenvalueRecord", "BoundaryCase"]


class BoundaryCase(PreconditionError):
    """Zero is itself an eigenvalue of an auxiliary problem."""


@dataclass
class _Sample:
    lam: float
    f: float
    fp: float
    theta: float


def _rate_constants(prob: SLProblem) -> tuple[float, float]:
    return sqrt_weight_ratio(prob, +1), sqrt_weight_ratio(prob, -1)


def _initial_grid(prob: SLProblem, lo: float, hi: float) -> np.ndarray:
    # spacing keeps the asymptotic Pruefer rotation sqrt|lam| C / pi to
    # about a quarter turn per node
    c_pos, c_neg = _rate_constants(prob)
    nodes = list(np.linspace(lo, hi, 65))
    floor = max((hi - lo) / 4000, 1e-6 * max(1.0, abs(lo), abs(hi)))
    lam = lo
    while lam < hi:
        c = c_pos if lam >= 0 else c_neg
        step = 0.5 * math.pi * math.sqrt(abs(lam)) / c if c > 0 else (hi - lo) / 64
        lam += max(step, floor)
        nodes.append(min(lam, hi))
    return np.unique(np.array(nodes))


def _sample(F: CharFunction, prob: SLProblem, lam: float, rk_tol: float) -> _Sample:
    f, fp = F.with_derivative(lam)
    theta = prufer_oscillation(prob, lam, rk_tol=rk_tol).theta_b
    return _Sample(lam, f.real, fp.real, theta)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def _nudge_endpoint(F: CharFunction, lam: float, direction: float, controls: Controls) -> float:
    f = F(lam).real
    probe = F(lam + direction * 1e-6 * max(1.0, abs(lam))).real
    if abs(f) <= controls.tol_f * (1 + abs(probe)) or abs(f) <= 1e-9 * abs(probe):
        new = lam + direction * 1e-6 * max(1.0, abs(lam))
        log.warning("window endpoint %r is (close to) an eigenvalue; nudged to %r", lam, new)
        return new
    return lam


def real_roots(prob: SLProblem, window: tuple[float, float], controls: Controls = DEFAULT,
               F: CharFunction | None = None, max_refine: int = 30) -> list[tuple[float, int]]:
    """Real zeros of F in ``window`` as (lambda, multiplicity), ascending.

    Sign changes of F are bracketed on an adaptive grid and refined with
    Brent's method.  Since F keeps its sign through a double zero, the
    zeros of F' are located too, and a small |F| there flags a non-simple
    eigenvalue.  Multiplicities come from the winding of F on a small box.
    """
    lo, hi = map(float, window)
    if not lo < hi:
        raise PreconditionError(f"empty window [{lo}, {hi}]")
    F = F or CharFunction(prob, rk_tol=controls.rk_tol)
    lo = _nudge_endpoint(F, lo, -1.0, controls)
    hi = _nudge_endpoint(F, hi, +1.0, controls)

    samples = [_sample(F, prob, lam, controls.rk_tol) for lam in _initial_grid(prob, lo, hi)]
    for _ in range(max_refine):
        refined = [samples[0]]
        changed = False
        for s0, s1 in zip(samples, samples[1:]):
            if abs(s1.theta - s0.theta) > 0.5 * math.pi and s1.lam - s0.lam > 1e-9 * max(1.0, abs(s0.lam)):
                refined.append(_sample(F, prob, 0.5 * (s0.lam + s1.lam), controls.rk_tol))
                changed = True
            refined.append(s1)
        samples = refined
        if not changed:
            break

    fre = lambda lam: F(lam).real
    fpre = lambda lam: F.with_derivative(lam)[1].real
    simple_brackets: list[tuple[float, float]] = []
    exact: list[float] = []
    double_candidates: list[float] = []
    for s0, s1 in zip(samples, samples[1:]):
        if s0.f == 0:
            exact.append(s0.lam)
            continue
        if _sign(s0.f) != _sign(s1.f):
            if s1.f != 0:
                simple_brackets.append((s0.lam, s1.lam))
            continue
        if _sign(s0.fp) != _sign(s1.fp) and s0.fp != 0 and s1.fp != 0:
            m = brentq(fpre, s0.lam, s1.lam, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            fm = fre(m)
            scale = max(abs(s0.f), abs(s1.f))
            if fm == 0 or abs(fm) <= controls.tol_f * (1 + scale):
                double_candidates.append(m)
            elif _sign(fm) != _sign(s0.f):
                simple_brackets.extend([(s0.lam, m), (m, s1.lam)])
    if samples[-1].f == 0:
        exact.append(samples[-1].lam)

    roots = [brentq(fre, a, b, xtol=controls.tol_lambda * 1e-2, rtol=4 * np.finfo(float).eps)
             for a, b in simple_brackets]
    # a multiple zero perturbed by roundoff splits into nearby simple ones;
    # anything closer than eps_axis is one eigenvalue at working resolution
    clusters: list[list[float]] = []
    for lam in sorted(set(roots + exact + double_candidates)):
        if clusters and lam - clusters[-1][-1] <= controls.eps_axis * max(1.0, abs(lam)):
            clusters[-1].append(lam)
        else:
            clusters.append([lam])
    roots = [0.5 * (c[0] + c[-1]) for c in clusters]
    spreads = [c[-1] - c[0] for c in clusters]

    out = []
    for i, lam in enumerate(roots):
        gaps = [abs(lam - roots[j]) for j in (i - 1, i + 1) if 0 <= j < len(roots)]
        radius = min([max(1e-4 * max(1.0, abs(lam)), 4 * spreads[i])] + [0.25 * g for g in gaps])
        try:
            mult = confirm_multiplicity(F, lam, controls, radius=radius)
        except NumericalError as exc:
            log.warning("multiplicity of %r not confirmed: %s", lam, exc)
            mult = 2 if lam in double_candidates or len(clusters[i]) > 1 else 1
        if mult == 0:
            log.warning("candidate %r has zero winding; dropped", lam)
            continue
        out.append((lam, mult))
    return out


def real_spectrum(prob: SLProblem, window: tuple[float, float], controls: Controls = DEFAULT,
                  F: CharFunction | None = None) -> list[EigenvalueRecord]:
    """Classified records for every real eigenvalue in ``window``."""
    F = F or CharFunction(prob, rk_tol=controls.rk_tol)
    records = []
    for lam, mult in real_roots(prob, window, controls, F):
        _, fp = F.with_derivative(lam)
        records.append(build_record(prob, lam, mult, controls, fprime=fp))
    return sorted(records, key=sort_key)


def completeness_check(prob: SLProblem, window: tuple[float, float], records, controls: Controls = DEFAULT,
                       eps: float = 1e-3, F: CharFunction | None = None) -> tuple[int, int]:
    """(winding of the thin box around the window, total real multiplicity)."""
    F = F or CharFunction(prob, rk_tol=controls.rk_tol)
    # same outward nudge as real_roots, so the contour never crosses a root
    lo = _nudge_endpoint(F, float(window[0]), -1.0, controls)
    hi = _nudge_endpoint(F, float(window[1]), +1.0, controls)
    box = ContourBox(lo, hi, -eps, eps)
    total = sum(r.multiplicity if isinstance(r, EigenvalueRecord) else r[1] for r in records)
    return winding_number(F, box, controls), total


# -- right-definite counting -------------------------------------------------------

def _turns_below(theta_b: float, beta: float) -> int:
    # eigenvalue k of a right-definite problem has theta(b) = k pi + pi - beta
    excess = theta_b - (math.pi - beta)
    return 0 if excess <= 0 else math.floor(excess / math.pi) + 1


def count_below(prob: SLProblem, nu: float, controls: Controls = DEFAULT) -> int:
    """Eigenvalues below ``nu`` of a problem whose weight is positive.

    Raises :class:`BoundaryCase` when ``nu`` is itself an eigenvalue.
    """
    res = prufer_oscillation(prob, nu, rk_tol=controls.rk_tol)
    if abs(math.sin(res.theta_b + prob.beta)) <= max(controls.tol_f, 1e-12):
        raise BoundaryCase(f"{nu!r} is an eigenvalue of {prob.name or 'the problem'}")
    return _turns_below(res.theta_b, prob.beta)


def _sup_abs(prob: SLProblem, coeff: str) -> float:
    best = 0.0
    for seg in prob.segments:
        xs = np.linspace(seg.lo, seg.hi, 33)
        best = max(best, float(np.max(np.abs(np.broadcast_to(getattr(seg, coeff)(xs), xs.shape)))))
    return best


def lowest_eigenvalue(prob: SLProblem, controls: Controls = DEFAULT) -> float:
    """Lowest eigenvalue of a problem with positive weight (e.g. weight 1)."""
    F = CharFunction(prob, rk_tol=controls.rk_tol)
    lo = -max(4 * _sup_abs(prob, "q"), 10.0)
    for _ in range(200):
        if _count_safe(prob, lo, controls) == 0:
            break
        lo *= 2
    else:
        raise NumericalError("no lower bound for the lowest eigenvalue", "lowest_eigenvalue")
    hi = max(abs(lo), 1.0)
    for _ in range(200):
        if _count_safe(prob, hi, controls) >= 1:
            break
        hi *= 2
    else:
        raise NumericalError("no upper bound for the lowest eigenvalue", "lowest_eigenvalue")
    for _ in range(200):
        if hi - lo < 1e-3 * max(1.0, abs(lo)) and F(lo).real * F(hi).real < 0:
            break
        if hi - lo <= controls.tol_lambda * max(1.0, abs(lo)):
            # the eigenvalue sits on a bisection point and F there is roundoff
            return lo if abs(F(lo)) < abs(F(hi)) else hi
        mid = 0.5 * (lo + hi)
        if _count_safe(prob, mid, controls) == 0:
            lo = mid
        else:
            hi = mid
    return brentq(lambda z: F(z).real, lo, hi, xtol=controls.tol_lambda * 1e-2, rtol=4 * np.finfo(float).eps)


def _count_safe(prob, nu, controls):
    try:
        return count_below(prob, nu, controls)
    except BoundaryCase:
        return count_below(prob, nu + 1e-7 * max(1.0, abs(nu)), controls)


def haupt_n(prob: SLProblem, lam: float, controls: Controls = DEFAULT) -> int:
    """Number of negative eigenvalues nu of -(p y')' + (q - lam r) y = nu y."""
    return count_below(prob.auxiliary(float(lam)), 0.0, controls)


def haupt_n0(prob: SLProblem, lambda_grid, controls: Controls = DEFAULT,
             refine: int = 16) -> tuple[int, float]:
    """Minimum of haupt_n over the grid, refined between the neighbours of
    every grid minimum.  Returns (n0, a lambda attaining it)."""
    grid = np.unique(np.asarray(lambda_grid, dtype=float))
    values = [_haupt_safe(prob, lam, controls) for lam in grid]
    best = min(values)
    arg = float(grid[values.index(best)])
    for i, val in enumerate(values):
        if val != best:
            continue
        left = grid[max(i - 1, 0)]
        right = grid[min(i + 1, len(grid) - 1)]
        for lam in np.linspace(left, right, refine + 2)[1:-1]:
            v = _haupt_safe(prob, lam, controls)
            if v < best:
                best, arg = v, float(lam)
    return best, arg


def _haupt_safe(prob, lam, controls):
    try:
        return haupt_n(prob, lam, controls)
    except BoundaryCase:
        return haupt_n(prob, lam + 1e-7 * max(1.0, abs(lam)), controls)


@dataclass
class NegCount:
    count: int
    window: tuple[float, float]
    winding: int


def neg_count_51(prob: SLProblem, controls: Controls = DEFAULT, start: float | None = None,
                 max_extensions: int = 8, eps: float = 1e-3) -> NegCount:
    """Negative eigenvalues of -(p y')' + q y = lambda (r + 1) y.

    Windows [-4^k L0, 0) are searched until two consecutive extensions add
    nothing and a thin argument-principle box over the union agrees.
    """
    mod = prob.shifted_weight()
    f0 = prufer_oscillation(mod, 0.0, rk_tol=controls.rk_tol)
    if abs(math.sin(f0.theta_b + mod.beta)) <= controls.tol_f:
        raise BoundaryCase("zero is an eigenvalue of the (r + 1)-weight problem")
    F = CharFunction(mod, rk_tol=controls.rk_tol)
    left = -(start if start is not None else max(10.0, 4 * _sup_abs(prob, "q")))
    found = real_roots(mod, (left, 0.0), controls, F)
    quiet = 0
    for _ in range(max_extensions):
        new_left = 4 * left
        more = real_roots(mod, (new_left, left), controls, F)
        left = new_left
        found += more
        quiet = quiet + 1 if not more else 0
        if quiet >= 2:
            break
    else:
        raise NumericalError("negative count of the (r + 1)-weight problem did not stabilize", "neg_count_51")
    count = sum(m for lam, m in found if lam < 0)
    wind = winding_number(F, ContourBox(left, 0.0, -eps, eps), controls)
    if wind != count:
        raise NumericalError(f"negative count {count} disagrees with winding {wind}", "neg_count_51")
    return NegCount(count, (left, 0.0), wind)


def ghost_counts(records) -> dict[str, int]:
    out = {"positive_real_ghosts": 0, "negative_real_ghosts": 0, "complex_ghosts": 0}
    for r in records:
        if r.kind in REAL_GHOSTS:
            key = "positive_real_ghosts" if complex(r.lam).real > 0 else "negative_real_ghosts"
            out[key] += 1
        elif r.kind in COMPLEX_GHOSTS:
            out["complex_ghosts"] += r.multiplicity
    return out
