"""Problem data: piecewise coefficients p, q, r, endpoints and boundary angles."""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ProblemError
from .expr import Expression, combine, constant, parse_expression, reflect

TOL_WEIGHT = 1e-12
TOL_QUAD = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class PiecewiseCoefficient:
    """Coefficient given by one expression per piece.

    Piece ``i`` covers ``[breakpoints[i], breakpoints[i+1])``; the last piece
    is closed at the right end.
    """

    breakpoints: tuple[float, ...]
    pieces: tuple[Expression, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(bp) != len(self.pieces) + 1 or not self.pieces:
            raise ProblemError("need len(breakpoints) == len(pieces) + 1 >= 2")
        if any(not math.isfinite(b) for b in bp):
            raise ProblemError("breakpoints must be finite")
        if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            raise ProblemError("breakpoints must be strictly increasing")

    @classmethod
    def uniform(cls, a: float, b: float, expr: Expression | str | float) -> "PiecewiseCoefficient":
        return cls((a, b), (_as_expr(expr),))

    @property
    def a(self) -> float:
        return self.breakpoints[0]

    @property
    def b(self) -> float:
        return self.breakpoints[-1]

    def piece_index(self, x: float) -> int:
        if not (self.a <= x <= self.b):
            raise ProblemError(f"x={x!r} outside [{self.a}, {self.b}]")
        i = bisect.bisect_right(self.breakpoints, x) - 1
        return min(i, len(self.pieces) - 1)

    def __call__(self, x: float) -> float:
        return float(self.pieces[self.piece_index(x)](float(x)))

    def combine(self, op: str, other: "PiecewiseCoefficient") -> "PiecewiseCoefficient":
        """Pointwise ``self op other`` on the union of both breakpoint sets."""
        if (self.a, self.b) != (other.a, other.b):
            raise ProblemError("coefficients live on different intervals")
        bps = sorted(set(self.breakpoints) | set(other.breakpoints))
        pieces = []
        for lo, hi in zip(bps, bps[1:]):
            mid = 0.5 * (lo + hi)
            pieces.append(combine(op, self.pieces[self.piece_index(mid)], other.pieces[other.piece_index(mid)]))
        return PiecewiseCoefficient(tuple(bps), tuple(pieces))

    def restricted(self, lo: float, hi: float) -> "PiecewiseCoefficient":
        i0, i1 = self.piece_index(lo), self.piece_index(hi)
        if i1 > i0 and self.breakpoints[i1] >= hi:
            i1 -= 1
        inner = [b for b in self.breakpoints[i0 + 1:i1 + 1]]
        return PiecewiseCoefficient((lo, *inner, hi), self.pieces[i0:i1 + 1])

    def reflected(self) -> "PiecewiseCoefficient":
        """Coefficient of x -> a + b - x."""
        s = self.a + self.b
        bps = tuple(s - b for b in reversed(self.breakpoints))
        return PiecewiseCoefficient(bps, tuple(reflect(e, s) for e in reversed(self.pieces)))

    def scaled(self, factor: float) -> "PiecewiseCoefficient":
        c = PiecewiseCoefficient.uniform(self.a, self.b, constant(factor))
        return c.combine("*", self)


def _as_expr(e) -> Expression:
    if isinstance(e, Expression):
        return e
    if isinstance(e, (int, float)):
        return constant(float(e))
    return parse_expression(str(e))


@dataclass(frozen=True)
class Segment:
    """Maximal subinterval on which p, q and r each use a single expression."""

    lo: float
    hi: float
    p: Expression
    q: Expression
    r: Expression

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def is_constant(self) -> bool:
        return self.p.is_constant and self.q.is_constant and self.r.is_constant


@dataclass(frozen=True)
class SLProblem:
    """-(p y')' + q y = lambda r y on [a, b] with separated boundary conditions

        y(a) cos(alpha) - (p y')(a) sin(alpha) = 0
        y(b) cos(beta)  + (p y')(b) sin(beta)  = 0
    """

    a: float
    b: float
    p: PiecewiseCoefficient
    q: PiecewiseCoefficient
    r: PiecewiseCoefficient
    alpha: float = 0.0
    beta: float = 0.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ProblemError("need finite a < b")
        for label, c in (("p", self.p), ("q", self.q), ("r", self.r)):
            if not (math.isclose(c.a, self.a, abs_tol=1e-14) and math.isclose(c.b, self.b, abs_tol=1e-14)):
                raise ProblemError(f"coefficient {label} does not span [{self.a}, {self.b}]")
        for label, ang in (("alpha", self.alpha), ("beta", self.beta)):
            if not (0.0 <= ang < math.pi):
                raise ProblemError(f"{label}={ang!r} outside [0, pi)")

    @cached_property
    def segments(self) -> tuple[Segment, ...]:
        bps = sorted(set(self.p.breakpoints) | set(self.q.breakpoints) | set(self.r.breakpoints))
        segs = []
        for lo, hi in zip(bps, bps[1:]):
            mid = 0.5 * (lo + hi)
            segs.append(Segment(lo, hi,
                                self.p.pieces[self.p.piece_index(mid)],
                                self.q.pieces[self.q.piece_index(mid)],
                                self.r.pieces[self.r.piece_index(mid)]))
        return tuple(segs)

    @property
    def length(self) -> float:
        return self.b - self.a

    def replace(self, **changes) -> "SLProblem":
        kw = dict(a=self.a, b=self.b, p=self.p, q=self.q, r=self.r,
                  alpha=self.alpha, beta=self.beta, name=self.name)
        kw.update(changes)
        return SLProblem(**kw)

    def restricted(self, lo: float, hi: float) -> "SLProblem":
        """The same equation on [lo, hi]; the boundary angles are kept."""
        return self.replace(a=lo, b=hi, p=self.p.restricted(lo, hi), q=self.q.restricted(lo, hi),
                            r=self.r.restricted(lo, hi))

    def reflected(self) -> "SLProblem":
        """The problem in the variable a + b - x; alpha and beta swap roles."""
        return self.replace(p=self.p.reflected(), q=self.q.reflected(), r=self.r.reflected(),
                            alpha=self.beta, beta=self.alpha)

    def auxiliary(self, lam: float) -> "SLProblem":
        """Weight 1, potential q - lam*r: the problem whose negative
        eigenvalues define Haupt's counting function at ``lam``."""
        q_aux = self.q.combine("-", self.r.scaled(lam))
        one = PiecewiseCoefficient.uniform(self.a, self.b, 1.0)
        return self.replace(q=q_aux, r=one, name=f"{self.name}:aux({lam!r})")

    def shifted_weight(self) -> "SLProblem":
        """-(p y')' + q y = lambda (r + 1) y."""
        one = PiecewiseCoefficient.uniform(self.a, self.b, 1.0)
        return self.replace(r=self.r.combine("+", one), name=f"{self.name}:r+1")

    def unit_weight(self) -> "SLProblem":
        one = PiecewiseCoefficient.uniform(self.a, self.b, 1.0)
        return self.replace(r=one, name=f"{self.name}:w1")


def segments_in(prob: SLProblem, window: tuple[float, float] | None = None):
    """Yield (lo, hi, segment) for each segment clipped to ``window``."""
    c, d = (prob.a, prob.b) if window is None else window
    for seg in prob.segments:
        lo, hi = max(seg.lo, c), min(seg.hi, d)
        if hi > lo:
            yield lo, hi, seg


def integrate_piecewise(prob: SLProblem, f: Callable[[Segment, np.ndarray], np.ndarray],
                        window: tuple[float, float] | None = None,
                        tol: float = TOL_QUAD, max_level: int = 16) -> float:
    """Integrate ``f(segment, x)`` over ``window`` with composite Gauss-Legendre.

    Each segment is handled separately so that coefficient jumps never lie
    inside a quadrature panel.  The panel count doubles until two successive
    values differ by less than ``tol * (1 + |value|)``.
    """
    c, d = (prob.a, prob.b) if window is None else window
    if not (prob.a <= c <= d <= prob.b):
        raise ProblemError(f"window [{c}, {d}] not inside [{prob.a}, {prob.b}]")
    total = 0.0
    for lo, hi, seg in segments_in(prob, (c, d)):
        prev = None
        panels = 1
        for _ in range(max_level):
            edges = np.linspace(lo, hi, panels + 1)
            half = 0.5 * np.diff(edges)
            mids = 0.5 * (edges[1:] + edges[:-1])
            xs = (mids[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
            vals = np.asarray(f(seg, xs), dtype=float)
            if vals.shape != xs.shape:
                vals = np.broadcast_to(vals, xs.shape)
            if not np.all(np.isfinite(vals)):
                raise ProblemError("non-finite integrand sample")
            value = float(np.sum(vals.reshape(panels, -1) * _GL_WEIGHTS[None, :] * half[:, None]))
            if prev is not None and abs(value - prev) < tol * (1.0 + abs(value)):
                break
            prev = value
            panels *= 2
        total += value
    return total


def sqrt_weight_ratio(prob: SLProblem, sign: int = +1) -> float:
    """Integral of sqrt(max(sign * r/p, 0)) over [a, b]."""
    def f(seg, x):
        return np.sqrt(np.maximum(sign * seg.r(x) / seg.p(x), 0.0))
    return integrate_piecewise(prob, f)


def abs_weight(prob: SLProblem) -> float:
    return integrate_piecewise(prob, lambda seg, x: np.abs(seg.r(x)))


# -- validation ----------------------------------------------------------------

@dataclass
class ValidationReport:
    valid: bool
    errors: list[str]
    r_profile: list[tuple[float, float, str]]

    def raise_if_invalid(self):
        if not self.valid:
            raise ProblemError("; ".join(self.errors))


def _sample_points(lo: float, hi: float, n: int = 64) -> np.ndarray:
    edges = np.linspace(lo, hi, n + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    inner = (mids[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    return np.concatenate(([lo], inner, [hi]))


def piece_sign(expr: Expression, lo: float, hi: float, band: float = 1e-12) -> str:
    """'+', '-', 'zero' or 'mixed' for ``expr`` on [lo, hi]."""
    if expr.is_constant:
        v = expr.constant_value
        return "+" if v > band else "-" if v < -band else "zero"
    vals = np.asarray(expr(_sample_points(lo, hi)))
    pos, neg = np.any(vals > band), np.any(vals < -band)
    if pos and neg:
        return "mixed"
    return "+" if pos else "-" if neg else "zero"


def r_sign_profile(prob: SLProblem) -> list[tuple[float, float, str]]:
    r = prob.r
    return [(lo, hi, piece_sign(e, lo, hi)) for lo, hi, e in zip(r.breakpoints, r.breakpoints[1:], r.pieces)]


def validate_problem(prob: SLProblem, tol_weight: float = TOL_WEIGHT) -> ValidationReport:
    errors: list[str] = []
    for seg in prob.segments:
        xs = _sample_points(seg.lo, seg.hi)
        try:
            pv = np.asarray(seg.p(xs)) * np.ones_like(xs)
        except ValueError as exc:
            errors.append(f"p cannot be evaluated on [{seg.lo}, {seg.hi}]: {exc}")
            continue
        bad = np.nonzero(pv <= 0)[0]
        if bad.size:
            errors.append(f"p not positive at x={float(xs[bad[0]]):.15g}")
        for label, e in (("q", seg.q), ("r", seg.r)):
            try:
                e(xs)
            except ValueError as exc:
                errors.append(f"{label} cannot be evaluated on [{seg.lo}, {seg.hi}]: {exc}")
    profile = []
    if not errors:
        profile = r_sign_profile(prob)
        if abs_weight(prob) <= tol_weight:
            errors.append("weight integrally zero")
    return ValidationReport(valid=not errors, errors=errors, r_profile=profile)


# -- file format ---------------------------------------------------------------

def _coefficient_from_json(a: float, pieces: Sequence[dict], label: str) -> PiecewiseCoefficient:
    if not pieces:
        raise ProblemError(f"coefficient {label} has no pieces")
    bps = [float(a)]
    exprs = []
    for piece in pieces:
        try:
            to = float(piece["to"])
            text = piece["expr"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemError(f"malformed piece in {label}: {piece!r}") from exc
        exprs.append(parse_expression(str(text)))
        bps.append(to)
    try:
        return PiecewiseCoefficient(tuple(bps), tuple(exprs))
    except ProblemError as exc:
        raise ProblemError(f"coefficient {label}: {exc}") from exc


def problem_from_dict(data: dict, name: str = "") -> SLProblem:
    try:
        a, b = (float(v) for v in data["interval"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemError("missing or malformed 'interval'") from exc
    coeffs = {}
    for label in "pqr":
        if label not in data:
            raise ProblemError(f"missing coefficient {label!r}")
        c = _coefficient_from_json(a, data[label], label)
        if not math.isclose(c.b, b, abs_tol=1e-14):
            raise ProblemError(f"coefficient {label} ends at {c.b}, interval ends at {b}")
        coeffs[label] = c
    return SLProblem(a, b, coeffs["p"], coeffs["q"], coeffs["r"],
                     float(data.get("alpha", 0.0)), float(data.get("beta", 0.0)), name=name)


def load_problem(path: str | Path) -> SLProblem:
    path = Path(path)
    with path.open() as fh:
        data = json.load(fh)
    return problem_from_dict(data, name=path.stem)


def problem_to_dict(prob: SLProblem) -> dict:
    def pieces(c: PiecewiseCoefficient):
        return [{"to": hi, "expr": str(e)} for hi, e in zip(c.breakpoints[1:], c.pieces)]
    return {"interval": [prob.a, prob.b], "alpha": prob.alpha, "beta": prob.beta,
            "p": pieces(prob.p), "q": pieces(prob.q), "r": pieces(prob.r)}


def simple_problem(a: float, b: float, p="1", q="0", r: Sequence[tuple[float, str]] | str = "1",
                   alpha: float = 0.0, beta: float = 0.0, name: str = "") -> SLProblem:
    """Convenience constructor; ``r`` may be a list of (right end, expr) pieces."""
    def coeff(spec):
        if isinstance(spec, (list, tuple)):
            return _coefficient_from_json(a, [{"to": t, "expr": e} for t, e in spec], "r")
        return PiecewiseCoefficient.uniform(a, b, _as_expr(spec))
    return SLProblem(a, b, coeff(p), coeff(q), coeff(r), alpha, beta, name=name)
