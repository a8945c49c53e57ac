"""Shooting: propagate (y, p y') across [a, b] at a given lambda.

Constant-coefficient segments are crossed with exact transfer matrices,
everything else with an adaptive Dormand-Prince 5(4) integrator that is
restarted at every coefficient breakpoint.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np
from scipy.integrate import simpson

from .coeffmodel import Segment, SLProblem
from .errors import NumericalError, PreconditionError

RK_TOL = 1e-10
MIN_MESH_NODES = 512
_SERIES_CUTOFF = 1e-4
_DSERIES_CUTOFF = 1e-2


# -- constant-coefficient propagation ---------------------------------------

def _cos_sinc(w2: complex, h: float) -> tuple[complex, complex]:
    """cos(w h) and sin(w h)/w as entire functions of w2 = w**2."""
    z = w2 * h * h
    if abs(z) < _SERIES_CUTOFF:
        c = 1 - z / 2 + z * z / 24 - z * z * z / 720
        s = h * (1 - z / 6 + z * z / 120 - z * z * z / 5040)
        return c, s
    w = cmath.sqrt(w2)
    return cmath.cos(w * h), cmath.sin(w * h) / w


def _dsinc(w2: complex, h: float, c: complex, s: complex) -> complex:
    """d/d(w2) of sin(w h)/w."""
    z = w2 * h * h
    if abs(z) < _DSERIES_CUTOFF:
        acc = 0.0
        term_fact = 1.0
        for k in range(1, 10):
            term_fact /= (2 * k) * (2 * k + 1)
            acc += k * (-1) ** k * z ** (k - 1) * term_fact
        return h ** 3 * acc
    return (h * c - s) / (2 * w2)


def transfer_matrix_constant(pc: float, qc: float, rc: float, lam: complex, h: float) -> np.ndarray:
    """Exact propagator of (u, v) = (y, p y') over a step ``h`` with constant
    coefficients; determinant one."""
    if pc <= 0 or h <= 0:
        raise PreconditionError("need pc > 0 and h > 0")
    m = _tm(pc, qc, rc, complex(lam), h)
    return np.array([[m[0], m[1]], [m[2], m[3]]], dtype=complex)


def _tm(pc, qc, rc, lam, h):
    w2 = (lam * rc - qc) / pc
    try:
        c, s = _cos_sinc(w2, h)
    except OverflowError as exc:
        raise NumericalError(f"overflow propagating lambda={lam!r}", "shoot") from exc
    return c, s / pc, -pc * w2 * s, c


def _tm_with_derivative(pc, qc, rc, lam, h):
    w2 = (lam * rc - qc) / pc
    try:
        c, s = _cos_sinc(w2, h)
    except OverflowError as exc:
        raise NumericalError(f"overflow propagating lambda={lam!r}", "shoot") from exc
    g = rc / pc
    dc = -h * s / 2
    ds = _dsinc(w2, h, c, s)
    m = (c, s / pc, -pc * w2 * s, c)
    dm = (g * dc, g * ds / pc, -g * pc * (s + h * c) / 2, g * dc)
    return m, dm


def _cos_sinc_array(w2: complex, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = w2 * t * t
    small = np.abs(z) < _SERIES_CUTOFF
    w = np.sqrt(complex(w2))
    with np.errstate(all="ignore"):
        c = np.where(small, 1 - z / 2 + z * z / 24 - z ** 3 / 720, np.cos(w * t))
        s = np.where(small, t * (1 - z / 6 + z * z / 120 - z ** 3 / 5040),
                     np.sin(w * t) / (w if w != 0 else 1.0))
    return c, s


def _seg_constants(seg: Segment) -> tuple[float, float, float] | None:
    if seg.is_constant:
        return seg.p.constant_value, seg.q.constant_value, seg.r.constant_value
    return None


# -- adaptive Runge-Kutta -------------------------------------------------------

_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def rk45(fun: Callable[[float, np.ndarray], np.ndarray], x0: float, x1: float, y0: np.ndarray,
         rtol: float = RK_TOL, atol: float | None = None, stops: Sequence[float] = (),
         on_step: Callable[[float, np.ndarray], None] | None = None, h0: float | None = None):
    """Integrate y' = fun(x, y) from x0 to x1 with Dormand-Prince 5(4).

    Steps never cross a value in ``stops``.  ``on_step`` sees every accepted
    step endpoint.  Returns the final state.
    """
    atol = rtol if atol is None else atol
    y = np.array(y0, dtype=np.result_type(y0, float))
    x = float(x0)
    span = x1 - x0
    if span <= 0:
        return y
    targets = sorted(s for s in stops if x0 < s < x1) + [x1]
    h = h0 if h0 else span / 16
    k1 = fun(x, y)
    for target in targets:
        while x < target:
            h = min(h, target - x)
            if h < 1e-14 * max(1.0, abs(x)):
                raise NumericalError(f"step size underflow at x={x!r}", "rk45")
            ks = [k1]
            for i in range(1, 7):
                yi = y + h * sum(a * k for a, k in zip(_DP_A[i], ks))
                ks.append(fun(x + _DP_C[i] * h, yi))
            y_new = y + h * sum(b * k for b, k in zip(_DP_B, ks) if b)
            err = h * sum(e * k for e, k in zip(_DP_E, ks) if e)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            enorm = float(np.max(np.abs(err) / scale))
            if not math.isfinite(enorm):
                raise NumericalError(f"non-finite state at x={x!r}", "rk45")
            if enorm <= 1.0:
                x_new = target if target - (x + h) < 1e-14 * max(1.0, abs(target)) else x + h
                x, y = x_new, y_new
                k1 = ks[6]
                if on_step is not None:
                    on_step(x, y)
                factor = 5.0 if enorm == 0 else min(5.0, 0.9 * enorm ** -0.2)
            else:
                factor = max(0.2, 0.9 * enorm ** -0.2)
            h *= factor
    return y


def _rk_rhs(seg: Segment, lam: complex, want_derivative: bool):
    p, q, r = seg.p, seg.q, seg.r

    def rhs(x, y):
        px, qx, rx = p(x), q(x), r(x)
        out = np.empty_like(y)
        out[0] = y[1] / px
        out[1] = (qx - lam * rx) * y[0]
        if want_derivative:
            out[2] = y[3] / px
            out[3] = (qx - lam * rx) * y[2] - rx * y[0]
        return out
    return rhs


# -- IVP ---------------------------------------------------------------------------

@dataclass
class Eigenfunction:
    """Samples of (u, v) = (y, p y') on a mesh, normalized so max|u| = 1.

    ``segments`` holds inclusive (start, stop) node indices of each
    coefficient segment; neighbouring segments share their boundary node.
    """

    lam: complex
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    segments: list[tuple[int, int]] = field(default_factory=list)

    def normalized(self) -> "Eigenfunction":
        j = int(np.argmax(np.abs(self.u)))
        scale = self.u[j]
        if scale == 0:
            raise NumericalError("eigenfunction vanishes on the mesh", "shoot")
        return Eigenfunction(self.lam, self.x, self.u / scale, self.v / scale, list(self.segments))

    def conjugate(self) -> "Eigenfunction":
        return Eigenfunction(self.lam.conjugate(), self.x, self.u.conj(), self.v.conj(), list(self.segments))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.u.imag == 0) and np.all(self.v.imag == 0))


@dataclass
class IVPResult:
    lam: complex
    u: complex
    v: complex
    du: complex | None = None
    dv: complex | None = None
    mesh: Eigenfunction | None = None


def _segment_grid(prob: SLProblem, min_nodes: int) -> list[np.ndarray]:
    grids = []
    for seg in prob.segments:
        n = max(2, int(math.ceil(min_nodes * seg.length / prob.length)))
        n += n % 2
        grids.append(np.linspace(seg.lo, seg.hi, n + 1))
    return grids


def integrate_ivp(prob: SLProblem, lam: complex, want_derivative: bool = False,
                  want_mesh: bool = False, rk_tol: float = RK_TOL, force_rk: bool = False,
                  min_nodes: int = MIN_MESH_NODES) -> IVPResult:
    """Solve the initial-value problem from x = a with (u, v) = (sin a, cos a).

    With ``want_derivative`` the lambda-derivatives (du, dv) are carried
    along from (0, 0).  With ``want_mesh`` the solution is sampled on at
    least ``min_nodes`` nodes plus every Runge-Kutta step endpoint.
    """
    lam = complex(lam)
    u, v = complex(math.sin(prob.alpha)), complex(math.cos(prob.alpha))
    du = dv = 0j
    grids = _segment_grid(prob, min_nodes) if want_mesh else None
    xs: list[np.ndarray] = []
    us: list[np.ndarray] = []
    vs: list[np.ndarray] = []
    seg_bounds: list[tuple[int, int]] = []
    count = 0
    for i, seg in enumerate(prob.segments):
        consts = None if force_rk else _seg_constants(seg)
        if consts is not None:
            pc, qc, rc = consts
            if want_mesh:
                t = grids[i] - seg.lo
                w2 = (lam * rc - qc) / pc
                c, s = _cos_sinc_array(w2, t)
                if not (np.all(np.isfinite(c)) and np.all(np.isfinite(s))):
                    raise NumericalError(f"overflow on mesh at lambda={lam!r}", "shoot")
                xs_i, us_i, vs_i = grids[i], c * u + s / pc * v, -pc * w2 * s * u + c * v
            h = seg.length
            if want_derivative:
                m, dm = _tm_with_derivative(pc, qc, rc, lam, h)
                du, dv = (m[0] * du + m[1] * dv + dm[0] * u + dm[1] * v,
                          m[2] * du + m[3] * dv + dm[2] * u + dm[3] * v)
            else:
                m = _tm(pc, qc, rc, lam, h)
            u, v = m[0] * u + m[1] * v, m[2] * u + m[3] * v
        else:
            y0 = np.array([u, v, du, dv] if want_derivative else [u, v], dtype=complex)
            rhs = _rk_rhs(seg, lam, want_derivative)
            rec_x, rec_y = [seg.lo], [y0[:2].copy()]

            def on_step(x, y, rec_x=rec_x, rec_y=rec_y):
                rec_x.append(x)
                rec_y.append(y[:2].copy())
            stops = grids[i][1:-1] if want_mesh else ()
            y = rk45(rhs, seg.lo, seg.hi, y0, rtol=rk_tol, stops=stops,
                     on_step=on_step if want_mesh else None)
            u, v = y[0], y[1]
            if want_derivative:
                du, dv = y[2], y[3]
            if want_mesh:
                xs_i = np.array(rec_x)
                arr = np.array(rec_y)
                us_i, vs_i = arr[:, 0], arr[:, 1]
        if not (cmath.isfinite(u) and cmath.isfinite(v)):
            raise NumericalError(f"non-finite state at lambda={lam!r}", "shoot")
        if want_mesh:
            start = 0 if i == 0 else 1
            xs.append(xs_i[start:])
            us.append(us_i[start:])
            vs.append(vs_i[start:])
            first = count - 1 if i else 0
            count += len(xs_i) - start
            seg_bounds.append((first, count - 1))
    mesh = None
    if want_mesh:
        mesh = Eigenfunction(lam, np.concatenate(xs), np.concatenate(us), np.concatenate(vs), seg_bounds)
    return IVPResult(lam, u, v, du if want_derivative else None, dv if want_derivative else None, mesh)


def matching_point(prob: SLProblem, lam: complex, samples: int = 33) -> float:
    """Where the shots from a and from b meet.

    Integrating into a region where lam r - q < 0 amplifies the unwanted
    growing mode, so the point sits in the middle of the oscillatory
    stretch with the largest phase integral of sqrt((lam r - q) / p).
    Without any oscillatory stretch it sits where (lam r - q) / p peaks.
    """
    lam = complex(lam).real
    xs, w2 = [], []
    for seg in prob.segments:
        x = np.linspace(seg.lo, seg.hi, samples)
        xs.append(x)
        w2.append((lam * np.broadcast_to(seg.r(x), x.shape) - np.broadcast_to(seg.q(x), x.shape))
                  / np.broadcast_to(seg.p(x), x.shape))
    x, w2 = np.concatenate(xs), np.concatenate(w2)
    best, best_phase = None, 0.0
    start = None
    for i in range(len(x) + 1):
        inside = i < len(x) and w2[i] > 0
        if inside and start is None:
            start = i
        elif not inside and start is not None:
            xi, wi = x[start:i], np.sqrt(w2[start:i])
            phase = float(np.sum(0.5 * (wi[1:] + wi[:-1]) * np.diff(xi))) if i - start > 1 else 0.0
            if best is None or phase > best_phase:
                best, best_phase = (x[start], x[i - 1]), phase
            start = None
    if best is None or best_phase == 0.0:
        c = float(x[int(np.argmax(w2))])
    else:
        c = 0.5 * (best[0] + best[1])
    # keep both sub-intervals non-degenerate
    h = 1e-3 * prob.length
    return min(max(c, prob.a + h), prob.b - h)


def _two_sided(prob: SLProblem, c: float):
    left = prob.restricted(prob.a, c)
    right = prob.reflected().restricted(prob.a, prob.a + prob.b - c)
    return left, right


def eigenfunction(prob: SLProblem, lam: complex, rk_tol: float = RK_TOL,
                  min_nodes: int = MIN_MESH_NODES) -> Eigenfunction:
    """Eigenfunction at an eigenvalue, normalized so that max|u| = 1.

    Shots from both ends are matched at ``matching_point``; a single
    shot would be swamped by the growing mode in non-oscillatory regions.
    """
    c = matching_point(prob, lam)
    left, right = _two_sided(prob, c)
    nl = max(16, int(min_nodes * left.length / prob.length))
    nr = max(16, int(min_nodes * right.length / prob.length))
    ml = integrate_ivp(left, lam, want_mesh=True, rk_tol=rk_tol, min_nodes=nl).mesh
    mr = integrate_ivp(right, lam, want_mesh=True, rk_tol=rk_tol, min_nodes=nr).mesh
    s = prob.a + prob.b
    xr, ur, vr = s - mr.x[::-1], mr.u[::-1], -mr.v[::-1]
    yl = np.array([ml.u[-1], ml.v[-1]])
    yr = np.array([ur[0], vr[0]])
    scale = np.vdot(yr, yl) / np.vdot(yr, yr).real
    ur, vr = ur * scale, vr * scale
    n_left = len(ml.x)
    segs = list(ml.segments)
    last = len(mr.x) - 1
    rsegs = [(n_left - 1 + last - j1, n_left - 1 + last - j0) for j0, j1 in reversed(mr.segments)]
    if len(segs) + len(rsegs) > len(prob.segments):
        # c is interior to a segment: glue the two halves back together
        segs[-1] = (segs[-1][0], rsegs[0][1])
        rsegs = rsegs[1:]
    ef = Eigenfunction(complex(lam), np.concatenate([ml.x, xr[1:]]), np.concatenate([ml.u, ur[1:]]),
                       np.concatenate([ml.v, vr[1:]]), segs + rsegs)
    if complex(lam).imag == 0:
        ef = Eigenfunction(ef.lam, ef.x, ef.u.real.astype(complex), ef.v.real.astype(complex), ef.segments)
    return ef.normalized()


def char_F(prob: SLProblem, lam: complex, want_derivative: bool = False, rk_tol: float = RK_TOL):
    """Characteristic function F(lam) = u(b) cos(beta) + v(b) sin(beta).

    Returns ``F`` or ``(F, F')``.
    """
    res = integrate_ivp(prob, lam, want_derivative=want_derivative, rk_tol=rk_tol)
    cb, sb = math.cos(prob.beta), math.sin(prob.beta)
    f = res.u * cb + res.v * sb
    if want_derivative:
        return f, res.du * cb + res.dv * sb
    return f


def propagator(prob: SLProblem, lam: complex, rk_tol: float = RK_TOL, force_rk: bool = False) -> np.ndarray:
    """Fundamental matrix mapping (u, v)(a) to (u, v)(b)."""
    lam = complex(lam)
    total = np.eye(2, dtype=complex)
    for seg in prob.segments:
        consts = None if force_rk else _seg_constants(seg)
        if consts is not None:
            m = _tm(*consts, lam, seg.length)
            step = np.array([[m[0], m[1]], [m[2], m[3]]])
        else:
            rhs = _rk_rhs(seg, lam, False)
            cols = [rk45(rhs, seg.lo, seg.hi, np.array(e, dtype=complex), rtol=rk_tol)
                    for e in ((1, 0), (0, 1))]
            step = np.column_stack(cols)
        total = step @ total
    return total


# -- Pruefer angle ------------------------------------------------------------------

@dataclass
class PruferResult:
    lam: float
    theta_b: float
    logrho_b: float
    N: int
    checkpoints: list[tuple[float, float]] = field(default_factory=list)

    def F(self, beta: float) -> float:
        """Characteristic function recovered from the polar data."""
        return math.exp(self.logrho_b) * math.sin(self.theta_b + beta)


def zero_count(theta_b: float, tol: float = 1e-9) -> int:
    """#{k >= 1 : theta_b > k pi}, ignoring a roundoff overshoot of ``tol``."""
    slack = tol * max(1.0, abs(theta_b))
    return max(0, math.ceil((theta_b - slack) / math.pi) - 1)


def _frac(u: float, v: float) -> float:
    # theta - turns*pi in [0, pi]; kept unwrapped so a value that rounds to pi
    # is not folded back to 0 (that would lose half a turn)
    if u == 0:
        return 0.0
    a = math.atan2(u, v)
    return a + math.pi if a < 0 else a


def prufer_oscillation(prob: SLProblem, lam: float, method: str = "auto", rk_tol: float = RK_TOL,
                       record: bool = False) -> PruferResult:
    """Continuous Pruefer angle theta with y = rho sin(theta), p y' = rho cos(theta).

    On constant segments theta is tracked exactly: each segment is cut into
    sub-steps short enough to hold at most one zero of y, zeros are counted
    from sign changes, and the fractional angle comes from atan2.  Other
    segments (or ``method="rk"``) integrate

        theta'    = cos^2/p + (lam r - q) sin^2
        log rho'  = (1/p - (lam r - q)) sin cos
    """
    if isinstance(lam, complex) or np.iscomplexobj(lam):
        if complex(lam).imag != 0:
            raise PreconditionError("Pruefer angle needs real lambda")
        lam = complex(lam).real
    lam = float(lam)
    turns, frac = 0, prob.alpha % math.pi
    logrho = 0.0
    u, v = math.sin(prob.alpha), math.cos(prob.alpha)
    checkpoints = [(prob.a, prob.alpha)] if record else []
    for seg in prob.segments:
        consts = _seg_constants(seg) if method == "auto" else None
        if consts is not None:
            pc, qc, rc = consts
            w2 = (lam * rc - qc) / pc
            nsub = 1
            if w2 > 0:
                nsub = max(1, math.ceil(seg.length * math.sqrt(w2) / (0.5 * math.pi)))
            h = seg.length / nsub
            m = _tm(pc, qc, rc, complex(lam), h)
            m = tuple(z.real for z in m)
            for k in range(nsub):
                un, vn = m[0] * u + m[1] * v, m[2] * u + m[3] * v
                if u != 0 and (un == 0 or (un > 0) != (u > 0)):
                    turns += 1
                norm = math.hypot(un, vn)
                logrho += math.log(norm)
                u, v = un / norm, vn / norm
                frac = _frac(u, v)
                if record:
                    checkpoints.append((seg.lo + (k + 1) * h, turns * math.pi + frac))
        else:
            theta0 = turns * math.pi + frac
            p, q, r = seg.p, seg.q, seg.r

            def rhs(x, y):
                s, c = math.sin(y[0]), math.cos(y[0])
                g = lam * r(x) - q(x)
                px = p(x)
                return np.array([c * c / px + g * s * s, (1.0 / px - g) * s * c])

            def on_step(x, y):
                checkpoints.append((x, float(y[0])))
            y = rk45(rhs, seg.lo, seg.hi, np.array([theta0, 0.0]), rtol=rk_tol,
                     on_step=on_step if record else None)
            theta = float(y[0])
            logrho += float(y[1])
            turns = math.floor(theta / math.pi)
            frac = theta - turns * math.pi
            u, v = math.sin(theta), math.cos(theta)
    theta_b = turns * math.pi + frac
    return PruferResult(lam, theta_b, logrho, zero_count(theta_b), checkpoints)


def eigen_osc_count(prob: SLProblem, lam: float, **kw) -> int:
    """Zeros in (a, b) of the eigenfunction at an eigenvalue ``lam``.

    Pruefer angles are run from both ends to the matching point c.  At an
    eigenvalue the two states are parallel, so theta_L(c) + theta_R(c) is
    (k + 1) pi with k the number of zeros; reading k off by rounding is
    immune to the roundoff in lam.
    """
    c = matching_point(prob, lam)
    left, right = _two_sided(prob, c)
    th_l = prufer_oscillation(left, lam, **kw).theta_b
    th_r = prufer_oscillation(right, lam, **kw).theta_b
    return max(0, round((th_l + th_r) / math.pi) - 1)


# -- quadratic forms -------------------------------------------------------------

def _segment_integral(prob: SLProblem, ef: Eigenfunction, integrand) -> complex:
    total = 0j
    for (i0, i1), seg in zip(ef.segments, prob.segments):
        x = ef.x[i0:i1 + 1]
        vals = integrand(seg, x, ef.u[i0:i1 + 1], ef.v[i0:i1 + 1])
        vals = np.broadcast_to(vals, x.shape)
        total += simpson(vals.real, x=x) + 1j * simpson(vals.imag, x=x)
    return total


def krein_norms(prob: SLProblem, ef: Eigenfunction) -> tuple[float, complex]:
    """(int r |y|^2, int r y^2) by Simpson's rule within each segment."""
    krein = _segment_integral(prob, ef, lambda seg, x, u, v: seg.r(x) * np.abs(u) ** 2 + 0j)
    bilinear = _segment_integral(prob, ef, lambda seg, x, u, v: seg.r(x) * u * u)
    return float(krein.real), complex(bilinear)


def evaluate_forms(prob: SLProblem, ef: Eigenfunction) -> tuple[float, float]:
    """The forms L(y, y) and R(y, y) for a sampled eigenfunction."""
    R = _segment_integral(prob, ef, lambda seg, x, u, v: seg.r(x) * np.abs(u) ** 2 + 0j).real
    L = _segment_integral(
        prob, ef,
        lambda seg, x, u, v: np.abs(v) ** 2 / seg.p(x) + seg.q(x) * np.abs(u) ** 2 + 0j).real
    if prob.alpha != 0:
        L += abs(ef.u[0]) ** 2 / math.tan(prob.alpha)
    if prob.beta != 0:
        L += abs(ef.u[-1]) ** 2 / math.tan(prob.beta)
    return float(L), float(R)


def write_eigenfunction_csv(ef: Eigenfunction, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", "re_u", "im_u", "re_v", "im_v"])
    for x, u, v in zip(ef.x, ef.u, ef.v):
        w.writerow([fmt(x), fmt(u.real), fmt(u.imag), fmt(v.real), fmt(v.imag)])


def fmt(value: float) -> str:
    """Deterministic 15-significant-digit float formatting."""
    value = float(value)
    if value == 0:
        return "0"
    return format(value, ".15g")


class CharFunction:
    """Memoized F (and F') for one problem; the cache is keyed by lambda."""

    def __init__(self, prob: SLProblem, rk_tol: float = RK_TOL):
        self.prob = prob
        self.rk_tol = rk_tol
        self._f: dict[complex, complex] = {}
        self._df: dict[complex, tuple[complex, complex]] = {}
        self.evals = 0

    def __call__(self, lam: complex) -> complex:
        lam = complex(lam)
        hit = self._df.get(lam)
        if hit is not None:
            return hit[0]
        f = self._f.get(lam)
        if f is None:
            self.evals += 1
            f = self._f[lam] = char_F(self.prob, lam, rk_tol=self.rk_tol)
        return f

    def with_derivative(self, lam: complex) -> tuple[complex, complex]:
        lam = complex(lam)
        hit = self._df.get(lam)
        if hit is None:
            self.evals += 1
            hit = self._df[lam] = char_F(self.prob, lam, want_derivative=True, rk_tol=self.rk_tol)
        return hit
