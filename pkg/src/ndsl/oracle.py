"""Finite-difference matrix pencil used to cross-check the shooting solver.

Three-point differences on a uniform interior mesh turn the Dirichlet
problem into A y = lam B y with A symmetric tridiagonal and B = diag(r).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .coeffmodel import SLProblem
from .errors import NumericalError, PreconditionError
from .shoot import fmt

EPS_B = 1e-12


@dataclass
class Pencil:
    n: int
    A: np.ndarray
    B: np.ndarray
    h: float
    x: np.ndarray

    def dump_csv(self, fh: TextIO) -> None:
        """Bands of A and the diagonal of B, one node per row."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "x", "a_lower", "a_diag", "a_upper", "b_diag"])
        for i in range(self.n):
            lo = self.A[i, i - 1] if i > 0 else 0.0
            up = self.A[i, i + 1] if i < self.n - 1 else 0.0
            w.writerow([i + 1, fmt(self.x[i]), fmt(lo), fmt(self.A[i, i]), fmt(up), fmt(self.B[i, i])])


def build_pencil(prob: SLProblem, n: int) -> Pencil:
    if prob.alpha != 0 or prob.beta != 0:
        raise PreconditionError("the finite-difference oracle handles Dirichlet conditions only")
    if n < 8:
        raise PreconditionError(f"oracle mesh needs n >= 8, got {n}")
    h = prob.length / (n + 1)
    x = prob.a + h * np.arange(1, n + 1)
    mids = prob.a + h * (np.arange(n + 1) + 0.5)
    p_half = np.array([prob.p(m) for m in mids])
    q = np.array([prob.q(xi) for xi in x])
    r = np.array([prob.r(xi) for xi in x])
    A = np.diag((p_half[:-1] + p_half[1:]) / h**2 + q)
    off = -p_half[1:-1] / h**2
    A += np.diag(off, 1) + np.diag(off, -1)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(r))):
        raise NumericalError("non-finite pencil entries", "oracle")
    return Pencil(n, A, np.diag(r), h, x)


def pencil_eigenvalues(pencil: Pencil, eps_b: float = EPS_B) -> list[complex]:
    """Eigenvalues of B^-1 A sorted by real part (then imaginary part)."""
    b = np.diag(pencil.B)
    bad = np.flatnonzero(np.abs(b) <= eps_b)
    if bad.size:
        raise PreconditionError(
            f"weight vanishes at oracle nodes {pencil.x[bad][:5].tolist()}; use a different mesh size")
    try:
        vals = np.linalg.eigvals(pencil.A / b[:, None])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"QR iteration failed: {exc}", "oracle") from exc
    # eigenvalues of a real matrix come in exact conjugate pairs; tidy roundoff
    vals = np.where(np.abs(vals.imag) <= 1e-9 * np.maximum(1.0, np.abs(vals)), vals.real + 0j, vals)
    return sorted((complex(v) for v in vals), key=lambda z: (z.real, z.imag))


@dataclass
class Match:
    shooting: complex
    pencil: complex
    rel_error: float


def match_eigenvalues(shooting: Sequence[complex], pencil: Sequence[complex]) -> list[Match]:
    """Nearest pencil eigenvalue for each shooting eigenvalue."""
    arr = np.asarray(pencil, dtype=complex)
    out = []
    for lam in shooting:
        j = int(np.argmin(np.abs(arr - lam)))
        out.append(Match(complex(lam), complex(arr[j]), float(abs(arr[j] - lam) / max(1.0, abs(lam)))))
    return out


def convergence_slope(prob: SLProblem, exact: Sequence[float], sizes: Sequence[int] = (100, 200, 400),
                      k: int | None = None) -> float:
    """Least-squares slope of log(error) against log(h).

    The error is that of the ``k``-th eigenvalue, or the largest over all
    entries of ``exact`` when ``k`` is None.
    """
    hs, errs = [], []
    for n in sizes:
        pen = build_pencil(prob, n)
        vals = np.array([z.real for z in pencil_eigenvalues(pen)])
        if k is None:
            err = max(abs(vals[i] - e) for i, e in enumerate(exact))
        else:
            err = abs(vals[k] - exact[k])
        hs.append(math.log(pen.h))
        errs.append(math.log(err))
    return float(np.polyfit(hs, errs, 1)[0])
