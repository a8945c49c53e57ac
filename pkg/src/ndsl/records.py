"""Eigenvalue records and ghost-state classification."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .coeffmodel import SLProblem
from .controls import DEFAULT, Controls
from .shoot import Eigenfunction, eigen_osc_count, eigenfunction, fmt, krein_norms

log = logging.getLogger(__name__)

GROUND_STATE = "ground_state"
ORDINARY = "ordinary"
NONDEGENERATE_REAL_GHOST = "nondegenerate_real_ghost"
DEGENERATE_REAL_GHOST = "degenerate_real_ghost"
COMPLEX_GHOST_NONDEGENERATE = "complex_ghost_nondegenerate"
COMPLEX_GHOST_DEGENERATE = "complex_ghost_degenerate"

CLASSES = (GROUND_STATE, ORDINARY, NONDEGENERATE_REAL_GHOST, DEGENERATE_REAL_GHOST,
           COMPLEX_GHOST_NONDEGENERATE, COMPLEX_GHOST_DEGENERATE)
REAL_GHOSTS = (NONDEGENERATE_REAL_GHOST, DEGENERATE_REAL_GHOST)
COMPLEX_GHOSTS = (COMPLEX_GHOST_NONDEGENERATE, COMPLEX_GHOST_DEGENERATE)

SPECTRUM_COLUMNS = ["re_lambda", "im_lambda", "multiplicity", "simple", "osc_count",
                    "krein", "re_bilinear", "im_bilinear", "class"]


@dataclass
class EigenvalueRecord:
    lam: complex
    multiplicity: int
    simple: bool
    osc_count: int | None
    krein: float
    bilinear: complex
    kind: str = ORDINARY
    fprime: complex | None = None
    eigenfunction: Eigenfunction | None = field(default=None, repr=False)
    warnings: list[str] = field(default_factory=list)

    @property
    def is_real(self) -> bool:
        return complex(self.lam).imag == 0

    def csv_row(self) -> list[str]:
        lam = complex(self.lam)
        return [fmt(lam.real), fmt(lam.imag), str(self.multiplicity), str(self.simple).lower(),
                "" if self.osc_count is None else str(self.osc_count), fmt(self.krein),
                fmt(self.bilinear.real), fmt(self.bilinear.imag), self.kind]


def is_strictly_positive(ef: Eigenfunction) -> bool:
    """One-signed on the open interval (eigenfunctions are fixed up to sign)."""
    inner = ef.u[1:-1]
    if np.any(inner.imag != 0):
        return False
    vals = inner.real
    return bool(np.all(vals > 0) or np.all(vals < 0))


def classify_record(rec: EigenvalueRecord) -> str:
    lam = complex(rec.lam)
    if lam.imag != 0:
        return COMPLEX_GHOST_NONDEGENERATE if rec.simple else COMPLEX_GHOST_DEGENERATE
    if not rec.simple:
        return DEGENERATE_REAL_GHOST
    if lam.real == 0:
        msg = "lambda = 0: ghost sign test undefined, classified ordinary"
        log.warning(msg)
        rec.warnings.append(msg)
        return ORDINARY
    if lam.real * rec.krein < 0:
        return NONDEGENERATE_REAL_GHOST
    if rec.eigenfunction is not None and is_strictly_positive(rec.eigenfunction):
        return GROUND_STATE
    return ORDINARY


def build_record(prob: SLProblem, lam: complex, multiplicity: int, controls: Controls = DEFAULT,
                 fprime: complex | None = None) -> EigenvalueRecord:
    lam = complex(lam)
    real = lam.imag == 0
    ef = eigenfunction(prob, lam, rk_tol=controls.rk_tol, min_nodes=controls.min_nodes)
    krein, bilinear = krein_norms(prob, ef)
    osc = eigen_osc_count(prob, lam.real, rk_tol=controls.rk_tol) if real else None
    rec = EigenvalueRecord(lam=lam.real if real else lam, multiplicity=multiplicity,
                           simple=multiplicity == 1, osc_count=osc, krein=krein,
                           bilinear=bilinear, fprime=fprime, eigenfunction=ef)
    rec.kind = classify_record(rec)
    if not real and abs(krein) > controls.tol_ghost:
        msg = f"non-real eigenvalue {lam} has Krein norm {krein:.3e} above tol_ghost"
        log.warning(msg)
        rec.warnings.append(msg)
    return rec


def sort_key(rec: EigenvalueRecord):
    lam = complex(rec.lam)
    return (lam.real, lam.imag)


def write_spectrum_csv(records: Iterable[EigenvalueRecord], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SPECTRUM_COLUMNS)
    for rec in sorted(records, key=sort_key):
        w.writerow(rec.csv_row())


def read_spectrum_csv(fh: TextIO) -> list[dict]:
    rows = []
    for row in csv.DictReader(fh):
        rows.append({
            "lam": complex(float(row["re_lambda"]), float(row["im_lambda"])),
            "multiplicity": int(row["multiplicity"]),
            "simple": row["simple"] == "true",
            "osc_count": int(row["osc_count"]) if row["osc_count"] else None,
            "krein": float(row["krein"]),
            "bilinear": complex(float(row["re_bilinear"]), float(row["im_bilinear"])),
            "class": row["class"],
        })
    return rows


def total_multiplicity(records: Iterable[EigenvalueRecord]) -> int:
    return sum(r.multiplicity for r in records)


def nearly_equal(a: complex, b: complex, tol: float) -> bool:
    return abs(complex(a) - complex(b)) <= tol * max(1.0, abs(complex(a)))

