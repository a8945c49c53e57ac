import io
import math

import numpy as np
import pytest

from ndsl.records import (COMPLEX_GHOST_DEGENERATE, COMPLEX_GHOST_NONDEGENERATE, DEGENERATE_REAL_GHOST,
                          GROUND_STATE, NONDEGENERATE_REAL_GHOST, ORDINARY, SPECTRUM_COLUMNS,
                          EigenvalueRecord, classify_record, read_spectrum_csv, write_spectrum_csv)
from ndsl.shoot import Eigenfunction


def _rec(lam, krein=1.0, simple=True, ef=None):
    return EigenvalueRecord(lam=lam, multiplicity=1 if simple else 2, simple=simple, osc_count=None,
                            krein=krein, bilinear=complex(krein), eigenfunction=ef)


def _ef(u):
    x = np.linspace(0, math.pi, len(u))
    return Eigenfunction(1.0, x, np.asarray(u, dtype=complex), np.zeros(len(u), complex), [(0, len(u) - 1)])


def test_classification_table():
    x = np.linspace(0, math.pi, 101)
    assert classify_record(_rec(1.0, math.pi / 2, ef=_ef(np.sin(x)))) == GROUND_STATE
    assert classify_record(_rec(4.0, 1.0, ef=_ef(np.sin(2 * x)))) == ORDINARY
    assert classify_record(_rec(4.3j, 0.0)) == COMPLEX_GHOST_NONDEGENERATE
    assert classify_record(_rec(4.3j, 0.0, simple=False)) == COMPLEX_GHOST_DEGENERATE
    assert classify_record(_rec(5.0, -0.3)) == NONDEGENERATE_REAL_GHOST
    assert classify_record(_rec(-5.0, 0.3)) == NONDEGENERATE_REAL_GHOST
    assert classify_record(_rec(-5.0, -0.3, ef=_ef(np.sin(x)))) == GROUND_STATE
    assert classify_record(_rec(5.0, 0.0, simple=False)) == DEGENERATE_REAL_GHOST


def test_zero_eigenvalue_warns():
    rec = _rec(0.0, -1.0)
    assert classify_record(rec) == ORDINARY
    assert rec.warnings


def test_csv_round_trip():
    recs = [_rec(4.3j, 0.0), _rec(-1.5, 2.0), _rec(-4.3j, 0.0)]
    for r in recs:
        r.kind = classify_record(r)
    buf = io.StringIO()
    write_spectrum_csv(recs, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == ",".join(SPECTRUM_COLUMNS)
    rows = read_spectrum_csv(io.StringIO(text))
    assert [r["lam"] for r in rows] == [-1.5, -4.3j, 4.3j]
    assert rows[0]["osc_count"] is None and rows[1]["class"] == COMPLEX_GHOST_NONDEGENERATE
    again = io.StringIO()
    write_spectrum_csv(list(reversed(recs)), again)
    assert again.getvalue() == text
