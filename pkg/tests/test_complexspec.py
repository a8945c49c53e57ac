import math

import pytest
from hypothesis import given, settings, strategies as st

from ndsl.complexspec import (ContourBox, complex_spectrum, isolate_zeros, polish, winding_number)
from ndsl.controls import DEFAULT
from ndsl.records import COMPLEX_GHOST_NONDEGENERATE
from ndsl.shoot import CharFunction

from conftest import two_piece


def test_winding_examples(trivial, example_a):
    assert winding_number(trivial, ContourBox(0.5, 1.5, -0.5, 0.5)) == 1
    assert winding_number(trivial, ContourBox(2, 3, -0.5, 0.5)) == 0
    assert winding_number(trivial, ContourBox(0.5, 30, -1, 1)) == 5
    assert winding_number(example_a, ContourBox(-1, 1, 3, 6)) == 1


def test_isolate(example_a, trivial):
    boxes = isolate_zeros(example_a, ContourBox(-10, 10, 0.01, 10))
    assert len(boxes) == 1 and boxes[0].count == 1
    assert boxes[0].contains(4.3628j)
    assert isolate_zeros(trivial, ContourBox(-10, 10, 0.01, 10)) == []
    assert isolate_zeros(trivial, ContourBox(2, 3, -0.5, 0.5)) == []


def test_isolate_additivity(example_b):
    audit = []
    box = ContourBox(-60, 60, -1, 1)
    isolate_zeros(example_b, box, audit=audit)
    by_depth = {}
    for b, count, depth in audit:
        by_depth.setdefault(depth, []).append(count)
    assert audit[0][1] == 6
    # every level below the root accounts for all zeros still being split
    assert sum(by_depth[1]) == 6


def test_polish(example_a, trivial):
    lam = polish(example_a, 4.0j)
    assert abs(lam.real) <= 1e-8 and abs(lam.imag - 4.3) <= 0.1
    assert polish(trivial, 0.9) == pytest.approx(1.0, abs=1e-10)
    assert polish(trivial, 8.5) == pytest.approx(9.0, abs=1e-10)


def test_complex_spectrum_example_a(example_a):
    search = complex_spectrum(example_a, ContourBox(-10, 10, -10, 10), details=True)
    recs = search.records
    assert len(recs) == 2
    assert recs[0].lam == pytest.approx(recs[1].lam.conjugate(), abs=1e-12)
    for r in recs:
        assert abs(r.lam.real) <= 1e-6 and abs(abs(r.lam.imag) - 4.3) <= 0.1
        assert abs(r.krein) <= 1e-6
        assert r.kind == COMPLEX_GHOST_NONDEGENERATE
        assert r.osc_count is None
    F = CharFunction(example_a)
    for r in recs:
        assert abs(F(r.lam)) <= 1e-9 * abs(F(r.lam + 1e-3))
    assert search.full_count - search.real_axis_count == 2


def test_left_definite_has_real_spectrum(example_a_q0, trivial):
    assert complex_spectrum(example_a_q0, ContourBox(-20, 20, -20, 20)) == []
    assert complex_spectrum(trivial, ContourBox(-20, 20, -20, 20)) == []


def test_box_helpers():
    b = ContourBox(-1, 1, -2, 2)
    kids = b.split(0.5, 0.5)
    assert len(kids) == 4
    assert sum((k.re1 - k.re0) * (k.im1 - k.im0) for k in kids) == pytest.approx(8.0)
    assert b.upper_part(1e-6).im0 == 1e-6
    assert ContourBox(-1, 1, 1, 2).upper_part(1e-6).im0 == 1
    assert ContourBox(-1, 1, -2, -1).upper_part(1e-6) is None
    assert b.contains(0.5 + 1j) and not b.contains(3)


@settings(max_examples=12, deadline=None)
@given(st.floats(-30, 10))
def test_evenness_and_mirror(q):
    prob = two_piece(repr(q))
    recs = complex_spectrum(prob, ContourBox(-20, 20, -20, 20))
    assert sum(r.multiplicity for r in recs) % 2 == 0
    F = CharFunction(prob)
    for r in recs:
        scale = abs(F(r.lam + 1e-3 * max(1.0, abs(r.lam))))
        assert abs(F(r.lam.conjugate())) <= 1e-8 * scale
        assert any(abs(s.lam - r.lam.conjugate()) <= 1e-8 for s in recs)
