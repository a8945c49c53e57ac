import io
import math

import numpy as np
import pytest

from ndsl.coeffmodel import simple_problem
from ndsl.errors import PreconditionError
from ndsl.oracle import build_pencil, convergence_slope, match_eigenvalues, pencil_eigenvalues


def test_small_pencil(trivial):
    pen = build_pencil(trivial, 8)
    h = math.pi / 9
    assert pen.h == pytest.approx(h)
    np.testing.assert_allclose(np.diag(pen.A), 2 / h**2)
    np.testing.assert_allclose(np.diag(pen.A, 1), -1 / h**2)
    np.testing.assert_array_equal(pen.B, np.eye(8))
    np.testing.assert_array_equal(pen.A, pen.A.T)


def test_weight_signs(example_a):
    pen = build_pencil(example_a, 401)
    r = np.diag(pen.B)
    assert np.all(r[pen.x < 1] == 1) and np.all(r[pen.x >= 1] == -1)


def test_preconditions(trivial):
    with pytest.raises(PreconditionError):
        build_pencil(trivial.replace(alpha=0.3), 50)
    with pytest.raises(PreconditionError):
        build_pencil(trivial, 3)
    gap = simple_problem(0, 2, r=[(1.0, "1"), (2.0, "0")])
    with pytest.raises(PreconditionError):
        pencil_eigenvalues(build_pencil(gap, 20))


def test_trivial_eigenvalues(trivial):
    vals = pencil_eigenvalues(build_pencil(trivial, 200))[:4]
    assert [v.real for v in vals] == pytest.approx([1, 4, 9, 16], rel=2e-3)
    assert convergence_slope(trivial, [1, 4, 9, 16]) == pytest.approx(2.0, abs=0.2)


def test_example_a_pair_and_symmetry(example_a):
    vals = pencil_eigenvalues(build_pencil(example_a, 400))
    pair = [v for v in vals if abs(v.imag) > 1]
    assert len(pair) == 2
    m = match_eigenvalues([4.3628017092517375j], vals)[0]
    assert m.rel_error <= 0.01
    small = np.array([v for v in vals if abs(v) <= 200])
    for v in small:
        assert np.min(np.abs(small + v)) <= 0.01 * max(1.0, abs(v))


def test_dump(trivial):
    buf = io.StringIO()
    build_pencil(trivial, 8).dump_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "i,x,a_lower,a_diag,a_upper,b_diag" and len(lines) == 9
