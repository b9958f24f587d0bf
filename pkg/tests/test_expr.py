"""Expression node evaluation, guards, smoothness bookkeeping."""

import numpy as np
import pytest

from bundleforms import expr as ex
from bundleforms.errors import DimensionMismatch, GuardViolation


def test_polynomial_arithmetic():
    # (x0^2 + 1) at x0 = 2 -> 5
    e = ex.Add(ex.Pow(ex.Var(0), 2), ex.Const(1.0))
    assert ex.evaluate_at(e, [2.0]) == 5.0


def test_sqrt_identity_case():
    assert ex.evaluate_at(ex.Sqrt(ex.Const(4.0)), [0.0]) == 2.0


def test_guarded_quotient_raises_at_zero():
    e = ex.Div(ex.Const(1.0), ex.Var(0))
    with pytest.raises(GuardViolation) as err:
        ex.evaluate_at(e, [0.0])
    assert err.value.point == (0.0,)


def test_sqrt_negative_argument_raises():
    with pytest.raises(GuardViolation):
        ex.evaluate_at(ex.Sqrt(ex.Var(0)), [-1.0])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        ex.evaluate_at(ex.Var(3), [1.0, 2.0])


def test_vectorized_evaluation_matches_scalar():
    e = ex.Mul(ex.Add(ex.Var(0), ex.Const(2.0)), ex.Abs(ex.Var(1)))
    pts = np.array([[1.0, -3.0], [0.5, 0.25], [-2.0, 2.0]])
    vals = ex.evaluate(e, pts)
    for p, v in zip(pts, vals):
        assert ex.evaluate_at(e, p) == pytest.approx(v)


def test_min_max_clamp():
    pts = np.array([[-1.0], [0.5], [2.0]])
    assert np.allclose(ex.evaluate(ex.Clamp(ex.Var(0)), pts), [0.0, 0.5, 2.0])
    assert np.allclose(
        ex.evaluate(ex.Max(ex.Var(0), ex.Const(0.25)), pts), [0.25, 0.5, 2.0]
    )
    assert np.allclose(
        ex.evaluate(ex.Min(ex.Var(0), ex.Const(0.25)), pts), [-1.0, 0.25, 0.25]
    )


def test_zero_gate_skips_payload_guards():
    # payload 1/x0 is only evaluated where the gate is positive
    gate = ex.Clamp(ex.Var(0))            # positive iff x0 > 0
    e = ex.ZeroGate(gate, ex.Div(ex.Const(1.0), ex.Var(0)))
    pts = np.array([[-1.0], [0.0], [2.0]])
    assert np.allclose(ex.evaluate(e, pts), [0.0, 0.0, 2.0 * (1.0 / 2.0)])


def test_smoothness_bounds():
    x = ex.Var(0)
    assert ex.Const(1.0).smoothness() == ex.SMOOTH
    assert ex.Abs(x).smoothness() == 0
    # clamp(u)^(r+1) records bound r
    assert ex.Pow(ex.Clamp(x), 3).smoothness() == 2
    # composites take the minimum over children
    comp = ex.Add(ex.Pow(ex.Clamp(x), 3), ex.Pow(ex.Clamp(x), 5))
    assert comp.smoothness() == 2
    assert ex.Mul(x, ex.Sqrt(x)).smoothness() == 0


def test_matrix_solve_entry():
    # constant system [[2,0],[0,4]] x = (1, 2) -> x = (1/2, 1/2)
    a = [[ex.Const(2.0), ex.Const(0.0)], [ex.Const(0.0), ex.Const(4.0)]]
    b = [[ex.Const(1.0)], [ex.Const(2.0)]]
    group = ex.MatrixGroup(ex.SOLVE, a, b)
    assert ex.evaluate_at(ex.MatEntry(group, 0, 0), [0.0]) == pytest.approx(0.5)
    assert ex.evaluate_at(ex.MatEntry(group, 1, 0), [0.0]) == pytest.approx(0.5)


def test_matrix_solve_guard():
    a = [[ex.Var(0)]]
    group = ex.MatrixGroup(ex.SOLVE, a, [[ex.Const(1.0)]], guard_tol=1e-9)
    with pytest.raises(GuardViolation):
        ex.evaluate_at(ex.MatEntry(group, 0, 0), [0.0])


def test_colspan_projector_entry():
    # A = (1, 1)^T spans the diagonal; projector = [[.5,.5],[.5,.5]]
    a = [[ex.Const(1.0)], [ex.Const(1.0)]]
    group = ex.MatrixGroup(ex.COLSPAN_PROJ, a)
    vals = [[ex.evaluate_at(ex.MatEntry(group, i, j), [0.0]) for j in range(2)]
            for i in range(2)]
    assert np.allclose(vals, 0.5)


def test_cholesky_entry_and_guard():
    s = [[ex.Const(4.0), ex.Const(0.0)], [ex.Const(0.0), ex.Const(9.0)]]
    group = ex.MatrixGroup(ex.CHOL, s)
    assert ex.evaluate_at(ex.MatEntry(group, 0, 0), [0.0]) == pytest.approx(2.0)
    assert ex.evaluate_at(ex.MatEntry(group, 1, 1), [0.0]) == pytest.approx(3.0)
    bad = ex.MatrixGroup(ex.CHOL, [[ex.Const(-1.0)]])
    with pytest.raises(GuardViolation):
        ex.evaluate_at(ex.MatEntry(bad, 0, 0), [0.0])


def test_pencil_projector_split():
    # S = diag(3, -2), G = I: positive projector = diag(1, 0)
    s = [[ex.Const(3.0), ex.Const(0.0)], [ex.Const(0.0), ex.Const(-2.0)]]
    g = [[ex.Const(1.0), ex.Const(0.0)], [ex.Const(0.0), ex.Const(1.0)]]
    pos = ex.MatrixGroup(ex.PENCIL_PROJ_POS, s, g)
    neg = ex.MatrixGroup(ex.PENCIL_PROJ_NEG, s, g)
    assert ex.evaluate_at(ex.MatEntry(pos, 0, 0), [0.0]) == pytest.approx(1.0)
    assert ex.evaluate_at(ex.MatEntry(pos, 1, 1), [0.0]) == pytest.approx(0.0)
    assert ex.evaluate_at(ex.MatEntry(neg, 1, 1), [0.0]) == pytest.approx(1.0)
    # the two projectors resolve the identity
    total = ex.Add(ex.MatEntry(pos, 0, 1), ex.MatEntry(neg, 0, 1))
    assert ex.evaluate_at(total, [0.0]) == pytest.approx(0.0)


def test_substitute_variable_by_expression():
    e = ex.Add(ex.Pow(ex.Var(0), 2), ex.Var(1))
    sub = ex.substitute(e, {1: ex.Mul(ex.Const(3.0), ex.Var(0))})
    assert ex.evaluate_at(sub, [2.0]) == pytest.approx(10.0)


def test_substitution_preserves_sharing():
    shared = ex.Add(ex.Var(0), ex.Const(1.0))
    e = ex.Mul(shared, shared)
    out = ex.substitute(e, {0: ex.Const(2.0)})
    assert out.a is out.b


def test_determinism_same_batch_twice():
    e = ex.Sqrt(ex.Add(ex.Pow(ex.Var(0), 2), ex.Const(1.0)))
    pts = np.linspace(-1, 1, 17).reshape(-1, 1)
    assert np.array_equal(ex.evaluate(e, pts), ex.evaluate(e, pts))
