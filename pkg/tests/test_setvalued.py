"""Flow maps and the Filippov sliding resolution."""
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hylyap.errors import DomainError, GrazingError, SingularPointError, UsageError
from hylyap.presets import CIRCLE_A, CIRCLE_B, CLEGG_AF, FLOWER_A1, FLOWER_A2, FLOWER_Q
from hylyap.setvalued import Filippov2, Linear, NormScaledAffine, flow_eval, sliding_resolve

FLOWER = Filippov2(FLOWER_A1, FLOWER_A2, FLOWER_Q)
mat2 = arrays(np.float64, (2, 2), elements=st.floats(-5, 5, allow_nan=False))


def test_flow_eval_worked_values():
    np.testing.assert_allclose(flow_eval(Linear(CLEGG_AF), [1.0, 0.0]), [0.0, -1.0])
    np.testing.assert_array_equal(flow_eval(NormScaledAffine(CIRCLE_A, CIRCLE_B), [0.0, 0.0]), [0.0, 0.0])
    np.testing.assert_allclose(flow_eval(FLOWER, [2.0, 1.0]), [-1.6, 9.7])


def test_filippov_refuses_locus_points():
    with pytest.raises(DomainError):
        flow_eval(FLOWER, [1.0, 1.0])
    np.testing.assert_array_equal(flow_eval(FLOWER, [0.0, 0.0]), [0.0, 0.0])


def test_dimension_mismatch():
    with pytest.raises(UsageError):
        flow_eval(Linear(CLEGG_AF), [1.0, 2.0, 3.0])


def test_sliding_on_flower_diagonal():
    s = sliding_resolve(FLOWER, [1.0, 1.0])
    assert s.on_surface and s.kind == "attractive"
    assert s.lam == pytest.approx(0.5)
    np.testing.assert_allclose(s.field, [1.7, 1.7])
    np.testing.assert_allclose(s.normal, [2.0, -2.0])
    s = sliding_resolve(FLOWER, [-1.0, -1.0])
    assert s.lam == pytest.approx(0.5)
    np.testing.assert_allclose(s.field, [-1.7, -1.7])


def test_repulsive_branch_picks_first_mode():
    s = sliding_resolve(FLOWER, [1.0, -1.0])
    assert s.kind == "repulsive" and not s.on_surface
    np.testing.assert_allclose(s.field, FLOWER_A1 @ [1.0, -1.0])


def test_equal_modes_cross():
    F = Filippov2(CLEGG_AF, CLEGG_AF, FLOWER_Q)
    s = sliding_resolve(F, [1.0, 1.0])
    assert not s.on_surface and s.kind == "crossing" and s.lam == 1.0
    np.testing.assert_allclose(s.field, CLEGG_AF @ [1.0, 1.0])


def test_resolve_errors():
    with pytest.raises(SingularPointError):
        sliding_resolve(FLOWER, [0.0, 0.0])
    with pytest.raises(UsageError):
        sliding_resolve(FLOWER, [2.0, 1.0])
    with pytest.raises(UsageError):
        sliding_resolve(Linear(CLEGG_AF), [1.0, 1.0])
    # both fields tangent to the locus
    F = Filippov2(np.eye(2), np.eye(2) * 2, FLOWER_Q)
    with pytest.raises(GrazingError):
        sliding_resolve(F, [1.0, 1.0])


@given(mat2, mat2, st.floats(0.1, 10), st.sampled_from([1.0, -1.0]))
def test_sliding_tangency_and_hull(A1, A2, r, sgn):
    F = Filippov2(A1, A2, FLOWER_Q)
    x = r * np.array([1.0, sgn])
    try:
        s = sliding_resolve(F, x)
    except GrazingError:
        assume(False)
    if s.on_surface:
        assert abs(2 * FLOWER_Q @ x @ s.field) <= 1e-10 * (x @ x) * max(1.0, np.abs(A1).max() + np.abs(A2).max())
        assert 0.0 <= s.lam <= 1.0
        np.testing.assert_array_equal(s.field, s.lam * (A1 @ x) + (1 - s.lam) * (A2 @ x))


@given(mat2, arrays(np.float64, 2, elements=st.floats(-5, 5)), st.floats(0.1, 10))
def test_homogeneity(A, x, lam):
    assume(np.abs(x).max() > 1e-3)
    L = Linear(A)
    np.testing.assert_allclose(flow_eval(L, lam * x), lam * flow_eval(L, x), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(flow_eval(L, -lam * x), -lam * flow_eval(L, x), rtol=1e-12, atol=1e-12)
    if not FLOWER.on_locus(x):
        np.testing.assert_allclose(flow_eval(FLOWER, lam * x), lam * flow_eval(FLOWER, x), rtol=1e-12)


@given(st.floats(0.1, 10))
def test_sliding_field_homogeneity(lam):
    x = np.array([0.7, 0.7])
    np.testing.assert_allclose(sliding_resolve(FLOWER, lam * x).field, lam * sliding_resolve(FLOWER, x).field,
                               rtol=1e-12)


@given(st.floats(-np.pi / 4, 5 * np.pi / 4))
def test_circle_field_is_tangent(theta):
    F = NormScaledAffine(CIRCLE_A, CIRCLE_B)
    x = np.array([1.0, 1.0]) + np.sqrt(2.0) * np.array([np.cos(theta), np.sin(theta)])
    assert abs((x - [1.0, 1.0]) @ flow_eval(F, x)) <= 1e-10
