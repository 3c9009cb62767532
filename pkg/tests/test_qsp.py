import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsvt_hs import polyapprox as pa
from qsvt_hs import qsp
from qsvt_hs.qsp import REFLECTION, WX, PhaseSequence

phase_lists = st.lists(st.floats(-math.pi, math.pi), min_size=2, max_size=14)


def cheb(d, x):
    return np.cos(d * np.arccos(x))


def test_wx_to_reflection_examples():
    r1 = qsp.wx_to_reflection(PhaseSequence(WX, [0.0, 0.0]))
    assert r1.phases == pytest.approx([math.pi / 4, -math.pi / 4], abs=1e-15)
    r3 = qsp.wx_to_reflection(PhaseSequence(WX, [0.0] * 4))
    assert r3.phases == pytest.approx([5 * math.pi / 4, -math.pi / 2, -math.pi / 2, -math.pi / 4], abs=1e-15)
    with pytest.raises(ValueError):
        qsp.wx_to_reflection(r1)


def test_eval_qsp_trivial_wx():
    assert qsp.eval_qsp(PhaseSequence(WX, [0, 0]), 0.3) == pytest.approx(0.3, abs=1e-15)
    assert qsp.eval_qsp(PhaseSequence(WX, [0, 0, 0]), 0.5) == pytest.approx(-0.5, abs=1e-15)
    assert qsp.eval_qsp(PhaseSequence(WX, [0] * 6), 0.77) == pytest.approx(pa.chebyshev_t(5, 0.77), abs=1e-14)
    with pytest.raises(ValueError):
        qsp.eval_qsp(PhaseSequence(WX, [0, 0]), 1.01)


@given(st.integers(0, 30))
def test_td_property(d):
    xs = np.linspace(-1, 1, 101)
    vals = qsp.eval_qsp_many(PhaseSequence(WX, np.zeros(d + 1)), xs)
    assert np.max(np.abs(vals - cheb(d, xs))) <= 1e-12


@given(phase_lists)
def test_convention_round_trip(phases):
    xs = np.linspace(-1, 1, 101)
    wx = PhaseSequence(WX, phases)
    rf = qsp.wx_to_reflection(wx)
    assert np.max(np.abs(qsp.eval_qsp_many(wx, xs) - qsp.eval_qsp_many(rf, xs))) <= 1e-12


@given(phase_lists, st.floats(-1, 1))
def test_vectorised_eval_matches_products(phases, x):
    for conv in (WX, REFLECTION):
        seq = PhaseSequence(conv, phases)
        assert qsp.eval_qsp_many(seq, np.array([x]))[0] == pytest.approx(qsp.eval_qsp(seq, x), abs=1e-12)


@given(phase_lists, st.floats(-1, 1))
def test_negation_is_conjugation(phases, x):
    seq = PhaseSequence(REFLECTION, phases)
    assert qsp.eval_qsp(-seq, x) == pytest.approx(np.conj(qsp.eval_qsp(seq, x)), abs=1e-12)


@given(phase_lists, st.floats(-1, 1))
def test_real_part_pair(phases, x):
    seq = PhaseSequence(REFLECTION, phases)
    pair = qsp.real_part_pair(seq)
    assert pair.value(x) == pytest.approx(qsp.eval_qsp(seq, x).real, abs=1e-12)


def test_real_part_examples(rng):
    t3 = qsp.find_phases(pa.ChebyshevSeries("odd", [0, 0, 0, 1.0]))
    assert qsp.real_part_pair(t3).value(0.5) == pytest.approx(-1.0, abs=1e-10)
    seq = PhaseSequence(REFLECTION, rng.uniform(-math.pi, math.pi, 5))
    assert qsp.real_part_pair(seq).value(0.2) == pytest.approx(qsp.eval_qsp(seq, 0.2).real, abs=1e-12)


def test_find_phases_t5_is_trivial():
    seq = qsp.find_phases(pa.ChebyshevSeries("odd", [0, 0, 0, 0, 0, 1.0]), tol=1e-10)
    assert seq.residual <= 1e-10
    xs = np.linspace(-1, 1, 101)
    trivial = qsp.wx_to_reflection(PhaseSequence(WX, np.zeros(6)))
    assert np.max(np.abs(qsp.eval_qsp_many(seq, xs).real - qsp.eval_qsp_many(trivial, xs).real)) <= 1e-9


def test_find_phases_identity():
    seq = qsp.find_phases(pa.ChebyshevSeries("odd", [0.0, 1.0]))
    assert seq.degree == 1
    assert qsp.eval_qsp(seq, 0.42).real == pytest.approx(0.42, abs=1e-8)


def test_find_phases_trig_target():
    pc, ps, _ = pa.build_trig_polys(1.0, 1e-3)
    for target in (pc, ps):
        seq = qsp.find_phases(target, tol=1e-8)
        assert seq.convention == REFLECTION
        assert qsp.node_residual(seq, target) <= 1e-8
        assert np.all(np.abs(seq.phases[1:]) <= math.pi)


@given(st.floats(0.1, 30.0), st.floats(1e-10, 0.3))
def test_find_phases_residual_is_honest(t, eps):
    pc, ps, _ = pa.build_trig_polys(t, eps)
    for target in (pc, ps):
        seq = qsp.find_phases(target)
        assert seq.residual == qsp.node_residual(seq, target)
        assert seq.residual <= qsp.DEFAULT_TOL


def test_find_phases_sign_target():
    s = pa.build_sign_poly(0.6, 0.05)
    seq = qsp.find_phases(s)
    xs = np.linspace(-1, 1, 401)
    assert np.max(np.abs(qsp.eval_qsp_many(seq, xs).real - s(xs))) <= 1e-7


def test_find_phases_degree_zero():
    seq = qsp.find_phases(pa.ChebyshevSeries("even", [0.3]))
    assert qsp.eval_qsp(seq, 0.7).real == pytest.approx(0.3, abs=1e-14)


def test_find_phases_rejects_unbounded_target():
    with pytest.raises(ValueError):
        qsp.find_phases(pa.ChebyshevSeries("odd", [0.0, 1.5]))


def test_phase_finding_error_carries_residual():
    # a budget of zero Newton steps and an impossible tolerance must fail loudly
    s = pa.ChebyshevSeries("odd", [0.0, 0.5, 0.0, 0.3])
    with pytest.raises(qsp.PhaseFindingError) as exc:
        qsp.find_phases(s, tol=0.0, maxiter=0)
    assert exc.value.best_residual >= 0.0
    assert exc.value.best_phases is not None


def test_phase_sequence_validation():
    with pytest.raises(ValueError):
        PhaseSequence("Wz", [0.0])
    with pytest.raises(ValueError):
        PhaseSequence(WX, [])
