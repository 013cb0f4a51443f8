import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import COS2, COS2_03, MIXED2, SIN1, SIN1_04, trig_potentials
from oracles import pt2_level, pt2_residue_terms
from optrace.errors import DomainError
from optrace.galerkin import GalerkinModel, TruncationSpec
from optrace.potential import TrigOperatorPotential, coupling_block
from optrace.resolvent import m_pj
from optrace.traceformula import (
    VerificationReport,
    a_coefficient,
    first_order_chain,
    fourier_boundary_sum,
    ibp_check,
    lhs_partial,
    rhs_candidates,
    rhs_value,
    verify_convergence,
)

PI = math.pi


@pytest.mark.parametrize(
    "Q, m, expected",
    [(SIN1, 1, -2 / 3), (COS2_03, 1, 0.3 * PI / 2), (SIN1, 2, -2 / 15)],
)
def test_ibp_examples(Q, m, expected):
    lhs, rhs = ibp_check(Q, m, 2)
    assert lhs == pytest.approx(expected, rel=1e-14)
    assert rhs == pytest.approx(expected, rel=1e-14)


def test_ibp_argument_checks():
    with pytest.raises(DomainError):
        ibp_check(SIN1, 0, 2)
    with pytest.raises(DomainError):
        ibp_check(SIN1, 1, 1)


def test_fourier_boundary_sum_examples():
    partial, rhs = fourier_boundary_sum(SIN1, 2, 1000)
    assert rhs == pytest.approx(1 / PI, rel=1e-15)
    assert partial == pytest.approx(1 / PI, abs=1e-3)
    for m_terms in (1, 2, 7):
        partial, rhs = fourier_boundary_sum(COS2_03, 2, m_terms)
        assert partial == pytest.approx(-0.6, rel=1e-14) and rhs == pytest.approx(-0.6, rel=1e-14)
    assert fourier_boundary_sum(TrigOperatorPotential.zero(1), 3, 5) == (0.0, 0.0)


def test_fourier_boundary_sum_rate_for_sine():
    # telescoping tail: (1/pi) * 1/(2M+1), so M * error stays below 1/(2 pi)
    for M in (1, 4, 16, 64, 256, 1024):
        partial, rhs = fourier_boundary_sum(SIN1, 2, M)
        assert abs(partial - rhs) == pytest.approx(1 / (PI * (2 * M + 1)), rel=1e-9)
        assert abs(partial - rhs) <= 1 / (2 * PI * M)


@pytest.mark.parametrize("Q, i, expected", [(SIN1_04, 2, -0.05), (COS2_03, 2, 0.0), (SIN1_04, 3, -0.0125)])
def test_a_coefficient_examples(Q, i, expected):
    assert a_coefficient(Q, i) == pytest.approx(expected, abs=1e-16)


def test_rhs_examples():
    assert rhs_value(COS2_03, 2) == pytest.approx(0.3, rel=1e-14)
    assert rhs_value(TrigOperatorPotential.zero(2), 3) == 0.0
    assert rhs_value(SIN1_04, 2) == pytest.approx(-0.2 / PI, rel=1e-14)


def test_rhs_simplified_warns_when_conditions_fail():
    with pytest.warns(UserWarning):
        assert rhs_value(SIN1_04, 2, simplified=True) == pytest.approx(0.0, abs=1e-16)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert rhs_value(COS2_03, 2, simplified=True) == pytest.approx(0.3)


def test_rhs_candidates():
    c = rhs_candidates(COS2_03, 2)
    assert c["with_k"] == pytest.approx(0.3) and c["without_k"] == pytest.approx(0.15)


def test_lhs_zero_potential():
    Q = TrigOperatorPotential.zero(2)
    model = GalerkinModel(Q, TruncationSpec.for_potential(Q, 5))
    total, parts = lhs_partial(model, model.clusters(0.0), 3, 5)
    assert total == 0.0
    assert all(b.bracket == 0.0 and b.eigensum == 0.0 for b in parts)


def test_lhs_composition_and_m0_convention():
    model = GalerkinModel(SIN1_04, TruncationSpec.for_potential(SIN1_04, 6))
    total, parts = lhs_partial(model, model.clusters(0.4), 2, 6)
    assert total == math.fsum(b.bracket for b in parts)
    for b in parts:
        assert b.bracket == math.fsum([b.eigensum, -b.residue_correction,
                                       -b.first_order_correction, -b.boundary_correction])
    assert parts[0].first_order_correction == 0.0 and parts[0].boundary_correction == 0.0
    assert parts[1].first_order_correction != 0.0


def test_brackets_against_second_order_perturbation():
    eps = 0.3
    Q = COS2_03
    model = GalerkinModel(Q, TruncationSpec.for_potential(Q, 8))
    _, parts = lhs_partial(model, model.clusters(eps), 2, 8)
    c = lambda a, b: coupling_block(Q, a, b)[0, 0]
    for m, b in enumerate(parts):
        first, second = pt2_level(c, m, model.spec.m_max, 2)
        _, res2 = pt2_residue_terms(c, m, model.spec.m_max, 2)
        # eigensum to second order minus the j = 2 residue term minus the closed-form corrections
        oracle = first + second - res2 - b.first_order_correction - b.boundary_correction
        assert abs(b.bracket - oracle) <= eps**3
        expected = eps if m == 1 else 0.0
        assert oracle == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("Q", [COS2_03, SIN1_04, MIXED2])
@pytest.mark.parametrize("k", [2, 3])
def test_first_order_chain_matches_contour(Q, k):
    model = GalerkinModel(Q, TruncationSpec.for_potential(Q, 6))
    for p in (1, 3, 6):
        assert first_order_chain(Q, p, k) == pytest.approx(m_pj(model, p, k, 1), rel=1e-8, abs=1e-10)


def test_verify_zero_potential():
    rep = verify_convergence(TrigOperatorPotential.zero(1), 2, [0, 1, 2, 3])
    for r in rep.rows:
        assert (r.lhs_partial, r.rhs, r.deviation, r.remainder_N) == (0.0, 0.0, 0.0, 0.0)
    assert rep.converged()


def test_verify_cos_potential():
    rep = verify_convergence(COS2_03, 2, range(2, 17))
    devs = [r.deviation for r in rep.rows]
    assert devs[-1] < 0.02
    assert [r.p for r in rep.rows] == list(range(2, 17))
    assert all(r.deviation == abs(r.lhs_partial - r.rhs) for r in rep.rows)
    assert rep.converged() and not rep.warnings


def test_verify_strong_potential_flags_sup_norm():
    rep = verify_convergence(COS2, 2, [1, 2, 4])
    assert not rep.conditions.q2_pass
    assert any("sup norm" in w for w in rep.warnings)
    # converges to the k-weighted right side
    assert rep.rhs_candidates["with_k"] == pytest.approx(1.0)


def test_verify_report_round_trip():
    rep = verify_convergence(SIN1_04, 2, [2, 4])
    again = VerificationReport.from_dict(rep.to_dict())
    assert again.to_dict() == rep.to_dict()


def test_verify_rejects_p_beyond_truncation():
    with pytest.raises(DomainError):
        verify_convergence(COS2_03, 2, [10], TruncationSpec(12, 1, 4))


# ---- properties -------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(trig_potentials(), st.integers(1, 10), st.sampled_from([2, 3]))
def test_ibp_identity(Q, m, k):
    lhs, rhs = ibp_check(Q, m, k)
    assert abs(lhs - rhs) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.integers(0, 8), st.floats(-1, 1), min_size=1, max_size=4), st.integers(4, 10))
def test_fourier_boundary_sum_exact_for_cosines(coeffs, m_terms):
    Q = TrigOperatorPotential.scalar(cos=coeffs)
    partial, rhs = fourier_boundary_sum(Q, 2, m_terms)
    assert partial == pytest.approx(rhs, abs=1e-11 * max(1.0, 64 * max(abs(v) for v in coeffs.values())))


@settings(max_examples=60, deadline=None)
@given(trig_potentials(), st.floats(-5, 5), st.sampled_from([2, 3, 4]))
def test_rhs_linear(Q, alpha, k):
    scale = 1 + sum(np.abs(a).max() for a in list(Q.cos_terms.values()) + list(Q.sin_terms.values())) * 6 ** (2 * k)
    assert rhs_value(Q.scaled(alpha), k) == pytest.approx(alpha * rhs_value(Q, k), abs=1e-12 * scale * max(1, abs(alpha)))
