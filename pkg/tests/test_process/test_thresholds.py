import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.process.thresholds import (
    K_QUASICIRCLE, SCHWARZIAN_THRESHOLD, TEICH_THRESHOLD, ThresholdQuery, L_of_r,
    a_L, bcy_upper_bound, classical_bounds_report, hill, hill_inverse, hill_prime,
    horocycle_roundness, r, r_L, schwarzian_threshold, schwarzian_to_roundness,
    threshold_table, u_L, u_L_prime
)
from src.utils.exceptions import OutOfDomain, OutOfRange
from src.utils.static import VERDICT_GUARANTEED, UNKNOWN


def test_published_constants():
    assert r(1.0) == pytest.approx(0.739085, abs=1e-5)
    assert bcy_upper_bound(1.0) == pytest.approx(4.2379, abs=1e-3)
    assert horocycle_roundness(1.0) == pytest.approx(0.9607, abs=1e-3)
    assert schwarzian_threshold(0.611) == pytest.approx(0.0739643, abs=1e-5)
    assert math.exp(TEICH_THRESHOLD) == pytest.approx(1.05022, abs=1e-5)


def test_r_beyond_one_is_two_sech_two():
    assert r(2.0) == pytest.approx(2.0 / math.cosh(2.0), abs=1e-12)
    assert r(2.0) == pytest.approx(0.531604, abs=1e-6)


def test_a_one_at_right_angle():
    assert a_L(math.pi / 2, 1.0) == pytest.approx(0.81733, abs=1e-4)
    assert a_L(math.pi / 2, 1.0) == pytest.approx(math.acosh(1.0 / r(1.0)), abs=1e-6)


def test_schwarzian_roundness_at_threshold():
    L = L_of_r(0.611)
    assert L == pytest.approx(0.74596, abs=1e-4)
    assert L == pytest.approx(0.611 / math.cos(0.611), abs=1e-9)
    assert schwarzian_to_roundness(0.0739643, L) == pytest.approx(0.611, abs=1e-5)


def test_hill_derivative_identity():
    for t in np.linspace(-5, 5, 101):
        assert hill_prime(t) == pytest.approx(-math.sin(hill(t)), abs=1e-12)


@pytest.mark.parametrize("t", [-1000.0, -800.0, 710.5, 1000.0])
def test_hill_far_in_the_tails(t):
    assert hill_prime(t) == pytest.approx(0.0, abs=1e-300)
    assert u_L(t, 0.5) == pytest.approx(hill(t), abs=1e-12)
    assert u_L_prime(t, 0.5) <= 0.0


def test_hill_inverse_round_trip_and_domain():
    assert hill_inverse(hill(0.7)) == pytest.approx(0.7, abs=1e-12)
    with pytest.raises(OutOfRange):
        hill_inverse(math.pi)


def test_u_L_is_solved_by_a_L():
    for theta in (0.2, 1.0, 2.5):
        assert u_L(a_L(theta, 0.6), 0.6) == pytest.approx(theta, abs=1e-12)


@pytest.mark.parametrize("L", [0.3, 1.0])
def test_u_L_prime_matches_central_differences(L):
    h = 1e-6
    for x in (-2.0, -0.5, 0.0, 1.3):
        numeric = (u_L(x + h, L) - u_L(x - h, L)) / (2 * h)
        assert u_L_prime(x, L) == pytest.approx(numeric, abs=1e-7)
        assert u_L_prime(x, L) < 0


def test_r_L_fixed_point_residual_on_grid():
    worst = 0.0
    for L in np.linspace(0.02, 1.0, 50):
        for theta in np.linspace(0.03, math.pi / 2, 50):
            x = r_L(theta, L)
            worst = max(worst, abs(x - L * math.sin(theta - x)))
    assert worst < 1e-10


def test_r_inverts_x_sec_x():
    for x in np.linspace(0.01, r(1.0) - 1e-9, 60):
        L = x / math.cos(x)
        assert abs(r(L) - x) < 1e-10


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.05, math.pi / 2 - 0.05))
def test_r_L_increases_with_theta(L, theta):
    assert r_L(theta, L) < r_L(theta + 0.05, L)


@pytest.mark.parametrize("theta, L", [(0.0, 0.5), (math.pi, 0.5), (1.0, 0.0), (2.0, 0.5)])
def test_r_L_domain(theta, L):
    with pytest.raises(OutOfRange):
        r_L(theta, L)


def test_a_L_rejects_theta_at_pi():
    with pytest.raises(OutOfRange):
        a_L(math.pi, 0.5)


def test_bcy_upper_bound_domain():
    limit = 2 * math.asinh(1.0)
    assert bcy_upper_bound(limit * (1 - 1e-12)) == pytest.approx(2 * math.pi, abs=1e-4)
    with pytest.raises(OutOfDomain):
        bcy_upper_bound(limit + 0.01)


def test_horocycle_example_exceeds_threshold():
    assert horocycle_roundness(1.0) > r(1.0)


def test_schwarzian_to_roundness_domain():
    with pytest.raises(OutOfDomain):
        schwarzian_to_roundness(0.5, 0.5)
    with pytest.raises(OutOfDomain):
        schwarzian_to_roundness(-0.1, 0.5)
    assert schwarzian_to_roundness(0.0, 0.5) == 0.0


def test_schwarzian_threshold_domain():
    with pytest.raises(OutOfRange):
        schwarzian_threshold(0.8)


def test_threshold_query_verdicts():
    assert ThresholdQuery(1.0, roundness=0.5).verdict() == VERDICT_GUARANTEED
    assert ThresholdQuery(1.0, roundness=0.9607).verdict() == UNKNOWN
    assert ThresholdQuery(1.0).verdict() == UNKNOWN
    assert ThresholdQuery(1.0).threshold == pytest.approx(r(1.0))
    with pytest.raises(OutOfRange):
        ThresholdQuery(-1.0)


def test_classical_chain_from_quasicircle_constant():
    report = classical_bounds_report(quasicircle_K=1.04)
    assert report.hypotheses["quasicircle"] == VERDICT_GUARANTEED
    assert report.implied["teich_distance"] == pytest.approx(math.log(1.04))
    assert report.implied["schwarzian_norm"] == pytest.approx(1.5 * math.log(1.04))
    assert report.implied["schwarzian_norm"] < SCHWARZIAN_THRESHOLD
    assert report.not_critical_entropy == VERDICT_GUARANTEED
    assert report.proper_affine_action == VERDICT_GUARANTEED
    assert report.teich_exponential == pytest.approx(1.05022, abs=1e-5)


def test_classical_bounds_edge_cases():
    fuchsian = classical_bounds_report(schwarzian_norm=0.0)
    assert fuchsian.not_critical_entropy == UNKNOWN
    large = classical_bounds_report(quasicircle_K=K_QUASICIRCLE + 0.1)
    assert large.hypotheses["quasicircle"] == UNKNOWN
    assert large.not_critical_entropy == UNKNOWN
    assert classical_bounds_report(teich_distance=0.04).hypotheses["schwarzian"] == VERDICT_GUARANTEED


def test_classical_bounds_without_inputs_warns(caplog):
    with caplog.at_level("WARNING"):
        report = classical_bounds_report()
    assert report.not_critical_entropy == UNKNOWN
    assert "Aucune donnée" in caplog.text


def test_threshold_table_columns_and_values():
    table = threshold_table([0.5, 1.0, 2.0])
    assert list(table.columns) == ["L", "theta", "r_L", "r", "bcy_upper_bound",
                                   "horocycle_roundness", "horocycle_below_threshold"]
    row = table[table.L == 1.0].iloc[0]
    assert row.r == pytest.approx(0.739085, abs=1e-5)
    assert not row.horocycle_below_threshold
    assert math.isnan(table[table.L == 2.0].iloc[0].bcy_upper_bound)
