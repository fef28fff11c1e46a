import math

import numpy as np
import pytest
from scipy.linalg import expm

from src.process.bending import (
    bend_representation, dlength_formula, real_length_variation, two_sided_torus
)
from src.process.groups import (
    Word, WordBattery, rectangular_torus_fuchsian, schottky_fuchsian
)
from src.process.lamination import InvariantLamination
from src.process.margulis import (
    CartanVector, Cocycle, DiagonalInvariant, SpectrumReport, TracelessMatrix,
    cartan_projection, coboundary, cocycle_from_bending, displacement_bound_check,
    eigenvalue_variation_check, jordan_projection, margulis_invariant,
    normalized_margulis_spectrum, properness_verdict, standard_form
)
from src.utils.exceptions import EmptyBattery, NotLoxodromic
from src.utils.static import VERDICT_INCONCLUSIVE, VERDICT_PROPER

SHEAR = np.array([[2.0, 1.0], [0.0, 0.5]], dtype=complex)


def _random_traceless(rng, scale=1.0):
    m = scale * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return m - np.trace(m) / 2 * np.eye(2)


def _random_loxodromic(rng):
    """ψ⁻¹ diag(λ, 1/λ) ψ avec 1.5 ≤ |λ| ≤ 3 et ψ aléatoire."""
    lam = rng.uniform(1.5, 3.0) * np.exp(1j * rng.uniform(-math.pi, math.pi))
    P = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    P = P / np.sqrt(np.linalg.det(P))
    return P @ np.diag([lam, 1 / lam]) @ np.linalg.inv(P)


def _random_word(rng, letters="abAB", max_length=4):
    length = int(rng.integers(0, max_length + 1))
    return Word.reduce("".join(rng.choice(list(letters), size=length)))


@pytest.fixture(scope="module")
def torus_bending():
    """Tore rectangulaire, lamination des relevés de a et représentation pliée de -0.3i."""
    rho = rectangular_torus_fuchsian()
    mu = InvariantLamination.from_words(rho, ["a"], 1.0)
    return rho, mu, bend_representation(rho, mu, -0.3j)


def test_projections_of_a_diagonal_element():
    g = np.diag([2.0, 0.5])
    assert jordan_projection(g).values == pytest.approx((math.log(2), -math.log(2)))
    assert cartan_projection(g).values == pytest.approx((math.log(2), -math.log(2)))


def test_cartan_projection_sees_unipotent_growth():
    g = np.array([[1.0, 5.0], [0.0, 1.0]])
    assert jordan_projection(g).first == pytest.approx(0.0, abs=1e-12)
    assert cartan_projection(g).first > 1.0


def test_jordan_never_exceeds_cartan():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = _random_loxodromic(rng)
        assert jordan_projection(g).first <= cartan_projection(g).first + 1e-12


def test_cartan_vector_must_be_nonincreasing():
    with pytest.raises(ValueError):
        CartanVector((-1.0, 1.0))


def test_traceless_matrix_validation_and_algebra():
    with pytest.raises(ValueError):
        TracelessMatrix(np.eye(2))
    x = TracelessMatrix(np.array([[1, 2], [3, -1]]))
    assert (x + x - 2 * x).is_close(TracelessMatrix.zero())
    assert (-x).norm() == pytest.approx(x.norm())


def test_standard_form_of_a_shear():
    form = standard_form(SHEAR)
    assert form.flag_angle == pytest.approx(math.acos(2 / math.sqrt(13)), abs=1e-12)
    assert not form.ill_conditioned
    D = form.psi @ SHEAR @ form.psi_inverse
    assert np.allclose(D, np.diag([2.0, 0.5]), atol=1e-12)
    assert abs(np.linalg.det(form.psi) - 1) < 1e-12


def test_standard_form_of_a_diagonal_element_is_trivial():
    form = standard_form(np.diag([3.0, 1 / 3]))
    assert np.allclose(np.abs(form.psi), np.eye(2), atol=1e-12)
    assert form.flag_angle == pytest.approx(math.pi / 2)


def test_standard_form_rejects_elliptic_elements():
    rotation = np.array([[math.cos(0.3), -math.sin(0.3)], [math.sin(0.3), math.cos(0.3)]])
    with pytest.raises(NotLoxodromic):
        standard_form(rotation)


def test_margulis_invariant_is_well_defined():
    rng = np.random.default_rng(11)
    for _ in range(50):
        g = _random_loxodromic(rng)
        x = _random_traceless(rng)
        m = np.array(margulis_invariant(g, x).values)
        h = _random_loxodromic(rng)
        conjugated = margulis_invariant(h @ g @ np.linalg.inv(h), h @ x @ np.linalg.inv(h))
        assert np.abs(np.array(conjugated.values) - m).max() < 1e-9 * max(1.0, np.abs(m).max())
        psi = np.diag([2.0 - 1j, 1 / (2.0 - 1j)]) @ standard_form(g).psi
        rescaled = margulis_invariant(g, x, psi)
        assert np.abs(np.array(rescaled.values) - m).max() < 1e-9 * max(1.0, np.abs(m).max())


def test_inverse_affine_map_has_the_same_invariant():
    rng = np.random.default_rng(5)
    g = _random_loxodromic(rng)
    x = _random_traceless(rng)
    g_inv = np.linalg.inv(g)
    m = margulis_invariant(g, x)
    m_inv = margulis_invariant(g_inv, -(g_inv @ x @ g))
    assert np.allclose(m.values, m_inv.values, atol=1e-9)


def test_displacement_of_a_coboundary_vanishes():
    rng = np.random.default_rng(2)
    g = _random_loxodromic(rng)
    v = _random_traceless(rng)
    x = v - g @ v @ np.linalg.inv(g)
    report = displacement_bound_check(g, x)
    assert report.min_displacement < 1e-9
    assert report.invariant_norm < 1e-9


def test_displacement_is_bounded_by_the_invariant():
    report = displacement_bound_check(np.diag([2.0, 0.5]), np.diag([1.0, -1.0]))
    assert report.invariant_norm == pytest.approx(math.sqrt(2))
    assert report.ratio == pytest.approx(1.0, abs=1e-9)
    assert report.samples == 502


def test_cocycle_identity_on_random_word_pairs():
    rng = np.random.default_rng(0)
    rho = schottky_fuchsian(3.0)
    u = Cocycle(rho, {"a": TracelessMatrix(_random_traceless(rng)),
                      "b": TracelessMatrix(_random_traceless(rng))})
    worst = 0.0
    for _ in range(1000):
        w1, w2 = _random_word(rng), _random_word(rng)
        expected = u(w1) + u(w2).adjoint(rho(w1))
        error = np.abs(u(w1 * w2).matrix - expected.matrix).max()
        worst = max(worst, error / max(1.0, np.abs(expected.matrix).max()))
    assert worst < 1e-8


def test_cocycle_of_inverse_and_missing_values():
    rng = np.random.default_rng(1)
    rho = schottky_fuchsian(3.0)
    u = Cocycle(rho, {"a": TracelessMatrix(_random_traceless(rng)),
                      "b": TracelessMatrix(_random_traceless(rng))})
    assert u("aA").is_close(TracelessMatrix.zero())
    assert (u("a") + u("A").adjoint(rho("a"))).is_close(TracelessMatrix.zero(), 1e-12)
    with pytest.raises(ValueError):
        Cocycle(rho, {"a": TracelessMatrix.zero()})


def test_coboundary_has_zero_invariants():
    rng = np.random.default_rng(4)
    rho = schottky_fuchsian(3.0)
    u = coboundary(rho, _random_traceless(rng))
    for word in ("a", "ab", "aBB"):
        invariant = margulis_invariant(rho(word), u(word))
        assert invariant.norm() < 1e-9 * max(1.0, u(word).norm())


def test_bending_cocycle_is_the_derivative_of_bending():
    rho = schottky_fuchsian(3.0)
    mu = InvariantLamination.from_words(rho, ["a"], 0.7)
    u = cocycle_from_bending(rho, mu, 1)
    h = 1e-5
    plus = bend_representation(rho, mu, -1j * h)
    minus = bend_representation(rho, mu, 1j * h)
    for word in ("b", "ab"):
        numeric = (plus(word).matrix - minus(word).matrix) / (2 * h) @ np.linalg.inv(rho(word).matrix)
        assert np.abs(numeric - u(word).matrix).max() < 1e-6 * max(1.0, u(word).norm())


def test_first_invariant_is_half_the_length_derivative():
    rho = schottky_fuchsian(3.0)
    mu = InvariantLamination.from_words(rho, ["a"], 0.7)
    u = cocycle_from_bending(rho, mu, 1)
    for word in ("ab", "aB", "abb"):
        m1 = margulis_invariant(rho(word), u(word)).first
        assert 2 * m1 == pytest.approx(-1j * dlength_formula(rho, mu, word), abs=1e-9)


def test_real_part_gives_the_real_length_variation(torus_bending):
    _, mu, bent = torus_bending
    u = cocycle_from_bending(bent, mu, 1)
    for word in ("b", "ab", "abb"):
        m1 = margulis_invariant(bent(word), u(word)).first
        assert 2 * m1.real == pytest.approx(real_length_variation(bent, mu, word), abs=1e-9)


def test_cocycle_from_bending_side_validation(torus_bending):
    rho, mu, _ = torus_bending
    with pytest.raises(ValueError):
        cocycle_from_bending(rho, mu, 2)


def test_eigenvalue_variation_on_random_families():
    rng = np.random.default_rng(42)
    for _ in range(50):
        g0 = _random_loxodromic(rng)
        X = _random_traceless(rng, 0.5)
        report = eigenvalue_variation_check(lambda t: g0 @ expm(t * X))
        assert report.relative_error < 1e-6
        assert report.jordan_error < 1e-6


def test_eigenvalue_variation_with_exact_derivative():
    X = np.array([[0.3, 1.0], [0.2, -0.3]], dtype=complex)
    report = eigenvalue_variation_check(lambda t: SHEAR @ expm(t * X),
                                        derivative=lambda t: SHEAR @ X @ expm(t * X))
    assert report.relative_error < 1e-6


def test_two_sided_example_acts_properly():
    example = two_sided_torus(0.3)
    u = cocycle_from_bending(example.rho, example.plus, 1) + \
        cocycle_from_bending(example.rho, example.minus, -1)
    report = normalized_margulis_spectrum(example.rho, u, WordBattery(2, 8))
    assert report.samples
    assert report.k_bound > 0
    assert report.hull_distance() > 0
    assert properness_verdict(report, 0.01) == VERDICT_PROPER


def test_mixed_signs_are_inconclusive():
    report = SpectrumReport(["a", "b"], [DiagonalInvariant((1.0, -1.0)), DiagonalInvariant((-1.0, 1.0))])
    assert report.k_bound == 0.0
    assert report.hull_distance() == pytest.approx(0.0, abs=1e-6)
    assert properness_verdict(report, 0.01) == VERDICT_INCONCLUSIVE
    assert properness_verdict(SpectrumReport([], []), 0.01) == VERDICT_INCONCLUSIVE


def test_empty_battery_is_rejected():
    rho = schottky_fuchsian(3.0)
    u = coboundary(rho, np.zeros((2, 2)))
    with pytest.raises(EmptyBattery):
        normalized_margulis_spectrum(rho, u, WordBattery(2, 0))
