import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.process.moebius import (
    INFINITY, BoundaryPoint, Geodesic, H3Point, MoebiusElement, apply_h2,
    apply_to_geodesic, axis, axis_rotation, complex_length, cosh_complex_distance,
    cross_ratio, fixed_points, h2_distance, h3_distance, im_cosh_distance, is_loxodromic,
    mobius_apply, normalizer, poincare_extend, rotation_generator, side_of
)
from src.utils.exceptions import (
    CrossRatioOne, DegenerateConfiguration, NotLoxodromic, SharedEndpoint
)

coordinates = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
complexes = st.builds(complex, coordinates, coordinates)


@st.composite
def moebius_elements(draw):
    """Élément de SL(2, C) à coefficients bornés."""
    a = draw(complexes)
    b = draw(complexes)
    c = draw(complexes)
    assume(abs(a) > 0.3)
    return MoebiusElement.from_entries(a, b, c, (1 + b * c) / a)


@st.composite
def geodesics(draw):
    start, end = draw(complexes), draw(complexes)
    assume(abs(start - end) > 0.2)
    return Geodesic.from_points(start, end)


@pytest.fixture
def hyperbolic():
    """Élément loxodromique diag(2, 1/2)."""
    return MoebiusElement.from_entries(2, 0, 0, 0.5)


def test_boundary_point_equality_is_tolerant():
    assert BoundaryPoint(1.0) == BoundaryPoint(1.0 + 1e-14)
    assert BoundaryPoint(1.0) != BoundaryPoint(1.1)
    assert INFINITY == BoundaryPoint(None)
    assert INFINITY != BoundaryPoint(0)


def test_moebius_element_is_normalized_and_projective():
    M = MoebiusElement.from_entries(2, 2, 0, 2)
    assert abs(np.linalg.det(M.matrix) - 1) < 1e-12
    assert M == MoebiusElement(-M.matrix)


def test_singular_matrix_is_rejected():
    with pytest.raises(DegenerateConfiguration):
        MoebiusElement.from_entries(1, 2, 2, 4)


def test_mobius_apply_infinity_conventions(hyperbolic):
    assert mobius_apply(hyperbolic, INFINITY).is_infinite
    M = MoebiusElement.from_entries(0, -1, 1, 0)
    assert mobius_apply(M, 0).is_infinite
    assert mobius_apply(M, INFINITY) == BoundaryPoint(0)


@settings(max_examples=60, deadline=None)
@given(moebius_elements(), moebius_elements(), complexes)
def test_mobius_apply_is_an_action(M, N, z):
    composed = mobius_apply(M @ N, z)
    stepwise = mobius_apply(M, mobius_apply(N, z))
    assume(not composed.is_infinite and not stepwise.is_infinite)
    assume(abs(composed.value) < 1e4)
    assert abs(composed.value - stepwise.value) <= 1e-7 * max(1.0, abs(composed.value))


@settings(max_examples=60, deadline=None)
@given(moebius_elements(), complexes, complexes, st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_poincare_extension_is_an_isometry(M, z, w, s, t):
    p, q = H3Point(z, s), H3Point(w, t)
    before = h3_distance(p, q)
    after = h3_distance(poincare_extend(M, p), poincare_extend(M, q))
    assert abs(before - after) <= 1e-7 * max(1.0, before)


def test_poincare_extension_restricts_to_the_plane_action():
    M = MoebiusElement.from_entries(2, 1, 1, 1)
    z = 0.3 + 0.7j
    image = poincare_extend(M, H3Point.from_h2(z))
    expected = apply_h2(M, z)
    assert abs(image.z - expected.real) < 1e-12
    assert abs(image.height - expected.imag) < 1e-12


def test_h2_distance_on_imaginary_axis():
    assert h2_distance(1j, math.e * 1j) == pytest.approx(1.0, abs=1e-12)


def test_fixed_points_upper_triangular():
    attracting, repelling = fixed_points(MoebiusElement.from_entries(2, 1, 0, 0.5))
    assert attracting.is_infinite
    assert repelling == BoundaryPoint(-2 / 3)


def test_fixed_points_of_parabolic_raise():
    with pytest.raises(NotLoxodromic):
        fixed_points(MoebiusElement.from_entries(1, 1, 0, 1))


def test_is_loxodromic_classifies_by_eigenvalue_moduli():
    assert is_loxodromic(MoebiusElement.from_entries(2, 1, 0, 0.5))
    assert is_loxodromic(MoebiusElement.from_entries(1j * 1.5, 0, 0, -1j / 1.5))
    assert not is_loxodromic(MoebiusElement.from_entries(1, 1, 0, 1))
    assert not is_loxodromic(MoebiusElement.from_entries(0, -1, 1, 0))


def test_axis_is_oriented_towards_attracting_point(hyperbolic):
    g = axis(hyperbolic)
    assert g.start == BoundaryPoint(0)
    assert g.end.is_infinite


def test_complex_length_of_diagonal(hyperbolic):
    assert complex_length(hyperbolic) == pytest.approx(2 * math.log(2), abs=1e-12)


def test_complex_length_imaginary_part_is_reduced():
    lam = 2 * cmath.exp(0.5j)
    L = complex_length(MoebiusElement.from_entries(lam, 0, 0, 1 / lam))
    assert L.real == pytest.approx(2 * math.log(2))
    assert L.imag == pytest.approx(1.0)
    assert -math.pi < L.imag <= math.pi


def test_complex_length_of_elliptic_raises():
    rotation = MoebiusElement.from_entries(math.cos(0.4), math.sin(0.4), -math.sin(0.4), math.cos(0.4))
    with pytest.raises(NotLoxodromic):
        complex_length(rotation)


@pytest.mark.parametrize("points, expected", [
    ((0, 1, 2, 3), 4),
    ((-1, 0, INFINITY, 1), -1),
])
def test_cross_ratio_examples(points, expected):
    assert cross_ratio(*points) == pytest.approx(expected, abs=1e-12)


def test_cross_ratio_with_coincident_points_is_degenerate():
    with pytest.raises(DegenerateConfiguration):
        cross_ratio(1, 1, 1, 2)


@settings(max_examples=60, deadline=None)
@given(moebius_elements(), complexes, complexes, complexes, complexes)
def test_cross_ratio_is_moebius_invariant(M, u, p, q, v):
    pts = [u, p, q, v]
    assume(min(abs(x - y) for i, x in enumerate(pts) for y in pts[i + 1:]) > 0.2)
    images = [mobius_apply(M, x) for x in pts]
    before = cross_ratio(*pts)
    after = cross_ratio(*images)
    assume(abs(before) < 1e3)
    assert abs(before - after) <= 1e-6 * max(1.0, abs(before))


@pytest.mark.parametrize("g, expected", [
    (Geodesic.from_points(1, 2), 3),
    (Geodesic.from_points(-1, 1), 0),
])
def test_cosh_complex_distance_examples(g, expected):
    h = Geodesic.from_points(0, INFINITY)
    assert cosh_complex_distance(g, h) == pytest.approx(expected, abs=1e-12)


def test_cosh_complex_distance_shared_endpoint():
    with pytest.raises(SharedEndpoint):
        cosh_complex_distance(Geodesic.from_points(0, 1), Geodesic.from_points(0, INFINITY))


def test_cosh_complex_distance_same_line_raises():
    g = Geodesic.from_points(0, INFINITY)
    with pytest.raises((CrossRatioOne, SharedEndpoint)):
        cosh_complex_distance(g, g)


@settings(max_examples=60, deadline=None)
@given(geodesics(), geodesics(), moebius_elements())
def test_cosh_complex_distance_symmetry_and_invariance(g, h, M):
    ends = [g.start.value, g.end.value, h.start.value, h.end.value]
    assume(min(abs(x - y) for x in ends[:2] for y in ends[2:]) > 0.2)
    value = cosh_complex_distance(g, h)
    assume(abs(value) < 1e3)
    assert abs(value - cosh_complex_distance(h, g)) <= 1e-7 * max(1.0, abs(value))
    moved = cosh_complex_distance(apply_to_geodesic(M, g), apply_to_geodesic(M, h))
    assert abs(value - moved) <= 1e-6 * max(1.0, abs(value))
    assert abs(cosh_complex_distance(g.reversed(), h) + value) <= 1e-7 * max(1.0, abs(value))


def test_im_cosh_distance_is_zero_for_real_configuration():
    assert im_cosh_distance(Geodesic.from_points(1, 2), Geodesic.from_points(0, INFINITY)) == 0


def test_im_cosh_distance_sign():
    g = Geodesic.from_points(-1j, 1)
    value = im_cosh_distance(g, Geodesic.from_points(0, INFINITY))
    assert value == pytest.approx(-1.0)
    assert value == pytest.approx(cosh_complex_distance(g, Geodesic.from_points(0, INFINITY)).imag)


def test_normalizer_sends_endpoints_to_zero_and_infinity():
    g = Geodesic.from_points(2, -3)
    T = normalizer(g)
    assert mobius_apply(T, 2) == BoundaryPoint(0)
    assert mobius_apply(T, -3).is_infinite
    assert T.is_real
    assert apply_h2(T, 1j).imag > 0


def test_side_of_vertical_geodesic():
    g = Geodesic.from_points(0, INFINITY)
    assert side_of(g, 1 + 1j) == 1
    assert side_of(g, -1 + 1j) == -1
    assert side_of(g, 2j) == 0
    assert side_of(g.reversed(), 1 + 1j) == -1


def test_axis_rotation_on_vertical_axis_is_diagonal():
    R = axis_rotation(Geodesic.from_points(0, INFINITY), 1.0 + 0.5j)
    expected = MoebiusElement.from_entries(cmath.exp(0.5 + 0.25j), 0, 0, cmath.exp(-0.5 - 0.25j))
    assert R.is_close(expected)


@settings(max_examples=40, deadline=None)
@given(geodesics(), complexes, complexes)
def test_axis_rotation_is_a_one_parameter_group(g, z, w):
    product = axis_rotation(g, z) @ axis_rotation(g, w)
    assert product.is_close(axis_rotation(g, z + w), 1e-6)
    for p in (g.start, g.end):
        image = mobius_apply(axis_rotation(g, z), p)
        assert image == p or abs(image.value - p.value) < 1e-7 * max(1.0, abs(p.value))


def test_axis_rotation_translation_length():
    g = Geodesic.from_points(-1, 1)
    assert complex_length(axis_rotation(g, 0.8 + 0.3j)) == pytest.approx(0.8 + 0.3j, abs=1e-12)


def test_rotation_generator_is_derivative_of_rotation():
    g = Geodesic.from_points(-2, 0.5)
    h = 1e-6
    numeric = (axis_rotation(g, h).matrix - axis_rotation(g, -h).matrix) / (2 * h)
    sign = 1 if np.trace(axis_rotation(g, h).matrix).real > 0 else -1
    assert np.allclose(sign * numeric, rotation_generator(g), atol=1e-8)
    assert abs(np.trace(rotation_generator(g))) < 1e-14


def test_explicit_entries_are_scaled_to_determinant_one():
    m = MoebiusElement.from_entries(2, 0, 0, 2)
    assert abs(np.linalg.det(m.matrix) - 1) < 1e-12
    assert m.is_close(MoebiusElement.identity())


def test_products_keep_the_raw_matrix():
    g = MoebiusElement.from_entries(3.0, 1.0, 2.0, 1.0)
    h = MoebiusElement.from_entries(1.0, 2.0, 0.5, 2.0)
    assert np.array_equal((g @ h).matrix, g.matrix @ h.matrix)
    assert np.array_equal(g.inverse().matrix, np.array([[g.d, -g.b], [-g.c, g.a]]))
