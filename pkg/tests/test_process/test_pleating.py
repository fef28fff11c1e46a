import cmath
import math

import pandas as pd
import pytest

from src.process.lamination import FiniteLamination, horocycle_lamination, l_roundness
from src.process.moebius import INFINITY, MoebiusElement, h3_distance
from src.process.pleating import (
    bend_angle, bending_cocycle, bilipschitz_estimate, dump_mesh_csv,
    pleated_map, pleated_path, theta_bounded_check
)
from src.process.thresholds import r_L
from src.utils.exceptions import OutOfRange
from src.utils.static import VERDICT_CONSISTENT, VERDICT_REFUTED

ALPHA = 0.5


@pytest.fixture
def vertical_leaf():
    """Une seule feuille (0, ∞) de poids 0.5."""
    return FiniteLamination.single(0, INFINITY, ALPHA)


@pytest.fixture(scope="module")
def gentle_horocycle():
    """Lamination d'horocycle (L = 1) réduite à 30 % : ‖μ‖₁ ≈ 0.288."""
    return horocycle_lamination(1.0).scaled(0.3)


def test_cocycle_of_a_single_leaf_is_a_rotation(vertical_leaf):
    Z = bending_cocycle(vertical_leaf, -1 + 1j, 1 + 1j)
    expected = MoebiusElement.from_entries(cmath.exp(0.5j * ALPHA), 0, 0, cmath.exp(-0.5j * ALPHA))
    assert Z.is_close(expected)


def test_cocycle_identity_and_inverse(vertical_leaf):
    assert bending_cocycle(vertical_leaf, 2 + 1j, 2 + 1j).is_close(MoebiusElement.identity())
    forward = bending_cocycle(vertical_leaf, -1 + 1j, 1 + 2j)
    backward = bending_cocycle(vertical_leaf, 1 + 2j, -1 + 1j)
    assert (forward @ backward).is_close(MoebiusElement.identity())


def test_cocycle_without_crossing_is_identity(vertical_leaf):
    assert bending_cocycle(vertical_leaf, 1 + 1j, 3 + 2j).is_close(MoebiusElement.identity())


def test_pleated_map_rotates_the_far_side(vertical_leaf):
    image = pleated_map(vertical_leaf, -1 + 1j, 1 + 1j)
    assert abs(image.z - cmath.exp(1j * ALPHA)) < 1e-12
    assert image.height == pytest.approx(1.0)
    same_side = pleated_map(vertical_leaf, -1 + 1j, -2 + 0.5j)
    assert abs(same_side.z + 2) < 1e-12 and same_side.height == pytest.approx(0.5)


def test_pleated_map_is_an_isometry_on_each_plaque(vertical_leaf):
    x, y = 1 + 1j, 2 + 3j
    before = h3_distance(pleated_map(vertical_leaf, -1 + 1j, x), pleated_map(vertical_leaf, -1 + 1j, y))
    after = h3_distance(pleated_map(vertical_leaf, 1j - 3, x), pleated_map(vertical_leaf, 1j - 3, y))
    assert before == pytest.approx(after, abs=1e-12)


def test_pleated_path_rejects_equal_points(vertical_leaf):
    with pytest.raises(ValueError):
        pleated_path(vertical_leaf, 1j + 1, 1j + 1)


def test_bend_angle_off_the_leaf_is_two_sided_equal(vertical_leaf):
    plus, minus = bend_angle(vertical_leaf, -1 + 1j, 1 + 1j)
    assert plus == pytest.approx(minus, abs=1e-9)
    assert 0 < plus < ALPHA + 1e-9


def test_bend_angle_on_a_perpendicular_leaf(vertical_leaf):
    p = cmath.exp(2.0j)
    plus, minus = bend_angle(vertical_leaf, p, 1j)
    assert minus == pytest.approx(0.0, abs=1e-7)
    assert plus == pytest.approx(ALPHA, abs=1e-7)


def test_theta_bounded_check_verdicts(vertical_leaf):
    calm = theta_bounded_check(vertical_leaf, 0.6, rays=32, step=0.1, reach=3.0, basepoint=-1 + 1j)
    assert calm.verdict == VERDICT_CONSISTENT
    assert calm.max_angle <= ALPHA + 1e-9
    assert calm.samples == 32 * 30
    strict = theta_bounded_check(vertical_leaf, 0.2, rays=32, step=0.1, reach=3.0, basepoint=-1 + 1j)
    assert strict.verdict == VERDICT_REFUTED
    assert strict.witness is not None


@pytest.mark.parametrize("theta", [0.6, 1.0, math.pi / 2])
def test_round_lamination_is_never_refuted(gentle_horocycle, theta):
    assert l_roundness(gentle_horocycle, 1.0).value < r_L(theta, 1.0)
    report = theta_bounded_check(gentle_horocycle, theta, rays=16, step=0.2, reach=4.0)
    assert report.verdict == VERDICT_CONSISTENT
    assert report.max_angle <= theta


def test_theta_bounded_check_domain(vertical_leaf):
    with pytest.raises(OutOfRange):
        theta_bounded_check(vertical_leaf, math.pi)


def test_pleated_map_is_one_lipschitz(gentle_horocycle):
    report = bilipschitz_estimate(gentle_horocycle, pairs=10_000, reach=3.0)
    assert report.pairs > 9_000
    assert report.max_ratio <= 1.0 + 1e-9
    assert report.lipschitz_ok


def test_small_roundness_gives_bilipschitz_ratio(gentle_horocycle):
    theta = 1.0
    roundness = l_roundness(gentle_horocycle, 1.0)
    assert roundness.exact
    assert roundness.value < r_L(theta, 1.0)
    report = bilipschitz_estimate(gentle_horocycle, pairs=3_000, reach=3.0, seed=7)
    assert report.min_ratio >= math.cos(theta) - 1e-6


def test_dump_mesh_csv(tmp_path, vertical_leaf):
    path = dump_mesh_csv(vertical_leaf, str(tmp_path / "mesh.csv"), basepoint=-1 + 1j,
                         rays=4, step=0.5, reach=2.0)
    mesh = pd.read_csv(path)
    assert list(mesh.columns) == ["x_re", "x_im", "height", "src_re", "src_im"]
    assert len(mesh) == 1 + 4 * 4
    assert (mesh.height > 0).all()
    assert (mesh.src_im > 0).all()
