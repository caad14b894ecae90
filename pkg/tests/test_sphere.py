import math

import numpy as np
import pytest
from scipy import special

from models.sphere import (
    FOUR_PI,
    Direction,
    antipode,
    build_grid,
    cos_relative_angle,
    integrate,
    integrate_values,
    refine,
    relative_angle,
    wrap_principal,
)
from utils.exceptions import DomainError, NumericalError


def test_direction_normalizes_phi():
    assert Direction(1.0, -0.5).phi == pytest.approx(2 * math.pi - 0.5)
    assert Direction(1.0, 2 * math.pi).phi == 0.0
    assert Direction(1.0, 7.0).phi == pytest.approx(7.0 - 2 * math.pi)


@pytest.mark.parametrize("theta", [-0.1, math.pi + 0.1, float("nan")])
def test_direction_rejects_invalid_theta(theta):
    with pytest.raises(DomainError):
        Direction(theta, 0.0)


def test_direction_vector_roundtrip():
    d = Direction(1.1, 4.0)
    back = Direction.from_vector(3.0 * d.unit_vector())
    assert back.theta == pytest.approx(d.theta)
    assert back.phi == pytest.approx(d.phi)


@pytest.mark.parametrize("a, b, expected", [
    (Direction(0.0, 0.0), Direction(0.0, 1.7), 0.0),
    (Direction(math.pi / 2, 0.0), Direction(math.pi / 2, math.pi / 2), math.pi / 2),
    (Direction(math.pi / 3, 0.0), Direction(math.pi / 3, math.pi), 2 * math.pi / 3),
])
def test_relative_angle_examples(a, b, expected):
    assert relative_angle(a, b) == pytest.approx(expected, abs=1e-12)


def test_relative_angle_matches_cartesian_oracle(random_directions):
    points = random_directions(200)
    for a, b in zip(points[::2], points[1::2]):
        dot = float(np.clip(np.dot(a.unit_vector(), b.unit_vector()), -1.0, 1.0))
        assert relative_angle(a, b) == pytest.approx(math.acos(dot), abs=1e-7)


def test_relative_angle_equals_clamped_spherical_cosine(random_directions):
    points = random_directions(100)
    pairs = list(zip(points[::2], points[1::2]))
    pairs += [(a, Direction(a.theta, a.phi + 1e-9)) for a in points[:10]]
    pairs += [(a, antipode(a)) for a in points[:10]]
    for a, b in pairs:
        cos_alpha = float(cos_relative_angle(a, [b.theta], [b.phi])[0])
        assert -1.0 <= cos_alpha <= 1.0
        assert relative_angle(a, b) == pytest.approx(math.acos(cos_alpha), abs=1e-7)


def test_relative_angle_symmetric_and_antipodal(random_directions):
    for a in random_directions(100):
        b = Direction(a.theta * 0.5, a.phi + 1.0)
        assert relative_angle(a, b) == relative_angle(b, a)
        assert relative_angle(a, a) == 0.0
        assert relative_angle(a, antipode(a)) == pytest.approx(math.pi, abs=1e-12)


@pytest.mark.parametrize("a, expected", [
    (Direction(0.0, 0.0), (math.pi, math.pi)),
    (Direction(math.pi / 2, 0.0), (math.pi / 2, math.pi)),
    (Direction(math.pi / 4, math.pi / 3), (3 * math.pi / 4, 4 * math.pi / 3)),
])
def test_antipode_examples(a, expected):
    b = antipode(a)
    assert b.theta == pytest.approx(expected[0])
    assert b.phi == pytest.approx(expected[1])


def test_wrap_principal_branch():
    assert wrap_principal(math.pi) == pytest.approx(math.pi)
    assert wrap_principal(-math.pi) == pytest.approx(math.pi)
    assert wrap_principal(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_single_node_grid():
    grid = build_grid(1, 1)
    assert grid.size == 1
    (node, weight), = grid.nodes
    assert node.theta == pytest.approx(math.pi / 2)
    assert weight == pytest.approx(FOUR_PI)


@pytest.mark.parametrize("n_theta, n_phi", [(0, 3), (3, 0), (-1, 2)])
def test_build_grid_rejects_zero_counts(n_theta, n_phi):
    with pytest.raises(DomainError):
        build_grid(n_theta, n_phi)


@pytest.mark.parametrize("n_theta, n_phi", [(1, 1), (2, 3), (7, 5), (40, 40)])
def test_weights_sum_to_four_pi(n_theta, n_phi):
    grid = build_grid(n_theta, n_phi)
    assert np.sum(grid.weights) == pytest.approx(FOUR_PI, rel=1e-12)
    assert integrate(grid, lambda d: 1.0) == pytest.approx(FOUR_PI, rel=1e-12)


def test_integrate_examples():
    grid = build_grid(4, 4)
    assert integrate(grid, lambda d: 2.5) == pytest.approx(FOUR_PI * 2.5)
    assert integrate(grid, lambda d: math.cos(d.theta)) == pytest.approx(0.0, abs=1e-12)
    p_plus = lambda d: (1.0 - 3.0 * math.cos(d.theta)) / FOUR_PI
    assert integrate(grid, p_plus) == pytest.approx(1.0, abs=1e-12)


def test_cos_squared_with_two_polar_nodes():
    grid = build_grid(2, 1)
    assert integrate(grid, lambda d: math.cos(d.theta) ** 2) == pytest.approx(FOUR_PI / 3, rel=1e-12)


def test_complex_integrand():
    grid = build_grid(3, 5)
    value = integrate(grid, lambda d: complex(1.0, math.cos(d.theta) ** 2))
    assert isinstance(value, complex)
    assert value.imag == pytest.approx(FOUR_PI / 3)


@pytest.mark.parametrize("degree", [1, 3, 6])
def test_spherical_harmonics_integrate_to_zero(degree):
    grid = build_grid(degree + 1, degree + 1)
    u = np.cos(grid.thetas)
    for l in range(degree + 1):
        for m in range(0, l + 1):
            if l == 0:
                continue
            legendre = special.lpmv(m, l, u)
            scale = max(1.0, float(np.max(np.abs(legendre))))
            for values in (legendre * np.cos(m * grid.phis), legendre * np.sin(m * grid.phis)):
                assert integrate_values(grid, values) == pytest.approx(0.0, abs=1e-12 * scale)


def test_refinement_keeps_converged_integral():
    f = lambda d: math.sin(d.theta) ** 2 * math.cos(d.phi) ** 2
    coarse = build_grid(6, 6)
    fine = refine(coarse)
    assert fine.shape() == (12, 12)
    assert integrate(coarse, f) == pytest.approx(integrate(fine, f), abs=1e-12)
    assert integrate(fine, f) == pytest.approx(FOUR_PI / 3)


def test_integrate_reports_non_finite_values():
    grid = build_grid(3, 3)
    with pytest.raises(NumericalError):
        integrate(grid, lambda d: float("nan"))


def test_integration_is_deterministic():
    grid = build_grid(9, 7)
    f = lambda d: math.exp(math.cos(d.theta)) * math.sin(3 * d.phi + 0.2)
    assert integrate(grid, f) == integrate(grid, f)


def test_exactness_rule():
    grid = build_grid(3, 4)
    assert grid.is_exact_for(2)
    assert grid.is_exact_for(3) is False
    assert grid.polynomial_degree == 5
    assert grid.fourier_order == 1
