import math

import numpy as np
import pytest

from controllers.malus_controller import (
    ExperimentResult,
    HiddenVariableModel,
    MalusController,
    chsh_value,
    classical_malus,
    constant_transmission,
    deterministic_hemisphere,
    grid_joint_function,
    hidden_variable_probability,
    joint_probability,
    malus_transmission,
    quantum_joint_oracle,
    quantum_malus_average,
    standard_chsh_settings,
    trace_identity_value,
)
from models.quasi_dist import (
    classical_anticorrelated,
    get_distribution,
    linear_distribution,
    normalization,
    product_distribution,
    von_mises_fisher,
)
from models.sphere import Direction, build_grid
from utils.exceptions import DomainError

NORTH = Direction(0.0, 0.0)
SOUTH = Direction(math.pi, 0.0)
GRID = build_grid(8, 8)
PAIR_GRID = build_grid(4, 6)


def _random_linear(rng, name):
    c = rng.uniform(-1.0, 1.0, 3)
    c *= rng.uniform(0.0, 1.0) / np.linalg.norm(c)
    return linear_distribution(c, name)


def test_classical_uniform_average(random_directions):
    uniform = get_distribution("uniform")
    for a_prime in random_directions(5):
        result = classical_malus(uniform, a_prime, GRID)
        assert result.value == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert result.grid_used == (8, 8)
        assert result.estimated_error < 1e-12


def test_classical_concentrated_density_follows_cos_squared():
    P = von_mises_fisher(NORTH, 200.0)
    grid = build_grid(200, 8)
    assert classical_malus(P, NORTH, grid).value > 0.98
    assert classical_malus(P, Direction(math.pi / 2, 0.0), grid).value < 0.02


def test_classical_rejects_negative_density():
    with pytest.raises(DomainError):
        classical_malus(get_distribution("p-plus"), NORTH, GRID)


def test_quantum_average_examples():
    uniform, p_plus = get_distribution("uniform"), get_distribution("p-plus")
    assert quantum_malus_average(uniform, 1, Direction(0.7, 2.0), GRID).value == pytest.approx(0.5, abs=1e-12)
    assert quantum_malus_average(p_plus, 1, NORTH, GRID).value == pytest.approx(0.0, abs=1e-12)
    assert quantum_malus_average(p_plus, 1, SOUTH, GRID).value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("twice_s", [1, 2, 5, 10])
def test_quantum_uniform_average_spin_s(twice_s):
    result = quantum_malus_average(get_distribution("uniform"), twice_s, NORTH, GRID)
    assert result.value == pytest.approx(1.0 / (twice_s + 1), abs=1e-12)


def test_quantum_average_accepts_negative_density():
    result = quantum_malus_average(get_distribution("p-minus"), 1, Direction(1.0, 1.0), GRID)
    assert 0.0 <= result.value <= 1.0


@pytest.mark.parametrize("identifier, twice_s", [
    ("uniform", 1), ("uniform", 4), ("p-plus", 1), ("p-minus", 1), ("p-plus", 3),
])
def test_trace_identity(random_directions, identifier, twice_s):
    P = get_distribution(identifier)
    for a_prime in random_directions(100):
        average = quantum_malus_average(P, twice_s, a_prime, GRID).value
        assert trace_identity_value(P, twice_s, a_prime, GRID) == pytest.approx(average, abs=1e-12)


def test_pro2_joint_probability_matches_oracle(random_directions):
    pro2 = get_distribution("pro2")
    points = random_directions(400)
    for a, b in zip(points[::2], points[1::2]):
        result = joint_probability(pro2, a, b, PAIR_GRID)
        assert result.value == pytest.approx(quantum_joint_oracle(a, b), abs=1e-12)


def test_pro1_joint_probability_is_correlated(random_directions):
    pro1 = get_distribution("pro1")
    points = random_directions(40)
    for a, b in zip(points[::2], points[1::2]):
        dot = float(np.dot(a.unit_vector(), b.unit_vector()))
        assert joint_probability(pro1, a, b, PAIR_GRID).value == pytest.approx(0.25 * (1.0 + dot), abs=1e-12)


@pytest.mark.parametrize("a, b, expected", [
    (NORTH, NORTH, 0.0),
    (NORTH, SOUTH, 0.5),
    (Direction(math.pi / 2, 0.0), Direction(math.pi / 2, math.pi / 2), 0.25),
])
def test_quantum_joint_oracle_examples(a, b, expected):
    assert quantum_joint_oracle(a, b) == pytest.approx(expected, abs=1e-14)


def test_joint_probability_requires_two_parties():
    with pytest.raises(DomainError):
        joint_probability(get_distribution("uniform"), NORTH, NORTH, PAIR_GRID)


@pytest.mark.parametrize("identifier", ["pro1", "pro1-flipped", "pro2"])
def test_trivial_transmissions_give_mass(identifier):
    P = get_distribution(identifier)
    always = HiddenVariableModel(P, constant_transmission(1.0), constant_transmission(1.0))
    never = HiddenVariableModel(P, constant_transmission(0.0), constant_transmission(1.0))
    assert hidden_variable_probability(always, NORTH, SOUTH, PAIR_GRID).value == pytest.approx(1.0, abs=1e-12)
    assert hidden_variable_probability(never, NORTH, SOUTH, PAIR_GRID).value == 0.0


def test_transmission_out_of_range_is_rejected():
    model = HiddenVariableModel(
        get_distribution("pro2"), lambda s, t, p: np.full(np.shape(t), 1.5), constant_transmission(1.0)
    )
    with pytest.raises(DomainError):
        hidden_variable_probability(model, NORTH, NORTH, PAIR_GRID)
    with pytest.raises(DomainError):
        constant_transmission(-0.1)


def test_hidden_variable_model_requires_pair_distribution():
    with pytest.raises(DomainError):
        HiddenVariableModel(get_distribution("uniform"), malus_transmission(), malus_transmission())


def test_joint_probability_is_deterministic():
    a, b = Direction(0.4, 1.9), Direction(2.2, 5.1)
    first = joint_probability(get_distribution("pro2"), a, b, PAIR_GRID)
    second = joint_probability(get_distribution("pro2"), a, b, PAIR_GRID)
    assert first == second


def test_experiment_result_rejects_negative_error():
    with pytest.raises(DomainError):
        ExperimentResult(0.5, (8, 8), -1.0)


def test_quantum_chsh_at_standard_settings():
    S = chsh_value(quantum_joint_oracle, standard_chsh_settings())
    assert S == pytest.approx(-2.0 * math.sqrt(2.0), abs=1e-12)


def test_uncorrelated_constant_joint_gives_zero(random_directions):
    assert chsh_value(lambda a, b: 0.25, random_directions(4)) == 0.0


def test_chsh_needs_four_settings():
    with pytest.raises(DomainError):
        chsh_value(quantum_joint_oracle, standard_chsh_settings()[:3])


def _random_deterministic_model(rng, random_directions):
    if rng.uniform() < 0.5:
        P = classical_anticorrelated()
    else:
        center_a, center_b = random_directions(2)
        P = product_distribution(
            von_mises_fisher(center_a, rng.uniform(0.5, 5.0)),
            von_mises_fisher(center_b, rng.uniform(0.5, 5.0)),
        )
    return HiddenVariableModel(
        P,
        deterministic_hemisphere(rng.uniform(-0.5, 0.5)),
        deterministic_hemisphere(rng.uniform(-0.5, 0.5)),
    )


def test_local_product_models_respect_bound(rng, random_directions):
    grid = build_grid(6, 6)
    for _ in range(100):
        P = product_distribution(_random_linear(rng, "first"), _random_linear(rng, "second"))
        model = HiddenVariableModel(P, malus_transmission(), malus_transmission())
        S = chsh_value(grid_joint_function(model, grid), random_directions(4))
        assert abs(S) <= 2.0 + 1e-9


def test_deterministic_local_models_respect_bound(rng, random_directions):
    # borne locale 2 * masse discrète de P sur la grille
    grid = build_grid(8, 8)
    for _ in range(100):
        model = _random_deterministic_model(rng, random_directions)
        mass = normalization(model.distribution, grid)
        S = chsh_value(grid_joint_function(model, grid), random_directions(4))
        assert abs(S) <= 2.0 * mass + 1e-9


def test_pro2_quadrature_reaches_quantum_value():
    controller = MalusController(PAIR_GRID)
    S = controller.chsh(standard_chsh_settings(), get_distribution("pro2"))
    assert S == pytest.approx(-2.0 * math.sqrt(2.0), abs=1e-10)
    assert controller.chsh(standard_chsh_settings()) == pytest.approx(S, abs=1e-10)


def test_controller_reports_oracle_and_trace_gaps():
    controller = MalusController()
    report = controller.probabilite_jointe(get_distribution("pro2"), NORTH, NORTH)
    assert report["result"].value == pytest.approx(0.0, abs=1e-12)
    assert report["oracle_gap"] < 1e-12

    report = controller.moyenne_quantique(get_distribution("p-plus"), 1, SOUTH)
    assert report["result"].value == pytest.approx(1.0, abs=1e-12)
    assert report["trace_gap"] < 1e-12


@pytest.mark.parametrize("experiment, count, expected", [
    ("joint", 2, True),
    ("chsh", 3, False),
    ("malus", 1, True),
    ("tomography", 1, False),
])
def test_controller_validates_settings(experiment, count, expected):
    success, message = MalusController().valider_reglages(experiment, [NORTH] * count)
    assert success is expected
    assert message
