import math

import numpy as np
import pytest

from models.sphere import Direction, antipode, build_grid, relative_angle
from models.spin_states import (
    SPIN_HALF,
    PhaseConvention,
    SpinQuantumNumber,
    SpinState,
    basis_state,
    bloch_vector,
    coherent_overlap,
    fidelity,
    ladder_operators,
    malus_probability,
    overlap,
    partial_trace,
    projector,
    resolution_of_identity_defect,
    rotation_operator,
    scs_closed_form,
    scs_exponential,
    singlet_state,
    spin_operators,
    tensor,
)
from utils.exceptions import DomainError


@pytest.mark.parametrize("twice_s", [0, -2, 1.5, True])
def test_spin_quantum_number_rejects_invalid(twice_s):
    with pytest.raises(DomainError):
        SpinQuantumNumber(twice_s)


def test_spin_quantum_number_properties():
    spin = SpinQuantumNumber(3)
    assert spin.s == 1.5
    assert spin.dim == 4
    assert list(spin.m_values) == [-1.5, -0.5, 0.5, 1.5]
    assert str(spin) == "3/2"
    assert str(SpinQuantumNumber(4)) == "2"


def test_ladder_spin_half():
    s_plus, s_minus = ladder_operators(1)
    np.testing.assert_allclose(s_plus, [[0, 0], [1, 0]])
    np.testing.assert_allclose(s_minus, s_plus.conj().T)


def test_ladder_spin_one():
    s_plus, _ = ladder_operators(2)
    nonzero = s_plus[np.abs(s_plus) > 0]
    np.testing.assert_allclose(nonzero, [math.sqrt(2), math.sqrt(2)])


def test_ladder_commutator_spin_three_halves():
    s_plus, s_minus = ladder_operators(3)
    _, _, s_z = spin_operators(3)
    np.testing.assert_allclose(s_plus @ s_minus - s_minus @ s_plus, 2 * s_z, atol=1e-12)


def test_scs_zero_rotation_is_down_state():
    state = scs_exponential(1, Direction(0.0, 1.3))
    np.testing.assert_allclose(state.amplitudes, [1.0, 0.0], atol=1e-15)


def test_scs_equator_spin_half():
    state = scs_exponential(1, Direction(math.pi / 2, 0.0))
    np.testing.assert_allclose(state.amplitudes, np.array([1.0, 1.0]) / math.sqrt(2), atol=1e-14)


@pytest.mark.parametrize("phi", [0.0, 0.7, 2.5])
def test_scs_spin_one_south_pole(phi):
    state = scs_exponential(2, Direction(math.pi, phi))
    np.testing.assert_allclose(state.amplitudes, [0.0, 0.0, np.exp(2j * phi)], atol=1e-12)


def test_closed_form_spin_half_matches_bloch_form():
    d = Direction(1.2, 0.4)
    state = scs_closed_form(1, d)
    expected = [math.cos(0.6), np.exp(0.4j) * math.sin(0.6)]
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)


def test_closed_form_spin_two_examples():
    np.testing.assert_allclose(scs_closed_form(4, Direction(0.0, 0.3)).amplitudes,
                               [1, 0, 0, 0, 0], atol=1e-15)
    equator = scs_closed_form(4, Direction(math.pi / 2, 0.0)).amplitudes
    binomial = np.sqrt([1, 4, 6, 4, 1]) / 4.0
    np.testing.assert_allclose(equator, binomial, atol=1e-14)
    assert np.linalg.norm(equator) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("convention", list(PhaseConvention))
def test_exponential_and_closed_form_agree(rng, convention):
    worst = 0.0
    for _ in range(300):
        twice_s = int(rng.integers(1, 51))
        d = Direction(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2 * math.pi))
        a = scs_exponential(twice_s, d, convention).amplitudes
        b = scs_closed_form(twice_s, d, convention).amplitudes
        worst = max(worst, float(np.max(np.abs(a - b))))
    assert worst < 1e-10


def test_spin_s_malus_law(rng):
    worst = 0.0
    for _ in range(1000):
        twice_s = int(rng.integers(1, 51))
        a = Direction(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2 * math.pi))
        b = Direction(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2 * math.pi))
        amplitude = overlap(scs_closed_form(twice_s, a), scs_closed_form(twice_s, b))
        alpha = relative_angle(a, b)
        worst = max(worst, abs(abs(amplitude) ** 2 - math.cos(alpha / 2) ** (2 * twice_s)))
        worst = max(worst, abs(abs(amplitude) ** 2 - malus_probability(twice_s, a, b)))
    assert worst < 1e-10


def test_overlap_examples():
    x = scs_closed_form(5, Direction(0.9, 2.0))
    assert overlap(x, x) == pytest.approx(1.0)
    d = Direction(0.9, 2.0)
    assert abs(overlap(scs_closed_form(5, d), scs_closed_form(5, antipode(d)))) < 1e-12


def test_overlap_spin_half_closed_form():
    a, b = Direction(0.3, 1.0), Direction(2.0, 4.0)
    expected = (math.cos(0.15) * math.cos(1.0)
                + np.exp(1j * (4.0 - 1.0)) * math.sin(0.15) * math.sin(1.0))
    assert overlap(scs_closed_form(1, a), scs_closed_form(1, b)) == pytest.approx(expected)
    assert coherent_overlap(1, a, b) == pytest.approx(expected)


def test_overlap_dimension_mismatch():
    with pytest.raises(DomainError):
        overlap(basis_state(1, 1), basis_state(2, 0))


@pytest.mark.parametrize("twice_s, alpha, expected", [
    (1, 0.0, 1.0),
    (1, math.pi / 2, 0.5),
    (4, math.pi / 2, 1.0 / 16.0),
])
def test_malus_probability_examples(twice_s, alpha, expected):
    a = Direction(0.4, 1.0)
    b = Direction(0.4 + alpha, 1.0)
    assert malus_probability(twice_s, a, b) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("theta", [0.0, math.pi])
def test_malus_probability_pole_gauge_invariance(theta):
    other = Direction(1.1, 0.5)
    values = [malus_probability(3, Direction(theta, phi), other) for phi in (0.0, 1.0, 4.0)]
    assert max(values) - min(values) < 1e-15


def test_projector_properties(rng):
    d = Direction(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2 * math.pi))
    rho = projector(scs_closed_form(3, d))
    np.testing.assert_allclose(rho.entries @ rho.entries, rho.entries, atol=1e-12)
    assert rho.trace() == pytest.approx(1.0)
    np.testing.assert_allclose(rho.eigenvalues(), [0, 0, 0, 1], atol=1e-12)


def test_projector_down_state():
    rho = projector(scs_closed_form(1, Direction(0.0, 2.0)))
    np.testing.assert_allclose(rho.entries, [[1, 0], [0, 0]], atol=1e-15)


def test_tensor_basis_index():
    up, down = basis_state(1, 1), basis_state(1, -1)
    product = tensor(up, down)
    assert product.dims == (2, 2)
    np.testing.assert_allclose(product.amplitudes, [0, 0, 1, 0])


def test_singlet_properties():
    psi = singlet_state()
    assert psi.norm == pytest.approx(1.0)
    _, _, s_z = spin_operators(SPIN_HALF)
    zz = np.kron(2 * s_z, 2 * s_z)
    assert np.vdot(psi.amplitudes, zz @ psi.amplitudes).real == pytest.approx(-1.0)
    rho = projector(psi)
    for keep in (0, 1):
        np.testing.assert_allclose(partial_trace(rho, keep).entries, np.eye(2) / 2, atol=1e-15)


def test_singlet_rotation_invariance(random_directions):
    psi = singlet_state().amplitudes
    for d in random_directions(10):
        u = rotation_operator(SPIN_HALF, d)
        rotated = np.kron(u, u) @ psi
        assert abs(np.vdot(psi, rotated)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("twice_s, shape, bound", [
    (1, (2, 3), 1e-12),
    (2, (3, 3), 1e-10),
    (10, (11, 11), 1e-10),
])
def test_resolution_of_identity_exact(twice_s, shape, bound):
    assert resolution_of_identity_defect(twice_s, build_grid(*shape)) < bound


def test_resolution_of_identity_under_resolved():
    assert resolution_of_identity_defect(10, build_grid(3, 3)) > 1e-2


def test_resolution_of_identity_convention_independent():
    grid = build_grid(6, 6)
    for convention in PhaseConvention:
        assert resolution_of_identity_defect(5, grid, convention) < 1e-10


def test_probabilities_do_not_depend_on_convention(random_directions):
    points = random_directions(20)
    for a, b in zip(points[::2], points[1::2]):
        bloch = abs(coherent_overlap(3, a, b, PhaseConvention.BLOCH))
        rotation = abs(coherent_overlap(3, a, b, PhaseConvention.ROTATION))
        assert bloch == pytest.approx(rotation, abs=1e-14)


def test_bloch_vector_and_fidelity():
    state = scs_closed_form(1, Direction(math.pi / 2, 0.0))
    np.testing.assert_allclose(bloch_vector(state), [1.0, 0.0, 0.0], atol=1e-14)
    rho = projector(state)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    other = projector(scs_closed_form(1, Direction(math.pi / 2, math.pi)))
    assert fidelity(rho, other) == pytest.approx(0.0, abs=1e-12)


def test_projector_rejects_unnormalized_state():
    with pytest.raises(DomainError):
        projector(SpinState((SPIN_HALF,), [1.0, 1.0]))
