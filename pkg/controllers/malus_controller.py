"""
Contrôleur des expériences de Malus (Controller dans MVC)

Transmission classique cos^2(alpha), moyenne quantique cos^(4s)(alpha/2),
probabilités jointes EPR, forme à variables cachées et valeur CHSH.
L'erreur estimée de chaque intégrale est la différence avec la grille raffinée.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import GRID_DEFAULTS, NUMERICS
from models import spin_states
from models.quasi_dist import (
    QuasiDistribution,
    reconstruct_density,
    smooth_values,
)
from models.sphere import (
    Direction,
    QuadratureGrid,
    antipode,
    antipode_arrays,
    build_grid,
    cos_relative_angle,
    integrate_pairs,
    integrate_values,
    refine,
)
from models.spin_states import (
    SPIN_HALF,
    PhaseConvention,
    SpinLike,
    as_spin,
    projector,
    scs_closed_form,
    singlet_state,
    tensor,
)
from utils.exceptions import DomainError
from utils.logging_utils import get_logger


logger = get_logger(__name__)

# t(reglage, thetas, phis) -> transmissions dans [0, 1], une par direction cachée
Transmission = Callable[[Direction, np.ndarray, np.ndarray], np.ndarray]
JointFunction = Callable[[Direction, Direction], float]

# Nombre de réglages par expérience de Malus
MALUS_ARITY = {"malus": 1, "classical": 1, "joint": 2, "chsh": 4}


@dataclass(frozen=True)
class HiddenVariableModel:
    """Distribution à deux parties et transmissions locales de chaque détecteur"""

    distribution: QuasiDistribution
    transmission_a: Transmission
    transmission_b: Transmission

    def __post_init__(self):
        if self.distribution.parties != 2:
            raise DomainError("Un modèle à variables cachées exige une distribution à deux parties")


@dataclass(frozen=True)
class ExperimentResult:
    value: float
    grid_used: Tuple[int, int]
    estimated_error: float

    def __post_init__(self):
        if not self.estimated_error >= 0.0:
            raise DomainError(f"Erreur estimée invalide: {self.estimated_error}")


def _with_refinement(compute: Callable[[QuadratureGrid], float],
                     grid: QuadratureGrid) -> ExperimentResult:
    value = compute(grid)
    refined = compute(refine(grid, GRID_DEFAULTS["refinement_factor"]))
    return ExperimentResult(float(value), grid.shape(), float(abs(refined - value)))


# ----------------------------------------------------------------------------
# Transmissions
# ----------------------------------------------------------------------------

def malus_transmission(twice_s: int = 1) -> Transmission:
    """Transmission quantique cos^(4s)(alpha/2) entre réglage et direction cachée"""
    spin = as_spin(twice_s)

    def transmission(setting: Direction, thetas, phis) -> np.ndarray:
        return spin_states.malus_transmission(spin, setting, thetas, phis)

    return transmission


def classical_transmission(setting: Direction, thetas, phis) -> np.ndarray:
    """Loi de Malus des photons : cos^2(alpha)"""
    return cos_relative_angle(setting, thetas, phis) ** 2


def deterministic_hemisphere(threshold: float = 0.0) -> Transmission:
    """t = 1 si cos(alpha) > threshold, 0 sinon (réponse déterministe locale)"""

    def transmission(setting: Direction, thetas, phis) -> np.ndarray:
        return (cos_relative_angle(setting, thetas, phis) > threshold).astype(float)

    return transmission


def constant_transmission(value: float) -> Transmission:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"Transmission hors de [0, 1]: {value}")

    def transmission(setting: Direction, thetas, phis) -> np.ndarray:
        return np.full(np.shape(thetas), value)

    return transmission


def _checked_transmission(t: Transmission, setting: Direction, thetas, phis) -> np.ndarray:
    values = np.broadcast_to(np.asarray(t(setting, thetas, phis), dtype=float), np.shape(thetas))
    slack = NUMERICS["transmission_slack"]
    if np.any(values < -slack) or np.any(values > 1.0 + slack):
        raise DomainError(
            f"Transmission hors de [0, 1] pour le réglage {setting.as_tuple()}: "
            f"[{values.min():.3e}, {values.max():.3e}]"
        )
    return values


# ----------------------------------------------------------------------------
# Faisceau unique
# ----------------------------------------------------------------------------

def classical_malus(P_cl: QuasiDistribution, a_prime: Direction,
                    grid: QuadratureGrid) -> ExperimentResult:
    """
    Loi de Malus classique : int dOmega P_cl(Omega) cos^2(alpha).

    Une densité négative sur un noeud est refusée : c'est le cas quantique,
    traité par quantum_malus_average.
    """
    if P_cl.parties != 1:
        raise DomainError("classical_malus attend une distribution à une partie")

    def compute(g: QuadratureGrid) -> float:
        density = smooth_values(P_cl, g)
        if np.any(density < 0.0):
            raise DomainError(
                f"{P_cl.name} est négative sur la grille (min {density.min():.3e}) : "
                "utiliser quantum_malus_average"
            )
        return integrate_values(g, density * classical_transmission(a_prime, g.thetas, g.phis))

    return _with_refinement(compute, grid)


def quantum_malus_average(P: QuasiDistribution, s: SpinLike, a_prime: Direction,
                          grid: QuadratureGrid) -> ExperimentResult:
    """int dOmega P(Omega) cos^(4s)(alpha/2), P éventuellement négative"""
    if P.parties != 1:
        raise DomainError("quantum_malus_average attend une distribution à une partie")
    spin = as_spin(s)

    def compute(g: QuadratureGrid) -> float:
        transmission = spin_states.malus_transmission(spin, a_prime, g.thetas, g.phis)
        return integrate_values(g, smooth_values(P, g) * transmission)

    return _with_refinement(compute, grid)


def trace_identity_value(P: QuasiDistribution, s: SpinLike, a_prime: Direction,
                         grid: QuadratureGrid,
                         convention: PhaseConvention = PhaseConvention.BLOCH) -> float:
    """tr(rho . |a'><a'|) avec rho reconstruite à partir de P"""
    spin = as_spin(s)
    rho = reconstruct_density(P, spin, grid, convention)
    detector = projector(scs_closed_form(spin, a_prime, convention))
    return float(rho.expectation(detector.entries).real)


# ----------------------------------------------------------------------------
# Deux parties
# ----------------------------------------------------------------------------

def _hidden_variable_integral(model: HiddenVariableModel, a: Direction, b: Direction,
                              grid: QuadratureGrid) -> float:
    P = model.distribution
    t_a = _checked_transmission(model.transmission_a, a, grid.thetas, grid.phis)
    t_b = _checked_transmission(model.transmission_b, b, grid.thetas, grid.phis)
    total = integrate_pairs(grid, smooth_values(P, grid) * t_a[:, None] * t_b[None, :])
    if P.delta_weight:
        anti_t, anti_p = antipode_arrays(grid.thetas, grid.phis)
        t_b_anti = _checked_transmission(model.transmission_b, b, anti_t, anti_p)
        total += P.delta_weight * integrate_values(grid, t_a * t_b_anti)
    return float(total)


def hidden_variable_probability(model: HiddenVariableModel, a: Direction, b: Direction,
                                grid: QuadratureGrid) -> ExperimentResult:
    """
    Probabilité jointe sous forme de variables cachées.

    p(a; b) = int int P(l_a; l_b) t(a, l_a) t(b, l_b), le terme delta
    antipodal étant réduit à une intégrale sur une seule sphère.
    """
    return _with_refinement(lambda g: _hidden_variable_integral(model, a, b, g), grid)


def joint_probability(P: QuasiDistribution, a: Direction, b: Direction,
                      grid: QuadratureGrid) -> ExperimentResult:
    """Probabilité de détection (+, +) avec transmissions cos^2(alpha/2) des deux côtés"""
    if P.parties != 2:
        raise DomainError("joint_probability attend une distribution à deux parties")
    model = HiddenVariableModel(P, malus_transmission(1), malus_transmission(1))
    return hidden_variable_probability(model, a, b, grid)


def quantum_joint_oracle(a: Direction, b: Direction) -> float:
    """<psi|(Pi_a x Pi_b)|psi> sur le singulet, calcul matriciel exact (sans quadrature)"""
    detector = tensor(
        projector(scs_closed_form(SPIN_HALF, a)),
        projector(scs_closed_form(SPIN_HALF, b)),
    )
    psi = singlet_state().amplitudes
    return float(np.vdot(psi, detector.entries @ psi).real)


# ----------------------------------------------------------------------------
# CHSH
# ----------------------------------------------------------------------------

def correlator(joint: JointFunction, a: Direction, b: Direction) -> float:
    """E(a, b) = p(a,b) + p(a',b') - p(a,b') - p(a',b), a' = antipode(a)"""
    a_bar, b_bar = antipode(a), antipode(b)
    return joint(a, b) + joint(a_bar, b_bar) - joint(a, b_bar) - joint(a_bar, b)


def chsh_value(joint: JointFunction, settings: Sequence[Direction]) -> float:
    """
    S = E(a,b) - E(a,b') + E(a',b) + E(a',b').

    Args:
        joint: Probabilité (+, +) en fonction des deux réglages
        settings: (a, a', b, b')

    Returns:
        Valeur S (|S| <= 2 pour tout modèle local)
    """
    if len(settings) != 4:
        raise DomainError(f"CHSH attend 4 réglages, reçu {len(settings)}")
    a, a_prime, b, b_prime = settings
    return (
        correlator(joint, a, b)
        - correlator(joint, a, b_prime)
        + correlator(joint, a_prime, b)
        + correlator(joint, a_prime, b_prime)
    )


def standard_chsh_settings() -> List[Direction]:
    """Réglages coplanaires (équateur) à 0, pi/2 pour a, a' et pi/4, 3pi/4 pour b, b'"""
    half = 0.5 * math.pi
    return [
        Direction(half, 0.0),
        Direction(half, half),
        Direction(half, 0.25 * math.pi),
        Direction(half, 0.75 * math.pi),
    ]


def grid_joint_function(model: HiddenVariableModel, grid: QuadratureGrid) -> JointFunction:
    """Probabilité jointe d'un modèle local sur une grille fixe (sans raffinement)"""
    return lambda a, b: _hidden_variable_integral(model, a, b, grid)


class MalusController:
    """Expériences de Malus liées à une grille par défaut"""

    def __init__(self, grid: Optional[QuadratureGrid] = None):
        self.grid = grid or build_grid(GRID_DEFAULTS["min_nodes"], GRID_DEFAULTS["min_nodes"])

    @staticmethod
    def valider_reglages(experiment: str, settings: Sequence[Direction]) -> Tuple[bool, str]:
        """Vérifie que le nombre de réglages correspond à l'expérience"""
        if experiment not in MALUS_ARITY:
            return False, f"Expérience inconnue: {experiment}"
        if len(settings) != MALUS_ARITY[experiment]:
            return False, (
                f"{experiment} attend {MALUS_ARITY[experiment]} réglage(s), reçu {len(settings)}"
            )
        return True, "Réglages valides"

    def moyenne_quantique(self, P: QuasiDistribution, s: SpinLike,
                          a_prime: Direction) -> Dict:
        result = quantum_malus_average(P, s, a_prime, self.grid)
        trace_value = trace_identity_value(P, s, a_prime, self.grid)
        logger.info("Moyenne de Malus %s (2s = %s) : %.12f", P.name, as_spin(s).twice_s, result.value)
        return {"result": result, "trace_identity": trace_value,
                "trace_gap": abs(result.value - trace_value)}

    def moyenne_classique(self, P_cl: QuasiDistribution, a_prime: Direction) -> ExperimentResult:
        return classical_malus(P_cl, a_prime, self.grid)

    def probabilite_jointe(self, P: QuasiDistribution, a: Direction, b: Direction) -> Dict:
        result = joint_probability(P, a, b, self.grid)
        oracle = quantum_joint_oracle(a, b)
        return {"result": result, "oracle": oracle, "oracle_gap": abs(result.value - oracle)}

    def chsh(self, settings: Sequence[Direction],
             P: Optional[QuasiDistribution] = None) -> float:
        """CHSH par l'oracle quantique (P absent) ou par la quadrature de P"""
        if P is None:
            return chsh_value(quantum_joint_oracle, settings)
        model = HiddenVariableModel(P, malus_transmission(1), malus_transmission(1))
        return chsh_value(grid_joint_function(model, self.grid), settings)
