"""
Quasi-distributions sur une ou deux copies de la sphère (Model)

Une quasi-distribution = une densité régulière (par stéradian et par partie)
+ éventuellement un terme delta antipodal (deux parties) qui impose
Omega_b = antipode(Omega_a). Le terme delta est toujours réduit
analytiquement à une intégrale sur une seule sphère, jamais discrétisé.
Les valeurs négatives sont permises : aucun écrêtage nulle part.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from config import DISTRIBUTION_IDS, NUMERICS
from models.sphere import (
    FOUR_PI,
    Direction,
    QuadratureGrid,
    antipode_arrays,
    integrate_pairs,
    integrate_values,
)
from models.spin_states import (
    DensityMatrix,
    PhaseConvention,
    SpinLike,
    as_spin,
    coherent_state_matrix,
)
from utils.exceptions import DomainError
from utils.logging_utils import get_logger


logger = get_logger(__name__)

SmoothFunction = Callable[..., np.ndarray]
Directions = Union[Direction, Sequence[Direction]]


@dataclass(frozen=True)
class QuasiDistribution:
    """
    Quasi-distribution P(Omega) ou P(Omega_a; Omega_b).

    smooth : fonction vectorisée, (theta, phi) pour une partie,
             (theta_a, phi_a, theta_b, phi_b) pour deux parties.
    delta_weight : coefficient du terme delta antipodal (deux parties seulement).
    degree : degré polynomial par partie (None si la densité n'est pas polynomiale).
    """

    name: str
    parties: int
    smooth: SmoothFunction
    delta_weight: float = 0.0
    degree: Optional[int] = 1
    description: str = ""

    def __post_init__(self):
        if self.parties not in (1, 2):
            raise DomainError(f"Nombre de parties invalide: {self.parties}")
        if self.parties == 1 and self.delta_weight != 0.0:
            raise DomainError("Le terme delta antipodal exige deux parties")


class NegativityScan(NamedTuple):
    min_value: float
    argmin: Union[Direction, Tuple[Direction, Direction]]
    delta_weight: float


def _as_directions(omegas: Directions) -> Tuple[Direction, ...]:
    if isinstance(omegas, Direction):
        return (omegas,)
    return tuple(omegas)


def evaluate(P: QuasiDistribution, omegas: Directions) -> float:
    """
    Valeur de la partie régulière au point donné.

    Le terme delta est intégrable mais pas ponctuel : il est ignoré ici.
    """
    points = _as_directions(omegas)
    if len(points) != P.parties:
        raise DomainError(f"{P.name} attend {P.parties} direction(s), reçu {len(points)}")
    args = []
    for point in points:
        args.extend([np.array(point.theta), np.array(point.phi)])
    return float(P.smooth(*args))


def smooth_values(P: QuasiDistribution, grid: QuadratureGrid) -> np.ndarray:
    """Partie régulière aux noeuds (vecteur pour une partie, matrice pour deux)"""
    if P.parties == 1:
        values = P.smooth(grid.thetas, grid.phis)
        return np.broadcast_to(np.asarray(values, dtype=float), grid.thetas.shape)
    values = P.smooth(
        grid.thetas[:, None], grid.phis[:, None],
        grid.thetas[None, :], grid.phis[None, :],
    )
    return np.broadcast_to(np.asarray(values, dtype=float), (grid.size, grid.size))


def normalization(P: QuasiDistribution, grid: QuadratureGrid) -> float:
    """
    Intégrale totale de P.

    Terme delta : int dOmega f(Omega, antipode(Omega)) avec f = 1, soit 4pi * poids.
    """
    if P.parties == 1:
        return integrate_values(grid, smooth_values(P, grid))
    total = integrate_pairs(grid, smooth_values(P, grid))
    if P.delta_weight:
        total += P.delta_weight * integrate_values(grid, np.ones(grid.size))
    return float(total)


def _spins_per_party(P: QuasiDistribution, s) -> Tuple:
    if isinstance(s, (tuple, list)):
        spins = tuple(as_spin(x) for x in s)
    else:
        spins = (as_spin(s),) * P.parties
    if len(spins) != P.parties:
        raise DomainError(f"{P.name} attend {P.parties} spin(s), reçu {len(spins)}")
    return spins


def reconstruct_density(
    P: QuasiDistribution,
    s: Union[SpinLike, Sequence[SpinLike]],
    grid: QuadratureGrid,
    convention: PhaseConvention = PhaseConvention.BLOCH,
) -> DensityMatrix:
    """
    rho = int dOmega P(Omega) |Omega><Omega| (une ou deux parties).

    Args:
        P: Quasi-distribution
        s: Spin par partie (un seul spin est répété pour deux parties)
        grid: Grille, exacte jusqu'au degré de P fois 2s par partie
        convention: Convention de phase des états cohérents

    Returns:
        DensityMatrix hermitienne ; l'écart de trace signale une grille insuffisante
    """
    spins = _spins_per_party(P, s)
    states_a = coherent_state_matrix(spins[0], grid.thetas, grid.phis, convention)
    values = smooth_values(P, grid)

    if P.parties == 1:
        weighted = grid.weights * values
        entries = (states_a.T * weighted) @ states_a.conj()
        rho = DensityMatrix((spins[0].dim,), entries)
    else:
        d_a, d_b = spins[0].dim, spins[1].dim
        states_b = coherent_state_matrix(spins[1], grid.thetas, grid.phis, convention)
        pair_weights = grid.weights[:, None] * values * grid.weights[None, :]
        partial = np.einsum("ij,ia,ic->jac", pair_weights, states_a, states_a.conj())
        blocks = np.einsum("jac,jb,jd->abcd", partial, states_b, states_b.conj())
        if P.delta_weight:
            anti_t, anti_p = antipode_arrays(grid.thetas, grid.phis)
            states_anti = coherent_state_matrix(spins[1], anti_t, anti_p, convention)
            blocks = blocks + P.delta_weight * np.einsum(
                "i,ia,ic,ib,id->abcd",
                grid.weights, states_a, states_a.conj(), states_anti, states_anti.conj(),
            )
        entries = blocks.reshape(d_a * d_b, d_a * d_b)
        rho = DensityMatrix((d_a, d_b), entries)

    trace_defect = abs(rho.trace() - 1.0)
    if trace_defect > NUMERICS["trace_tolerance"] * 100:
        logger.warning(
            "Reconstruction de %s : trace écartée de 1 de %.3e (grille %s insuffisante ?)",
            P.name, trace_defect, grid.shape(),
        )
    return rho


def negativity_scan(P: QuasiDistribution, grid: QuadratureGrid) -> NegativityScan:
    """
    Minimum de la partie régulière sur les noeuds de la grille et les deux pôles.

    Les pôles sont ajoutés car les extrema des densités de degré 1 y sont
    atteints et la grille de Gauss ne les contient pas. Le poids du terme
    delta (exclu du balayage) est rendu à part.
    """
    thetas = np.concatenate([grid.thetas, [0.0, math.pi]])
    phis = np.concatenate([grid.phis, [0.0, 0.0]])

    if P.parties == 1:
        values = np.asarray(P.smooth(thetas, phis), dtype=float)
        values = np.broadcast_to(values, thetas.shape)
        index = int(np.argmin(values))
        return NegativityScan(
            float(values[index]), Direction(thetas[index], phis[index]), 0.0
        )

    values = P.smooth(thetas[:, None], phis[:, None], thetas[None, :], phis[None, :])
    values = np.broadcast_to(np.asarray(values, dtype=float), (thetas.size, thetas.size))
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    argmin = (Direction(thetas[i], phis[i]), Direction(thetas[j], phis[j]))
    return NegativityScan(float(values[i, j]), argmin, float(P.delta_weight))


# ----------------------------------------------------------------------------
# Fabriques de distributions
# ----------------------------------------------------------------------------

def _unit_components(thetas, phis):
    sin_t = np.sin(thetas)
    return sin_t * np.cos(phis), sin_t * np.sin(phis), np.cos(thetas)


def linear_distribution(coefficients, name: str, description: str = "") -> QuasiDistribution:
    """P(Omega) = (1 + c . n)/4pi ; positive partout si et seulement si |c| <= 1"""
    c = np.asarray(coefficients, dtype=float)

    def smooth(thetas, phis):
        x, y, z = _unit_components(thetas, phis)
        return (1.0 + c[0] * x + c[1] * y + c[2] * z) / FOUR_PI

    degree = 0 if not np.any(c) else 1
    return QuasiDistribution(name, 1, smooth, degree=degree, description=description)


def _singlet_smooth(coupling: float):
    def smooth(theta_a, phi_a, theta_b, phi_b):
        dot = (
            np.cos(theta_a) * np.cos(theta_b)
            + np.sin(theta_a) * np.sin(theta_b) * np.cos(phi_a - phi_b)
        )
        return (1.0 + coupling * dot) / FOUR_PI ** 2
    return smooth


def _constant_pair(value: float):
    def smooth(theta_a, phi_a, theta_b, phi_b):
        shape = np.broadcast(theta_a, phi_a, theta_b, phi_b).shape
        return np.full(shape, value)
    return smooth


def von_mises_fisher(center: Direction, kappa: float, name: str = "vmf") -> QuasiDistribution:
    """
    Densité classique concentrée autour de center (positive, normée).

    f = kappa exp(kappa (n.c - 1)) / (2pi (1 - exp(-2 kappa)))
    """
    if kappa <= 0.0:
        raise DomainError(f"kappa doit être > 0, reçu {kappa}")
    norm = kappa / (2.0 * math.pi * (-math.expm1(-2.0 * kappa)))
    cx, cy, cz = center.unit_vector()

    def smooth(thetas, phis):
        x, y, z = _unit_components(thetas, phis)
        return norm * np.exp(kappa * (cx * x + cy * y + cz * z - 1.0))

    return QuasiDistribution(name, 1, smooth, degree=None,
                             description=f"von Mises-Fisher kappa={kappa}")


def product_distribution(
    first: QuasiDistribution, second: QuasiDistribution, name: str = "product"
) -> QuasiDistribution:
    """P(Omega_a; Omega_b) = f(Omega_a) g(Omega_b)"""
    if first.parties != 1 or second.parties != 1:
        raise DomainError("Le produit attend deux distributions à une partie")

    def smooth(theta_a, phi_a, theta_b, phi_b):
        return first.smooth(theta_a, phi_a) * second.smooth(theta_b, phi_b)

    degree = None
    if first.degree is not None and second.degree is not None:
        degree = max(first.degree, second.degree)
    return QuasiDistribution(name, 2, smooth, degree=degree,
                             description=f"{first.name} x {second.name}")


def classical_anticorrelated() -> QuasiDistribution:
    """Directions cachées opposées, distribution positive : delta antipodal seul"""
    return QuasiDistribution(
        "classical_anticorrelated", 2, _constant_pair(0.0),
        delta_weight=1.0 / FOUR_PI, degree=0,
        description="delta(Omega_a + Omega_b)/4pi",
    )


def _builtin() -> Dict[str, QuasiDistribution]:
    return {
        "uniform_half": linear_distribution(
            (0.0, 0.0, 0.0), "uniform_half", "1/4pi, mélange incohérent"),
        "p_plus": linear_distribution(
            (0.0, 0.0, -3.0), "p_plus", "(1 - 3 cos theta)/4pi, état |+>"),
        "p_minus": linear_distribution(
            (0.0, 0.0, 3.0), "p_minus", "(1 + 3 cos theta)/4pi, état |->"),
        "singlet_smooth": QuasiDistribution(
            "singlet_smooth", 2, _singlet_smooth(9.0),
            description="(1 + 9 n_a.n_b)/(4pi)^2, signe imprimé"),
        "singlet_smooth_flipped": QuasiDistribution(
            "singlet_smooth_flipped", 2, _singlet_smooth(-9.0),
            description="(1 - 9 n_a.n_b)/(4pi)^2, signe inversé"),
        "singlet_delta": QuasiDistribution(
            "singlet_delta", 2, _constant_pair(-2.0 / FOUR_PI ** 2),
            delta_weight=3.0 / FOUR_PI, degree=0,
            description="3/4pi delta(Omega_a + Omega_b) - 2/(4pi)^2"),
    }


BUILTIN_DISTRIBUTIONS: Dict[str, QuasiDistribution] = _builtin()


def get_distribution(identifier: str) -> QuasiDistribution:
    """Distribution intégrée par identifiant CLI (p-plus, pro2, ...) ou nom interne"""
    name = DISTRIBUTION_IDS.get(identifier, identifier)
    try:
        return BUILTIN_DISTRIBUTIONS[name]
    except KeyError:
        known = ", ".join(DISTRIBUTION_IDS)
        raise DomainError(f"Distribution inconnue '{identifier}' (connues : {known})") from None
