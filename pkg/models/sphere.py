"""
Géométrie de la sphère de Bloch et quadratures produit (Model)

Convention : tous les angles en radians, theta dans [0, pi], phi dans [0, 2pi).
La grille est le produit Gauss-Legendre en u = cos(theta) x uniforme en phi.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from config import NUMERICS
from utils.exceptions import DomainError, NumericalError
from utils.logging_utils import get_logger


logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
_POLE_SLACK = 1e-12

Scalar = Union[float, complex]


def _sin_polar(theta):
    """sin(theta) nul exactement aux pôles (invariance en phi)"""
    values = np.sin(theta)
    return np.where((theta == 0.0) | (theta == math.pi), 0.0, values)


def wrap_principal(angle):
    """Ramène un angle (ou un tableau) dans la branche principale (-pi, pi]"""
    wrapped = np.mod(np.asarray(angle, dtype=float) + math.pi, TWO_PI) - math.pi
    wrapped = np.where(wrapped == -math.pi, math.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class Direction:
    """Point (theta, phi) de la sphère unité"""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        phi = float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise DomainError(f"Direction non finie: ({theta}, {phi})")
        # arrondis de l'ordre de l'epsilon machine tolérés aux pôles
        if -_POLE_SLACK <= theta < 0.0:
            theta = 0.0
        elif math.pi < theta <= math.pi + _POLE_SLACK:
            theta = math.pi
        if theta < 0.0 or theta > math.pi:
            raise DomainError(f"theta hors de [0, pi]: {theta}")
        phi = math.fmod(phi, TWO_PI)
        if phi < 0.0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @property
    def is_pole(self) -> bool:
        return self.theta == 0.0 or self.theta == math.pi

    def unit_vector(self) -> np.ndarray:
        """Vecteur unité cartésien (x, y, z)"""
        sin_t = 0.0 if self.is_pole else math.sin(self.theta)
        return np.array([
            sin_t * math.cos(self.phi),
            sin_t * math.sin(self.phi),
            math.cos(self.theta),
        ])

    @classmethod
    def from_vector(cls, vector) -> "Direction":
        v = np.asarray(vector, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0 or not math.isfinite(norm):
            raise DomainError("Vecteur nul ou non fini: aucune direction associée")
        z = max(-1.0, min(1.0, v[2] / norm))
        return cls(math.acos(z), math.atan2(v[1], v[0]))

    def as_tuple(self) -> Tuple[float, float]:
        return (self.theta, self.phi)


def relative_angle(a: Direction, b: Direction) -> float:
    """
    Angle relatif entre deux directions.

    alpha = atan2(|n_a x n_b|, n_a . n_b), égal à arccos de cos(alpha)
    = cos t cos t' + sin t sin t' cos(p - p') borné dans [-1, 1] ; exact près de
    0 et pi, là où arccos perd la moitié des chiffres significatifs.

    Returns:
        alpha dans [0, pi], symétrique en (a, b)
    """
    n_a, n_b = a.unit_vector(), b.unit_vector()
    return float(math.atan2(np.linalg.norm(np.cross(n_a, n_b)), float(np.dot(n_a, n_b))))


def cos_relative_angle(a: Direction, thetas, phis) -> np.ndarray:
    """cos(alpha) entre a et un tableau de directions (theta, phi), borné dans [-1, 1]"""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    sin_a = 0.0 if a.is_pole else math.sin(a.theta)
    cos_alpha = (
        math.cos(a.theta) * np.cos(thetas)
        + sin_a * _sin_polar(thetas) * np.cos(a.phi - phis)
    )
    return np.clip(cos_alpha, -1.0, 1.0)


def antipode(a: Direction) -> Direction:
    """Point diamétralement opposé : (pi - theta, phi + pi)"""
    return Direction(math.pi - a.theta, a.phi + math.pi)


def antipode_arrays(thetas, phis) -> Tuple[np.ndarray, np.ndarray]:
    """Version tableau de antipode(), phi ramené dans [0, 2pi)"""
    return math.pi - np.asarray(thetas), np.mod(np.asarray(phis) + math.pi, TWO_PI)


@dataclass(frozen=True)
class QuadratureGrid:
    """
    Grille produit sur la sphère.

    Les noeuds sont ordonnés theta d'abord (u = cos theta croissant),
    puis phi croissant ; cet ordre fixe la réduction des sommes.
    """

    n_theta: int
    n_phi: int
    thetas: np.ndarray = field(repr=False)
    phis: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def nodes(self) -> List[Tuple[Direction, float]]:
        return [
            (Direction(t, p), float(w))
            for t, p, w in zip(self.thetas, self.phis, self.weights)
        ]

    @property
    def polynomial_degree(self) -> int:
        """Degré maximal en cos(theta) intégré exactement"""
        return 2 * self.n_theta - 1

    @property
    def fourier_order(self) -> int:
        """Ordre de Fourier en phi garanti pour les produits d'intégrandes"""
        return (self.n_phi - 1) // 2

    def shape(self) -> Tuple[int, int]:
        return (self.n_theta, self.n_phi)

    def is_exact_for(self, twice_s: int) -> bool:
        """Vrai si n_theta, n_phi >= 2s + 1 (règle d'exactitude des intégrandes SCS)"""
        return self.n_theta >= twice_s + 1 and self.n_phi >= twice_s + 1


def _validate_count(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise DomainError(f"{name} doit être un entier, reçu {value!r}")
    if value < 1:
        raise DomainError(f"{name} doit être >= 1, reçu {value}")
    return int(value)


def build_grid(n_theta: int, n_phi: int) -> QuadratureGrid:
    """
    Construit la grille Gauss-Legendre (u = cos theta) x uniforme (phi).

    Args:
        n_theta: Nombre de noeuds polaires (>= 1)
        n_phi: Nombre de noeuds azimutaux (>= 1), poids 2pi/n_phi chacun

    Returns:
        QuadratureGrid de poids total 4pi
    """
    n_theta = _validate_count("n_theta", n_theta)
    n_phi = _validate_count("n_phi", n_phi)

    u_nodes, u_weights = np.polynomial.legendre.leggauss(n_theta)
    phi_nodes = TWO_PI * np.arange(n_phi) / n_phi

    thetas = np.repeat(np.arccos(u_nodes), n_phi)
    phis = np.tile(phi_nodes, n_theta)
    weights = np.repeat(u_weights, n_phi) * (TWO_PI / n_phi)

    total = float(np.sum(weights))
    if abs(total - FOUR_PI) > NUMERICS["weight_sum_tolerance"] * FOUR_PI:
        raise NumericalError(f"Somme des poids {total} différente de 4pi")

    for array in (thetas, phis, weights):
        array.setflags(write=False)
    logger.debug("Grille %dx%d construite (%d noeuds)", n_theta, n_phi, weights.size)
    return QuadratureGrid(n_theta, n_phi, thetas, phis, weights)


def refine(grid: QuadratureGrid, factor: int = 2) -> QuadratureGrid:
    """Grille raffinée (nombres de noeuds multipliés par factor)"""
    return build_grid(grid.n_theta * factor, grid.n_phi * factor)


def _check_finite(values: np.ndarray, context: str) -> None:
    if not np.all(np.isfinite(values)):
        bad = int(np.count_nonzero(~np.isfinite(values)))
        raise NumericalError(f"{bad} valeur(s) non finie(s) dans l'intégrande ({context})")


def integrate_values(grid: QuadratureGrid, values) -> Scalar:
    """Somme pondérée de valeurs déjà évaluées aux noeuds (ordre des noeuds)"""
    values = np.asarray(values)
    if values.shape != grid.weights.shape:
        raise DomainError(
            f"Forme des valeurs {values.shape} incompatible avec la grille {grid.weights.shape}"
        )
    _check_finite(values, "integrate")
    total = np.sum(grid.weights * values)
    return complex(total) if np.iscomplexobj(values) else float(total)


def integrate_pairs(grid: QuadratureGrid, values) -> Scalar:
    """Double intégrale sur deux copies de la sphère, values[i, j] = f(noeud i, noeud j)"""
    values = np.asarray(values)
    if values.shape != (grid.size, grid.size):
        raise DomainError(f"Matrice de valeurs {values.shape} incompatible avec la grille")
    _check_finite(values, "integrate_pairs")
    total = grid.weights @ values @ grid.weights
    return complex(total) if np.iscomplexobj(values) else float(total)


def integrate(grid: QuadratureGrid, f: Callable[[Direction], Scalar]) -> Scalar:
    """
    Intègre f sur la sphère avec la grille donnée.

    Les valeurs non finies sont signalées par NumericalError, jamais
    propagées silencieusement.
    """
    values = np.array([f(Direction(t, p)) for t, p in zip(grid.thetas, grid.phis)])
    return integrate_values(grid, values)


def random_direction(rng: Optional[np.random.Generator] = None) -> Direction:
    """Direction uniforme sur la sphère (u = cos theta uniforme)"""
    rng = rng or np.random.default_rng()
    return Direction(math.acos(rng.uniform(-1.0, 1.0)), rng.uniform(0.0, TWO_PI))
