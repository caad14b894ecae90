"""
Contrôleur de l'intégrale de chemin discrétisée (Controller dans MVC)

Tout le module utilise la convention de phase ROTATION : c'est la seule
dans laquelle le noyau exp(-is sum dphi cos theta) et le développement
s sum dphi (1 - cos theta) de la phase exacte sont valables.
Un chemin est la suite Omega_1 (départ) ... Omega_N (arrivée) ; les
différences de phi sont prises dans la branche principale (-pi, pi].
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import NUMERICS
from models.sphere import (
    FOUR_PI,
    TWO_PI,
    Direction,
    QuadratureGrid,
    wrap_principal,
)
from models.spin_states import (
    PhaseConvention,
    SpinLike,
    SpinQuantumNumber,
    as_spin,
    coherent_overlap,
    coherent_state_matrix,
    overlap_base,
)
from utils.exceptions import DomainError
from utils.logging_utils import get_logger


logger = get_logger(__name__)

PATH_CONVENTION = PhaseConvention.ROTATION


@dataclass(frozen=True)
class PathSpec:
    """Chemin discret Omega_1 ... Omega_N sur la sphère de Bloch (N >= 2)"""

    s: SpinQuantumNumber
    points: Tuple[Direction, ...] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "s", as_spin(self.s))
        points = tuple(self.points)
        if len(points) < 2:
            raise DomainError(f"Un chemin exige au moins 2 points, reçu {len(points)}")
        object.__setattr__(self, "points", points)

    @property
    def n_steps(self) -> int:
        return len(self.points) - 1

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        thetas = np.array([p.theta for p in self.points])
        phis = np.array([p.phi for p in self.points])
        return thetas, phis


@dataclass(frozen=True)
class CompositionReport:
    exact_amplitude: complex
    composed_amplitude: complex
    insertions: int
    grid: Tuple[int, int]
    abs_error: float


def compose_amplitude(s: SpinLike, start: Direction, end: Direction, K: int,
                      grid: QuadratureGrid) -> CompositionReport:
    """
    Compose <end|start> par K insertions de l'unité sur la grille.

    Chaque insertion porte le facteur (2s+1)/4pi. L'intégrale emboîtée est
    évaluée noeud par noeud (matrice de transfert entre noeuds). Une grille
    insuffisante se lit dans abs_error, sans exception.
    """
    spin = as_spin(s)
    if isinstance(K, bool) or not isinstance(K, (int, np.integer)) or K < 0:
        raise DomainError(f"Nombre d'insertions invalide: {K!r}")

    exact = coherent_overlap(spin, end, start, PATH_CONVENTION)
    if K == 0:
        composed = exact
    else:
        states = coherent_state_matrix(spin, grid.thetas, grid.phis, PATH_CONVENTION)
        start_vec = coherent_state_matrix(spin, start.theta, start.phi, PATH_CONVENTION)[0]
        end_vec = coherent_state_matrix(spin, end.theta, end.phi, PATH_CONVENTION)[0]
        measure = (spin.dim / FOUR_PI) * grid.weights

        # transfer[j, i] = <Omega_j|Omega_i>
        transfer = states.conj() @ states.T
        chain = measure * (states.conj() @ start_vec)
        for _ in range(K - 1):
            chain = measure * (transfer @ chain)
        composed = complex(np.vdot(end_vec, states.T @ chain))

    error = abs(exact - composed)
    if not grid.is_exact_for(spin.twice_s):
        logger.debug("Composition sur grille %s non exacte pour 2s = %s : erreur %.3e",
                     grid.shape(), spin.twice_s, error)
    return CompositionReport(complex(exact), complex(composed), int(K), grid.shape(), float(error))


def _steps(path: PathSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bases des recouvrements <Omega_i|Omega_{i-1}>, dphi principaux et cos theta_{i-1}"""
    thetas, phis = path.arrays()
    base = overlap_base(thetas[1:], phis[1:], thetas[:-1], phis[:-1], PATH_CONVENTION)
    if np.any(np.abs(base) < NUMERICS["antipodal_guard"]):
        index = int(np.argmin(np.abs(base)))
        raise DomainError(
            f"Points consécutifs antipodaux (pas {index + 1}) : recouvrement nul, "
            "ajouter des points intermédiaires"
        )
    d_phi = wrap_principal(np.diff(phis))
    return base, np.atleast_1d(d_phi), np.cos(thetas[:-1])


def discrete_action(path: PathSpec) -> float:
    """s sum_i (phi_i - phi_{i-1}) cos theta_{i-1}, signe du noyau discret"""
    _, d_phi, cos_prev = _steps(path)
    return float(path.s.s * np.sum(d_phi * cos_prev))


def exact_phase(path: PathSpec) -> float:
    """Argument cumulé (déroulé pas à pas) de prod_i <Omega_i|Omega_{i-1}>"""
    base, _, _ = _steps(path)
    return float(path.s.twice_s * np.sum(np.angle(base)))


def azimuth_advance(path: PathSpec) -> float:
    """phi_N - phi_1 déroulé (somme des pas principaux)"""
    _, d_phi, _ = _steps(path)
    return float(np.sum(d_phi))


def phase_convention_gap(path: PathSpec) -> float:
    """
    exact_phase - (-discrete_action) - s (phi_N - phi_1).

    Le terme de bord utilise l'avance azimutale déroulée : une boucle
    fermée n'a donc aucune ambiguïté de bord.
    """
    return exact_phase(path) + discrete_action(path) - path.s.s * azimuth_advance(path)


def canonical_coordinates(path: PathSpec) -> List[Tuple[float, float]]:
    """(q, p) = (phi, cos theta) point par point"""
    return [(p.phi, math.cos(p.theta)) for p in path.points]


def path_amplitude(path: PathSpec) -> complex:
    """prod_i <Omega_i|Omega_{i-1}> en logarithmes (phase déroulée)"""
    base, _, _ = _steps(path)
    log_amp = path.s.twice_s * (np.sum(np.log(np.abs(base))) + 1j * np.sum(np.angle(base)))
    return complex(np.exp(log_amp))


# ----------------------------------------------------------------------------
# Chemins types et balayages
# ----------------------------------------------------------------------------

def interpolate_path(start: Direction, end: Direction, n_points: int) -> List[Direction]:
    """Interpolation linéaire en theta et phi (pas azimutal principal)"""
    if n_points < 2:
        raise DomainError(f"n_points doit être >= 2, reçu {n_points}")
    fractions = np.linspace(0.0, 1.0, n_points)
    d_phi = wrap_principal(end.phi - start.phi)
    return [
        Direction(start.theta + f * (end.theta - start.theta), start.phi + f * d_phi)
        for f in fractions
    ]


def latitude_loop(theta: float, n_steps: int, phi0: float = 0.0,
                  sweep: float = TWO_PI) -> List[Direction]:
    """Parallèle de colatitude theta parcouru de phi0 sur sweep radians en n_steps pas"""
    if n_steps < 1:
        raise DomainError(f"n_steps doit être >= 1, reçu {n_steps}")
    if abs(sweep) / n_steps > math.pi:
        raise DomainError("Pas azimutal > pi : hors de la branche principale")
    return [Direction(theta, phi0 + sweep * k / n_steps) for k in range(n_steps + 1)]


def loop_amplitude(s: SpinLike, theta: float, n_steps: int) -> complex:
    """Amplitude brute de la boucle fermée de colatitude theta"""
    return path_amplitude(PathSpec(as_spin(s), latitude_loop(theta, n_steps)))


def loop_solid_angle(theta: float) -> float:
    """Angle solide de la calotte entourée par le parallèle (côté theta = 0)"""
    return TWO_PI * (1.0 - math.cos(theta))


def refinement_sweep(s: SpinLike, make_points: Callable[[int], Sequence[Direction]],
                     step_counts: Sequence[int]) -> List[Dict]:
    """
    Lignes {N, action, exact_phase, gap} pour des chemins de plus en plus fins.

    Args:
        s: Spin
        make_points: N -> points du chemin à N pas
        step_counts: Valeurs de N
    """
    spin = as_spin(s)
    rows = []
    for n in step_counts:
        path = PathSpec(spin, make_points(int(n)))
        rows.append({
            "N": int(n),
            "action": discrete_action(path),
            "exact_phase": exact_phase(path),
            "gap": phase_convention_gap(path),
        })
    return rows


def slope_fit(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pente des moindres carrés de log|y| en fonction de log x"""
    xs = np.asarray(xs, dtype=float)
    ys = np.abs(np.asarray(ys, dtype=float))
    if xs.size < 2 or np.any(xs <= 0.0) or np.any(ys == 0.0):
        raise DomainError("Ajustement log-log impossible (valeurs nulles ou moins de 2 points)")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


class PathIntegralController:
    """Expériences d'intégrale de chemin pour un spin donné"""

    def __init__(self, s: SpinLike):
        self.spin = as_spin(s)

    def valider_grille(self, grid: QuadratureGrid) -> Tuple[bool, str]:
        if grid.is_exact_for(self.spin.twice_s):
            return True, "Grille exacte"
        return False, (
            f"Grille {grid.shape()} non exacte pour 2s = {self.spin.twice_s} "
            f"(au moins {self.spin.twice_s + 1} noeuds par direction)"
        )

    def composer(self, start: Direction, end: Direction, K: int,
                 grid: QuadratureGrid) -> CompositionReport:
        ok, message = self.valider_grille(grid)
        if not ok:
            logger.warning(message)
        report = compose_amplitude(self.spin, start, end, K, grid)
        logger.info("Composition K = %d : erreur %.3e", K, report.abs_error)
        return report

    def boucle(self, theta: float, step_counts: Sequence[int]) -> List[Dict]:
        """Amplitudes de la boucle de colatitude theta et écart à la phase géométrique"""
        target = self.spin.s * loop_solid_angle(theta)
        rows = []
        for n in step_counts:
            path = PathSpec(self.spin, latitude_loop(theta, int(n)))
            amplitude = path_amplitude(path)
            phase = exact_phase(path)
            rows.append({
                "N": int(n),
                "amplitude_re": amplitude.real,
                "amplitude_im": amplitude.imag,
                "magnitude": abs(amplitude),
                "phase": phase,
                "geometric_phase": target,
                "phase_error": abs(wrap_principal(phase - target)),
                "gap": phase_convention_gap(path),
            })
        return rows

    def balayage(self, start: Direction, end: Direction,
                 step_counts: Sequence[int]) -> Tuple[List[Dict], Optional[float]]:
        rows = refinement_sweep(self.spin, lambda n: interpolate_path(start, end, n + 1),
                                step_counts)
        slope = None
        if len(rows) >= 2 and all(row["gap"] != 0.0 for row in rows):
            slope = slope_fit([r["N"] for r in rows], [r["gap"] for r in rows])
        return rows, slope
