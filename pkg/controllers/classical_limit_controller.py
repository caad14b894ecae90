"""
Contrôleur de la limite classique s -> infini (Controller dans MVC)

- Concentration de la transmission cos^(4s)(alpha/2) autour de alpha = 0
- Dynamique classique sur la sphère avec le crochet de Poisson courbe
  {A, B} = (1/(s sin theta)) (dA/dphi dB/dtheta - dA/dtheta dB/dphi), hbar = 1

Les hamiltoniens de test sont proportionnels à s (H = omega0 s ...), ce qui
rend les trajectoires indépendantes de s.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import HAMILTONIANS, NUMERICS
from models.sphere import Direction
from models.spin_states import SpinLike, SpinQuantumNumber, as_spin
from utils.exceptions import DomainError, NumericalError
from utils.logging_utils import get_logger


logger = get_logger(__name__)

ScalarField = Callable[[float, float], float]
Gradient = Callable[[float, float], Tuple[float, float]]


@dataclass(frozen=True)
class ClassicalHamiltonian:
    """
    Hamiltonien classique h(theta, phi).

    grad renvoie (dh/dtheta, dh/dphi) ; s'il est absent, différences
    finies centrées de pas NUMERICS["finite_difference_step"].
    """

    name: str
    h: ScalarField
    grad: Optional[Gradient] = None

    @property
    def uses_finite_differences(self) -> bool:
        return self.grad is None

    def gradient(self, theta: float, phi: float) -> Tuple[float, float]:
        if self.grad is not None:
            d_theta, d_phi = self.grad(theta, phi)
            return float(d_theta), float(d_phi)
        return _central_gradient(self.h, theta, phi)


@dataclass(frozen=True)
class Trajectory:
    """Échantillons (t, theta, phi, energy) ; phi n'est pas replié dans [0, 2pi)"""

    s: SpinQuantumNumber
    step: float
    times: np.ndarray = field(repr=False)
    thetas: np.ndarray = field(repr=False)
    phis: np.ndarray = field(repr=False)
    energies: np.ndarray = field(repr=False)
    hamiltonian: str = ""
    finite_differences: bool = False

    def __post_init__(self):
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0.0):
            raise NumericalError("Temps non strictement croissants dans la trajectoire")

    @property
    def samples(self) -> List[Tuple[float, float, float, float]]:
        return list(zip(self.times.tolist(), self.thetas.tolist(),
                        self.phis.tolist(), self.energies.tolist()))

    def rows(self) -> List[Dict]:
        return [{"t": t, "theta": th, "phi": ph, "energy": e} for t, th, ph, e in self.samples]


def _central_gradient(f: ScalarField, theta: float, phi: float) -> Tuple[float, float]:
    h = NUMERICS["finite_difference_step"]
    d_theta = (f(theta + h, phi) - f(theta - h, phi)) / (2.0 * h)
    d_phi = (f(theta, phi + h) - f(theta, phi - h)) / (2.0 * h)
    return d_theta, d_phi


# ----------------------------------------------------------------------------
# Hamiltoniens nommés
# ----------------------------------------------------------------------------

def precession_hamiltonian(s: SpinLike, omega0: float = HAMILTONIANS["default_omega0"]) -> ClassicalHamiltonian:
    """H = omega0 s cos theta"""
    scale = omega0 * as_spin(s).s
    return ClassicalHamiltonian(
        "precession",
        lambda theta, phi: scale * math.cos(theta),
        lambda theta, phi: (-scale * math.sin(theta), 0.0),
    )


def transverse_hamiltonian(s: SpinLike, omega0: float = HAMILTONIANS["default_omega0"]) -> ClassicalHamiltonian:
    """H = omega0 s sin theta cos phi (champ transverse selon x)"""
    scale = omega0 * as_spin(s).s
    return ClassicalHamiltonian(
        "transverse",
        lambda theta, phi: scale * math.sin(theta) * math.cos(phi),
        lambda theta, phi: (scale * math.cos(theta) * math.cos(phi),
                            -scale * math.sin(theta) * math.sin(phi)),
    )


def zero_hamiltonian() -> ClassicalHamiltonian:
    return ClassicalHamiltonian("zero", lambda theta, phi: 0.0, lambda theta, phi: (0.0, 0.0))


def named_hamiltonian(name: str, s: SpinLike,
                      omega0: float = HAMILTONIANS["default_omega0"]) -> ClassicalHamiltonian:
    if name == "precession":
        return precession_hamiltonian(s, omega0)
    if name == "transverse":
        return transverse_hamiltonian(s, omega0)
    if name == "zero":
        return zero_hamiltonian()
    raise DomainError(f"Hamiltonien inconnu '{name}' (connus : {', '.join(HAMILTONIANS['names'])})")


# ----------------------------------------------------------------------------
# Crochet de Poisson et équations du mouvement
# ----------------------------------------------------------------------------

def _check_pole(theta: float) -> float:
    sin_t = math.sin(theta)
    if sin_t < NUMERICS["pole_guard"]:
        raise DomainError(
            f"theta = {theta} trop proche d'un pôle pour le crochet en (theta, phi) : "
            "utiliser les coordonnées canoniques (phi, cos theta)"
        )
    return sin_t


def poisson_bracket(A: ScalarField, B: ScalarField, at: Direction, s: SpinLike) -> float:
    """
    {A, B} au point at, dérivées par différences finies centrées.

    Exemple : {phi, cos theta} = -1/s.
    """
    spin = as_spin(s)
    sin_t = _check_pole(at.theta)
    dA_theta, dA_phi = _central_gradient(A, at.theta, at.phi)
    dB_theta, dB_phi = _central_gradient(B, at.theta, at.phi)
    return (dA_phi * dB_theta - dA_theta * dB_phi) / (spin.s * sin_t)


def _angular_rates(H: ClassicalHamiltonian, s: float, theta: float, phi: float) -> np.ndarray:
    """(dtheta/dt, dphi/dt) = ({theta, H}, {phi, H})"""
    sin_t = _check_pole(theta)
    d_theta, d_phi = H.gradient(theta, phi)
    return np.array([-d_phi / (s * sin_t), d_theta / (s * sin_t)])


def _canonical_rates(H: ClassicalHamiltonian, s: float, q: float, p: float) -> np.ndarray:
    """
    (dq/dt, dp/dt) avec q = phi, p = cos theta.

    dq/dt = -(1/s) dH/dp, dp/dt = (1/s) dH/dq, où dH/dp = -(dH/dtheta)/sin theta.
    """
    p_clipped = min(1.0, max(-1.0, p))
    theta = math.acos(p_clipped)
    d_theta, d_phi = H.gradient(theta, q)
    sin_t = math.sqrt(max(0.0, 1.0 - p_clipped * p_clipped))
    if d_theta == 0.0:
        dH_dp = 0.0
    else:
        if sin_t < NUMERICS["pole_guard"]:
            raise NumericalError(f"Gradient singulier au pôle (p = {p})")
        dH_dp = -d_theta / sin_t
    return np.array([-dH_dp / s, d_phi / s])


def _rk4_step(rates: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = rates(y)
    k2 = rates(y + 0.5 * h * k1)
    k3 = rates(y + 0.5 * h * k2)
    k4 = rates(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_motion(H: ClassicalHamiltonian, initial: Direction, s: SpinLike,
                     t_end: float, step: float,
                     coordinates: str = "canonical") -> Trajectory:
    """
    Intègre les équations canoniques par Runge-Kutta d'ordre 4 à pas fixe.

    Args:
        H: Hamiltonien classique
        initial: Direction initiale
        s: Spin (facteur 1/s du crochet)
        t_end: Durée totale (> 0)
        step: Pas demandé ; le pas effectif divise exactement t_end
        coordinates: "canonical" (q, p) = (phi, cos theta) ou "angular" (theta, phi)

    Returns:
        Trajectory avec l'énergie à chaque échantillon
    """
    spin = as_spin(s)
    if not step > 0.0 or not t_end > 0.0:
        raise DomainError(f"Pas et durée doivent être > 0 (step={step}, t_end={t_end})")
    if coordinates not in ("canonical", "angular"):
        raise DomainError(f"Coordonnées inconnues: {coordinates}")

    n_steps = max(1, int(round(t_end / step)))
    h = t_end / n_steps
    if H.uses_finite_differences:
        logger.warning("Hamiltonien %s sans gradient analytique : différences finies", H.name)

    if coordinates == "canonical":
        y = np.array([initial.phi, math.cos(initial.theta)])
        rates = lambda v: _canonical_rates(H, spin.s, v[0], v[1])
    else:
        y = np.array([initial.theta, initial.phi])
        rates = lambda v: _angular_rates(H, spin.s, v[0], v[1])

    bound = 1.0 + NUMERICS["canonical_bound_slack"]
    thetas = np.empty(n_steps + 1)
    phis = np.empty(n_steps + 1)
    energies = np.empty(n_steps + 1)
    for i in range(n_steps + 1):
        if i > 0:
            y = _rk4_step(rates, y, h)
        if coordinates == "canonical":
            if abs(y[1]) > bound or not np.all(np.isfinite(y)):
                raise NumericalError(
                    f"Trajectoire hors du domaine canonique |p| <= 1 au pas {i} "
                    f"(t = {i * h:.6g}, p = {y[1]!r})"
                )
            theta, phi = math.acos(min(1.0, max(-1.0, y[1]))), y[0]
        else:
            if not np.all(np.isfinite(y)):
                raise NumericalError(f"Trajectoire non finie au pas {i}")
            theta, phi = y[0], y[1]
        thetas[i], phis[i] = theta, phi
        energies[i] = H.h(theta, phi)

    times = h * np.arange(n_steps + 1)
    return Trajectory(spin, h, times, thetas, phis, energies, H.name, H.uses_finite_differences)


def energy_drift(trajectory: Trajectory) -> float:
    """max |H(t) - H(0)| / max(1, |H(0)|)"""
    e0 = trajectory.energies[0]
    return float(np.max(np.abs(trajectory.energies - e0)) / max(1.0, abs(e0)))


def sweep_initial_conditions(H: ClassicalHamiltonian, initials: Sequence[Direction],
                             s: SpinLike, t_end: float, step: float) -> List[Trajectory]:
    return [integrate_motion(H, initial, s, t_end, step) for initial in initials]


# ----------------------------------------------------------------------------
# Concentration de la transmission
# ----------------------------------------------------------------------------

def transmission_width(s: SpinLike, level: float) -> float:
    """alpha tel que cos^(4s)(alpha/2) = level, soit 2 arccos(level^(1/4s))"""
    spin = as_spin(s)
    if not 0.0 < level < 1.0:
        raise DomainError(f"level doit être dans (0, 1), reçu {level}")
    return 2.0 * math.acos(level ** (1.0 / (2.0 * spin.twice_s)))


def concentration_profile(s: SpinLike, alphas: Sequence[float]) -> np.ndarray:
    """cos^(4s)(alpha/2) tabulé"""
    spin = as_spin(s)
    return np.cos(0.5 * np.asarray(alphas, dtype=float)) ** (2 * spin.twice_s)


def gaussian_profile(s: SpinLike, alphas: Sequence[float]) -> np.ndarray:
    """Approximation exp(-s alpha^2 / 2) de cos^(4s)(alpha/2) aux petits angles"""
    spin = as_spin(s)
    alphas = np.asarray(alphas, dtype=float)
    return np.exp(-0.5 * spin.s * alphas ** 2)


def width_sweep(twice_s_values: Sequence[int], level: float) -> List[Dict]:
    """Lignes {s, width, level}"""
    return [
        {"s": as_spin(n).s, "width": transmission_width(n, level), "level": level}
        for n in twice_s_values
    ]


class ClassicalLimitController:
    """Dynamique classique et concentration pour un spin donné"""

    def __init__(self, s: SpinLike, omega0: float = HAMILTONIANS["default_omega0"]):
        self.spin = as_spin(s)
        self.omega0 = omega0

    def trajectoire(self, hamiltonian: str, initial: Direction,
                    t_end: float, step: float) -> Tuple[Trajectory, float]:
        H = named_hamiltonian(hamiltonian, self.spin, self.omega0)
        trajectory = integrate_motion(H, initial, self.spin, t_end, step)
        drift = energy_drift(trajectory)
        logger.info("Trajectoire %s : %d pas, dérive d'énergie %.3e",
                    H.name, trajectory.times.size - 1, drift)
        return trajectory, drift

    def profil(self, alphas: Sequence[float]) -> List[Dict]:
        values = concentration_profile(self.spin, alphas)
        gaussian = gaussian_profile(self.spin, alphas)
        return [
            {"alpha": float(a), "value": float(v), "gaussian": float(g)}
            for a, v, g in zip(alphas, values, gaussian)
        ]
