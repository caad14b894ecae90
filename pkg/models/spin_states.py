"""
Espace de Hilbert de spin s (Model)

- Base |s, m> ordonnée m = -s ... +s (croissant), unique pour toutes les matrices
- hbar = 1 partout
- Le spin est stocké par 2s (entier) : aucune arithmétique flottante sur s
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy import linalg

from config import NUMERICS
from models.sphere import FOUR_PI, Direction, QuadratureGrid, cos_relative_angle
from utils.exceptions import DomainError
from utils.logging_utils import get_logger


logger = get_logger(__name__)

_ROUNDING_FLOOR = 1e-14


class PhaseConvention(Enum):
    """
    Convention de phase des états cohérents.

    BLOCH : coefficients en exp(+i(s+m)phi), l'état spin-1/2 vaut
            exp(i phi) sin(theta/2)|+> + cos(theta/2)|->.
    ROTATION : exp(tau S+ - tau* S-)|s,-s> avec tau = (theta/2) exp(-i phi)
               pris à la lettre, soit des coefficients en exp(-i(s+m)phi).
    Les probabilités et les matrices densité reconstruites sont identiques
    dans les deux conventions ; seules les phases diffèrent.
    """

    BLOCH = 1
    ROTATION = -1


@dataclass(frozen=True)
class SpinQuantumNumber:
    """Nombre quantique de spin, stocké par twice_s = 2s"""

    twice_s: int

    def __post_init__(self):
        if isinstance(self.twice_s, bool) or not isinstance(self.twice_s, (int, np.integer)):
            raise DomainError(f"twice_s doit être un entier, reçu {self.twice_s!r}")
        if self.twice_s < 1:
            raise DomainError(f"twice_s doit être >= 1, reçu {self.twice_s}")
        object.__setattr__(self, "twice_s", int(self.twice_s))

    @property
    def s(self) -> float:
        return self.twice_s / 2.0

    @property
    def dim(self) -> int:
        return self.twice_s + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.s

    def __str__(self) -> str:
        return f"{self.twice_s}/2" if self.twice_s % 2 else str(self.twice_s // 2)


SPIN_HALF = SpinQuantumNumber(1)

SpinLike = Union[SpinQuantumNumber, int]


def as_spin(value: SpinLike) -> SpinQuantumNumber:
    """Accepte un SpinQuantumNumber ou directement la valeur 2s"""
    if isinstance(value, SpinQuantumNumber):
        return value
    return SpinQuantumNumber(value)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SpinState:
    """Vecteur d'état (une ou plusieurs parties, ordre des parties fixe)"""

    spins: Tuple[SpinQuantumNumber, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        spins = tuple(as_spin(s) for s in self.spins)
        amplitudes = _readonly(self.amplitudes).reshape(-1)
        expected = int(np.prod([s.dim for s in spins]))
        if amplitudes.size != expected:
            raise DomainError(f"{amplitudes.size} amplitudes pour une dimension {expected}")
        object.__setattr__(self, "spins", spins)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def s(self) -> SpinQuantumNumber:
        if len(self.spins) != 1:
            raise DomainError("État à plusieurs parties : pas de spin unique")
        return self.spins[0]

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(s.dim for s in self.spins)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Matrice densité sur le produit des dimensions dims (ordre des parties fixe)"""

    dims: Tuple[int, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        entries = _readonly(self.entries)
        size = int(np.prod(dims))
        if entries.shape != (size, size):
            raise DomainError(f"Matrice {entries.shape} incompatible avec dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", entries)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        hermitian = 0.5 * (self.entries + self.entries.conj().T)
        return linalg.eigvalsh(hermitian)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def is_physical(self) -> bool:
        """Hermitienne, de trace 1 et semi-définie positive aux tolérances de config"""
        return (
            self.hermiticity_defect() <= NUMERICS["hermiticity_tolerance"]
            and abs(self.trace() - 1.0) <= NUMERICS["trace_tolerance"]
            and self.min_eigenvalue() >= NUMERICS["eigenvalue_floor"]
        )

    def max_distance(self, other: "DensityMatrix") -> float:
        """Écart maximal entrée par entrée"""
        if self.dims != other.dims:
            raise DomainError(f"Dimensions différentes: {self.dims} / {other.dims}")
        return float(np.max(np.abs(self.entries - other.entries)))

    def expectation(self, operator: np.ndarray) -> complex:
        return complex(np.trace(self.entries @ operator))


def ladder_operators(s: SpinLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Opérateurs d'échelle S+ et S- (hbar = 1).

    <s, m+1|S+|s, m> = sqrt(s(s+1) - m(m+1)) ; S- est l'adjoint de S+.
    """
    spin = as_spin(s)
    m = spin.m_values[:-1]
    elements = np.sqrt(spin.s * (spin.s + 1.0) - m * (m + 1.0))
    s_plus = np.diag(elements, k=-1).astype(complex)
    return s_plus, s_plus.conj().T


def spin_operators(s: SpinLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Composantes cartésiennes (Sx, Sy, Sz)"""
    spin = as_spin(s)
    s_plus, s_minus = ladder_operators(spin)
    s_x = 0.5 * (s_plus + s_minus)
    s_y = -0.5j * (s_plus - s_minus)
    s_z = np.diag(spin.m_values).astype(complex)
    return s_x, s_y, s_z


def basis_state(s: SpinLike, twice_m: int) -> SpinState:
    """État |s, m> donné par 2m"""
    spin = as_spin(s)
    if abs(twice_m) > spin.twice_s or (twice_m + spin.twice_s) % 2:
        raise DomainError(f"2m = {twice_m} invalide pour s = {spin}")
    amplitudes = np.zeros(spin.dim, dtype=complex)
    amplitudes[(twice_m + spin.twice_s) // 2] = 1.0
    return SpinState((spin,), amplitudes)


def rotation_operator(
    s: SpinLike,
    omega: Direction,
    convention: PhaseConvention = PhaseConvention.BLOCH,
) -> np.ndarray:
    """exp(tau S+ - tau* S-) par exponentielle dense (scaling-and-squaring)"""
    spin = as_spin(s)
    tau = 0.5 * omega.theta * np.exp(1j * convention.value * omega.phi)
    s_plus, s_minus = ladder_operators(spin)
    generator = tau * s_plus - np.conj(tau) * s_minus
    return linalg.expm(generator)


def scs_exponential(
    s: SpinLike,
    omega: Direction,
    convention: PhaseConvention = PhaseConvention.BLOCH,
) -> SpinState:
    """
    État cohérent obtenu par rotation de |s, -s>.

    Args:
        s: Spin (ou 2s)
        omega: Direction sur la sphère de Bloch
        convention: Convention de phase (BLOCH par défaut)

    Returns:
        SpinState de norme 1
    """
    spin = as_spin(s)
    lowest = np.zeros(spin.dim, dtype=complex)
    lowest[0] = 1.0
    amplitudes = rotation_operator(spin, omega, convention) @ lowest
    return SpinState((spin,), amplitudes)


def coherent_state_matrix(
    s: SpinLike,
    thetas,
    phis,
    convention: PhaseConvention = PhaseConvention.BLOCH,
) -> np.ndarray:
    """
    Coefficients fermés des états cohérents, une ligne par direction.

    C_k = sqrt(binom(2s, k)) sin^k(theta/2) cos^(2s-k)(theta/2) exp(i sigma k phi),
    k = s + m. Calcul en logarithmes (coefficients binomiaux de grand s).
    """
    spin = as_spin(s)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    k = np.arange(spin.dim, dtype=float)
    n = float(spin.twice_s)
    ln_binom = (
        math.lgamma(n + 1.0)
        - np.array([math.lgamma(x + 1.0) for x in k])
        - np.array([math.lgamma(n - x + 1.0) for x in k])
    )

    half = 0.5 * thetas[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ln_sin = np.log(np.abs(np.sin(half)))
        ln_cos = np.log(np.abs(np.cos(half)))
        sin_part = np.where(k[None, :] == 0.0, 0.0, k[None, :] * ln_sin)
        cos_part = np.where(k[None, :] == n, 0.0, (n - k[None, :]) * ln_cos)
    magnitudes = np.exp(0.5 * ln_binom[None, :] + sin_part + cos_part)
    phases = np.exp(1j * convention.value * k[None, :] * phis[:, None])
    return magnitudes * phases


def scs_closed_form(
    s: SpinLike,
    omega: Direction,
    convention: PhaseConvention = PhaseConvention.BLOCH,
) -> SpinState:
    """État cohérent par la formule binomiale fermée (oracle de scs_exponential)"""
    spin = as_spin(s)
    row = coherent_state_matrix(spin, omega.theta, omega.phi, convention)[0]
    return SpinState((spin,), row)


def overlap(a: SpinState, b: SpinState) -> complex:
    """Produit scalaire <a|b>, antilinéaire en a"""
    if a.dims != b.dims:
        raise DomainError(f"Dimensions différentes: {a.dims} / {b.dims}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def overlap_base(
    theta_a, phi_a, theta_b, phi_b,
    convention: PhaseConvention = PhaseConvention.BLOCH,
):
    """
    Base spin-1/2 du recouvrement : <a|b> = base ** (2s).

    base = cos(ta/2) cos(tb/2) + exp(i sigma (phi_b - phi_a)) sin(ta/2) sin(tb/2)
    """
    return (
        np.cos(0.5 * np.asarray(theta_a)) * np.cos(0.5 * np.asarray(theta_b))
        + np.exp(1j * convention.value * (np.asarray(phi_b) - np.asarray(phi_a)))
        * np.sin(0.5 * np.asarray(theta_a)) * np.sin(0.5 * np.asarray(theta_b))
    )


def coherent_overlap(
    s: SpinLike,
    a: Direction,
    b: Direction,
    convention: PhaseConvention = PhaseConvention.BLOCH,
) -> complex:
    """<a|b> entre états cohérents, forme fermée"""
    spin = as_spin(s)
    base = complex(overlap_base(a.theta, a.phi, b.theta, b.phi, convention))
    return base ** spin.twice_s


def malus_transmission(s: SpinLike, detector: Direction, thetas, phis) -> np.ndarray:
    """cos^(4s)(alpha/2) = ((1 + cos alpha)/2)^(2s), version tableau"""
    spin = as_spin(s)
    half_cos_sq = 0.5 * (1.0 + cos_relative_angle(detector, thetas, phis))
    return half_cos_sq ** spin.twice_s


def malus_probability(s: SpinLike, omega: Direction, omega_prime: Direction) -> float:
    """
    Loi de Malus de spin s : cos^(4s)(alpha/2).

    Égale |<omega|omega'>|^2 pour les états cohérents.
    """
    value = malus_transmission(s, omega, np.array(omega_prime.theta), np.array(omega_prime.phi))
    return float(value)


def projector(x: SpinState) -> DensityMatrix:
    """|x><x| (état normé requis)"""
    if abs(x.norm - 1.0) > 1e-10:
        raise DomainError(f"Projecteur d'un état non normé (norme {x.norm})")
    return DensityMatrix(x.dims, np.outer(x.amplitudes, x.amplitudes.conj()))


def tensor(
    a: Union[SpinState, DensityMatrix],
    b: Union[SpinState, DensityMatrix],
) -> Union[SpinState, DensityMatrix]:
    """
    Produit tensoriel de Kronecker, ordre des parties (a, b).

    Indice composite : i_a * dim_b + i_b. Deux états donnent un état ; dès
    qu'une matrice densité intervient le résultat est une matrice densité.
    """
    if isinstance(a, SpinState) and isinstance(b, SpinState):
        return SpinState(a.spins + b.spins, np.kron(a.amplitudes, b.amplitudes))
    rho_a = projector(a) if isinstance(a, SpinState) else a
    rho_b = projector(b) if isinstance(b, SpinState) else b
    return DensityMatrix(rho_a.dims + rho_b.dims, np.kron(rho_a.entries, rho_b.entries))


def singlet_state() -> SpinState:
    """(|+>_a |->_b - |->_a |+>_b) / sqrt(2)"""
    up = basis_state(SPIN_HALF, 1)
    down = basis_state(SPIN_HALF, -1)
    amplitudes = (
        np.kron(up.amplitudes, down.amplitudes) - np.kron(down.amplitudes, up.amplitudes)
    ) / math.sqrt(2.0)
    return SpinState((SPIN_HALF, SPIN_HALF), amplitudes)


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Trace partielle d'une matrice à deux parties ; keep = 0 (a) ou 1 (b)"""
    if len(rho.dims) != 2:
        raise DomainError("Trace partielle définie pour deux parties uniquement")
    d_a, d_b = rho.dims
    blocks = rho.entries.reshape(d_a, d_b, d_a, d_b)
    if keep == 0:
        return DensityMatrix((d_a,), np.einsum("ijkj->ik", blocks))
    if keep == 1:
        return DensityMatrix((d_b,), np.einsum("ijil->jl", blocks))
    raise DomainError(f"Partie {keep} inexistante")


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """
    Fidélité d'Uhlmann (tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2.

    Les valeurs propres sous le plancher d'arrondi sont mises à 0 avant la
    racine (sinon un bruit de 1e-17 devient 3e-9).
    """
    if rho.dims != sigma.dims:
        raise DomainError(f"Dimensions différentes: {rho.dims} / {sigma.dims}")
    sig = 0.5 * (sigma.entries + sigma.entries.conj().T)
    values, vectors = linalg.eigh(sig)
    sqrt_sigma = (vectors * np.sqrt(_above_floor(values))) @ vectors.conj().T
    inner = sqrt_sigma @ rho.entries @ sqrt_sigma
    inner = 0.5 * (inner + inner.conj().T)
    eig = _above_floor(linalg.eigvalsh(inner))
    return float(np.sum(np.sqrt(eig)) ** 2)


def _above_floor(values: np.ndarray) -> np.ndarray:
    floor = _ROUNDING_FLOOR * max(1.0, float(np.max(np.abs(values))))
    return np.where(values > floor, values, 0.0)


def bloch_vector(state: SpinState) -> np.ndarray:
    """(<sigma_x>, <sigma_y>, <sigma_z>) d'un état de spin 1/2"""
    if state.dims != (2,):
        raise DomainError("Vecteur de Bloch défini pour un spin 1/2 unique")
    rho = projector(state)
    return np.array([2.0 * rho.expectation(op).real for op in spin_operators(SPIN_HALF)])


def resolution_of_identity_defect(
    s: SpinLike,
    grid: QuadratureGrid,
    convention: PhaseConvention = PhaseConvention.BLOCH,
) -> float:
    """
    Écart maximal de (2s+1)/4pi sum_i w_i |Omega_i><Omega_i| à l'identité.

    Nul (à l'arrondi près) dès que n_theta, n_phi >= 2s + 1.
    """
    spin = as_spin(s)
    states = coherent_state_matrix(spin, grid.thetas, grid.phis, convention)
    completeness = (spin.dim / FOUR_PI) * ((states.T * grid.weights) @ states.conj())
    defect = float(np.max(np.abs(completeness - np.eye(spin.dim))))
    if not grid.is_exact_for(spin.twice_s):
        logger.debug(
            "Grille %s non exacte pour s = %s : défaut %.3e", grid.shape(), spin, defect
        )
    return defect

