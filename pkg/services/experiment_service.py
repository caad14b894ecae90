"""
Service d'expériences - orchestration des contrôleurs hors de la CLI.
Chaque sous-commande produit un rapport (dict) sérialisable par views.report_view.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config import (
    APP_CONFIG,
    CLAIM_FIELD,
    DETECTOR_CONVENTION,
    DISTRIBUTION_IDS,
    GRID_DEFAULTS,
    HAMILTONIANS,
    NUMERICS,
    PUBLISHED_VALUES,
    SUBCOMMANDS,
)
from controllers.classical_limit_controller import (
    ClassicalLimitController,
    width_sweep,
)
from controllers.malus_controller import (
    MALUS_ARITY,
    HiddenVariableModel,
    MalusController,
    chsh_value,
    grid_joint_function,
    malus_transmission,
    standard_chsh_settings,
)
from controllers.path_integral_controller import (
    PathIntegralController,
    compose_amplitude,
    slope_fit,
)
from models.quasi_dist import (
    QuasiDistribution,
    get_distribution,
    negativity_scan,
    reconstruct_density,
)
from models.sphere import Direction, QuadratureGrid, build_grid, refine
from models.spin_states import (
    SPIN_HALF,
    DensityMatrix,
    as_spin,
    basis_state,
    fidelity,
    malus_probability,
    partial_trace,
    projector,
    resolution_of_identity_defect,
    singlet_state,
    spin_operators,
)
from utils.exceptions import ConfigError, DomainError
from utils.logging_utils import get_logger


logger = get_logger(__name__)

# Nombre de réglages des autres sous-commandes (celles de Malus : MalusController)
SETTINGS_ARITY = {
    "reconstruct": 0,
    "negativity": 0,
    "identity": 0,
    "pathint": 2,
    "loop-phase": 0,
    "width-scaling": 0,
    "concentration": 0,
    "dynamics": 1,
}

DEFAULT_LOOP_STEPS = [10, 100, 1000, 10000]
DEFAULT_WIDTH_TWICE_S = [20, 40, 80, 160, 320, 640]

# Direction de l'état pur reconstruit (theta = 0 correspond à |->)
_POLE_STATES = {"p-plus": Direction(math.pi, 0.0), "p-minus": Direction(0.0, 0.0)}


@dataclass
class RunConfig:
    """Configuration d'une exécution (une sous-commande)"""

    subcommand: str
    twice_s: int = 1
    distribution: str = "uniform"
    settings: List[Direction] = field(default_factory=list)
    n_theta: Optional[int] = None
    n_phi: Optional[int] = None
    output_format: str = "csv"
    output_path: Optional[str] = None
    oracle: str = "quantum"
    standard_settings: bool = False
    insertions: List[int] = field(default_factory=lambda: [0, 1, 2, 3])
    steps: List[int] = field(default_factory=list)
    theta: float = 0.5 * math.pi
    levels: List[float] = field(default_factory=lambda: [0.5])
    twice_s_values: List[int] = field(default_factory=lambda: list(DEFAULT_WIDTH_TWICE_S))
    alphas: List[float] = field(default_factory=list)
    hamiltonian: str = "precession"
    omega0: float = HAMILTONIANS["default_omega0"]
    t_end: float = 2.0 * math.pi
    step: float = 1e-3

    def grid_shape(self) -> Tuple[int, int]:
        """n_theta = n_phi = max(2 * twice_s + 1, 8) par défaut"""
        default = max(2 * self.twice_s + 1, GRID_DEFAULTS["min_nodes"])
        return (self.n_theta or default, self.n_phi or default)


def valider_config(config: RunConfig) -> Tuple[bool, str]:
    """
    Valide une configuration avant exécution

    Returns:
        (valide, message)
    """
    if config.subcommand not in SUBCOMMANDS:
        return False, f"Sous-commande inconnue: {config.subcommand}"
    if isinstance(config.twice_s, bool) or not isinstance(config.twice_s, int) or config.twice_s < 1:
        return False, f"--twice-s doit être un entier >= 1, reçu {config.twice_s!r}"
    if config.distribution not in DISTRIBUTION_IDS:
        return False, f"Distribution inconnue: {config.distribution}"
    if config.output_format not in ("csv", "json"):
        return False, f"Format inconnu: {config.output_format}"
    for name, value in (("--n-theta", config.n_theta), ("--n-phi", config.n_phi)):
        if value is not None and value < 1:
            return False, f"{name} doit être >= 1, reçu {value}"

    if config.subcommand == "chsh" and config.standard_settings:
        if config.settings:
            return False, "--standard-settings et --settings sont exclusifs"
    elif config.subcommand in MALUS_ARITY:
        valide, message = MalusController.valider_reglages(config.subcommand, config.settings)
        if not valide:
            return False, message
    elif len(config.settings) != SETTINGS_ARITY[config.subcommand]:
        expected = SETTINGS_ARITY[config.subcommand]
        return False, (
            f"{config.subcommand} attend {expected} réglage(s), reçu {len(config.settings)}"
        )

    if config.subcommand == "chsh" and config.oracle not in ("quantum", "quadrature"):
        return False, f"Oracle inconnu: {config.oracle}"
    if config.subcommand == "pathint" and any(k < 0 for k in config.insertions):
        return False, "--insertions doit être >= 0"
    if any(n < 1 for n in config.steps):
        return False, "--steps doit être >= 1"
    if config.subcommand == "width-scaling" and any(not 0.0 < x < 1.0 for x in config.levels):
        return False, "--levels doit être dans (0, 1)"
    if config.subcommand == "dynamics":
        if config.hamiltonian not in HAMILTONIANS["names"]:
            return False, f"Hamiltonien inconnu: {config.hamiltonian}"
        if not (config.t_end > 0.0 and config.step > 0.0):
            return False, "--t-end et --step doivent être > 0"
    return True, "Configuration valide"


def _distribution(config: RunConfig, parties: int) -> QuasiDistribution:
    P = get_distribution(config.distribution)
    if P.parties != parties:
        raise ConfigError(
            f"{config.subcommand} attend une distribution à {parties} partie(s), "
            f"'{config.distribution}' en a {P.parties}"
        )
    return P


def _claim(key: str, computed: float, value: Optional[float] = None) -> Dict:
    """Valeur publiée, valeur calculée et écart (informatif)"""
    published = PUBLISHED_VALUES[key]
    claimed = published.get("value") if value is None else value
    return {
        "value": claimed,
        "description": published["description"],
        "discrepancy": computed - claimed,
    }


def _settings_fields(prefix: str, d: Direction) -> Dict:
    return {f"{prefix}_theta": d.theta, f"{prefix}_phi": d.phi}


def _report(experiment: str, rows: List[Dict], grid: Optional[Tuple[int, int]],
            estimated_error: float, summary: Optional[Dict] = None) -> Dict:
    return {
        "experiment": experiment,
        "schema": APP_CONFIG["schema_version"],
        "detector_convention": DETECTOR_CONVENTION,
        "grid": list(grid) if grid else None,
        "estimated_error": float(estimated_error),
        "summary": summary or {},
        "results": rows,
    }


# ----------------------------------------------------------------------------
# Sous-commandes
# ----------------------------------------------------------------------------

def _run_malus(config: RunConfig, grid: QuadratureGrid) -> Dict:
    P = _distribution(config, 1)
    a_prime = config.settings[0]
    data = MalusController(grid).moyenne_quantique(P, config.twice_s, a_prime)
    result = data["result"]
    row = {
        "distribution": config.distribution,
        "twice_s": config.twice_s,
        **_settings_fields("a", a_prime),
        "value": result.value,
        "trace_identity": data["trace_identity"],
        "trace_gap": data["trace_gap"],
    }
    if config.distribution == "uniform" and config.twice_s == 1:
        row[CLAIM_FIELD] = _claim("malus_uniform_half", result.value)
    elif config.distribution in _POLE_STATES and config.twice_s == 1:
        pole = _POLE_STATES[config.distribution]
        row[CLAIM_FIELD] = _claim("malus_spin_s", result.value,
                                    malus_probability(SPIN_HALF, pole, a_prime))
    return _report("malus", [row], result.grid_used, result.estimated_error)


def _run_classical(config: RunConfig, grid: QuadratureGrid) -> Dict:
    P = _distribution(config, 1)
    a_prime = config.settings[0]
    result = MalusController(grid).moyenne_classique(P, a_prime)
    row = {"distribution": config.distribution, **_settings_fields("a", a_prime),
           "value": result.value}
    return _report("classical", [row], result.grid_used, result.estimated_error)


def _run_joint(config: RunConfig, grid: QuadratureGrid) -> Dict:
    P = _distribution(config, 2)
    a, b = config.settings
    data = MalusController(grid).probabilite_jointe(P, a, b)
    result = data["result"]
    row = {
        "distribution": config.distribution,
        **_settings_fields("a", a),
        **_settings_fields("b", b),
        "value": result.value,
        "oracle": data["oracle"],
        "oracle_gap": data["oracle_gap"],
    }
    if config.distribution == "pro2":
        dot = float(np.dot(a.unit_vector(), b.unit_vector()))
        claimed = PUBLISHED_VALUES["joint_singlet"]["prefactor"] * (1.0 - dot)
        row[CLAIM_FIELD] = _claim("joint_singlet", result.value, claimed)
        if abs(row[CLAIM_FIELD]["discrepancy"]) > NUMERICS["convergence_tolerance"]:
            logger.warning(
                "Probabilité jointe : valeur publiée %.6f, calculée %.6f (rapport %.3f)",
                claimed, result.value, result.value / claimed if claimed else float("nan"),
            )
    return _report("joint", [row], result.grid_used, result.estimated_error)


def _run_chsh(config: RunConfig, grid: QuadratureGrid) -> Dict:
    settings = standard_chsh_settings() if config.standard_settings else config.settings
    if config.oracle == "quantum":
        value = MalusController(grid).chsh(settings)
        used_grid, error = None, 0.0
    else:
        P = _distribution(config, 2)
        model = HiddenVariableModel(P, malus_transmission(1), malus_transmission(1))
        value = chsh_value(grid_joint_function(model, grid), settings)
        refined = chsh_value(
            grid_joint_function(model, refine(grid, GRID_DEFAULTS["refinement_factor"])), settings
        )
        used_grid, error = grid.shape(), abs(refined - value)
    row = {"oracle": config.oracle, "S": value, "abs_S": abs(value),
           "local_bound": 2.0, "quantum_bound": 2.0 * math.sqrt(2.0)}
    for name, d in zip(("a", "a_prime", "b", "b_prime"), settings):
        row.update(_settings_fields(name, d))
    logger.info("CHSH (%s) : S = %.10f", config.oracle, value)
    return _report("chsh", [row], used_grid, error)


def _reference_state(identifier: str) -> Optional[DensityMatrix]:
    """État attendu pour les distributions intégrées de spin 1/2"""
    if identifier == "p-plus":
        return projector(basis_state(SPIN_HALF, 1))
    if identifier == "p-minus":
        return projector(basis_state(SPIN_HALF, -1))
    if identifier == "uniform":
        return DensityMatrix((2,), 0.5 * np.eye(2))
    if identifier in ("pro1", "pro1-flipped", "pro2"):
        return projector(singlet_state())
    return None


def _run_reconstruct(config: RunConfig, grid: QuadratureGrid) -> Dict:
    P = get_distribution(config.distribution)
    rho = reconstruct_density(P, config.twice_s, grid)
    refined = reconstruct_density(P, config.twice_s,
                                  refine(grid, GRID_DEFAULTS["refinement_factor"]))
    eigenvalues = rho.eigenvalues()
    summary = {
        "distribution": config.distribution,
        "twice_s": config.twice_s,
        "trace": rho.trace().real,
        "hermiticity_defect": rho.hermiticity_defect(),
        "min_eigenvalue": float(eigenvalues[0]),
        "max_eigenvalue": float(eigenvalues[-1]),
    }

    reference = _reference_state(config.distribution) if config.twice_s == 1 else None
    if reference is not None:
        summary["fidelity"] = fidelity(rho, reference)
        summary["reference_distance"] = rho.max_distance(reference)
        if config.distribution in ("p-plus", "p-minus"):
            summary[CLAIM_FIELD] = _claim("pole_reconstruction", summary["fidelity"])
        elif config.distribution == "pro1":
            summary[CLAIM_FIELD] = _claim("singlet_pro1", summary["fidelity"])
    if len(rho.dims) == 2:
        half = DensityMatrix((rho.dims[0],), np.eye(rho.dims[0]) / rho.dims[0])
        summary["reduced_a_distance"] = partial_trace(rho, 0).max_distance(half)
    elif rho.dims == (2,):
        for axis, operator in zip("xyz", spin_operators(SPIN_HALF)):
            summary[f"bloch_{axis}"] = 2.0 * rho.expectation(operator).real

    rows = [
        {"row": i, "col": j, "re": rho.entries[i, j].real, "im": rho.entries[i, j].imag}
        for i in range(rho.entries.shape[0])
        for j in range(rho.entries.shape[1])
    ]
    return _report("reconstruct", rows, grid.shape(), rho.max_distance(refined), summary)


def _run_negativity(config: RunConfig, grid: QuadratureGrid) -> Dict:
    P = get_distribution(config.distribution)
    scan = negativity_scan(P, grid)
    argmin = scan.argmin if isinstance(scan.argmin, tuple) else (scan.argmin,)
    row = {"distribution": config.distribution, "min_value": scan.min_value,
           "delta_weight": scan.delta_weight}
    for name, d in zip(("a", "b"), argmin):
        row.update(_settings_fields(f"argmin_{name}", d))
    return _report("negativity", [row], grid.shape(), 0.0)


def _run_identity(config: RunConfig, grid: QuadratureGrid) -> Dict:
    defect = resolution_of_identity_defect(config.twice_s, grid)
    row = {"twice_s": config.twice_s, "defect": defect,
           "exact_grid": grid.is_exact_for(config.twice_s)}
    return _report("identity", [row], grid.shape(), 0.0)


def _run_pathint(config: RunConfig, grid: QuadratureGrid) -> Dict:
    start, end = config.settings
    controller = PathIntegralController(config.twice_s)
    if config.steps:
        rows, slope = controller.balayage(start, end, config.steps)
        return _report("pathint-sweep", rows, None, 0.0, {"gap_slope": slope})

    finer = refine(grid, GRID_DEFAULTS["refinement_factor"])
    rows, error = [], 0.0
    for K in config.insertions:
        report = controller.composer(start, end, K, grid)
        refined = compose_amplitude(config.twice_s, start, end, K, finer)
        error = max(error, abs(refined.composed_amplitude - report.composed_amplitude))
        rows.append({
            "s": as_spin(config.twice_s).s,
            **_settings_fields("start", start),
            **_settings_fields("end", end),
            "K": report.insertions,
            "exact_re": report.exact_amplitude.real,
            "exact_im": report.exact_amplitude.imag,
            "composed_re": report.composed_amplitude.real,
            "composed_im": report.composed_amplitude.imag,
            "abs_error": report.abs_error,
        })
    return _report("pathint", rows, grid.shape(), error)


def _run_loop_phase(config: RunConfig, grid: QuadratureGrid) -> Dict:
    steps = config.steps or DEFAULT_LOOP_STEPS
    rows = PathIntegralController(config.twice_s).boucle(config.theta, steps)
    return _report("loop-phase", rows, None, 0.0, {"theta": config.theta})


def _run_width_scaling(config: RunConfig, grid: QuadratureGrid) -> Dict:
    rows, summary = [], {}
    for level in config.levels:
        sweep = width_sweep(config.twice_s_values, level)
        rows.extend(sweep)
        if len(sweep) >= 2:
            summary[f"slope_{level:g}"] = slope_fit([r["s"] for r in sweep],
                                                    [r["width"] for r in sweep])
    return _report("width-scaling", rows, None, 0.0, summary)


def _run_concentration(config: RunConfig, grid: QuadratureGrid) -> Dict:
    alphas = config.alphas or np.linspace(0.0, 0.5, 11).tolist()
    rows = ClassicalLimitController(config.twice_s).profil(alphas)
    return _report("concentration", rows, None, 0.0, {"twice_s": config.twice_s})


def _run_dynamics(config: RunConfig, grid: QuadratureGrid) -> Dict:
    controller = ClassicalLimitController(config.twice_s, config.omega0)
    trajectory, drift = controller.trajectoire(
        config.hamiltonian, config.settings[0], config.t_end, config.step
    )
    summary = {"hamiltonian": config.hamiltonian, "energy_drift": drift,
               "step": trajectory.step, "finite_differences": trajectory.finite_differences}
    return _report("dynamics", trajectory.rows(), None, 0.0, summary)


_RUNNERS: Dict[str, Callable[[RunConfig, QuadratureGrid], Dict]] = {
    "malus": _run_malus,
    "classical": _run_classical,
    "joint": _run_joint,
    "chsh": _run_chsh,
    "reconstruct": _run_reconstruct,
    "negativity": _run_negativity,
    "identity": _run_identity,
    "pathint": _run_pathint,
    "loop-phase": _run_loop_phase,
    "width-scaling": _run_width_scaling,
    "concentration": _run_concentration,
    "dynamics": _run_dynamics,
}


def run_experiment(config: RunConfig) -> Tuple[bool, Optional[Dict], str]:
    """
    Exécute une sous-commande.

    Returns:
        (succès, rapport, message). Un rapport présent avec succès False
        signale une erreur estimée au-delà de la tolérance de convergence.

    Raises:
        ConfigError: configuration ou arguments invalides
        NumericalError: échec numérique pendant le calcul
    """
    valide, message = valider_config(config)
    if not valide:
        raise ConfigError(message)

    try:
        grid = build_grid(*config.grid_shape())
        report = _RUNNERS[config.subcommand](config, grid)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    if report["estimated_error"] > NUMERICS["convergence_tolerance"]:
        message = (
            f"Non convergé : erreur estimée {report['estimated_error']:.3e} "
            f"> {NUMERICS['convergence_tolerance']:.0e} (grille {report['grid']})"
        )
        logger.error(message)
        return False, report, message
    return True, report, f"{config.subcommand} terminé"
