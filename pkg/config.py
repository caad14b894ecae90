"""
Configuration - constantes, dictionnaires, tolérances numériques uniquement.
"""

APP_CONFIG = {
    "name": "Malus Lab",
    "subtitle": "Lois de Malus classique et quantique pour les spins",
    "schema_version": 1,
}

# Tolérances et garde-fous numériques (unités : radians, hbar = 1)
NUMERICS = {
    "weight_sum_tolerance": 1e-12,
    "hermiticity_tolerance": 1e-12,
    "trace_tolerance": 1e-12,
    "eigenvalue_floor": -1e-10,
    "pole_guard": 1e-8,
    "finite_difference_step": 1e-6,
    "canonical_bound_slack": 1e-9,
    "antipodal_guard": 1e-12,
    "convergence_tolerance": 1e-6,
    "transmission_slack": 1e-12,
}

GRID_DEFAULTS = {
    "min_nodes": 8,
    "refinement_factor": 2,
}

# Identifiants CLI stables des quasi-distributions intégrées
DISTRIBUTION_IDS = {
    "uniform": "uniform_half",
    "p-plus": "p_plus",
    "p-minus": "p_minus",
    "pro1": "singlet_smooth",
    "pro1-flipped": "singlet_smooth_flipped",
    "pro2": "singlet_delta",
}

SUBCOMMANDS = [
    "malus",
    "classical",
    "joint",
    "chsh",
    "reconstruct",
    "negativity",
    "identity",
    "pathint",
    "loop-phase",
    "width-scaling",
    "concentration",
    "dynamics",
]

# Champ des rapports portant la valeur publiée et l'écart calculé (nom stable)
CLAIM_FIELD = "paper_claim"

# Valeurs publiées reprises telles quelles dans les rapports (champ CLAIM_FIELD)
PUBLISHED_VALUES = {
    "joint_singlet": {
        "description": "p(a;b) = 1/2 (1 - a.b)",
        "prefactor": 0.5,
    },
    "malus_uniform_half": {
        "description": "melange incoherent spin-1/2 : p = 1/2",
        "value": 0.5,
    },
    "pole_reconstruction": {
        "description": "P(Omega) = (1 -/+ 3 cos theta)/4pi reconstruit |+/-><+/-|",
        "value": 1.0,
    },
    "singlet_pro1": {
        "description": "P = (1 + 9 cos.cos + 9 sin.sin.cos)/(4pi)^2 reconstruit le singulet",
        "value": 1.0,
    },
    "malus_spin_s": {
        "description": "p = cos(alpha/2)^(4s)",
    },
}

DETECTOR_CONVENTION = (
    "detecteur oriente selon a = projecteur sur l'etat coherent de direction a ; "
    "theta = 0 correspond a |->, base m = -s..+s croissante"
)

HAMILTONIANS = {
    "default_omega0": 1.0,
    "names": ["precession", "transverse", "zero"],
}

LOGGING = {
    "level": "INFO",
    "format": "%(asctime)s %(levelname)s %(name)s - %(message)s",
}
