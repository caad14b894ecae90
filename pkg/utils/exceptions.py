"""
Exceptions du laboratoire Malus
"""


class MalusError(Exception):
    """Erreur de base du projet"""


class ConfigError(MalusError):
    """Configuration d'exécution invalide (code de sortie 2)"""


class NumericalError(MalusError):
    """Échec numérique : valeur non finie, non-convergence (code de sortie 1)"""


class DomainError(MalusError, ValueError):
    """Argument hors du domaine d'une opération numérique"""
