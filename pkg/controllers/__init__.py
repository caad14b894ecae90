"""
Package controllers - Contient tous les contrôleurs d'expériences
"""
from .malus_controller import MalusController
from .path_integral_controller import PathIntegralController
from .classical_limit_controller import ClassicalLimitController
__all__ = ['MalusController', 'PathIntegralController', 'ClassicalLimitController']
