"""
Utilitaires de journalisation (logging standard, sortie sur stderr)
"""
import logging
import sys
from typing import Optional, Union

from config import LOGGING


_handler: Optional[logging.StreamHandler] = None


def configure_logging(level: Optional[Union[str, int]] = None) -> None:
    """
    Configure le logger racine du projet.

    Args:
        level: Niveau (nom ou entier). Par défaut LOGGING["level"].
    """
    global _handler
    root = logging.getLogger()
    if _handler is None:
        _handler = logging.StreamHandler(sys.stderr)
        _handler.setFormatter(logging.Formatter(LOGGING["format"]))
        root.addHandler(_handler)
    else:
        # stderr peut avoir été remplacé depuis le premier appel
        _handler.setStream(sys.stderr)
    root.setLevel(level if level is not None else LOGGING["level"])


def get_logger(name: str) -> logging.Logger:
    """Retourne le logger du module"""
    return logging.getLogger(name)
