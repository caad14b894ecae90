"""
Vue des rapports : sérialisation CSV (une ligne par résultat) ou JSON (un objet).
Aucun calcul ici ; la vue refuse toute valeur numérique non finie.
"""
import json
import math
import sys
from numbers import Number
from typing import Any, Dict, Iterator, Optional, Tuple

import numpy as np
import pandas as pd

from utils.exceptions import NumericalError


def _numeric_fields(value: Any, path: str = "") -> Iterator[Tuple[str, float]]:
    if isinstance(value, dict):
        for key, item in value.items():
            yield from _numeric_fields(item, f"{path}.{key}" if path else str(key))
    elif isinstance(value, (list, tuple)):
        for index, item in enumerate(value):
            yield from _numeric_fields(item, f"{path}[{index}]")
    elif isinstance(value, (bool, np.bool_)):
        return
    elif isinstance(value, Number):
        yield path, float(value)


def verifier_valeurs_finies(report: Dict) -> None:
    """Lève NumericalError si un champ numérique du rapport est NaN ou infini"""
    bad = [path for path, value in _numeric_fields(report) if not math.isfinite(value)]
    if bad:
        raise NumericalError(f"Champs non finis dans le rapport : {', '.join(bad[:5])}")


def _json_default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Type non sérialisable: {type(value).__name__}")


def _format_scalar(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _header_lines(report: Dict) -> Iterator[str]:
    yield f"# schema={report['schema']}"
    yield f"# experiment={report['experiment']}"
    yield f"# detector_convention={report['detector_convention']}"
    grid = report.get("grid")
    yield f"# grid={'x'.join(str(n) for n in grid) if grid else 'none'}"
    yield f"# estimated_error={_format_scalar(report['estimated_error'])}"
    summary = report.get("summary") or {}
    if summary:
        flat = pd.json_normalize(summary).to_dict(orient="records")[0]
        for key, value in flat.items():
            yield f"# {key}={_format_scalar(value)}"


def rapport_csv(report: Dict) -> str:
    """
    CSV versionné : lignes de commentaire (schéma, convention, grille, erreur,
    résumé) puis une ligne par résultat ; les champs imbriqués
    (config.CLAIM_FIELD) sont aplatis en <champ>.value, <champ>.discrepancy...
    """
    lines = list(_header_lines(report))
    table = pd.json_normalize(report["results"])
    body = table.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    return "\n".join(lines) + "\n" + body


def rapport_json(report: Dict) -> str:
    return json.dumps(report, indent=2, default=_json_default, ensure_ascii=False) + "\n"


def formater_rapport(report: Dict, output_format: str = "csv") -> str:
    """
    Sérialise un rapport d'expérience

    Args:
        report: Rapport produit par services.experiment_service
        output_format: "csv" ou "json"

    Returns:
        Texte du rapport (déterministe pour un rapport donné)
    """
    verifier_valeurs_finies(report)
    if output_format == "json":
        return rapport_json(report)
    return rapport_csv(report)


def ecrire_rapport(text: str, output_path: Optional[str] = None, stream=None) -> None:
    """Écrit le rapport dans un fichier ou sur le flux fourni (stdout par défaut)"""
    if output_path:
        with open(output_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        return
    if stream is None:
        stream = sys.stdout
    stream.write(text)
