import dataclasses
import json
import logging
import os
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from src.utils.exceptions import ConfigError
from src.utils.static import LOG_DIR, LOG_LEVEL, REPORT_VERSION

logging.basicConfig(
    level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler(os.path.join(LOG_DIR, "app.log")),
        logging.StreamHandler()
    ]
)

error_handler = logging.FileHandler(os.path.join(LOG_DIR, "error.log"))
error_handler.setLevel(logging.ERROR)
error_handler.setFormatter(logging.Formatter(
    '%(asctime)s - %(levelname)s - %(message)s'))

logging.getLogger().addHandler(error_handler)


def to_jsonable(value: Any) -> Any:
    """
    Convertit récursivement une valeur en objet sérialisable en JSON.

    Les complexes deviennent des paires ``[re, im]``, les tableaux numpy des
    listes, les dataclasses des dictionnaires.

    Paramètres:
    value (Any): La valeur à convertir.

    Retourne:
    Any: Une structure composée de dict, list, str, int, float, bool ou None.
    """
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name))
                for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if value is None or isinstance(value, (str, int)):
        return value
    return str(value)


def build_report(experiment: str, config: Dict[str, Any],
                 results: Any, warnings: Optional[List[str]] = None) -> Dict[str, Any]:
    """
    Assemble un rapport JSON au schéma du projet.

    Paramètres:
    experiment (str): Nom de l'expérience.
    config (dict): Écho de la configuration utilisée.
    results (Any): Résultats de l'expérience.
    warnings (list, optionnel): Avertissements collectés.

    Retourne:
    dict: Le rapport ``{version, experiment, config, results, warnings}``.
    """
    return {
        "version": REPORT_VERSION,
        "experiment": experiment,
        "config": to_jsonable(config),
        "results": to_jsonable(results),
        "warnings": list(warnings or []),
    }


def write_json_report(path: str, report: Dict[str, Any]) -> str:
    """
    Écrit un rapport JSON (indentation 2, clés triées).

    Paramètres:
    path (str): Chemin du fichier à écrire.
    report (dict): Rapport produit par :func:`build_report`.

    Retourne:
    str: Le chemin écrit.
    """
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(json.dumps(to_jsonable(report), indent=2, sort_keys=True))
            handle.write("\n")
        logging.info(f"Rapport JSON écrit : {path}")
        return path
    except Exception as e:
        logging.error(f"Erreur lors de l'écriture du rapport {path}: {e}")
        raise


def write_csv(path: str, table: Union[pd.DataFrame, List[Dict[str, Any]]]) -> str:
    """
    Écrit une table CSV avec ligne d'en-tête, séparateur virgule, UTF-8.

    Paramètres:
    path (str): Chemin du fichier à écrire.
    table (DataFrame ou list[dict]): Les lignes à écrire.

    Retourne:
    str: Le chemin écrit.
    """
    try:
        frame = table if isinstance(table, pd.DataFrame) else pd.DataFrame(table)
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        frame.to_csv(path, index=False, encoding="utf-8")
        logging.info(f"Table CSV écrite : {path} ({len(frame)} lignes)")
        return path
    except Exception as e:
        logging.error(f"Erreur lors de l'écriture de la table {path}: {e}")
        raise


def load_json_config(path: str) -> Dict[str, Any]:
    """
    Charge un fichier de configuration JSON.

    Paramètres:
    path (str): Chemin du fichier.

    Retourne:
    dict: Le contenu du fichier.

    Lève:
    ConfigError: Si le fichier est absent, mal formé (ligne et colonne
    indiquées) ou si la racine n'est pas un objet.
    """
    if not os.path.exists(path):
        raise ConfigError("config", f"fichier introuvable : {path}")
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"JSON invalide ligne {e.lineno}, colonne {e.colno}: {e.msg}")
    if not isinstance(data, dict):
        raise ConfigError("config", "la racine doit être un objet JSON")
    return data
