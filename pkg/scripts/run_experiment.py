"""Interface en ligne de commande : expériences nommées, rapports JSON et tables CSV.

Usage::

    hyperbolic-bending thresholds --out results
    hyperbolic-bending dlength --config configs/genus2.json --max-word-len 4
    hyperbolic-bending --list

Codes de sortie : 0 succès, 1 invariant réfuté, 2 configuration ou données
invalides.
"""
import argparse
import dataclasses
import logging
import math
import os
import sys
import typing
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.process.bending import (
    bend_representation, bending_pair_separation_check, dlength_fd_oracle,
    dlength_formula, shortening_check, two_sided_torus
)
from src.process.groups import (
    WordBattery, critical_exponent_estimate, cyclic_group, genus2_fuchsian,
    is_usable_loxodromic, limit_set_sample, rectangular_torus_fuchsian,
    schottky_fuchsian
)
from src.process.lamination import InvariantLamination, horocycle_lamination, l_roundness
from src.process.margulis import (
    cocycle_from_bending, normalized_margulis_spectrum, properness_verdict
)
from src.process.pleating import bilipschitz_estimate, dump_mesh_csv, theta_bounded_check
from src.process.thresholds import (
    TEICH_THRESHOLD, ThresholdQuery, bcy_upper_bound, classical_bounds_report,
    horocycle_roundness, r, schwarzian_threshold, threshold_table
)
from src.utils.exceptions import ConfigError, EmptyBattery, HyperbolicError
from src.utils.helper_data import build_report, load_json_config, write_csv, write_json_report
from src.utils.static import (
    DEFAULT_DEPTH, DEFAULT_MAX_WORD_LEN, DEFAULT_RAYS, DEFAULT_STEP, VERDICT_GUARANTEED,
    SEPARATION_PASS, VERDICT_CONSISTENT, VERDICT_REFUTED
)

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_INVALID = 2
MAX_BATTERY = 200_000

GROUPS: Dict[str, Callable[..., Any]] = {
    "schottky": schottky_fuchsian,
    "genus2": genus2_fuchsian,
    "torus": rectangular_torus_fuchsian,
    "cyclic": cyclic_group,
}


@dataclass
class ExperimentConfig:
    """
    Configuration d'une expérience.

    Chargée depuis un fichier JSON (``--config``) puis complétée par les
    options de la ligne de commande ; ``to_dict`` / ``from_dict`` sont
    réciproques.
    """
    experiment: str = "thresholds"
    group: str = "torus"
    group_parameter: Optional[float] = None
    lamination: List[str] = field(default_factory=lambda: ["a"])
    weights: List[float] = field(default_factory=lambda: [1.0])
    bend: List[float] = field(default_factory=lambda: [0.0, -0.3])
    max_word_len: int = DEFAULT_MAX_WORD_LEN
    max_words: int = 200
    depth: int = DEFAULT_DEPTH
    seed: int = 0
    out: str = "results"
    tolerance: float = 1e-6
    L_grid: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    theta_grid: List[float] = field(default_factory=lambda: [math.pi / 2])
    horocycle_L: float = 1.0
    horocycle_scale: float = 0.3
    theta: float = 1.0
    rays: int = DEFAULT_RAYS
    step: float = DEFAULT_STEP
    reach: float = 4.0
    pairs: int = 2000
    bend_angle: float = 0.3
    margin: float = 0.05
    radii: List[float] = field(default_factory=lambda: [5.0, 9.0])
    radius_count: int = 17
    entropy_bend: Optional[List[float]] = None
    schwarzian_norm: Optional[float] = None
    teich_distance: Optional[float] = None
    quasicircle_K: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """
        Construit une configuration en validant chaque champ.

        Lève:
        ConfigError: Champ inconnu ou de type incorrect (le nom du champ est
        indiqué).
        """
        hints = typing.get_type_hints(cls)
        values = {}
        for key, value in data.items():
            if key not in hints:
                raise ConfigError(key, "champ inconnu")
            values[key] = _coerce(key, hints[key], value)
        return cls(**values)


def _coerce(name: str, hint: Any, value: Any) -> Any:
    origin = typing.get_origin(hint)
    if origin is typing.Union:
        if value is None:
            return None
        inner = [a for a in typing.get_args(hint) if a is not type(None)][0]
        return _coerce(name, inner, value)
    if origin in (list, List):
        if not isinstance(value, list):
            raise ConfigError(name, f"liste attendue, reçu {value!r}")
        item = typing.get_args(hint)[0]
        return [_coerce(f"{name}[{k}]", item, v) for k, v in enumerate(value)]
    if hint is bool or isinstance(value, bool):
        if hint is not bool or not isinstance(value, bool):
            raise ConfigError(name, f"type {hint.__name__} attendu, reçu {value!r}")
        return value
    if hint is int:
        if not isinstance(value, int):
            raise ConfigError(name, f"entier attendu, reçu {value!r}")
        return value
    if hint is float:
        if not isinstance(value, (int, float)):
            raise ConfigError(name, f"nombre attendu, reçu {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(name, f"chaîne attendue, reçu {value!r}")
        return value
    return value


@dataclass
class ExperimentResult:
    results: Dict[str, Any]
    warnings: List[str] = field(default_factory=list)
    refuted: bool = False
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)


def build_group(config: ExperimentConfig):
    if config.group not in GROUPS:
        raise ConfigError("group", f"groupe inconnu {config.group!r} ({', '.join(GROUPS)})")
    factory = GROUPS[config.group]
    return factory() if config.group_parameter is None or config.group == "genus2" \
        else factory(config.group_parameter)


def build_lamination(config: ExperimentConfig, rho) -> InvariantLamination:
    if len(config.weights) not in (1, len(config.lamination)):
        raise ConfigError("weights", "un poids, ou un poids par mot de lamination")
    weights = config.weights if len(config.weights) > 1 else config.weights[0]
    return InvariantLamination.from_words(rho, config.lamination, weights, depth=config.depth)


def _battery(config: ExperimentConfig, rho) -> WordBattery:
    if config.max_word_len < 1:
        raise EmptyBattery(f"longueur maximale {config.max_word_len} : batterie vide")
    battery = WordBattery(rho.rank, config.max_word_len)
    if battery.expected_count() > MAX_BATTERY:
        raise ConfigError("max_word_len", f"{battery.expected_count()} mots : batterie trop grande")
    return battery


def _complex(values: List[float], name: str) -> complex:
    if len(values) != 2:
        raise ConfigError(name, "paire [re, im] attendue")
    return complex(values[0], values[1])


def run_thresholds(config: ExperimentConfig) -> ExperimentResult:
    table = threshold_table(config.L_grid, config.theta_grid)
    residuals = [abs(row.r_L - row.L * math.sin(row.theta - row.r_L))
                 for row in table.itertuples() if row.L <= 1.0]
    worst = max(residuals, default=0.0)
    constants = {
        "r(1)": r(1.0),
        "bcy_upper_bound(1)": bcy_upper_bound(1.0),
        "horocycle_roundness(1)": horocycle_roundness(1.0),
        "schwarzian_threshold(0.611)": schwarzian_threshold(0.611),
        "exp(0.049)": math.exp(TEICH_THRESHOLD),
    }
    return ExperimentResult({"constants": constants, "rows": len(table),
                             "max_fixed_point_residual": worst},
                            refuted=worst > 1e-10, tables={"thresholds": table})


def run_dlength(config: ExperimentConfig) -> ExperimentResult:
    rho = build_group(config)
    mu = build_lamination(config, rho)
    words = list(_battery(config, rho).words())
    warnings = []
    if len(words) > config.max_words:
        warnings.append(f"batterie tronquée à {config.max_words} mots sur {len(words)}")
        words = words[:config.max_words]
    rows, worst = [], 0.0
    for word in tqdm(words, desc="dℓ formule / oracle", disable=logging.getLogger().level > logging.INFO):
        if not is_usable_loxodromic(rho.evaluate(word)):
            continue
        formula = dlength_formula(rho, mu, word)
        oracle = dlength_fd_oracle(rho, mu, word)
        scale = abs(oracle.value)
        error = abs(formula - oracle.value) / scale if scale > 1e-9 else abs(formula - oracle.value)
        worst = max(worst, error)
        rows.append({"word": str(word), "formula_re": formula.real, "formula_im": formula.imag,
                     "oracle_re": oracle.value.real, "oracle_im": oracle.value.imag,
                     "error": error, "oracle_error": oracle.error})
    if not rows:
        raise EmptyBattery("aucun mot loxodromique dans la batterie")
    verdict = VERDICT_REFUTED if worst > config.tolerance else VERDICT_CONSISTENT
    return ExperimentResult({"words": len(rows), "max_error": worst, "verdict": verdict},
                            warnings, verdict == VERDICT_REFUTED,
                            {"dlength": pd.DataFrame(rows)})


def run_bend(config: ExperimentConfig) -> ExperimentResult:
    rho = build_group(config)
    mu = build_lamination(config, rho)
    z = _complex(config.bend, "bend")
    bent = bend_representation(rho, mu, z)
    battery = _battery(config, rho)
    sample = limit_set_sample(bent, battery)
    limit = pd.DataFrame([{"word": str(e.word), "re": e.attracting.value.real,
                           "im": e.attracting.value.imag,
                           "length": e.translation_length}
                          for e in sample.entries if not e.attracting.is_infinite])
    results: Dict[str, Any] = {
        "z": z,
        "relator_residuals": bent.relator_residuals(),
        "generators": {k: g.matrix for k, g in bent.generators.items()},
        "limit_points": len(sample.entries),
        "skipped": sample.skipped,
    }
    refuted = False
    leaf = mu.translate("", 0)
    separation = bending_pair_separation_check(bent, mu, leaf, battery)
    results["separation"] = separation
    if separation.verdict == SEPARATION_PASS and all(w.imag == 0 for w in mu.weights):
        shortening = shortening_check(bent, mu, battery)
        refuted = shortening.verdict == VERDICT_REFUTED
        results["length_variation"] = shortening
    return ExperimentResult(results, refuted=refuted, tables={"limit_set": limit})


def run_margulis(config: ExperimentConfig) -> ExperimentResult:
    defaults = ExperimentConfig()
    ignored = [name for name in ("group", "group_parameter", "lamination", "weights", "bend")
               if getattr(config, name) != getattr(defaults, name)]
    warnings = []
    if ignored:
        message = f"champs ignorés par margulis (tore à deux faces) : {', '.join(ignored)}"
        logging.warning(message)
        warnings.append(message)
    example = two_sided_torus(config.bend_angle)
    u = cocycle_from_bending(example.rho, example.plus, 1) + \
        cocycle_from_bending(example.rho, example.minus, -1)
    report = normalized_margulis_spectrum(example.rho, u, WordBattery(2, config.max_word_len))
    verdict = properness_verdict(report, config.margin)
    table = pd.DataFrame([{"word": w, "m1_re": s.first.real, "m1_im": s.first.imag}
                          for w, s in zip(report.words, report.samples)])
    return ExperimentResult({"K": report.k_bound, "verdict": verdict, "samples": len(report.samples),
                             "skipped": len(report.skipped), "hull_distance": report.hull_distance(),
                             "min_norm": report.min_norm},
                            warnings, tables={"spectrum": table})


def run_pleat(config: ExperimentConfig) -> ExperimentResult:
    mu = horocycle_lamination(config.horocycle_L).scaled(config.horocycle_scale)
    roundness = l_roundness(mu, config.horocycle_L, seed=config.seed)
    query = ThresholdQuery(config.horocycle_L, config.theta, roundness.value)
    guaranteed = roundness.exact and query.verdict() == VERDICT_GUARANTEED
    theta_report = theta_bounded_check(mu, config.theta, rays=config.rays, step=config.step,
                                       reach=config.reach)
    bilipschitz = bilipschitz_estimate(mu, pairs=config.pairs, reach=config.reach, seed=config.seed)
    refuted = not bilipschitz.lipschitz_ok
    if guaranteed:
        refuted |= theta_report.verdict == VERDICT_REFUTED
        refuted |= bilipschitz.min_ratio < math.cos(config.theta) - 1e-6
    mesh = os.path.join(config.out, "pleat_mesh.csv")
    dump_mesh_csv(mu, mesh, rays=config.rays, step=config.step, reach=config.reach)
    return ExperimentResult({"roundness": roundness, "threshold": query.threshold,
                             "guaranteed": guaranteed, "theta_check": theta_report,
                             "bilipschitz": dataclasses.replace(bilipschitz, ratios=[]),
                             "mesh": mesh}, refuted=refuted)


def run_entropy(config: ExperimentConfig) -> ExperimentResult:
    rho = build_group(config)
    if len(config.radii) != 2:
        raise ConfigError("radii", "fenêtre [T_min, T_max] attendue")
    grid = np.linspace(config.radii[0], config.radii[1], config.radius_count)
    estimate = critical_exponent_estimate(rho, radii=grid)
    results: Dict[str, Any] = {"estimate": estimate}
    warnings = list(estimate.warnings)
    tables = {"entropy": pd.DataFrame({"T": estimate.radii, "count": estimate.counts})}
    if config.entropy_bend is not None:
        mu = build_lamination(config, rho)
        bent = bend_representation(rho, mu, _complex(config.entropy_bend, "entropy_bend"))
        deformed = critical_exponent_estimate(bent, radii=grid)
        results["bent"] = deformed
        results["increase"] = deformed.value - estimate.value
        warnings += deformed.warnings
        if rho.is_fuchsian and deformed.value < estimate.value:
            warnings.append("entropie non croissante après pliage d'une représentation fuchsienne")
        tables["entropy_bent"] = pd.DataFrame({"T": deformed.radii, "count": deformed.counts})
    return ExperimentResult(results, warnings, tables=tables)


def run_classical(config: ExperimentConfig) -> ExperimentResult:
    report = classical_bounds_report(config.schwarzian_norm, config.teich_distance,
                                     config.quasicircle_K)
    warnings = [] if any(v is not None for v in report.inputs.values()) else ["aucune donnée fournie"]
    return ExperimentResult({"report": report}, warnings)


EXPERIMENTS: Dict[str, Tuple[Callable[[ExperimentConfig], ExperimentResult], str]] = {
    "thresholds": (run_thresholds, "tabule r_L, r et les bornes sur une grille"),
    "dlength": (run_dlength, "compare la formule de dℓ à l'oracle aux différences finies"),
    "bend": (run_bend, "plie une représentation, résidus, ensemble limite, signe de dℓ"),
    "margulis": (run_margulis, "spectre de Margulis normalisé et verdict de propreté"),
    "pleat": (run_pleat, "θ-bornitude, bilipschitz et maillage du plan plissé"),
    "entropy": (run_entropy, "estimation de l'exposant critique"),
    "classical": (run_classical, "chaîne des bornes classiques"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperbolic-bending",
                                     description="Expériences de pliage en géométrie hyperbolique")
    parser.add_argument("--list", action="store_true", help="liste les expériences disponibles")
    subparsers = parser.add_subparsers(dest="experiment")
    for name, (_, description) in EXPERIMENTS.items():
        sub = subparsers.add_parser(name, help=description)
        sub.add_argument("--config", help="fichier de configuration JSON")
        sub.add_argument("--out", help="répertoire des rapports")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--max-word-len", type=int, dest="max_word_len")
        sub.add_argument("--depth", type=int)
        sub.add_argument("--verbose", action="store_true")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data = load_json_config(args.config) if args.config else {}
    data["experiment"] = args.experiment
    for name in ("out", "seed", "max_word_len", "depth"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    return ExperimentConfig.from_dict(data)


def run(config: ExperimentConfig) -> int:
    """
    Exécute une expérience et écrit ``<out>/<expérience>.json`` et ses tables CSV.

    Retourne:
    int: 0 si tout est cohérent, 1 si un invariant est réfuté, 2 si la
    configuration ou les données sont invalides.
    """
    runner, _ = EXPERIMENTS[config.experiment]
    try:
        os.makedirs(config.out, exist_ok=True)
        outcome = runner(config)
    except (ConfigError, HyperbolicError) as e:
        logging.error(f"Erreur lors de l'expérience {config.experiment}: {e}")
        return EXIT_INVALID
    for name, table in outcome.tables.items():
        write_csv(os.path.join(config.out, f"{name}.csv"), table)
    report = build_report(config.experiment, config.to_dict(), outcome.results, outcome.warnings)
    write_json_report(os.path.join(config.out, f"{config.experiment}.json"), report)
    if outcome.refuted:
        logging.error(f"Invariant réfuté dans l'expérience {config.experiment}")
        return EXIT_REFUTED
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list:
        for name, (_, description) in EXPERIMENTS.items():
            print(f"{name:12s} {description}")
        return EXIT_OK
    if not args.experiment:
        parser.print_help()
        return EXIT_INVALID
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        config = load_config(args)
    except ConfigError as e:
        logging.error(f"Configuration invalide : {e}")
        return EXIT_INVALID
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
