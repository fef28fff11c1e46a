"""Fonctions seuils et constantes explicites.

Fonction colline, a_L, r_L, r, borne supérieure sur la rondeur, exemple de
l'horocycle et conversions Schwarzienne / Teichmüller / quasi-cercle.
Toutes les inversions passent par une bissection encadrée
(``scipy.optimize.bisect``).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from src.utils.exceptions import OutOfDomain, OutOfRange
from src.utils.static import BISECT_TOL, VERDICT_GUARANTEED, UNKNOWN

K_QUASICIRCLE = 1.05
TEICH_THRESHOLD = 0.049
SCHWARZIAN_THRESHOLD = 0.0739
SCHWARZIAN_PER_TEICH = 1.5
SEPARATING_ROUNDNESS = 0.611

# Borne inférieure de l'encadrement de a_L.
_A_L_FLOOR = -60.0


def hill(t: float) -> float:
    """Fonction colline h(t) = arccos(tanh t), strictement décroissante de π vers 0."""
    return math.acos(math.tanh(t))


def _sech(t: float) -> float:
    e = math.exp(-abs(t))
    return 2.0 * e / (1.0 + e * e)


def hill_prime(t: float) -> float:
    """h'(t) = -sech t."""
    return -_sech(t)


def hill_inverse(y: float) -> float:
    """Réciproque de la fonction colline sur (0, π)."""
    if not 0.0 < y < math.pi:
        raise OutOfRange(f"h⁻¹ défini sur (0, π), reçu {y}")
    return math.atanh(math.cos(y))


def u_L(x: float, L: float) -> float:
    """u_L(x) = h(x) - L h'(x)."""
    return hill(x) - L * hill_prime(x)


def u_L_prime(x: float, L: float) -> float:
    """u_L'(x) = -(1 + L tanh x) sech x, négative partout pour L ≤ 1."""
    return -(1.0 + L * math.tanh(x)) * _sech(x)


def a_L(theta: float, L: float) -> float:
    """
    Unique solution de u_L(a) = θ pour L ≤ 1.

    Paramètres:
    theta (float): Angle dans (0, π).
    L (float): Longueur dans (0, 1].

    Retourne:
    float: a_L(θ).

    Lève:
    OutOfRange: Si θ ou L sortent de leur domaine, ou si θ est trop proche
    de π pour que la racine soit encadrée.
    """
    if not 0.0 < theta < math.pi:
        raise OutOfRange(f"θ doit être dans (0, π), reçu {theta}")
    if not 0.0 < L <= 1.0:
        raise OutOfRange(f"L doit être dans (0, 1], reçu {L}")

    def residual(x):
        return u_L(x, L) - theta

    hi = 1.0
    while residual(hi) > 0:
        hi *= 2.0
        if hi > 1e3:
            raise OutOfRange(f"θ = {theta} trop proche de 0")
    lo = -1.0
    while residual(lo) < 0:
        lo *= 2.0
        if lo < _A_L_FLOOR:
            raise OutOfRange(f"a_L diverge : θ = {theta} trop proche de π")
    return bisect(residual, lo, hi, xtol=BISECT_TOL, maxiter=500)


def r_L(theta: float, L: float) -> float:
    """
    Rayon r_L(θ) du critère de θ-bornitude.

    Pour L ≤ 1, r_L(θ) = L sech(a_L(θ)), solution de x = L sin(θ - x) ;
    pour L > 1, r_L(θ) = L sech(L + tanh⁻¹(cos θ)).

    Lève:
    OutOfRange: Si θ ∉ (0, π/2] ou L ≤ 0.
    """
    if not 0.0 < theta <= math.pi / 2:
        raise OutOfRange(f"θ doit être dans (0, π/2], reçu {theta}")
    if not L > 0:
        raise OutOfRange(f"L doit être positif, reçu {L}")
    if L <= 1.0:
        return L * _sech(a_L(theta, L))
    return L * _sech(L + math.atanh(math.cos(theta)))


def r(L: float) -> float:
    """r(L) = r_L(π/2) : réciproque de x ↦ x sec x sur (0, 1], x sech x au-delà."""
    return r_L(math.pi / 2, L)


def L_of_r(value: float) -> float:
    """L(r) = r / cos r, réciproque de r sur (0, 1]."""
    return value / math.cos(value)


def bcy_upper_bound(L: float) -> float:
    """
    Borne 2 arccos(-sinh(L/2)) sur la rondeur des laminations de plissage.

    Lève:
    OutOfDomain: Si sinh(L/2) > 1 ou L ≤ 0.
    """
    if not L > 0:
        raise OutOfDomain(f"L doit être positif, reçu {L}")
    s = math.sinh(L / 2)
    if s > 1.0:
        raise OutOfDomain(f"sinh(L/2) = {s:.6g} > 1 : borne non définie")
    return 2.0 * math.acos(-s)


def horocycle_roundness(L: float) -> float:
    """Rondeur 2 arcsin(tanh(L/2)) de l'exemple de l'horocycle."""
    if not L > 0:
        raise OutOfRange(f"L doit être positif, reçu {L}")
    return 2.0 * math.asin(math.tanh(L / 2))


def schwarzian_domain(L: float) -> float:
    """Borne stricte ½ / sqrt(1 + e^{2L}) sur ‖φ‖ pour que F_L s'applique."""
    return 0.5 / math.sqrt(1.0 + math.exp(2.0 * L))


def schwarzian_to_roundness(phi_norm: float, L: float) -> float:
    """
    F_L(‖φ‖) = 2 arctan(2‖φ‖e^L / sqrt(1 - 4‖φ‖²)).

    Paramètres:
    phi_norm (float): Norme de la dérivée Schwarzienne.
    L (float): Longueur des arcs.

    Retourne:
    float: Borne sur la L-rondeur.

    Lève:
    OutOfDomain: Si ‖φ‖ < 0 ou ‖φ‖ ≥ ½ / sqrt(1 + e^{2L}).
    """
    if phi_norm < 0:
        raise OutOfDomain(f"norme négative : {phi_norm}")
    bound = schwarzian_domain(L)
    if phi_norm >= bound:
        raise OutOfDomain(f"‖φ‖ = {phi_norm} ≥ {bound:.6g} pour L = {L}")
    return 2.0 * math.atan(2.0 * phi_norm * math.exp(L) / math.sqrt(1.0 - 4.0 * phi_norm ** 2))


def schwarzian_threshold(value: float) -> float:
    """
    G(r) : solution de F_{L(r)}(x) = r avec L(r) = r / cos r.

    Lève:
    OutOfRange: Si r ∉ (0, r(1)].
    """
    if not 0.0 < value <= r(1.0) + 1e-15:
        raise OutOfRange(f"r doit être dans (0, r(1)], reçu {value}")
    L = L_of_r(value)
    upper = schwarzian_domain(L) * (1.0 - 1e-15)
    return bisect(lambda x: schwarzian_to_roundness(x, L) - value, 0.0, upper,
                  xtol=BISECT_TOL, maxiter=500)


@dataclass(frozen=True)
class ThresholdQuery:
    """Requête (L, θ, rondeur éventuelle) comparée au seuil r_L(θ)."""
    L: float
    theta: float = math.pi / 2
    roundness: Optional[float] = None

    def __post_init__(self):
        if not self.L > 0:
            raise OutOfRange(f"L doit être positif, reçu {self.L}")
        if not 0.0 < self.theta <= math.pi / 2:
            raise OutOfRange(f"θ doit être dans (0, π/2], reçu {self.theta}")

    @property
    def threshold(self) -> float:
        return r_L(self.theta, self.L)

    def verdict(self) -> str:
        """Verdict garanti si la rondeur est sous le seuil, UNKNOWN sinon."""
        if self.roundness is None:
            return UNKNOWN
        return VERDICT_GUARANTEED if self.roundness < self.threshold else UNKNOWN


@dataclass
class ClassicalBoundsReport:
    inputs: Dict[str, Optional[float]]
    hypotheses: Dict[str, str]
    implied: Dict[str, Optional[float]]
    not_critical_entropy: str
    proper_affine_action: str
    teich_exponential: float = field(default_factory=lambda: math.exp(TEICH_THRESHOLD))


def classical_bounds_report(schwarzian_norm: Optional[float] = None,
                            teich_distance: Optional[float] = None,
                            quasicircle_K: Optional[float] = None) -> ClassicalBoundsReport:
    """
    Applique les chaînes K → d_T → ‖φ‖ aux scalaires fournis.

    K < 1.05 < e^{0.049} donne d_T ≤ log K < 0.049, puis
    ‖φ‖ ≤ (3/2) d_T < 0.0735 < 0.0739. Les conclusions sont garanties dès
    qu'un maillon est satisfait ; une valeur nulle (lieu fuchsien) ou au-delà
    d'un seuil laisse le maillon à UNKNOWN.

    Paramètres:
    schwarzian_norm (float, optionnel): ‖φ‖_∞.
    teich_distance (float, optionnel): Distance de Teichmüller d_T.
    quasicircle_K (float, optionnel): Constante de quasi-cercle K.

    Retourne:
    ClassicalBoundsReport: Hypothèses vérifiées, bornes induites et conclusions.
    """
    inputs = {"schwarzian_norm": schwarzian_norm, "teich_distance": teich_distance,
              "quasicircle_K": quasicircle_K}
    if all(v is None for v in inputs.values()):
        logging.warning("Aucune donnée fournie au rapport des bornes classiques")

    implied_teich = teich_distance
    if quasicircle_K is not None and quasicircle_K > 1.0:
        k_bound = math.log(quasicircle_K)
        implied_teich = k_bound if implied_teich is None else min(implied_teich, k_bound)
    implied_schwarzian = schwarzian_norm
    if implied_teich is not None and implied_teich > 0:
        t_bound = SCHWARZIAN_PER_TEICH * implied_teich
        implied_schwarzian = t_bound if implied_schwarzian is None else min(implied_schwarzian, t_bound)

    def check(value, threshold, floor=0.0):
        if value is None:
            return UNKNOWN
        return VERDICT_GUARANTEED if floor < value < threshold else UNKNOWN

    hypotheses = {
        "quasicircle": check(quasicircle_K, K_QUASICIRCLE, floor=1.0),
        "teichmuller": check(implied_teich, TEICH_THRESHOLD),
        "schwarzian": check(implied_schwarzian, SCHWARZIAN_THRESHOLD),
    }
    conclusion = VERDICT_GUARANTEED if VERDICT_GUARANTEED in hypotheses.values() else UNKNOWN
    logging.info(f"Bornes classiques : {hypotheses} -> {conclusion}")
    return ClassicalBoundsReport(
        inputs=inputs,
        hypotheses=hypotheses,
        implied={"teich_distance": implied_teich, "schwarzian_norm": implied_schwarzian},
        not_critical_entropy=conclusion,
        proper_affine_action=conclusion,
    )


def threshold_table(L_grid: Iterable[float],
                    theta_grid: Iterable[float] = (math.pi / 2,)) -> pd.DataFrame:
    """
    Tabule r_L(θ), r(L), la borne supérieure et la rondeur de l'horocycle.

    Les valeurs hors domaine sont laissées à NaN.

    Retourne:
    pd.DataFrame: Une ligne par couple (L, θ).
    """
    rows: List[Dict[str, float]] = []
    thetas = list(theta_grid)
    for L in L_grid:
        try:
            bcy = bcy_upper_bound(L)
        except OutOfDomain:
            bcy = np.nan
        horo = horocycle_roundness(L)
        for theta in thetas:
            threshold = r_L(theta, L)
            rows.append({
                "L": float(L),
                "theta": float(theta),
                "r_L": threshold,
                "r": r(L),
                "bcy_upper_bound": bcy,
                "horocycle_roundness": horo,
                "horocycle_below_threshold": bool(horo < threshold),
            })
    logging.info(f"Table des seuils : {len(rows)} lignes")
    return pd.DataFrame(rows)
