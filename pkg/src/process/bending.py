"""Déformations par pliage et variation de la longueur complexe.

ρ_{zμ}(γ) = R(ξ(m₁), za₁)···R(ξ(mₙ), zaₙ) ρ(γ), où m₁, …, mₙ sont les
feuilles de μ coupant [x₀, γx₀] dans l'image fuchsienne, ordonnées depuis x₀
et orientées pour laisser x₀ à leur gauche, et ξ transporte une feuille de la
représentation fuchsienne de base vers la représentation courante.
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from src.process.groups import (
    GENUS2_RELATOR, Representation, Word, WordBattery, as_word,
    is_usable_loxodromic, rectangular_torus_fuchsian, separating_curve_word
)
from src.process.lamination import (
    ArcCrossing, FiniteLamination, InvariantLamination, Leaf, arc_crossings,
    geodesics_cross, point_leaf_distance
)
from src.process.moebius import (
    BoundaryPoint, Geodesic, MoebiusElement, apply_h2, apply_to_geodesic, axis,
    axis_rotation, complex_length, cosh_complex_distance, fixed_points,
    im_cosh_distance, normalizer
)
from src.utils.exceptions import (
    BasepointOnLeaf, EmptyBattery, EndpointOnLeaf, NormalizationFailure, NotLoxodromic
)
from src.utils.static import (
    EPS_PT, EPS_RELATOR, FD_STEP, SEPARATION_FAIL, SEPARATION_NA, SEPARATION_PASS,
    VERDICT_CONSISTENT, VERDICT_REFUTED
)

__all__ = [
    "BendingStage", "LengthCurve", "Representation", "ShorteningReport", "Word",
    "amalgam_representation", "axis_crossings",
    "bend_representation", "bending_pair_separation_check", "boundary_transport",
    "complex_length_curve", "crossing_leaves", "dlength_fd_oracle", "dlength_formula",
    "real_length_variation", "shortening_check", "two_sided_torus",
]


@dataclass(frozen=True, eq=False)
class BendingStage:
    """Une étape de pliage : lamination, paramètre complexe et représentation de départ."""
    lamination: InvariantLamination
    z: complex
    parent: Representation


def _same_group(first: Representation, second: Representation) -> bool:
    if first is second:
        return True
    if first.generator_names != second.generator_names:
        return False
    return all(first.generators[k].is_close(second.generators[k], 1e-12) for k in first.generators)


def _check_lamination(rho: Representation, mu: InvariantLamination) -> None:
    if not _same_group(rho.fuchsian_base, mu.rho):
        raise ValueError("la lamination doit être invariante sous la représentation fuchsienne de base")


def _top_point(g: Geodesic) -> complex:
    if g.start.is_infinite or g.end.is_infinite:
        finite = g.end if g.start.is_infinite else g.start
        return complex(finite.value.real, 1.0)
    a, b = g.start.value.real, g.end.value.real
    return complex((a + b) / 2, abs(b - a) / 2)


def boundary_transport(rho: Representation, mu: InvariantLamination, leaf: Leaf) -> Geodesic:
    """
    Image ξ_ρ(m) d'une feuille de l'image fuchsienne.

    Pour une feuille ρ₀(g)·axe(ρ₀(h)), l'image est ρ(g)·axe(ρ(h)) ; sans mot
    stabilisateur, les cocycles des étapes de pliage sont appliqués au point
    de la feuille le plus haut.
    """
    if rho.base is None:
        return leaf.geodesic
    stabilizer = mu.stabilizers[leaf.base_index] if leaf.base_index is not None else None
    if stabilizer is not None and leaf.word is not None:
        base_axis = axis(mu.rho.evaluate(stabilizer))
        same = base_axis.start == mu.base_leaves[leaf.base_index].geodesic.start
        image = apply_to_geodesic(rho.evaluate(leaf.word), axis(rho.evaluate(stabilizer)))
        if same == leaf.reversed:
            image = image.reversed()
        return image
    stage = rho.stages[-1]
    inner = boundary_transport(stage.parent, mu, leaf)
    x0 = rho.fuchsian_base.basepoint
    local = stage.lamination.leaves_near(x0, _top_point(leaf.geodesic))
    Z = _stage_product(stage.parent, stage.lamination,
                       arc_crossings(local, x0, _top_point(leaf.geodesic), endpoints="half"),
                       stage.z)
    return apply_to_geodesic(Z, inner)


def _stage_product(parent: Representation, mu: InvariantLamination,
                   crossings: List[ArcCrossing], z: complex) -> MoebiusElement:
    matrix = np.eye(2, dtype=complex)
    for c in crossings:
        geodesic = boundary_transport(parent, mu, c.leaf)
        matrix = matrix @ axis_rotation(geodesic, z * c.weight).matrix
    return MoebiusElement(matrix)


@lru_cache(maxsize=256)
def generator_crossings(mu: InvariantLamination, letter: str) -> Tuple[ArcCrossing, ...]:
    """
    Feuilles coupant [x₀, ρ₀(s)x₀] pour une lettre s, dans l'ordre depuis x₀.

    Lève:
    BasepointOnLeaf: Si x₀ est sur une feuille.
    """
    base = mu.rho
    x0 = base.basepoint
    for leaf in mu.base_leaves:
        if point_leaf_distance(x0, leaf.geodesic) <= EPS_PT:
            raise BasepointOnLeaf(f"point base {x0} sur la feuille {leaf.base_index}")
    target = apply_h2(base.generator(letter), x0)
    try:
        return tuple(arc_crossings(mu.leaves_near(x0, target), x0, target))
    except EndpointOnLeaf as e:
        raise BasepointOnLeaf(f"point base {x0} sur le support : {e}")


def crossing_leaves(rho: Representation, mu: InvariantLamination,
                    word: Union[Word, str]) -> List[ArcCrossing]:
    """
    Feuilles de μ coupant [x₀, γx₀] dans l'image fuchsienne.

    Les listes par générateur sont translatées le long du mot ; une feuille
    traversée un nombre pair de fois par le chemin brisé ne sépare pas x₀ de
    γx₀ et disparaît.

    Retourne:
    list[ArcCrossing]: Feuilles orientées (x₀ à gauche), triées depuis x₀.
    """
    _check_lamination(rho, mu)
    word = as_word(word)
    base = mu.rho
    parity: Dict[Tuple, Leaf] = {}
    prefix = Word()
    prefix_matrix = MoebiusElement.identity()
    for letter in word:
        for crossing in generator_crossings(mu, letter):
            leaf = crossing.leaf
            moved = Leaf(apply_to_geodesic(prefix_matrix, leaf.geodesic), leaf.weight,
                         prefix * (leaf.word or Word()), leaf.base_index, leaf.reversed)
            key = moved.key()
            if key in parity:
                del parity[key]
            else:
                parity[key] = moved
        prefix = prefix * Word(letter)
        prefix_matrix = prefix_matrix @ base.generator(letter)
    if not parity:
        return []
    x0 = base.basepoint
    return arc_crossings(FiniteLamination(list(parity.values()), validate=False),
                         x0, apply_h2(prefix_matrix, x0))


def axis_crossings(rho: Representation, mu: InvariantLamination,
                   word: Union[Word, str]) -> List[ArcCrossing]:
    """
    Feuilles de ``crossing_leaves`` qui coupent l'axe fuchsien de γ.

    Une feuille m qui coupe [x₀, γx₀] sans couper l'axe y figure avec une
    translatée γᵏm d'orientation opposée ; leurs termes s'annulent et sont omis.

    Retourne:
    list[ArcCrossing]: Vide si γ est parabolique dans la base fuchsienne.
    """
    word = as_word(word)
    fuchsian = rho.fuchsian_base.evaluate(word)
    if not is_usable_loxodromic(fuchsian):
        return []
    fuchsian_axis = axis(fuchsian)
    return [c for c in crossing_leaves(rho, mu, word)
            if geodesics_cross(fuchsian_axis, c.leaf.geodesic).crosses]


def bend_representation(rho: Representation, mu: InvariantLamination, z: complex,
                        tol: float = EPS_RELATOR) -> Representation:
    """
    Pliage ρ_{zμ} d'une représentation (fuchsienne ou déjà pliée).

    Paramètres:
    rho (Representation): Représentation de départ.
    mu (InvariantLamination): Lamination invariante sous la base fuchsienne de ρ.
    z (complex): Paramètre ; z réel tord, z imaginaire plie.
    tol (float): Tolérance sur les relateurs.

    Retourne:
    Representation: La représentation pliée, avec son historique d'étapes.

    Lève:
    RelatorViolation: Si un relateur n'est plus satisfait.
    BasepointOnLeaf: Si le point base est sur le support de μ.
    """
    z = complex(z)
    if z == 0 or mu.is_empty:
        return rho
    _check_lamination(rho, mu)
    generators = {}
    try:
        for name in rho.generator_names:
            Z = _stage_product(rho, mu, list(generator_crossings(mu, name)), z)
            generators[name] = Z @ rho.generators[name]
    except BasepointOnLeaf:
        raise
    except Exception as e:
        logging.error(f"Erreur lors du pliage de {rho.name} (z = {z}): {e}")
        raise
    bent = Representation(generators, rho.relators, rho.fuchsian_base.basepoint,
                          name=f"{rho.name}|{z:.4g}", base=rho.fuchsian_base,
                          stages=rho.stages + (BendingStage(mu, z, rho),))
    bent.check_relators(tol)
    return bent


@dataclass
class LengthCurve:
    """
    z ↦ L(ρ_{zμ}(γ)), prolongée continûment depuis z = 0.

    La branche de la partie imaginaire est suivie pas à pas le long du
    segment [0, z] (pas au plus ``max_step``).
    """
    rho: Representation
    lamination: InvariantLamination
    word: Word
    max_step: float = 0.05
    initial: complex = field(init=False)

    def __post_init__(self):
        self.word = as_word(self.word)
        self.initial = complex_length(self.rho.evaluate(self.word))

    def _raw(self, z: complex) -> complex:
        element = bend_representation(self.rho, self.lamination, z).evaluate(self.word)
        try:
            return complex_length(element)
        except NotLoxodromic:
            raise NotLoxodromic(f"ρ_(zμ)({self.word}) non loxodromique en z = {z}")

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        steps = max(1, math.ceil(abs(z) / self.max_step))
        previous = self.initial
        for k in range(1, steps + 1):
            value = self._raw(z * k / steps)
            turns = round((previous.imag - value.imag) / (2 * math.pi))
            previous = complex(value.real, value.imag + 2 * math.pi * turns)
        return previous


def complex_length_curve(rho: Representation, mu: InvariantLamination,
                         word: Union[Word, str]) -> LengthCurve:
    """
    Courbe de longueur complexe L_γ(z).

    Lève:
    NotLoxodromic: Si ρ(γ) n'est pas loxodromique.
    """
    _check_lamination(rho, mu)
    return LengthCurve(rho, mu, as_word(word))


def dlength_formula(rho: Representation, mu: InvariantLamination,
                    word: Union[Word, str]) -> complex:
    """
    L'_γ(0) = Σ a_j cosh σ(axe(ρ(γ)), ξ(m_j)).

    La somme porte sur les feuilles coupant [x₀, γx₀] et l'axe de γ, orientées
    de gauche à droite ; l'axe de ρ(γ) est orienté vers son point attractif.

    Lève:
    NotLoxodromic: Si ρ(γ) n'est pas loxodromique.
    """
    word = as_word(word)
    gamma_axis = axis(rho.evaluate(word))
    total = 0j
    for crossing in axis_crossings(rho, mu, word):
        total += crossing.weight * cosh_complex_distance(
            gamma_axis, boundary_transport(rho, mu, crossing.leaf))
    return total


@dataclass
class DerivativeEstimate:
    value: complex
    error: float
    order: float
    step: float


def dlength_fd_oracle(rho: Representation, mu: InvariantLamination, word: Union[Word, str],
                      direction: complex = 1.0, step: float = FD_STEP) -> DerivativeEstimate:
    """
    Dérivée de t ↦ L_γ(t·direction) en 0 par différences centrées et
    extrapolation de Richardson sur trois pas (h, h/2, h/4).

    Retourne:
    DerivativeEstimate: Valeur, estimation d'erreur et ordre de convergence
    observé (NaN si les différences sont au niveau du bruit).
    """
    curve = complex_length_curve(rho, mu, word)
    direction = complex(direction)

    def central(h):
        return (curve(h * direction) - curve(-h * direction)) / (2 * h)

    d1, d2, d3 = central(step), central(step / 2), central(step / 4)
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d3 - d2) / 3
    numerator, denominator = abs(d1 - d2), abs(d2 - d3)
    order = math.log2(numerator / denominator) if denominator > 1e-14 and numerator > 1e-14 else math.nan
    return DerivativeEstimate(r2, abs(r2 - r1), order, step)


def real_length_variation(rho: Representation, beta: InvariantLamination,
                          word: Union[Word, str]) -> float:
    """
    dℓ_γ dans la direction -iβ : Σ a_j Im cosh σ(axe(ρ(γ)), ξ(m_j)).

    Lève:
    ValueError: Si les poids de β ne sont pas réels.
    """
    if any(abs(complex(w).imag) > 0 for w in beta.weights):
        raise ValueError("les poids de β doivent être réels")
    word = as_word(word)
    gamma_axis = axis(rho.evaluate(word))
    total = 0.0
    for crossing in axis_crossings(rho, beta, word):
        total += crossing.weight.real * im_cosh_distance(
            gamma_axis, boundary_transport(rho, beta, crossing.leaf))
    return total


@dataclass
class ShorteningReport:
    """Signe de dℓ_γ(-iβ) sur une batterie : max global et max sur les mots transverses."""
    max_variation: float
    witness: Optional[str]
    max_crossing: float
    crossing_witness: Optional[str]
    crossing_words: int
    words: int
    verdict: str


def shortening_check(rho: Representation, beta: InvariantLamination, battery: WordBattery,
                     tol: float = 1e-12, strict: float = -1e-8) -> ShorteningReport:
    """
    Vérifie que le pliage raccourcit toutes les géodésiques fermées de la batterie.

    dℓ_γ ≤ ``tol`` pour tout mot loxodromique, et dℓ_γ ≤ ``strict`` pour les
    mots dont l'axe coupe le support de β.

    Retourne:
    ShorteningReport: CONSISTENT, ou REFUTED avec le mot témoin.

    Lève:
    ValueError: Si les poids de β ne sont pas réels.
    EmptyBattery: Si aucun mot de la batterie n'est loxodromique.
    """
    worst, witness = -math.inf, None
    worst_crossing, crossing_witness = -math.inf, None
    words = crossing_words = 0
    for word, element in battery.elements(rho):
        if not is_usable_loxodromic(element):
            continue
        words += 1
        value = real_length_variation(rho, beta, word)
        if value > worst:
            worst, witness = value, str(word)
        if axis_crossings(rho, beta, word):
            crossing_words += 1
            if value > worst_crossing:
                worst_crossing, crossing_witness = value, str(word)
    if not words:
        raise EmptyBattery("aucun mot loxodromique dans la batterie")
    refuted = worst > tol or worst_crossing > strict
    verdict = VERDICT_REFUTED if refuted else VERDICT_CONSISTENT
    logging.info(f"Raccourcissement : max {worst:.3e}, max transverse {worst_crossing:.3e} "
                 f"({crossing_words}/{words} mots transverses) -> {verdict}")
    return ShorteningReport(float(worst), witness, float(worst_crossing), crossing_witness,
                            crossing_words, words, verdict)


@dataclass
class SeparationReport:
    verdict: str
    margin: float
    witness: Optional[str]
    gap: float
    right: int
    left: int
    samples: int


def _boundary_side(T: MoebiusElement, p: BoundaryPoint) -> int:
    if p.is_infinite:
        if abs(T.c) < 1e-14:
            return 0
        image = T.a / T.c
    else:
        den = T.c * p.value + T.d
        if abs(den) < 1e-14:
            return 0
        image = (T.a * p.value + T.b) / den
    if abs(image) < 1e-12 or abs(image) > 1e12:
        return 0
    return 1 if image.real > 0 else -1


def bending_pair_separation_check(rho_bent: Representation, mu: InvariantLamination,
                                  leaf: Leaf, battery: WordBattery) -> SeparationReport:
    """
    Vérifie que les points limites à droite (resp. à gauche) d'une ligne de
    pliage restent à droite (resp. à gauche) après normalisation.

    La feuille pliée est envoyée sur (0, ∞) puis tournée pour que le plus
    grand secteur vide de points limites soit centré sur la demi-droite
    imaginaire positive ; chaque point doit alors avoir une partie réelle du
    signe de son côté dans l'image fuchsienne.

    Paramètres:
    rho_bent (Representation): Représentation pliée.
    mu (InvariantLamination): Lamination portant la feuille.
    leaf (Leaf): Feuille de l'image fuchsienne, avec sa provenance.
    battery (WordBattery): Mots dont les points fixes échantillonnent l'ensemble limite.

    Retourne:
    SeparationReport: PASS, FAIL (avec témoin) ou NOT APPLICABLE.

    Lève:
    NormalizationFailure: Si aucun secteur vide n'a un angle au moins π.
    """
    base = rho_bent.fuchsian_base
    T0 = normalizer(leaf.geodesic)
    T = normalizer(boundary_transport(rho_bent, mu, leaf))
    points: List[Tuple[str, int, complex]] = []
    for word, element in battery.elements(rho_bent):
        if not is_usable_loxodromic(element):
            continue
        fuchsian = base.evaluate(word)
        if not is_usable_loxodromic(fuchsian):
            continue
        side = _boundary_side(T0, fixed_points(fuchsian)[0])
        if side == 0:
            continue
        attracting = fixed_points(element)[0]
        if attracting.is_infinite:
            continue
        den = T.c * attracting.value + T.d
        if abs(den) < 1e-14:
            continue
        w = (T.a * attracting.value + T.b) / den
        if abs(w) < 1e-12 or abs(w) > 1e12:
            continue
        points.append((str(word), side, w))
    right = sum(1 for _, s, _ in points if s > 0)
    left = len(points) - right
    if not points or all(abs(w.imag) <= 1e-9 * abs(w) for _, _, w in points):
        logging.info("Séparation : configuration réelle, test non applicable")
        return SeparationReport(SEPARATION_NA, 0.0, None, math.pi, right, left, len(points))
    angles = sorted(cmath.phase(w) % (2 * math.pi) for _, _, w in points)
    # Angles triés : le dernier secteur se referme sur le premier angle.
    gaps = [angles[k + 1] - angles[k] for k in range(len(angles) - 1)]
    gaps.append(angles[0] + 2 * math.pi - angles[-1])
    k = int(np.argmax(gaps))
    gap = gaps[k]
    if gap < math.pi:
        raise NormalizationFailure(f"plus grand secteur vide {gap:.6f} < π")
    bisector = angles[k] + gap / 2
    rotation = cmath.exp(1j * (math.pi / 2 - bisector))
    margin, witness = math.inf, None
    for word, side, w in points:
        value = side * (rotation * w).real / abs(w)
        if value < margin:
            margin, witness = value, word
    verdict = SEPARATION_PASS if margin > 0 else SEPARATION_FAIL
    logging.info(f"Séparation : {verdict}, marge {margin:.3e} ({len(points)} points)")
    return SeparationReport(verdict, float(margin), witness if verdict == SEPARATION_FAIL else None,
                            float(gap), right, left, len(points))


@dataclass
class TwoSidedExample:
    """Tore troué plié de θ le long de a d'un côté et de b de l'autre."""
    fuchsian: Representation
    rho: Representation
    plus: InvariantLamination
    minus: InvariantLamination
    theta: float


def two_sided_torus(theta: float = 0.3) -> TwoSidedExample:
    """
    Exemple plié des deux côtés.

    Avec tr A = 2 sqrt(1 + cos²(θ/2)), plier de -iθ le long des relevés de
    l'axe de a égalise tr A et tr B' ; la symétrie échangeant a et b montre
    que l'autre face est pliée de θ le long de b.
    """
    trace_a = 2.0 * math.sqrt(1.0 + math.cos(theta / 2) ** 2)
    fuchsian = rectangular_torus_fuchsian(trace_a)
    plus = InvariantLamination.from_words(fuchsian, ["a"], theta)
    minus = InvariantLamination.from_words(fuchsian, ["b"], theta)
    rho = bend_representation(fuchsian, plus, -1j)
    logging.info(f"Tore plié des deux côtés : tr A = {rho.generators['a'].trace:.6g}, "
                 f"tr B = {rho.generators['b'].trace:.6g}")
    return TwoSidedExample(fuchsian, rho, plus, minus, theta)


def amalgam_representation(rho: Representation, z: complex, sign: int = 1) -> Representation:
    """
    Description amalgamée du pliage le long de la courbe séparante du genre 2.

    ρ est conservée sur ⟨a, u⟩ et conjuguée par A = R(axe ρ([a, u]), ±z) sur
    ⟨v, q⟩ ; les générateurs a, b, c, d sont reconstruits par
    b = q v u, c = q u et d = v⁻¹ u.
    """
    words = separating_curve_word()
    A = axis_rotation(axis(rho.evaluate(words["curve"])), sign * complex(z))
    A_inv = A.inverse()
    a, u = (rho.evaluate(w) for w in words["left"])
    v, q = (A @ rho.evaluate(w) @ A_inv for w in words["right"])
    generators = {"a": a, "b": q @ v @ u, "c": q @ u, "d": v.inverse() @ u}
    return Representation(generators, relators=(Word(GENUS2_RELATOR),),
                          basepoint=rho.basepoint, name=f"amalgam({z:.4g})")
