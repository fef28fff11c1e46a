"""Laminations géodésiques mesurées à nombre fini de feuilles.

Les feuilles vivent dans le demi-plan supérieur (extrémités dans R ∪ {∞}).
Une :class:`InvariantLamination` est donnée par des feuilles de base et la
représentation fuchsienne qui les déplace ; ses feuilles proches d'une région
sont obtenues par parcours d'orbite.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.process.groups import (
    Representation, Word, as_word, orbit_ball, translation_length
)
from src.process.moebius import (
    BoundaryPoint, Geodesic, MoebiusElement, apply_h2, apply_to_geodesic, axis,
    cosh_complex_distance, h2_distance, normalizer, segment_frame
)
from src.utils.exceptions import (
    DegenerateConcurrentLeaves, EndpointOnLeaf, SharedEndpoint
)
from src.utils.static import DEFAULT_DEPTH, EPS_PT, MAX_ORBIT_DEPTH

# Tolérance sur l'égalité des distances entre feuilles et la longueur L.
DISTANCE_TOL = 1e-9


@dataclass(frozen=True)
class Leaf:
    """
    Feuille pondérée.

    ``word`` et ``base_index`` identifient la feuille comme translaté
    ρ(word)·m_k d'une feuille de base ; ``reversed`` indique que son
    orientation est l'opposée de celle de ce translaté.
    """
    geodesic: Geodesic
    weight: complex
    word: Optional[Word] = None
    base_index: Optional[int] = None
    reversed: bool = False

    def __post_init__(self):
        if self.weight == 0:
            raise ValueError("une feuille doit avoir un poids non nul")
        if not self.geodesic.is_real:
            raise ValueError(f"extrémités non réelles : {self.geodesic}")

    __hash__ = None

    def reoriented(self) -> "Leaf":
        return replace(self, geodesic=self.geodesic.reversed(), reversed=not self.reversed)

    def key(self) -> Tuple:
        return geodesic_key(self.geodesic)


def _point_key(p: BoundaryPoint, digits: int = 9) -> float:
    # Coordonnée angulaire 2·arctan(x) sur le cercle, ∞ en π.
    if p.is_infinite:
        return round(math.pi, digits)
    angle = 2.0 * math.atan(p.value.real)
    if angle <= -math.pi + 10 ** -digits:
        angle = math.pi
    return round(angle, digits) + 0.0


def geodesic_key(g: Geodesic) -> Tuple:
    """Clé non orientée d'une géodésique réelle."""
    return tuple(sorted((_point_key(g.start), _point_key(g.end))))


def _order_value(p: BoundaryPoint) -> float:
    return math.inf if p.is_infinite else p.value.real


@dataclass(frozen=True)
class Crossing:
    """Résultat d'un test d'entrelacement ; vrai si et seulement si les géodésiques se coupent."""
    crosses: bool
    shared_endpoint: bool = False

    def __bool__(self) -> bool:
        return self.crosses


def geodesics_cross(g: Geodesic, h: Geodesic) -> Crossing:
    """
    Teste si les paires d'extrémités de g et h s'entrelacent sur R ∪ {∞}.

    Une extrémité commune donne un résultat négatif marqué ``shared_endpoint``.
    """
    for x in (g.start, g.end):
        for y in (h.start, h.end):
            if x == y:
                return Crossing(False, True)
    lo, hi = sorted((_order_value(g.start), _order_value(g.end)))
    inside = [lo < _order_value(p) < hi for p in (h.start, h.end)]
    return Crossing(inside[0] != inside[1])


def leaf_distance(g: Geodesic, h: Geodesic) -> float:
    """
    Distance réelle entre deux feuilles ; 0 si elles se coupent ou sont asymptotes.
    """
    if geodesics_cross(g, h).crosses:
        return 0.0
    try:
        value = cosh_complex_distance(g, h)
    except SharedEndpoint:
        return 0.0
    return math.acosh(max(1.0, abs(value.real)))


def point_leaf_distance(z: complex, g: Geodesic) -> float:
    """Distance d'un point de H² à une géodésique."""
    w = apply_h2(normalizer(g), z)
    return math.asinh(abs(w.real) / w.imag)


@dataclass(frozen=True)
class GeodesicArc:
    """Segment géodésique de H² entre deux points distincts."""
    start: complex
    end: complex

    def __post_init__(self):
        object.__setattr__(self, "start", complex(self.start))
        object.__setattr__(self, "end", complex(self.end))
        if self.start.imag <= 0 or self.end.imag <= 0:
            raise ValueError("les extrémités d'un arc doivent être dans H²")
        if abs(self.start - self.end) <= EPS_PT * max(1.0, abs(self.start)):
            raise ValueError("arc dégénéré")

    @property
    def length(self) -> float:
        return h2_distance(self.start, self.end)


class FiniteLamination:
    """
    Famille finie de feuilles deux à deux disjointes.

    Paramètres:
    leaves (Sequence[Leaf]): Les feuilles.
    validate (bool): Vérifier l'absence de croisements et de doublons.

    Lève:
    ValueError: Si deux feuilles se coupent ou coïncident.
    """

    def __init__(self, leaves: Sequence[Leaf] = (), validate: bool = True):
        self.leaves: List[Leaf] = list(leaves)
        self._normalizers: Optional[np.ndarray] = None
        if validate:
            self._validate()

    @property
    def normalizers(self) -> np.ndarray:
        """Pile (n, 2, 2) des matrices réelles envoyant chaque feuille sur (0, ∞)."""
        if self._normalizers is None:
            self._normalizers = np.array([normalizer(leaf.geodesic).matrix.real
                                          for leaf in self.leaves]).reshape(-1, 2, 2)
        return self._normalizers

    def _validate(self) -> None:
        keys = set()
        for leaf in self.leaves:
            key = leaf.key()
            if key in keys:
                raise ValueError(f"feuille en double : {leaf.geodesic}")
            keys.add(key)
        for i, first in enumerate(self.leaves):
            for second in self.leaves[i + 1:]:
                if geodesics_cross(first.geodesic, second.geodesic):
                    raise ValueError(f"feuilles sécantes : {first.geodesic} et {second.geodesic}")

    def __len__(self) -> int:
        return len(self.leaves)

    def __iter__(self) -> Iterator[Leaf]:
        return iter(self.leaves)

    def scaled(self, factor: complex) -> "FiniteLamination":
        return FiniteLamination([replace(leaf, weight=leaf.weight * factor) for leaf in self.leaves],
                                validate=False)

    @classmethod
    def single(cls, start, end, weight: complex = 1.0) -> "FiniteLamination":
        return cls([Leaf(Geodesic.from_points(start, end), weight)])


@dataclass
class ArcCrossing:
    """Feuille orientée traversant un arc, paramètre d'abscisse et facteur de poids."""
    leaf: Leaf
    parameter: float
    factor: float = 1.0

    @property
    def weight(self) -> complex:
        return self.factor * self.leaf.weight


def as_lamination(mu: Union[FiniteLamination, Sequence[Leaf]]) -> FiniteLamination:
    return mu if isinstance(mu, FiniteLamination) else FiniteLamination(list(mu), validate=False)


def arc_crossings(mu: Union[FiniteLamination, Sequence[Leaf]], start: complex, end: complex,
               endpoints: str = "raise") -> List[ArcCrossing]:
    """Croisements triés de [start, end] ; ``endpoints="half"`` compte à demi-poids les feuilles portant une extrémité."""
    mu = as_lamination(mu)
    if not mu.leaves:
        return []
    frame, length = segment_frame(start, end)
    U = mu.normalizers @ frame.inverse().matrix.real
    alpha, beta, gamma, delta = U[:, 0, 0], U[:, 0, 1], U[:, 1, 0], U[:, 1, 1]
    # Images des extrémités i et i·e^d dans le repère de chaque feuille.
    y1 = math.exp(length)
    w0 = (alpha * 1j + beta) / (gamma * 1j + delta)
    w1 = (alpha * 1j * y1 + beta) / (gamma * 1j * y1 + delta)
    on0 = np.abs(w0.real) <= 1e-11 * np.abs(w0)
    on1 = np.abs(w1.real) <= 1e-11 * np.abs(w1)
    transverse = (w0.real > 0) != (w1.real > 0)
    found: List[ArcCrossing] = []
    for k in np.flatnonzero((on0 ^ on1) | (transverse & ~on0 & ~on1)):
        leaf = mu.leaves[k]
        if on0[k] or on1[k]:
            if endpoints == "raise":
                raise EndpointOnLeaf(f"extrémité d'arc sur la feuille {leaf.geodesic}")
            starts_left = w1[k].real > 0 if on0[k] else w0[k].real < 0
            oriented = leaf if starts_left else leaf.reoriented()
            found.append(ArcCrossing(oriented, 0.0 if on0[k] else length, 0.5))
            continue
        parameter = 0.5 * math.log(-beta[k] * delta[k] / (alpha[k] * gamma[k]))
        oriented = leaf if w0[k].real < 0 else leaf.reoriented()
        found.append(ArcCrossing(oriented, parameter))
    found.sort(key=lambda c: c.parameter)
    scale = max(1.0, length)
    for first, second in zip(found, found[1:]):
        if abs(first.parameter - second.parameter) <= 1e-12 * scale:
            raise DegenerateConcurrentLeaves(
                f"feuilles concourantes à l'abscisse {first.parameter:.12g}")
    return found


def leaves_crossing_arc(mu: Union[FiniteLamination, Sequence[Leaf]],
                        segment: GeodesicArc) -> List[Tuple[Leaf, float]]:
    """
    Feuilles coupant un arc, triées par abscisse curviligne.

    Chaque feuille est orientée de façon à laisser le début de l'arc à sa
    gauche : l'arc la traverse de gauche à droite.

    Paramètres:
    mu (FiniteLamination): La lamination.
    segment (GeodesicArc): L'arc.

    Retourne:
    list: Couples (feuille orientée, abscisse).

    Lève:
    EndpointOnLeaf: Si une extrémité de l'arc est sur une feuille transverse.
    DegenerateConcurrentLeaves: Si deux feuilles coupent l'arc au même point.
    """
    return [(c.leaf, c.parameter) for c in arc_crossings(mu, segment.start, segment.end)]


def transverse_measure(mu: Union[FiniteLamination, Sequence[Leaf]],
                       arc: GeodesicArc) -> complex:
    """Somme des poids des feuilles coupant l'arc, demi-poids pour une feuille portant une extrémité."""
    return sum((c.weight for c in arc_crossings(mu, arc.start, arc.end, endpoints="half")), 0j)


@dataclass(frozen=True, eq=False)
class InvariantLamination:
    """
    Lamination invariante sous une représentation fuchsienne.

    Paramètres:
    rho (Representation): Représentation fuchsienne qui déplace les feuilles.
    base_leaves (tuple[Leaf]): Représentants des classes d'orbite.
    stabilizers (tuple): Pour chaque feuille de base, le mot h_k dont elle est
    l'axe, ou None.
    depth (int): Longueur des mots énumérés par :meth:`expand`.
    max_depth (int, optionnel): Longueur maximale des mots explorés par la
    recherche d'orbite ; par défaut max(depth, MAX_ORBIT_DEPTH). La recherche
    s'arrête d'elle-même dès que l'orbite sort de la zone utile.
    """
    rho: Representation
    base_leaves: Tuple[Leaf, ...]
    stabilizers: Tuple[Optional[Word], ...] = ()
    depth: int = DEFAULT_DEPTH
    max_depth: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "base_leaves", tuple(self.base_leaves))
        stabilizers = tuple(self.stabilizers) or (None,) * len(self.base_leaves)
        if len(stabilizers) != len(self.base_leaves):
            raise ValueError("un stabilisateur (ou None) par feuille de base")
        object.__setattr__(self, "stabilizers",
                           tuple(None if s is None else as_word(s) for s in stabilizers))
        if not self.rho.is_fuchsian:
            raise ValueError("une lamination invariante exige une représentation fuchsienne")

    @classmethod
    def from_words(cls, rho: Representation, words: Sequence[Union[Word, str]],
                   weights: Union[complex, Sequence[complex]] = 1.0,
                   depth: int = DEFAULT_DEPTH,
                   max_depth: Optional[int] = None) -> "InvariantLamination":
        """
        Relevés des géodésiques fermées ρ(h_k) : feuille de base = axe de ρ(h_k).
        """
        words = [as_word(w) for w in words]
        if not isinstance(weights, (list, tuple, np.ndarray)):
            weights = [weights] * len(words)
        leaves = tuple(Leaf(axis(rho.evaluate(w)), complex(weight), Word(), k)
                       for k, (w, weight) in enumerate(zip(words, weights)))
        return cls(rho, leaves, tuple(words), depth, max_depth)

    @property
    def search_depth(self) -> int:
        return self.max_depth if self.max_depth is not None else max(self.depth, MAX_ORBIT_DEPTH)

    @property
    def is_empty(self) -> bool:
        return not self.base_leaves

    @property
    def weights(self) -> List[complex]:
        return [leaf.weight for leaf in self.base_leaves]

    def scaled(self, factor: complex) -> "InvariantLamination":
        leaves = tuple(replace(leaf, weight=leaf.weight * factor) for leaf in self.base_leaves)
        return InvariantLamination(self.rho, leaves, self.stabilizers, self.depth, self.max_depth)

    def translate(self, word: Union[Word, str], index: int) -> Leaf:
        """Feuille ρ(word)·m_index avec sa provenance."""
        word = as_word(word)
        base = self.base_leaves[index]
        geodesic = apply_to_geodesic(self.rho.evaluate(word), base.geodesic)
        return Leaf(geodesic, base.weight, word, index)

    def _search_radius(self, center: complex, radius: float) -> float:
        extra = 0.0
        for leaf, stabilizer in zip(self.base_leaves, self.stabilizers):
            reach = point_leaf_distance(center, leaf.geodesic)
            if stabilizer is not None:
                reach += translation_length(self.rho, stabilizer) / 2
            extra = max(extra, reach)
        return radius + extra

    def leaves_in_ball(self, center: complex, radius: float,
                       strict: bool = True) -> FiniteLamination:
        """
        Toutes les feuilles de l'orbite à distance au plus ``radius`` de ``center``.

        Lève:
        InsufficientDepth: Si la profondeur d'orbite peut tronquer le résultat.
        """
        if self.is_empty:
            return FiniteLamination()
        ball, _ = orbit_ball(self.rho, self._search_radius(center, radius), center,
                             depth=self.search_depth, strict=strict)
        seen: Dict[Tuple, Leaf] = {}
        for point in ball:
            for k, base in enumerate(self.base_leaves):
                geodesic = apply_to_geodesic(point.element, base.geodesic)
                key = geodesic_key(geodesic)
                if key in seen or point_leaf_distance(center, geodesic) > radius:
                    continue
                seen[key] = Leaf(geodesic, base.weight, point.word, k)
        return FiniteLamination(list(seen.values()))

    def leaves_near(self, p: complex, q: complex, strict: bool = True) -> FiniteLamination:
        """Feuilles pouvant couper le segment [p, q]."""
        return self.leaves_in_ball(p, h2_distance(p, q) + 1e-9, strict=strict)

    def expand(self, depth: Optional[int] = None) -> FiniteLamination:
        """Feuilles ρ(g)·m_k pour tous les mots g de longueur au plus ``depth``."""
        depth = self.depth if depth is None else depth
        seen: Dict[Tuple, Leaf] = {}
        layer = [Word()]
        letters = self.rho.generator_names + [g.upper() for g in self.rho.generator_names]
        for length in range(depth + 1):
            for word in layer:
                for k in range(len(self.base_leaves)):
                    leaf = self.translate(word, k)
                    seen.setdefault(leaf.key(), leaf)
            layer = [Word(w.letters + ch) for w in layer for ch in letters
                     if not (w.letters and w.letters[-1].swapcase() == ch)]
        return FiniteLamination(list(seen.values()))


def ray_point(origin: complex, angle: float, distance: float) -> complex:
    """Point à distance ``distance`` de ``origin`` dans la direction ``angle`` (0 = vers le haut)."""
    y = origin.imag
    lift = MoebiusElement.from_entries(math.sqrt(y), origin.real / math.sqrt(y), 0, 1 / math.sqrt(y))
    rotation = MoebiusElement.from_entries(math.cos(angle / 2), math.sin(angle / 2),
                                           -math.sin(angle / 2), math.cos(angle / 2))
    return apply_h2(lift @ rotation, 1j * math.exp(distance))


@dataclass
class RoundnessEstimate:
    value: float
    exact: bool
    witness: Optional[Tuple[complex, complex]] = None
    leaves: int = 0
    samples: int = 0


def l_roundness(mu: InvariantLamination, L: float, samples: int = 2000,
                spread: float = 3.0, seed: int = 0) -> RoundnessEstimate:
    """
    Borne inférieure de ‖μ‖_L, la plus grande mesure d'un arc de longueur < L.

    La borne combine le plus grand poids d'une feuille, les sommes de poids
    des paires de feuilles à distance < L et des arcs aléatoires issus de la
    boule de rayon ``spread`` autour du point base. Lorsque toutes les
    feuilles sont deux à deux à distance au moins L, un arc de longueur < L en
    coupe au plus une et la valeur est exacte.

    Lève:
    ValueError: Si L ≤ 0.
    InsufficientDepth: Si la profondeur d'orbite est insuffisante.
    """
    if not L > 0:
        raise ValueError(f"L doit être positif, reçu {L}")
    if mu.is_empty:
        return RoundnessEstimate(0.0, True)
    x0 = mu.rho.basepoint
    local = mu.leaves_in_ball(x0, spread + L)
    leaves = local.leaves
    best = max(abs(leaf.weight) for leaf in leaves) if leaves else max(abs(w) for w in mu.weights)
    witness = None
    exact = True
    for i, first in enumerate(leaves):
        for second in leaves[i + 1:]:
            if leaf_distance(first.geodesic, second.geodesic) < L - DISTANCE_TOL:
                exact = False
                best = max(best, abs(first.weight + second.weight))
    rng = np.random.default_rng(seed)
    length = L * (1.0 - 1e-9)
    for _ in range(samples if not exact else 0):
        start = ray_point(x0, rng.uniform(0, 2 * math.pi), spread * math.sqrt(rng.uniform()))
        end = ray_point(start, rng.uniform(0, 2 * math.pi), length)
        try:
            value = abs(transverse_measure(local, GeodesicArc(start, end)))
        except DegenerateConcurrentLeaves:
            continue
        if value > best:
            best, witness = value, (start, end)
    logging.info(f"‖μ‖_{L:.4g} ≥ {best:.6f} (exact : {exact}, {len(leaves)} feuilles)")
    return RoundnessEstimate(float(best), exact, witness, len(leaves), 0 if exact else samples)


def horocycle_lamination(L: float, depth: int = 64) -> InvariantLamination:
    """
    Lamination de plissage du plan au-dessus d'une ligne brisée inscrite dans
    un horocycle, d'arêtes de longueur L.

    Les feuilles sont les demi-cercles |w| = e^{nL}, perpendiculaires à
    l'axe imaginaire et espacées de L, de poids 2 arcsin(tanh(L/2)).
    """
    if not L > 0:
        raise ValueError(f"L doit être positif, reçu {L}")
    dilation = MoebiusElement.from_entries(math.exp(L / 2), 0, 0, math.exp(-L / 2))
    basepoint = math.exp(L / 2) * complex(math.cos(1.2), math.sin(1.2))
    rho = Representation({"a": dilation}, basepoint=basepoint, name=f"horocycle({L:.6g})")
    weight = 2.0 * math.asin(math.tanh(L / 2))
    return InvariantLamination(rho, (Leaf(Geodesic.from_points(-1.0, 1.0), weight, Word(), 0),),
                               (None,), depth)
