"""Groupes d'exemples, mots et échantillons d'orbites.

Les mots sont écrits en lettres minuscules pour les générateurs et en
majuscules pour leurs inverses : ``"aBAb"`` désigne a b⁻¹ a⁻¹ b.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from src.process.moebius import (
    BoundaryPoint, H3Point, MoebiusElement, complex_length, eigenvalues,
    fixed_points, h3_distance, poincare_extend
)
from src.utils.exceptions import (
    EmptyBattery, InsufficientDepth, InvalidSeparation, NotLoxodromic,
    RelatorViolation, WindowTooSmall
)
from src.utils.static import (
    DEFAULT_DEPTH, DEFAULT_MAX_WORD_LEN, EPS_LOX, EPS_RELATOR, MIN_TRANSLATION
)

GENERATOR_LETTERS = "abcdefghijklmnopqrstuvwxyz"

# Longueur de translation du côté de l'octogone régulier d'angle π/4.
OCTAGON_TRANSLATION = 2.0 * math.acosh(1.0 / math.tan(math.pi / 8))

GENUS2_RELATOR = "adCbADcB"
# Courbe séparante [a, u] et les deux sous-groupes de tores troués qu'elle borde.
GENUS2_SEPARATING_CURVE = "adCbABcD"
GENUS2_LEFT_SUBGROUP = ("a", "dCb")
GENUS2_RIGHT_SUBGROUP = ("dCbD", "cBcD")


@dataclass(frozen=True)
class Word:
    """Mot réduit du groupe libre (aucune simplification adjacente)."""
    letters: str = ""

    def __post_init__(self):
        for left, right in zip(self.letters, self.letters[1:]):
            if left != right and left.lower() == right.lower():
                raise ValueError(f"mot non réduit : {self.letters}")
        if not all(ch.isalpha() for ch in self.letters):
            raise ValueError(f"lettres invalides : {self.letters}")

    @classmethod
    def reduce(cls, text: str) -> "Word":
        """Réduction libre d'une chaîne quelconque."""
        stack: List[str] = []
        for ch in text:
            if stack and stack[-1] != ch and stack[-1].lower() == ch.lower():
                stack.pop()
            else:
                stack.append(ch)
        return cls("".join(stack))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[str]:
        return iter(self.letters)

    def __str__(self) -> str:
        return self.letters or "1"

    def __mul__(self, other: "Word") -> "Word":
        return Word.reduce(self.letters + as_word(other).letters)

    def inverse(self) -> "Word":
        return Word(self.letters[::-1].swapcase())

    def power(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return Word.reduce(base.letters * abs(n))

    @property
    def is_cyclically_reduced(self) -> bool:
        if len(self.letters) < 2:
            return True
        first, last = self.letters[0], self.letters[-1]
        return not (first != last and first.lower() == last.lower())

    def cyclic_reduction(self) -> "Word":
        letters = self.letters
        while len(letters) >= 2 and letters[0] != letters[-1] and letters[0].lower() == letters[-1].lower():
            letters = letters[1:-1]
        return Word(letters)


def as_word(word: Union[Word, str]) -> Word:
    return word if isinstance(word, Word) else Word.reduce(word)


@dataclass(frozen=True, eq=False)
class Representation:
    """
    Représentation d'un groupe de type fini dans PSL(2, C).

    ``base`` et ``stages`` conservent l'historique des pliages appliqués à
    une représentation fuchsienne (voir le module ``bending``).
    """
    generators: Dict[str, MoebiusElement]
    relators: Tuple[Word, ...] = ()
    basepoint: complex = 1j
    name: str = "representation"
    base: Optional["Representation"] = None
    stages: Tuple[Any, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "relators", tuple(as_word(w) for w in self.relators))
        object.__setattr__(self, "basepoint", complex(self.basepoint))
        if self.basepoint.imag <= 0:
            raise ValueError(f"point base hors de H² : {self.basepoint}")

    @property
    def generator_names(self) -> List[str]:
        return list(self.generators)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def fuchsian_base(self) -> "Representation":
        return self if self.base is None else self.base

    def generator(self, letter: str) -> MoebiusElement:
        element = self.generators[letter.lower()]
        return element.inverse() if letter.isupper() else element

    def evaluate(self, word: Union[Word, str]) -> MoebiusElement:
        """ρ(s₁…sₙ) = ρ(s₁)…ρ(sₙ)."""
        matrix = np.eye(2, dtype=complex)
        for letter in as_word(word):
            matrix = matrix @ self.generator(letter).matrix
        return MoebiusElement(matrix, normalize=False)

    __call__ = evaluate

    @property
    def is_fuchsian(self) -> bool:
        return all(g.is_real for g in self.generators.values())

    def relator_residuals(self) -> Dict[str, float]:
        residuals = {}
        for relator in self.relators:
            m = self.evaluate(relator).matrix
            eye = np.eye(2)
            residuals[str(relator)] = float(min(np.abs(m - eye).max(), np.abs(m + eye).max()))
        return residuals

    def check_relators(self, tol: float = EPS_RELATOR) -> Dict[str, float]:
        """
        Vérifie que chaque relateur vaut ± l'identité.

        Lève:
        RelatorViolation: Si un résidu dépasse ``tol``.
        """
        residuals = self.relator_residuals()
        for relator, residual in residuals.items():
            if residual > tol:
                raise RelatorViolation(f"relateur {relator} : résidu {residual:.3e}")
        return residuals

    def conjugate(self, h: MoebiusElement) -> "Representation":
        """Conjuguée h ρ h⁻¹ (sans historique de pliage)."""
        h_inv = h.inverse()
        return Representation(
            generators={k: h @ g @ h_inv for k, g in self.generators.items()},
            relators=self.relators,
            basepoint=self.basepoint,
            name=f"{self.name}^h",
        )


@dataclass
class WordBattery:
    """
    Batterie de mots réduits de longueur min_length à max_length.

    Paramètres:
    generator_count (int): Nombre k de générateurs (lettres a, b, ...).
    max_length (int): Longueur maximale.
    cyclically_reduced (bool): Ne garder que les mots cycliquement réduits.
    dedup (bool): Dédoublonner par égalité projective des matrices dans
    :meth:`elements`.
    """
    generator_count: int = 2
    max_length: int = DEFAULT_MAX_WORD_LEN
    cyclically_reduced: bool = True
    dedup: bool = False
    min_length: int = 1

    @property
    def letters(self) -> str:
        low = GENERATOR_LETTERS[:self.generator_count]
        return low + low.upper()

    def words(self) -> Iterator[Word]:
        """Énumère les mots par longueur croissante puis ordre lexicographique."""
        letters = self.letters
        layer: List[str] = [""]
        for length in range(1, self.max_length + 1):
            next_layer = []
            for prefix in layer:
                for ch in letters:
                    if prefix and prefix[-1] != ch and prefix[-1].lower() == ch.lower():
                        continue
                    next_layer.append(prefix + ch)
            layer = next_layer
            if length < self.min_length:
                continue
            for text in layer:
                word = Word(text)
                if self.cyclically_reduced and not word.is_cyclically_reduced:
                    continue
                yield word

    def expected_count(self) -> int:
        """Nombre exact de mots émis par :meth:`words`."""
        k = self.generator_count
        total = 0
        for n in range(max(1, self.min_length), self.max_length + 1):
            if self.cyclically_reduced:
                total += (2 * k - 1) ** n + 1 + (k - 1) * (1 + (-1) ** n)
            else:
                total += 2 * k * (2 * k - 1) ** (n - 1)
        return total

    def elements(self, rho: Representation) -> Iterator[Tuple[Word, MoebiusElement]]:
        seen = set()
        for word in self.words():
            element = rho.evaluate(word)
            if self.dedup:
                key = projective_key(element)
                if key in seen:
                    continue
                seen.add(key)
            yield word, element


def projective_key(M: MoebiusElement, digits: int = 6) -> Tuple[float, ...]:
    """Clé de hachage d'une classe projective ±M (signe normalisé, arrondi)."""
    flat = M.matrix.flatten()
    for entry in flat:
        if abs(entry) > 1e-9:
            if entry.real < -1e-9 or (abs(entry.real) <= 1e-9 and entry.imag < 0):
                flat = -flat
            break
    return tuple(np.round(np.concatenate([flat.real, flat.imag]), digits) + 0.0)


@dataclass
class OrbitEntry:
    word: Word
    attracting: BoundaryPoint
    repelling: BoundaryPoint
    translation_length: float


@dataclass
class OrbitSample:
    """Points fixes des mots loxodromiques d'une batterie."""
    entries: List[OrbitEntry] = field(default_factory=list)
    skipped: int = 0

    @property
    def points(self) -> List[BoundaryPoint]:
        return [e.attracting for e in self.entries]


def schottky_fuchsian(separation: float = 3.0) -> Representation:
    """
    Groupe de Schottky fuchsien libre de rang 2.

    A = diag(λ, 1/λ) et B = K A K⁻¹, où K est la rotation d'angle π/2 en i ;
    les axes sont (0, ∞) et (-1, 1).

    Paramètres:
    separation (float): λ, le facteur de dilatation de A.

    Retourne:
    Representation: Représentation libre (sans relateur).

    Lève:
    InvalidSeparation: Si λ ≤ 1 + √2 (les disques du ping-pong se chevauchent).
    """
    if not separation > 1.0 + math.sqrt(2.0):
        raise InvalidSeparation(f"λ = {separation} ≤ 1 + √2")
    A = MoebiusElement.from_entries(separation, 0, 0, 1.0 / separation)
    K = MoebiusElement.from_entries(1, -1, 1, 1)
    B = K @ A @ K.inverse()
    return Representation({"a": A, "b": B}, basepoint=0.2 + 1.1j, name=f"schottky({separation})")


def genus2_fuchsian() -> Representation:
    """
    Groupe de surface de genre 2 de l'octogone régulier d'angle π/4.

    Les côtés opposés sont appariés par les translations T_k = K^k T₀ K^{-k},
    T₀ = diag(e^{D/2}, e^{-D/2}), K la rotation d'angle π/4 autour de i.
    Le relateur est celui du cycle des sommets.
    """
    half = OCTAGON_TRANSLATION / 2
    T0 = np.diag([math.exp(half), math.exp(-half)]).astype(complex)
    c, s = math.cos(math.pi / 8), math.sin(math.pi / 8)
    K = np.array([[c, s], [-s, c]], dtype=complex)
    generators = {}
    rotation = np.eye(2, dtype=complex)
    for letter in "abcd":
        generators[letter] = MoebiusElement(rotation @ T0 @ np.linalg.inv(rotation))
        rotation = rotation @ K
    rho = Representation(generators, relators=(Word(GENUS2_RELATOR),),
                         basepoint=0.1 + 1.05j, name="genus2")
    rho.check_relators(1e-9)
    return rho


def separating_curve_word() -> Dict[str, Any]:
    """Mot de la courbe séparante du genre 2 et générateurs des deux côtés."""
    return {
        "curve": Word(GENUS2_SEPARATING_CURVE),
        "left": tuple(Word(w) for w in GENUS2_LEFT_SUBGROUP),
        "right": tuple(Word(w) for w in GENUS2_RIGHT_SUBGROUP),
    }


def rectangular_torus_fuchsian(trace_a: float = 2.0 * math.sqrt(2.0),
                               basepoint: complex = 0.3 + 1.2j) -> Representation:
    """
    Tore troué fuchsien à axes de générateurs perpendiculaires en i.

    Les traces x = tr A et y = tr B vérifient 1/x² + 1/y² = 1/4, de sorte que
    le commutateur est parabolique.
    """
    if not trace_a > 2.0:
        raise InvalidSeparation(f"tr A = {trace_a} ≤ 2")
    trace_b = 2.0 * trace_a / math.sqrt(trace_a ** 2 - 4.0)
    la = 2.0 * math.acosh(trace_a / 2)
    lb = 2.0 * math.acosh(trace_b / 2)
    A = MoebiusElement.from_entries(math.exp(la / 2), 0, 0, math.exp(-la / 2))
    B = MoebiusElement.from_entries(math.cosh(lb / 2), math.sinh(lb / 2),
                                    math.sinh(lb / 2), math.cosh(lb / 2))
    return Representation({"a": A, "b": B}, basepoint=basepoint,
                          name=f"torus({trace_a:.6g})")


def cyclic_group(multiplier: float = 2.0) -> Representation:
    """Groupe élémentaire ⟨diag(m, 1/m)⟩."""
    A = MoebiusElement.from_entries(multiplier, 0, 0, 1.0 / multiplier)
    return Representation({"a": A}, basepoint=1j, name=f"cyclic({multiplier})")


def translation_length(rho: Representation, word: Union[Word, str]) -> float:
    """
    Longueur de translation réelle ℓ = Re L = 2 ω₁.

    Lève:
    NotLoxodromic: Si ρ(γ) n'est pas loxodromique.
    """
    return complex_length(rho.evaluate(word)).real


def is_usable_loxodromic(M: MoebiusElement) -> bool:
    """Loxodromique avec une longueur de translation au moins MIN_TRANSLATION."""
    lam1, lam2 = eigenvalues(M)
    if abs(lam1) - abs(lam2) < EPS_LOX:
        return False
    return 2.0 * math.log(abs(lam1)) >= MIN_TRANSLATION


def limit_set_sample(rho: Representation, battery: WordBattery) -> OrbitSample:
    """
    Points fixes attractifs des mots loxodromiques d'une batterie.

    Retourne:
    OrbitSample: Entrées dédoublonnées à EPS_PT près, avec le nombre de mots
    ignorés (non loxodromiques ou paraboliques numériques).
    """
    sample = OrbitSample()
    for word, element in battery.elements(rho):
        if not is_usable_loxodromic(element):
            sample.skipped += 1
            continue
        attracting, repelling = fixed_points(element)
        if any(attracting == e.attracting for e in sample.entries):
            continue
        sample.entries.append(OrbitEntry(word, attracting, repelling,
                                         complex_length(element).real))
    logging.info(f"Échantillon de l'ensemble limite : {len(sample.entries)} points, "
                 f"{sample.skipped} mots ignorés")
    return sample


@dataclass
class OrbitPoint:
    word: Word
    element: MoebiusElement
    distance: float


def generator_slack(rho: Representation, basepoint: Optional[complex] = None) -> float:
    """max_s d(x₀, ρ(s) x₀) sur les générateurs."""
    x0 = H3Point.from_h2(rho.basepoint if basepoint is None else basepoint)
    return max(h3_distance(x0, poincare_extend(g, x0)) for g in rho.generators.values())


def orbit_ball(rho: Representation, radius: float, basepoint: Optional[complex] = None,
               depth: int = DEFAULT_DEPTH, strict: bool = True) -> Tuple[List[OrbitPoint], bool]:
    """
    Éléments γ avec d(x₀, ρ(γ)x₀) ≤ radius, par parcours en largeur.

    Les branches dont le déplacement dépasse ``radius`` plus le déplacement
    maximal d'un générateur sont élaguées ; les éléments sont dédoublonnés par
    égalité projective.

    Paramètres:
    rho (Representation): La représentation.
    radius (float): Rayon de la boule d'orbite.
    basepoint (complex, optionnel): Point base (par défaut celui de ρ).
    depth (int): Longueur maximale des mots explorés.
    strict (bool): Lever InsufficientDepth en cas de troncature.

    Retourne:
    tuple: (points de la boule triés par distance, drapeau de troncature).

    Lève:
    InsufficientDepth: Si ``strict`` et qu'un mot de longueur ``depth`` est
    encore dans la zone de recherche.
    """
    x0 = H3Point.from_h2(rho.basepoint if basepoint is None else basepoint)
    bound = radius + generator_slack(rho, basepoint)
    letters = rho.generator_names + [g.upper() for g in rho.generator_names]
    identity = MoebiusElement.identity()
    seen = {projective_key(identity)}
    found = [OrbitPoint(Word(), identity, 0.0)]
    frontier = deque([(Word(), identity)])
    truncated = False
    while frontier:
        word, element = frontier.popleft()
        if len(word) >= depth:
            truncated = True
            continue
        for letter in letters:
            if word.letters and word.letters[-1].swapcase() == letter:
                continue
            candidate = element @ rho.generator(letter)
            key = projective_key(candidate)
            if key in seen:
                continue
            distance = h3_distance(x0, poincare_extend(candidate, x0))
            if distance > bound:
                continue
            seen.add(key)
            new_word = Word(word.letters + letter)
            if distance <= radius:
                found.append(OrbitPoint(new_word, candidate, distance))
            frontier.append((new_word, candidate))
    if truncated:
        message = f"orbite tronquée à la profondeur {depth} (rayon {radius})"
        if strict:
            raise InsufficientDepth(message)
        logging.warning(message)
    found.sort(key=lambda p: p.distance)
    return found, truncated


@dataclass
class EntropyEstimate:
    value: float
    error: float
    window: Tuple[float, float]
    radii: List[float]
    counts: List[int]
    truncated: bool
    warnings: List[str] = field(default_factory=list)


def _complete_radius(distances: np.ndarray, lengths: np.ndarray, longest: int) -> float:
    """Plus petit déplacement d'un mot de longueur maximale."""
    edge = distances[lengths >= longest]
    return float(edge.min()) if len(edge) else math.inf


def _regression_window(grid: List[float], complete: float, explicit: bool) -> List[float]:
    if explicit:
        return [t for t in grid if t <= complete]
    upper = min(grid[-1], complete)
    lower = max(1.0, upper - (grid[-1] - grid[0]))
    return [float(t) for t in np.linspace(lower, upper, len(grid))]


def critical_exponent_estimate(rho: Representation, basepoint: Optional[complex] = None,
                               battery: Optional[WordBattery] = None,
                               radii: Optional[Sequence[float]] = None,
                               depth: int = 60) -> EntropyEstimate:
    """
    Estime l'exposant critique par la pente de log N(T) en fonction de T.

    N(T) compte les éléments (ou les mots de la batterie, dédoublonnés)
    déplaçant x₀ d'au plus T. La pente est ajustée par moindres carrés
    (``scipy.stats.linregress``) sur la grille ``radii``, ramenée sous le
    rayon où le comptage cesse d'être complet (plus petit déplacement d'un
    mot de longueur maximale). Sans grille explicite, la fenêtre par défaut
    [5, 9] est translatée sous ce rayon.

    Lève:
    WindowTooSmall: Moins de trois rayons ou une fenêtre de largeur < 1.
    EmptyBattery: Si la batterie fournie est vide.
    """
    explicit = radii is not None
    grid = sorted(float(t) for t in (radii if explicit else np.linspace(5.0, 9.0, 17)))
    if len(grid) < 3 or grid[-1] - grid[0] < 1.0:
        raise WindowTooSmall(f"fenêtre {grid}")
    warnings: List[str] = []
    x0 = H3Point.from_h2(rho.basepoint if basepoint is None else basepoint)
    if battery is None:
        ball, truncated = orbit_ball(rho, grid[-1], basepoint, depth=depth, strict=False)
        distances = np.array([p.distance for p in ball])
        lengths = np.array([len(p.word) for p in ball])
        longest = depth
    else:
        battery = WordBattery(battery.generator_count, battery.max_length,
                              battery.cyclically_reduced, True, battery.min_length)
        elements = [(len(w), h3_distance(x0, poincare_extend(m, x0)))
                    for w, m in battery.elements(rho)]
        if not elements:
            raise EmptyBattery("batterie vide pour l'estimation d'entropie")
        lengths = np.array([0] + [n for n, _ in elements])
        distances = np.array([0.0] + [d for _, d in elements])
        longest = battery.max_length
        truncated = True
    if truncated:
        complete = _complete_radius(distances, lengths, longest)
        window = _regression_window(grid, complete, explicit)
        if len(window) >= 3 and window[-1] - window[0] >= 1.0:
            grid, truncated = window, False
            logging.info(f"Fenêtre de régression ramenée à [{grid[0]:.3f}, {grid[-1]:.3f}]")
    if truncated:
        warnings.append("comptage tronqué : la pente peut être sous-estimée")
    counts = [int(np.count_nonzero(distances <= t)) for t in grid]
    fit = stats.linregress(grid, np.log(counts))
    logging.info(f"Exposant critique estimé pour {rho.name} : {fit.slope:.4f} ± {fit.stderr:.4f}")
    return EntropyEstimate(float(fit.slope), float(fit.stderr), (grid[0], grid[-1]),
                           grid, counts, truncated, warnings)
