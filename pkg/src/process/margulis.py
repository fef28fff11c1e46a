"""Projections de Jordan et de Cartan, forme standard et invariant de Margulis.

Un couple (g, x) avec g loxodromique et x dans l'algèbre de Lie (matrices
de trace nulle) agit par v ↦ Ad(g)v + x. Son invariant de Margulis est la
diagonale de ψ x ψ⁻¹, où ψ diagonalise g (valeurs propres rangées par
module décroissant) ; il ne dépend pas du choix de ψ.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.linalg import subspace_angles
from scipy.optimize import nnls
from tqdm import tqdm

from src.process.bending import boundary_transport, generator_crossings
from src.process.groups import (
    Representation, Word, WordBattery, as_word, is_usable_loxodromic
)
from src.process.lamination import InvariantLamination
from src.process.moebius import MoebiusElement, rotation_generator
from src.utils.exceptions import EmptyBattery, NotLoxodromic
from src.utils.static import EPS_LOX, VERDICT_INCONCLUSIVE, VERDICT_PROPER

MatrixLike = Union[MoebiusElement, np.ndarray]

# En deçà, les drapeaux attractif et répulsif sont jugés presque dégénérés.
FLAG_ANGLE_TOL = 1e-6


def _matrix(g: MatrixLike) -> np.ndarray:
    return g.matrix if isinstance(g, MoebiusElement) else np.asarray(g, dtype=complex)


def _unimodular(g: MatrixLike) -> np.ndarray:
    m = _matrix(g)
    det = np.linalg.det(m)
    if abs(det) < 1e-300:
        raise ValueError("matrice singulière")
    return m / det ** (1.0 / m.shape[0])


@dataclass(frozen=True, eq=False)
class TracelessMatrix:
    """Élément de l'algèbre de Lie sl(d, C)."""
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrice carrée attendue, forme {m.shape}")
        if abs(np.trace(m)) > 1e-9 * max(1.0, np.abs(m).max()):
            raise ValueError(f"trace non nulle : {np.trace(m)}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zero(cls, d: int = 2) -> "TracelessMatrix":
        return cls(np.zeros((d, d), dtype=complex))

    def __add__(self, other: "TracelessMatrix") -> "TracelessMatrix":
        return TracelessMatrix(self.matrix + other.matrix)

    def __sub__(self, other: "TracelessMatrix") -> "TracelessMatrix":
        return TracelessMatrix(self.matrix - other.matrix)

    def __neg__(self) -> "TracelessMatrix":
        return TracelessMatrix(-self.matrix)

    def __mul__(self, scalar: complex) -> "TracelessMatrix":
        return TracelessMatrix(scalar * self.matrix)

    __rmul__ = __mul__

    def adjoint(self, g: MatrixLike) -> "TracelessMatrix":
        """Ad(g)x = g x g⁻¹."""
        m = _matrix(g)
        return TracelessMatrix(m @ self.matrix @ np.linalg.inv(m))

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def is_close(self, other: "TracelessMatrix", tol: float = 1e-9) -> bool:
        return float(np.abs(self.matrix - other.matrix).max()) <= tol


@dataclass(frozen=True)
class CartanVector:
    """Vecteur de la chambre de Weyl fermée : décroissant, de somme nulle."""
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if any(a < b - 1e-12 for a, b in zip(values, values[1:])):
            raise ValueError(f"coordonnées non décroissantes : {values}")
        object.__setattr__(self, "values", values)

    @property
    def first(self) -> float:
        return self.values[0]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class DiagonalInvariant:
    """Vecteur complexe de somme nulle (diagonale d'un élément de sl(d, C))."""
    values: Tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))

    @property
    def first(self) -> complex:
        return self.values[0]

    def norm(self) -> float:
        return float(np.linalg.norm(np.array(self.values)))

    def scaled(self, factor: float) -> "DiagonalInvariant":
        return DiagonalInvariant(tuple(v * factor for v in self.values))

    def as_real_vector(self) -> np.ndarray:
        values = np.array(self.values)
        return np.concatenate([values.real, values.imag])


def jordan_projection(g: MatrixLike) -> CartanVector:
    """μ(g) : log des modules des valeurs propres, rangés par ordre décroissant."""
    logs = np.log(np.abs(np.linalg.eigvals(_unimodular(g))))
    logs = np.sort(logs)[::-1]
    return CartanVector(tuple(logs - logs.mean()))


def cartan_projection(g: MatrixLike) -> CartanVector:
    """a(g) : log des valeurs singulières, rangées par ordre décroissant."""
    logs = np.log(np.linalg.svd(_unimodular(g), compute_uv=False))
    logs = np.sort(logs)[::-1]
    return CartanVector(tuple(logs - logs.mean()))


@dataclass
class StandardForm:
    """g = ψ⁻¹ D ψ avec D diagonale à modules décroissants."""
    psi: np.ndarray
    diagonal: np.ndarray
    flag_angle: float
    ill_conditioned: bool

    @property
    def psi_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.psi)


def standard_form(g: MatrixLike, eps: float = EPS_LOX) -> StandardForm:
    """
    Forme standard d'un élément loxodromique.

    Les colonnes de ψ⁻¹ sont des vecteurs propres unitaires, remis à l'échelle
    pour que det ψ = 1. L'angle minimal entre les drapeaux attractif et
    répulsif est calculé avec ``scipy.linalg.subspace_angles`` ; un angle
    trop faible est signalé, pas refusé.

    Lève:
    NotLoxodromic: Si deux valeurs propres ont des modules trop proches.
    """
    m = _unimodular(g)
    d = m.shape[0]
    values, vectors = np.linalg.eig(m)
    order = np.argsort(-np.abs(values), kind="stable")
    values, vectors = values[order], vectors[:, order]
    logs = np.log(np.abs(values))
    if np.any(np.diff(logs) > -eps):
        raise NotLoxodromic(f"modules propres trop proches : {np.abs(values)}")
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    psi_inv = vectors / np.linalg.det(vectors) ** (1.0 / d)
    angle = min(float(np.min(subspace_angles(vectors[:, :k], vectors[:, k:])))
                for k in range(1, d))
    ill = angle < FLAG_ANGLE_TOL
    if ill:
        logging.warning(f"Forme standard mal conditionnée : angle des drapeaux {angle:.3e}")
    return StandardForm(np.linalg.inv(psi_inv), values, angle, ill)


def margulis_invariant(g: MatrixLike, x: Union[TracelessMatrix, np.ndarray],
                       psi: Optional[np.ndarray] = None) -> DiagonalInvariant:
    """
    m(g, x) = diag(ψ x ψ⁻¹).

    Paramètres:
    g: Élément loxodromique.
    x: Partie translation (trace nulle).
    psi (np.ndarray, optionnel): Diagonalisation imposée de g ; par défaut
    celle de ``standard_form``.

    Retourne:
    DiagonalInvariant: L'invariant, dont la première coordonnée est dω₁.

    Lève:
    NotLoxodromic: Si g n'est pas loxodromique.
    """
    x = x.matrix if isinstance(x, TracelessMatrix) else np.asarray(x, dtype=complex)
    if psi is None:
        psi = standard_form(g).psi
    return DiagonalInvariant(tuple(np.diag(psi @ x @ np.linalg.inv(psi))))


def _adjoint_operator(g: np.ndarray) -> np.ndarray:
    """Matrice de v ↦ g v g⁻¹ sur les matrices aplaties (ordre C)."""
    return np.kron(g, np.linalg.inv(g).T)


def fixed_point_candidate(g: MatrixLike, x: Union[TracelessMatrix, np.ndarray]) -> TracelessMatrix:
    """Solution au sens des moindres carrés de Ad(g)v + x = v."""
    m = _unimodular(g)
    x = x.matrix if isinstance(x, TracelessMatrix) else np.asarray(x, dtype=complex)
    d = m.shape[0]
    system = _adjoint_operator(m) - np.eye(d * d)
    v, *_ = np.linalg.lstsq(system, -x.reshape(-1), rcond=None)
    v = v.reshape(d, d)
    return TracelessMatrix(v - np.trace(v) / d * np.eye(d))


@dataclass
class DisplacementReport:
    min_displacement: float
    invariant_norm: float
    ratio: float
    flag_angle: float
    samples: int


def displacement_bound_check(g: MatrixLike, x: Union[TracelessMatrix, np.ndarray],
                             samples: int = 500, scale: float = 3.0,
                             seed: int = 0) -> DisplacementReport:
    """
    Compare le déplacement minimal de v ↦ Ad(g)v + x à ‖m(g, x)‖.

    Les points v sont tirés au hasard (graine fixée) et complétés par 0 et
    par la solution des moindres carrés de Ad(g)v + x = v.

    Retourne:
    DisplacementReport: min ‖F(v) - v‖, ‖m‖, leur rapport (inf si m = 0)
    et l'angle des drapeaux de g.
    """
    m = _unimodular(g)
    x = x.matrix if isinstance(x, TracelessMatrix) else np.asarray(x, dtype=complex)
    d = m.shape[0]
    form = standard_form(m)
    invariant = margulis_invariant(m, x, form.psi)
    rng = np.random.default_rng(seed)
    raw = scale * (rng.normal(size=(samples, d, d)) + 1j * rng.normal(size=(samples, d, d)))
    candidates = [v - np.trace(v) / d * np.eye(d) for v in raw]
    candidates += [np.zeros((d, d), dtype=complex), fixed_point_candidate(m, x).matrix]
    m_inv = np.linalg.inv(m)
    displacement = min(float(np.linalg.norm(m @ v @ m_inv + x - v)) for v in candidates)
    norm = invariant.norm()
    ratio = displacement / norm if norm > 0 else math.inf
    logging.info(f"Déplacement minimal {displacement:.3e}, ‖m‖ = {norm:.3e}")
    return DisplacementReport(displacement, norm, ratio, form.flag_angle, len(candidates))


@dataclass
class Cocycle:
    """
    Cocycle u : Γ → sl(2, C) relativement à ρ, donné sur les générateurs.

    u(s₁…sₙ) = u(s₁) + Ad ρ(s₁) u(s₂…sₙ) et u(s⁻¹) = -Ad(ρ(s)⁻¹) u(s).
    """
    rho: Representation
    values: Dict[str, TracelessMatrix]

    def __post_init__(self):
        missing = set(self.rho.generator_names) - set(self.values)
        if missing:
            raise ValueError(f"valeurs manquantes pour {sorted(missing)}")

    def letter_value(self, letter: str) -> np.ndarray:
        u = self.values[letter.lower()].matrix
        if letter.isupper():
            inv = self.rho.generator(letter).matrix
            return -(inv @ u @ np.linalg.inv(inv))
        return u

    def evaluate(self, word: Union[Word, str]) -> TracelessMatrix:
        total = np.zeros((2, 2), dtype=complex)
        for letter in reversed(as_word(word).letters):
            g = self.rho.generator(letter).matrix
            total = self.letter_value(letter) + g @ total @ np.linalg.inv(g)
        return TracelessMatrix(total)

    __call__ = evaluate

    def __add__(self, other: "Cocycle") -> "Cocycle":
        return Cocycle(self.rho, {k: self.values[k] + other.values[k] for k in self.values})

    def __mul__(self, scalar: complex) -> "Cocycle":
        return Cocycle(self.rho, {k: v * scalar for k, v in self.values.items()})

    __rmul__ = __mul__


def coboundary(rho: Representation, v: Union[TracelessMatrix, np.ndarray]) -> Cocycle:
    """u(γ) = v - Ad ρ(γ) v."""
    v = v if isinstance(v, TracelessMatrix) else TracelessMatrix(v)
    return Cocycle(rho, {k: v - v.adjoint(rho.generators[k]) for k in rho.generator_names})


def cocycle_from_bending(rho: Representation, mu: InvariantLamination, side: int = 1) -> Cocycle:
    """
    Dérivée en t = 0 de ρ_{-i·side·tμ}(γ) ρ(γ)⁻¹.

    Pour chaque générateur s, u(s) = Σ_j (-i·side·a_j) X_j où X_j est la dérivée
    de z ↦ R(ξ(m_j), z) en 0 et m_j parcourt les feuilles coupant [x₀, sx₀].

    Paramètres:
    rho (Representation): Représentation de base (fuchsienne ou pliée).
    mu (InvariantLamination): Lamination invariante sous sa base fuchsienne.
    side (int): +1 ou -1, sens du pliage.
    """
    if side not in (1, -1):
        raise ValueError(f"side doit valoir ±1, reçu {side}")
    values = {}
    for name in rho.generator_names:
        total = np.zeros((2, 2), dtype=complex)
        for crossing in generator_crossings(mu, name):
            generator = rotation_generator(boundary_transport(rho, mu, crossing.leaf))
            total += -1j * side * crossing.weight * generator
        values[name] = TracelessMatrix(total)
    return Cocycle(rho, values)


@dataclass
class SpectrumReport:
    """Invariants de Margulis normalisés par ω₁ sur une batterie de mots."""
    words: List[str]
    samples: List[DiagonalInvariant]
    skipped: List[str] = field(default_factory=list)

    @property
    def first_real(self) -> np.ndarray:
        return np.array([s.first.real for s in self.samples])

    @property
    def k_bound(self) -> float:
        """K tel que Re m₁/ω₁ ≤ -K (ou ≥ K) sur tout l'échantillon, 0 sinon."""
        values = self.first_real
        if values.size == 0:
            return 0.0
        if values.max() < 0:
            return float(-values.max())
        if values.min() > 0:
            return float(values.min())
        return 0.0

    @property
    def min_norm(self) -> float:
        return min((s.norm() for s in self.samples), default=0.0)

    def hull_distance(self) -> float:
        """Distance de 0 à l'enveloppe convexe des échantillons (NNLS avec ligne de poids)."""
        if not self.samples:
            return 0.0
        points = np.array([s.as_real_vector() for s in self.samples]).T
        penalty = 1e3 * max(1.0, np.abs(points).max())
        A = np.vstack([points, penalty * np.ones(points.shape[1])])
        b = np.concatenate([np.zeros(points.shape[0]), [penalty]])
        weights, _ = nnls(A, b, maxiter=50 * A.shape[1])
        weights = weights / weights.sum()
        return float(np.linalg.norm(points @ weights))


def normalized_margulis_spectrum(rho: Representation, u: Cocycle, battery: WordBattery,
                                 progress: bool = False) -> SpectrumReport:
    """
    m(ρ(γ), u(γ)) / ω₁(μ(ρ(γ))) pour chaque mot loxodromique de la batterie.

    Lève:
    EmptyBattery: Si la batterie ne produit aucun mot.
    """
    words = list(battery.words())
    if not words:
        raise EmptyBattery(f"batterie vide : {battery}")
    report = SpectrumReport([], [])
    for word in tqdm(words, desc="Spectre de Margulis", disable=not progress):
        g = rho.evaluate(word)
        if not is_usable_loxodromic(g):
            report.skipped.append(str(word))
            continue
        omega = jordan_projection(g).first
        invariant = margulis_invariant(g, u.evaluate(word))
        report.words.append(str(word))
        report.samples.append(invariant.scaled(1.0 / omega))
    logging.info(f"Spectre de Margulis : {len(report.samples)} mots, "
                 f"{len(report.skipped)} ignorés, K = {report.k_bound:.4g}")
    return report


def properness_verdict(report: SpectrumReport, margin: float) -> str:
    """
    PROPER-EVIDENCE si l'échantillon est non vide, reste à distance au moins
    ``margin`` de 0 et si Re m₁ est de signe constant ; INCONCLUSIVE sinon.
    """
    if not report.samples or report.k_bound <= 0:
        return VERDICT_INCONCLUSIVE
    return VERDICT_PROPER if report.min_norm >= margin else VERDICT_INCONCLUSIVE


@dataclass
class VariationReport:
    invariant: DiagonalInvariant
    eigen_log_derivative: Tuple[complex, ...]
    relative_error: float
    jordan_error: float


def _sorted_eigenvalues(m: np.ndarray) -> np.ndarray:
    values = np.linalg.eigvals(m)
    return values[np.argsort(-np.abs(values), kind="stable")]


def eigenvalue_variation_check(path: Callable[[float], MatrixLike], t0: float = 0.0,
                               derivative: Optional[Callable[[float], MatrixLike]] = None,
                               step: float = 1e-3) -> VariationReport:
    """
    Vérifie m(g, ġg⁻¹) = (dλ)λ⁻¹ le long d'un chemin t ↦ g_t de SL(d, C).

    Les dérivées absentes sont estimées par différences centrées et
    extrapolation de Richardson. La partie réelle est comparée à la dérivée
    de la projection de Jordan.
    """
    def richardson(f):
        def central(h):
            return (f(t0 + h) - f(t0 - h)) / (2 * h)
        return (4 * central(step / 2) - central(step)) / 3

    g0 = _matrix(path(t0))
    g_dot = _matrix(derivative(t0)) if derivative is not None else richardson(lambda t: _matrix(path(t)))
    x = g_dot @ np.linalg.inv(g0)
    x = x - np.trace(x) / x.shape[0] * np.eye(x.shape[0])
    invariant = margulis_invariant(g0, x)
    lambdas = _sorted_eigenvalues(g0)
    d_lambda = richardson(lambda t: _sorted_eigenvalues(_matrix(path(t))))
    expected = d_lambda / lambdas
    got = np.array(invariant.values)
    relative = float(np.linalg.norm(got - expected) / max(np.linalg.norm(expected), 1e-300))
    d_jordan = richardson(lambda t: np.array(jordan_projection(path(t)).values))
    jordan_error = float(np.abs(got.real - d_jordan).max())
    return VariationReport(invariant, tuple(expected), relative, jordan_error)
