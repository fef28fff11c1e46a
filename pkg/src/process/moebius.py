"""Arithmétique de PSL(2, C).

Action de Möbius sur la sphère de Riemann et sur le demi-espace supérieur,
points fixes, longueur complexe, birapport et distance complexe entre
géodésiques orientées. Tous les objets sont des valeurs immuables.
"""
import cmath
import math
from dataclasses import InitVar, dataclass
from typing import Optional, Tuple, Union

import numpy as np

from src.utils.exceptions import (
    CrossRatioOne, DegenerateConfiguration, NotLoxodromic, SharedEndpoint
)
from src.utils.static import EPS_LOX, EPS_PT

PointLike = Union["BoundaryPoint", complex, float, int, None]


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """
    Point de la sphère à l'infini : un complexe, ou l'infini (``value=None``).
    """
    value: Optional[complex] = None

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        if self.is_infinite or other.is_infinite:
            return self.is_infinite and other.is_infinite
        scale = max(1.0, abs(self.value), abs(other.value))
        return abs(self.value - other.value) <= EPS_PT * scale

    __hash__ = None

    def homogeneous(self) -> np.ndarray:
        """Coordonnées homogènes normalisées (z, 1)/|.| ou (1, 0)."""
        if self.is_infinite:
            return np.array([1.0 + 0j, 0j])
        vec = np.array([complex(self.value), 1.0 + 0j])
        return vec / np.linalg.norm(vec)

    def __repr__(self) -> str:
        return "BoundaryPoint(∞)" if self.is_infinite else f"BoundaryPoint({self.value})"


INFINITY = BoundaryPoint(None)


def as_point(value: PointLike) -> BoundaryPoint:
    """Convertit un complexe, un réel, ``None`` ou ``inf`` en :class:`BoundaryPoint`."""
    if isinstance(value, BoundaryPoint):
        return value
    if value is None:
        return INFINITY
    z = complex(value)
    if cmath.isinf(z):
        return INFINITY
    return BoundaryPoint(z)


@dataclass(frozen=True, eq=False)
class MoebiusElement:
    """
    Relevé de déterminant 1 d'un élément de PSL(2, C).

    L'égalité est projective : M et -M représentent la même isométrie.
    Les entrées explicites sont ramenées au déterminant 1 ; les produits et
    inverses de relevés le sont déjà et restent bruts (``normalize=False``).
    """
    matrix: np.ndarray
    normalize: InitVar[bool] = True

    def __post_init__(self, normalize: bool):
        m = np.array(self.matrix, dtype=complex).reshape(2, 2)
        if normalize:
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            if abs(det) < 1e-300:
                raise DegenerateConfiguration("matrice singulière")
            m = m / cmath.sqrt(det)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_entries(cls, a, b, c, d) -> "MoebiusElement":
        return cls(np.array([[a, b], [c, d]], dtype=complex))

    @classmethod
    def identity(cls) -> "MoebiusElement":
        return cls(np.eye(2, dtype=complex))

    @property
    def a(self) -> complex:
        return complex(self.matrix[0, 0])

    @property
    def b(self) -> complex:
        return complex(self.matrix[0, 1])

    @property
    def c(self) -> complex:
        return complex(self.matrix[1, 0])

    @property
    def d(self) -> complex:
        return complex(self.matrix[1, 1])

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def trace_squared(self) -> complex:
        """tr², invariant de conjugaison indépendant du choix du relevé."""
        return self.trace ** 2

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.matrix.imag) <= 1e-12 * max(1.0, np.abs(self.matrix).max())))

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        return MoebiusElement(self.matrix @ other.matrix, normalize=False)

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement(np.array([[self.d, -self.b], [-self.c, self.a]], dtype=complex),
                              normalize=False)

    def is_close(self, other: "MoebiusElement", tol: float = 1e-9) -> bool:
        """Égalité projective à ``tol`` près (norme max des coefficients)."""
        diff_plus = np.abs(self.matrix - other.matrix).max()
        diff_minus = np.abs(self.matrix + other.matrix).max()
        return min(diff_plus, diff_minus) <= tol * max(1.0, np.abs(self.matrix).max())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MoebiusElement):
            return NotImplemented
        return self.is_close(other)

    __hash__ = None

    def __repr__(self) -> str:
        return f"MoebiusElement([[{self.a:.6g}, {self.b:.6g}], [{self.c:.6g}, {self.d:.6g}]])"


@dataclass(frozen=True)
class Geodesic:
    """Géodésique orientée de ``start`` vers ``end``."""
    start: BoundaryPoint
    end: BoundaryPoint

    def __post_init__(self):
        object.__setattr__(self, "start", as_point(self.start))
        object.__setattr__(self, "end", as_point(self.end))
        if self.start == self.end:
            raise DegenerateConfiguration("une géodésique exige deux extrémités distinctes")

    __hash__ = None

    @classmethod
    def from_points(cls, start: PointLike, end: PointLike) -> "Geodesic":
        return cls(as_point(start), as_point(end))

    def reversed(self) -> "Geodesic":
        return Geodesic(self.end, self.start)

    def same_line(self, other: "Geodesic") -> bool:
        """Même géodésique non orientée."""
        return ((self.start == other.start and self.end == other.end)
                or (self.start == other.end and self.end == other.start))

    @property
    def is_real(self) -> bool:
        """Extrémités dans R ∪ {∞}."""
        return all(p.is_infinite or abs(p.value.imag) <= EPS_PT * max(1.0, abs(p.value))
                   for p in (self.start, self.end))


@dataclass(frozen=True)
class H3Point:
    """Point du demi-espace supérieur : coordonnée horizontale et hauteur."""
    z: complex
    height: float

    def __post_init__(self):
        if not self.height > 0:
            raise DegenerateConfiguration(f"hauteur non positive : {self.height}")
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "height", float(self.height))

    @classmethod
    def from_h2(cls, z: complex) -> "H3Point":
        """Plongement de H² comme plan vertical au-dessus de R."""
        return cls(complex(z.real, 0.0), z.imag)


def mobius_apply(M: MoebiusElement, p: PointLike) -> BoundaryPoint:
    """
    Applique M à un point de la sphère de Riemann.

    Paramètres:
    M (MoebiusElement): L'isométrie.
    p (BoundaryPoint): Le point, éventuellement infini.

    Retourne:
    BoundaryPoint: (ap + b)/(cp + d), avec les conventions usuelles à l'infini.
    """
    p = as_point(p)
    a, b, c, d = M.a, M.b, M.c, M.d
    if p.is_infinite:
        if abs(c) <= EPS_PT * max(abs(a), 1e-300):
            return INFINITY
        return BoundaryPoint(a / c)
    z = p.value
    num = a * z + b
    den = c * z + d
    if abs(den) <= EPS_PT * max(abs(c * z) + abs(d), 1e-300) or abs(den) == 0:
        return INFINITY
    return BoundaryPoint(num / den)


def apply_h2(M: MoebiusElement, z: complex) -> complex:
    """Action d'un élément sur un point intérieur (coordonnée complexe)."""
    return (M.a * z + M.b) / (M.c * z + M.d)


def apply_to_geodesic(M: MoebiusElement, g: Geodesic) -> Geodesic:
    return Geodesic(mobius_apply(M, g.start), mobius_apply(M, g.end))


def poincare_extend(M: MoebiusElement, q: H3Point) -> H3Point:
    """
    Extension de Poincaré de M au demi-espace supérieur.

    Paramètres:
    M (MoebiusElement): L'isométrie.
    q (H3Point): Le point (z, t).

    Retourne:
    H3Point: L'image, de hauteur t / (|cz + d|² + |c|² t²).
    """
    a, b, c, d = M.a, M.b, M.c, M.d
    z, t = q.z, q.height
    w = c * z + d
    denom = abs(w) ** 2 + abs(c) ** 2 * t * t
    new_z = ((a * z + b) * w.conjugate() + a * c.conjugate() * t * t) / denom
    return H3Point(new_z, t / denom)


def h2_distance(z: complex, w: complex) -> float:
    """Distance hyperbolique dans le demi-plan supérieur."""
    return 2.0 * math.asinh(abs(z - w) / (2.0 * math.sqrt(z.imag * w.imag)))


def h3_distance(p: H3Point, q: H3Point) -> float:
    """Distance hyperbolique dans le demi-espace supérieur."""
    chord = math.sqrt(abs(p.z - q.z) ** 2 + (p.height - q.height) ** 2)
    return 2.0 * math.asinh(chord / (2.0 * math.sqrt(p.height * q.height)))


def eigenvalues(M: MoebiusElement) -> Tuple[complex, complex]:
    """Valeurs propres (λ₁, λ₂) du relevé, avec |λ₁| ≥ |λ₂| et λ₁λ₂ = 1."""
    tr = M.trace
    s = cmath.sqrt(tr * tr - 4)
    lam = (tr + s) / 2 if abs(tr + s) >= abs(tr - s) else (tr - s) / 2
    return lam, 1 / lam


def is_loxodromic(M: MoebiusElement, eps: float = EPS_LOX) -> bool:
    lam1, lam2 = eigenvalues(M)
    return abs(lam1) - abs(lam2) >= eps


def _eigenline(M: MoebiusElement, lam: complex) -> BoundaryPoint:
    v1 = np.array([M.b, lam - M.a])
    v2 = np.array([lam - M.d, M.c])
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    if abs(v[1]) <= EPS_PT * abs(v[0]):
        return INFINITY
    return BoundaryPoint(complex(v[0] / v[1]))


def fixed_points(M: MoebiusElement, eps: float = EPS_LOX) -> Tuple[BoundaryPoint, BoundaryPoint]:
    """
    Points fixes attractif et répulsif d'un élément loxodromique.

    Paramètres:
    M (MoebiusElement): L'élément.
    eps (float): Écart minimal entre les modules des valeurs propres.

    Retourne:
    tuple: (attractif, répulsif).

    Lève:
    NotLoxodromic: Si les modules des valeurs propres coïncident.
    """
    lam1, lam2 = eigenvalues(M)
    if abs(lam1) - abs(lam2) < eps:
        raise NotLoxodromic(f"valeurs propres de même module : {abs(lam1):.12g}")
    return _eigenline(M, lam1), _eigenline(M, lam2)


def axis(M: MoebiusElement) -> Geodesic:
    """Axe de M orienté du point répulsif vers le point attractif."""
    attracting, repelling = fixed_points(M)
    return Geodesic(repelling, attracting)


def _reduce_imaginary(im: float) -> float:
    return -((-im + math.pi) % (2 * math.pi) - math.pi)


def complex_length(M: MoebiusElement) -> complex:
    """
    Longueur complexe L = ℓ + iθ avec Re L > 0 et Im L dans (-π, π].

    Lève:
    NotLoxodromic: Si M n'est pas loxodromique.
    """
    lam1, lam2 = eigenvalues(M)
    if abs(lam1) - abs(lam2) < EPS_LOX:
        raise NotLoxodromic(f"trace {M.trace:.12g}")
    L = 2 * cmath.log(lam1)
    return complex(L.real, _reduce_imaginary(L.imag))


def _det(x: np.ndarray, y: np.ndarray) -> complex:
    return complex(x[0] * y[1] - x[1] * y[0])


def cross_ratio(u: PointLike, p: PointLike, q: PointLike, v: PointLike) -> complex:
    """
    Birapport [u, p, q, v] = (u - q)(v - p) / ((u - p)(v - q)).

    Les arguments infinis sont traités par passage à la limite (coordonnées
    homogènes).

    Retourne:
    complex: Le birapport ; ``complex(inf, 0)`` si le dénominateur s'annule.

    Lève:
    DegenerateConfiguration: Pour une forme 0/0.
    """
    hu, hp, hq, hv = (as_point(x).homogeneous() for x in (u, p, q, v))
    num = _det(hu, hq) * _det(hv, hp)
    den = _det(hu, hp) * _det(hv, hq)
    num_zero = abs(num) <= EPS_PT
    den_zero = abs(den) <= EPS_PT
    if num_zero and den_zero:
        raise DegenerateConfiguration("birapport indéterminé (0/0)")
    if den_zero:
        return complex(math.inf, 0.0)
    return num / den


def _endpoint_ratio(g: Geodesic, h: Geodesic) -> complex:
    for x in (g.start, g.end):
        for y in (h.start, h.end):
            if x == y:
                raise SharedEndpoint("les géodésiques partagent une extrémité")
    r = cross_ratio(g.start, h.start, h.end, g.end)
    if abs(r - 1) <= 1e-12 * max(1.0, abs(r)):
        raise CrossRatioOne("birapport égal à 1 : géodésiques confondues")
    return r


def cosh_complex_distance(g: Geodesic, h: Geodesic) -> complex:
    """
    cosh de la distance complexe entre deux géodésiques orientées.

    cosh σ(g, h) = (r + 1)/(r - 1) avec r = [g₋, h₋, h₊, g₊].

    Lève:
    SharedEndpoint: Si g et h ont une extrémité commune.
    CrossRatioOne: Si les géodésiques sont confondues.
    """
    r = _endpoint_ratio(g, h)
    return (r + 1) / (r - 1)


def im_cosh_distance(g: Geodesic, h: Geodesic) -> float:
    """Partie imaginaire de cosh σ(g, h), égale à -2 Im r / |r - 1|²."""
    r = _endpoint_ratio(g, h)
    return -2.0 * r.imag / abs(r - 1) ** 2


def normalizer(g: Geodesic) -> MoebiusElement:
    """
    Élément envoyant g₋ sur 0 et g₊ sur ∞.

    Pour une géodésique à extrémités réelles, l'élément est réel et préserve
    le demi-plan supérieur.
    """
    s = g.start.homogeneous()
    e = g.end.homogeneous()
    m = np.array([[s[1], -s[0]], [e[1], -e[0]]], dtype=complex)
    if g.is_real:
        m = m.real.astype(complex)
        if (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real < 0:
            m[0] = -m[0]
    return MoebiusElement(m)


def side_of(g: Geodesic, z: complex, tol: float = 1e-12) -> int:
    """
    Côté d'un point de H² par rapport à une géodésique orientée réelle.

    Retourne:
    int: +1 à droite, -1 à gauche, 0 sur la géodésique.
    """
    w = apply_h2(normalizer(g), z)
    if abs(w.real) <= tol * abs(w):
        return 0
    return 1 if w.real > 0 else -1


def axis_rotation(g: Geodesic, z: complex) -> MoebiusElement:
    """
    R(g, z) : translation complexe de longueur z le long de g.

    R(g, z) = T⁻¹ diag(e^{z/2}, e^{-z/2}) T où T envoie g sur (0, ∞).
    """
    T = normalizer(g)
    half = cmath.exp(complex(z) / 2)
    A = MoebiusElement.from_entries(half, 0, 0, 1 / half)
    return T.inverse() @ A @ T


def rotation_generator(g: Geodesic) -> np.ndarray:
    """Dérivée de z ↦ R(g, z) en 0 : (1/2) T⁻¹ diag(1, -1) T (matrice de sl₂)."""
    T = normalizer(g)
    return 0.5 * (T.inverse().matrix @ np.diag([1.0, -1.0]) @ T.matrix)


def geodesic_through(z: complex, w: complex) -> Geodesic:
    """Géodésique de H² passant par z puis w, orientée de z vers w."""
    if abs(z.real - w.real) <= 1e-14 * max(1.0, abs(z), abs(w)):
        x = complex(z.real, 0.0)
        return Geodesic(x, INFINITY) if w.imag > z.imag else Geodesic(INFINITY, x)
    center = (abs(z) ** 2 - abs(w) ** 2) / (2.0 * (z.real - w.real))
    radius = abs(z - center)
    left, right = complex(center - radius), complex(center + radius)
    return Geodesic(left, right) if w.real > z.real else Geodesic(right, left)


def segment_frame(z: complex, w: complex) -> Tuple[MoebiusElement, float]:
    """
    Repère d'un segment de H².

    Retourne:
    tuple: (S, d) où S réel envoie z sur i et w sur i·e^d, d = d(z, w).
    """
    T = normalizer(geodesic_through(z, w))
    y = apply_h2(T, z).imag
    scale = MoebiusElement.from_entries(1 / math.sqrt(y), 0, 0, math.sqrt(y))
    return scale @ T, h2_distance(z, w)


def point_on_segment(frame: MoebiusElement, s: float) -> complex:
    """Point à l'abscisse curviligne s d'un segment décrit par :func:`segment_frame`."""
    return apply_h2(frame.inverse(), 1j * math.exp(s))
