"""Cocycle de pliage, plan plissé et angles de pliage.

H² est plongé dans H³ comme le plan vertical au-dessus de l'axe réel :
x + iy ↦ (x, hauteur y). Le plan plissé associé à μ et au point base x₀ est
f(x) = Z(x₀, x)·x.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from src.process.lamination import (
    ArcCrossing, FiniteLamination, InvariantLamination, arc_crossings,
    as_lamination, ray_point
)
from src.process.moebius import (
    H3Point, MoebiusElement, axis_rotation, h2_distance, h3_distance,
    point_on_segment, poincare_extend, segment_frame
)
from src.utils.exceptions import OutOfRange
from src.utils.helper_data import write_csv
from src.utils.static import (
    DEFAULT_RANGE, DEFAULT_RAYS, DEFAULT_STEP, VERDICT_CONSISTENT, VERDICT_REFUTED
)

AnyLamination = Union[FiniteLamination, InvariantLamination]

ANGLE_TOL = 1e-9
# Écart d'abscisse en deçà duquel q est considéré sur la feuille.
ON_LEAF_TOL = 1e-12


def _local(mu: AnyLamination, p: complex, radius: float) -> FiniteLamination:
    if isinstance(mu, InvariantLamination):
        return mu.leaves_in_ball(p, radius + 1e-9)
    return as_lamination(mu)


def _product(crossings: Sequence[ArcCrossing], full: bool = False) -> MoebiusElement:
    matrix = np.eye(2, dtype=complex)
    for c in crossings:
        weight = c.leaf.weight if full else c.weight
        matrix = matrix @ axis_rotation(c.leaf.geodesic, 1j * weight).matrix
    return MoebiusElement(matrix)


def bending_cocycle(mu: AnyLamination, x: complex, y: complex) -> MoebiusElement:
    """
    Z_μ(x, y) = R(m₁, ia₁)···R(mₙ, iaₙ).

    Les feuilles sont prises dans l'ordre où [x, y] les traverse depuis x,
    chacune orientée pour avoir x à sa gauche ; une feuille portant x ou y
    compte pour la moitié de son poids.

    Paramètres:
    mu (FiniteLamination ou InvariantLamination): La lamination.
    x (complex): Origine.
    y (complex): Extrémité.

    Retourne:
    MoebiusElement: Le cocycle, l'identité si x = y.

    Lève:
    DegenerateConcurrentLeaves: Si deux feuilles coupent [x, y] au même point.
    """
    x, y = complex(x), complex(y)
    if abs(x - y) <= 1e-15 * max(1.0, abs(x)):
        return MoebiusElement.identity()
    local = _local(mu, x, h2_distance(x, y))
    return _product(arc_crossings(local, x, y, endpoints="half"))


def pleated_map(mu: AnyLamination, basepoint: complex, x: complex) -> H3Point:
    """f_μ(x) = Z_μ(x₀, x)·x, avec x vu dans le plan vertical de H³."""
    return poincare_extend(bending_cocycle(mu, basepoint, x), H3Point.from_h2(complex(x)))


@dataclass
class PleatedPath:
    """
    Image par f_μ du segment [p, q] : sommets aux points de croisement.

    ``before`` et ``after`` sont les isométries appliquées juste avant et juste
    après q ; elles coïncident si q n'est sur aucune feuille.
    """
    initial: H3Point
    final: H3Point
    vertices: List[H3Point]
    bends: List[float]
    frame: MoebiusElement
    length: float
    before: MoebiusElement
    after: MoebiusElement


def pleated_path(mu: AnyLamination, p: complex, q: complex) -> PleatedPath:
    """
    Construit le chemin plissé de p à q (f_μ relatif au point base p).

    Lève:
    ValueError: Si p = q.
    """
    p, q = complex(p), complex(q)
    if abs(p - q) <= 1e-15 * max(1.0, abs(p)):
        raise ValueError("p et q doivent être distincts")
    local = _local(mu, p, h2_distance(p, q))
    crossings = arc_crossings(local, p, q, endpoints="half")
    frame, length = segment_frame(p, q)
    return _path_from_crossings(crossings, frame, length, p)


def _path_from_crossings(crossings: Sequence[ArcCrossing], frame: MoebiusElement,
                         length: float, p: complex) -> PleatedPath:
    cut = length - ON_LEAF_TOL * max(1.0, length)
    inner = [c for c in crossings if c.parameter < cut]
    at_q = [c for c in crossings if c.parameter >= cut]
    before = _product(inner)
    after = before @ _product(at_q, full=True)
    vertices = []
    running = np.eye(2, dtype=complex)
    for c in inner:
        point = H3Point.from_h2(complex(point_on_segment(frame, c.parameter)))
        vertices.append(poincare_extend(MoebiusElement(running), point))
        running = running @ axis_rotation(c.leaf.geodesic, 1j * c.weight).matrix
    q = complex(point_on_segment(frame, length))
    final = poincare_extend(before, H3Point.from_h2(q))
    return PleatedPath(H3Point.from_h2(p), final, vertices,
                       [float(abs(c.weight)) for c in crossings],
                       frame, length, before, after)


def _direction(target: H3Point) -> np.ndarray:
    """Vecteur unitaire tangent en j = (0, 0, 1) à la géodésique vers ``target``."""
    w, t = target.z, target.height
    r = abs(w)
    if r <= 1e-14 * max(1.0, t):
        return np.array([0.0, 0.0, 1.0 if t > 1.0 else -1.0])
    c = (r * r + t * t - 1.0) / (2.0 * r)
    v = np.array([w.real / r, w.imag / r, c])
    return v / np.linalg.norm(v)


def _centering(point: H3Point) -> MoebiusElement:
    return MoebiusElement.from_entries(1.0, -point.z, 0.0, point.height)


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    return math.acos(float(np.clip(np.dot(u, v), -1.0, 1.0)))


def _path_angles(path: PleatedPath) -> Tuple[float, float]:
    N = _centering(path.final)
    chord = -_direction(poincare_extend(N, path.initial))
    ahead = H3Point.from_h2(complex(point_on_segment(path.frame, path.length + 1.0)))
    behind = H3Point.from_h2(complex(point_on_segment(path.frame, path.length - 1.0)))
    forward_plus = _direction(poincare_extend(N @ path.after, ahead))
    forward_minus = -_direction(poincare_extend(N @ path.before, behind))
    return _angle(chord, forward_plus), _angle(chord, forward_minus)


def bend_angle(mu: AnyLamination, p: complex, q: complex) -> Tuple[float, float]:
    """
    Angles θ⁺ et θ⁻ en f(q) entre la corde issue de f(p) et les tangentes
    unilatérales du chemin plissé.

    Retourne:
    tuple: (θ⁺, θ⁻) dans [0, π) ; égaux si q n'est sur aucune feuille.
    """
    return _path_angles(pleated_path(mu, p, q))


@dataclass
class ThetaReport:
    theta: float
    max_angle: float
    witness: Optional[Tuple[complex, complex]]
    verdict: str
    samples: int
    note: str = "échantillonnage : un verdict CONSISTENT n'est pas une preuve"


def _ray_paths(local: FiniteLamination, p: complex, angle: float, step: float, reach: float):
    end = ray_point(p, angle, reach)
    crossings = arc_crossings(local, p, end, endpoints="half")
    frame, _ = segment_frame(p, end)
    count = int(round(reach / step))
    for j in range(1, count + 1):
        s = j * step
        yield complex(point_on_segment(frame, s)), _path_from_crossings(
            [c for c in crossings if c.parameter <= s + ON_LEAF_TOL * max(1.0, s)],
            frame, s, p)


def theta_bounded_check(mu: AnyLamination, theta: float, rays: int = DEFAULT_RAYS,
                        step: float = DEFAULT_STEP, reach: float = DEFAULT_RANGE,
                        basepoint: Optional[complex] = None,
                        progress: bool = False) -> ThetaReport:
    """
    Cherche un couple (p, q) avec θ_μ(p, q) > θ le long de rayons issus de p.

    Paramètres:
    mu (FiniteLamination ou InvariantLamination): La lamination.
    theta (float): Seuil dans (0, π).
    rays (int): Nombre de rayons.
    step (float): Pas d'abscisse le long d'un rayon.
    reach (float): Longueur des rayons.
    basepoint (complex, optionnel): p ; par défaut le point base de μ, ou i.

    Retourne:
    ThetaReport: REFUTED avec témoin si un angle dépasse θ, CONSISTENT sinon.

    Lève:
    OutOfRange: Si θ ∉ (0, π).
    InsufficientDepth: Propagée depuis l'expansion de l'orbite.
    """
    if not 0.0 < theta < math.pi:
        raise OutOfRange(f"θ doit être dans (0, π), reçu {theta}")
    p = _default_basepoint(mu, basepoint)
    local = _local(mu, p, reach)
    worst, witness, samples = 0.0, None, 0
    for k in tqdm(range(rays), disable=not progress, desc="θ-bornitude"):
        for q, path in _ray_paths(local, p, 2.0 * math.pi * k / rays, step, reach):
            samples += 1
            value = max(_path_angles(path))
            if value > worst:
                worst, witness = value, (p, q)
    verdict = VERDICT_REFUTED if worst > theta + ANGLE_TOL else VERDICT_CONSISTENT
    logging.info(f"θ-bornitude (θ = {theta:.4f}) : angle max {worst:.6f} -> {verdict}")
    return ThetaReport(theta, worst, witness, verdict, samples)


def _default_basepoint(mu: AnyLamination, basepoint: Optional[complex]) -> complex:
    if basepoint is not None:
        return complex(basepoint)
    if isinstance(mu, InvariantLamination):
        return mu.rho.basepoint
    return 1j


@dataclass
class BilipschitzReport:
    min_ratio: float
    max_ratio: float
    pairs: int
    lipschitz_ok: bool
    witness: Optional[Tuple[complex, complex]] = None
    ratios: List[float] = field(default_factory=list, repr=False)


def bilipschitz_estimate(mu: AnyLamination, pairs: int = 2000, reach: float = 4.0,
                         basepoint: Optional[complex] = None, seed: int = 0,
                         progress: bool = False) -> BilipschitzReport:
    """
    Rapport d(f(x), f(y)) / d(x, y) sur des couples aléatoires de la boule
    de rayon ``reach`` autour du point base.

    Retourne:
    BilipschitzReport: Rapports min et max ; ``lipschitz_ok`` si le max ne
    dépasse pas 1 + 1e-9.
    """
    x0 = _default_basepoint(mu, basepoint)
    local = _local(mu, x0, reach)
    rng = np.random.default_rng(seed)
    ratios: List[float] = []
    worst, witness = math.inf, None
    for _ in tqdm(range(pairs), disable=not progress, desc="bilipschitz"):
        x = ray_point(x0, rng.uniform(0, 2 * math.pi), reach * math.sqrt(rng.uniform()))
        y = ray_point(x0, rng.uniform(0, 2 * math.pi), reach * math.sqrt(rng.uniform()))
        d2 = h2_distance(x, y)
        if d2 < 1e-6:
            continue
        d3 = h3_distance(pleated_map(local, x0, x), pleated_map(local, x0, y))
        ratio = d3 / d2
        ratios.append(ratio)
        if ratio < worst:
            worst, witness = ratio, (x, y)
    if not ratios:
        return BilipschitzReport(1.0, 1.0, 0, True)
    top = max(ratios)
    logging.info(f"Bilipschitz : rapport min {worst:.6f}, max {top:.12f} sur {len(ratios)} couples")
    return BilipschitzReport(worst, top, len(ratios), top <= 1.0 + 1e-9, witness, ratios)


def dump_mesh_csv(mu: AnyLamination, path: str, basepoint: Optional[complex] = None,
                  rays: int = DEFAULT_RAYS, step: float = DEFAULT_STEP,
                  reach: float = 4.0) -> str:
    """
    Écrit les images f_μ(x) d'une grille polaire autour du point base.

    Colonnes : x_re, x_im, height (coordonnées de l'image dans H³) et
    src_re, src_im (point de H²).
    """
    x0 = _default_basepoint(mu, basepoint)
    local = _local(mu, x0, reach)
    rows = [{"x_re": x0.real, "x_im": 0.0, "height": x0.imag, "src_re": x0.real, "src_im": x0.imag}]
    for k in range(rays):
        for q, pleated in _ray_paths(local, x0, 2.0 * math.pi * k / rays, step, reach):
            image = pleated.final
            rows.append({"x_re": image.z.real, "x_im": image.z.imag, "height": image.height,
                         "src_re": q.real, "src_im": q.imag})
    return write_csv(path, rows)
