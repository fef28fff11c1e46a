"""Hiérarchie d'exceptions du paquet.

Toutes les erreurs héritent de :class:`HyperbolicError`, elle-même une
``ValueError`` : une entrée géométriquement invalide reste une valeur invalide.
"""


class HyperbolicError(ValueError):
    """Erreur de base de la boîte à outils."""


class NotLoxodromic(HyperbolicError):
    """Les modules des valeurs propres coïncident (élément non loxodromique)."""


class DegenerateConfiguration(HyperbolicError):
    """Configuration de points dégénérée (birapport de la forme 0/0)."""


class SharedEndpoint(HyperbolicError):
    """Deux géodésiques partagent une extrémité."""


class CrossRatioOne(HyperbolicError):
    """Birapport égal à 1 : géodésiques confondues."""


class EndpointOnLeaf(HyperbolicError):
    """Une extrémité d'arc est posée sur une feuille."""


class InsufficientDepth(HyperbolicError):
    """La troncature de l'orbite peut modifier le résultat."""


class DegenerateConcurrentLeaves(HyperbolicError):
    """Plusieurs feuilles coupent l'arc au même point."""


class RelatorViolation(HyperbolicError):
    """Un relateur n'est plus satisfait par la représentation."""


class BasepointOnLeaf(HyperbolicError):
    """Le point base est sur le support de la lamination."""


class NormalizationFailure(HyperbolicError):
    """Impossible d'orienter le plan d'appui (angle de pliage >= pi)."""


class EmptyBattery(HyperbolicError):
    """Batterie de mots vide."""


class OutOfRange(HyperbolicError):
    """Argument hors de l'intervalle de validité."""


class OutOfDomain(HyperbolicError):
    """Entrée hors du domaine où la borne est établie."""


class InvalidSeparation(HyperbolicError):
    """Paramètre de Schottky trop petit pour le ping-pong."""


class WindowTooSmall(HyperbolicError):
    """Fenêtre de comptage trop courte pour une régression."""


class ConfigError(HyperbolicError):
    """Configuration d'expérience invalide."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
