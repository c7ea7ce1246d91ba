class L0RegError(Exception):
    """Classe de base des erreurs de la boîte à outils."""


class ArgumentError(L0RegError, ValueError):
    """Argument hors de son domaine admissible."""


class DimensionError(ArgumentError):
    """Dimensions incompatibles entre vecteurs et matrices."""


class InputError(ArgumentError):
    """Données mal formées (valeurs non finies, formes invalides)."""


class UndefinedRadiusError(ArgumentError):
    """Rayon demandé pour un vecteur sans composante non nulle."""


class PreconditionError(L0RegError):
    """Précondition d'une opération non satisfaite."""


class UnsupportedTransformError(L0RegError):
    """Transformée ni de rang plein ni diagonale."""


class DegenerateTransformError(L0RegError):
    """Transformée de rang nul."""


class UnsupportedModelError(L0RegError):
    """Opération non prise en charge par ce modèle de fidélité."""


class ProblemFileError(L0RegError):
    """Fichier problème illisible ou invalide."""


class BudgetExceededError(L0RegError):
    def __init__(self, message, patterns=None, limit=None):
        super().__init__(message)
        self.patterns = patterns
        self.limit = limit


class SolverError(L0RegError):
    """Échec d'une minimisation restreinte."""


class LinearAlgebraError(SolverError):
    pass


class EvaluatorError(SolverError):
    """Valeur inutilisable renvoyée par un évaluateur boîte noire."""


class ConvergenceError(SolverError):
    def __init__(self, message, best_iterate=None, iterations=0):
        super().__init__(message)
        self.best_iterate = best_iterate
        self.iterations = iterations
