"""
Modèles de fidélité g et fonctions régularisées f = g + λ‖M·‖₀.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from l0reg.exceptions import (ArgumentError, DimensionError, EvaluatorError, InputError,
                              SolverError, UnsupportedModelError)
from l0reg.sparsity import DEFAULT_TOLERANCE, SupportSet, as_vector
from l0reg.transform import Transform, classify_preimage, identity_transform, svd_reduce

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


class Pair(NamedTuple):
    """Point (x, y) des modèles couplés ; seul x est régularisé."""
    x: np.ndarray
    y: np.ndarray

    def flat(self):
        return np.concatenate([self.x, self.y])


def _matrix(value, name):
    value = np.atleast_2d(np.asarray(value, dtype=float))
    if value.ndim != 2:
        raise InputError(f"{name} doit être une matrice, forme reçue {value.shape}")
    if not np.all(np.isfinite(value)):
        raise InputError(f"{name} contient des valeurs non finies")
    return value


class FidelityModel:
    """Fonction de fidélité g ; les variantes concrètes héritent de cette classe."""
    variant = None
    coupled = False
    # les minimisations restreintes sont-elles résolues exactement ?
    exact = True

    @property
    def dimension(self):
        """Dimension de la variable régularisée x."""
        raise NotImplementedError

    def check_point(self, point):
        raise NotImplementedError

    def value(self, point):
        raise NotImplementedError

    def global_minimum(self):
        raise UnsupportedModelError(f"Pas de minimum global direct pour le modèle {self.variant}")

    def perturb(self, point, delta):
        """Ajoute un déplacement aplati à un point du modèle."""
        point = self.check_point(point)
        return point + delta

    def flatten(self, point):
        return self.check_point(point)


class SingleVariableModel(FidelityModel):

    def check_point(self, point):
        x = as_vector(point)
        if x.size != self.dimension:
            raise DimensionError(f"Point de dimension {x.size}, le modèle attend {self.dimension}")
        return x


class Quadratic(SingleVariableModel):
    """g(x) = ‖Ax − b‖₂²."""
    variant = 'quadratic'

    def __init__(self, A, b):
        self.A = _matrix(A, 'A')
        self.b = as_vector(b, 'b')
        if self.A.shape[0] != self.b.size:
            raise DimensionError(f"A a {self.A.shape[0]} lignes mais b a {self.b.size} composantes")

    @property
    def dimension(self):
        return self.A.shape[1]

    def value(self, point):
        residual = self.A @ self.check_point(point) - self.b
        return float(residual @ residual)

    def global_minimum(self):
        x, *_ = np.linalg.lstsq(self.A, self.b, rcond=None)
        return x, self.value(x)


class SpikedCone(SingleVariableModel):
    """
    Cône g(x) = ‖x − (1, 1)‖₂/√2 − 1 sur ℝ², avec la valeur isolée −0,9 au
    point (0, 1).
    """
    variant = 'spiked-cone'
    center = np.array([1.0, 1.0])
    spike = np.array([0.0, 1.0])
    spike_value = -0.9

    @property
    def dimension(self):
        return 2

    def cone_value(self, x):
        return float(np.linalg.norm(x - self.center)) / SQRT2 - 1.0

    def value(self, point):
        x = self.check_point(point)
        if np.array_equal(x, self.spike):
            return self.spike_value
        return self.cone_value(x)

    def global_minimum(self):
        return self.center.copy(), -1.0


class CoupledModel(FidelityModel):
    """Base des modèles g(x, y) = φ(y) + μ·écart(x, Dy), φ(y) = yᵀQy + cᵀy."""
    coupled = True

    def __init__(self, phi_Q, phi_c, mu, D):
        Q = _matrix(phi_Q, 'phi_Q')
        if Q.shape[0] != Q.shape[1]:
            raise DimensionError(f"phi_Q doit être carrée, forme reçue {Q.shape}")
        self.phi_Q = (Q + Q.T) / 2
        self.phi_c = as_vector(phi_c, 'phi_c')
        self.mu = float(mu)
        self.D = _matrix(D, 'D')
        if self.mu <= 0:
            raise ArgumentError(f"mu doit être strictement positif, reçu {mu}")
        if self.phi_c.size != self.phi_Q.shape[0]:
            raise DimensionError("phi_c et phi_Q n'ont pas la même dimension")
        if self.D.shape[1] != self.phi_Q.shape[0]:
            raise DimensionError(f"D a {self.D.shape[1]} colonnes, attendu d' = {self.phi_Q.shape[0]}")
        scale = max(1.0, float(np.max(np.abs(self.phi_Q))))
        if np.linalg.eigvalsh(self.phi_Q).min() < -1e-10 * scale:
            raise InputError("phi_Q doit être semi-définie positive")

    @property
    def dimension(self):
        return self.D.shape[0]

    @property
    def d_prime(self):
        return self.D.shape[1]

    def phi(self, y):
        return float(y @ self.phi_Q @ y + self.phi_c @ y)

    def check_point(self, point):
        try:
            x, y = point
        except (TypeError, ValueError) as e:
            raise DimensionError("Un modèle couplé attend un couple (x, y)") from e
        x = as_vector(x, 'x')
        y = as_vector(y, 'y')
        if x.size != self.dimension or y.size != self.d_prime:
            raise DimensionError(f"Couple de dimensions ({x.size}, {y.size}), "
                                 f"attendu ({self.dimension}, {self.d_prime})")
        return Pair(x, y)

    def perturb(self, point, delta):
        point = self.check_point(point)
        return Pair(point.x + delta[:self.dimension], point.y + delta[self.dimension:])

    def flatten(self, point):
        return self.check_point(point).flat()

    def unflatten(self, vector):
        return Pair(vector[:self.dimension], vector[self.dimension:])

    def coupling(self, x, y):
        raise NotImplementedError

    def value(self, point):
        x, y = self.check_point(point)
        return self.phi(y) + self.mu * self.coupling(x, y)


class CoupledQuadratic(CoupledModel):
    """g(x, y) = φ(y) + μ‖x − Dy‖₂²."""
    variant = 'coupled-quadratic'

    def coupling(self, x, y):
        residual = x - self.D @ y
        return float(residual @ residual)

    def hessian_form(self):
        """
        Retourne (H, h) tels que g(z) = zᵀHz + hᵀz pour z = (x, y).
        """
        d = self.dimension
        mu, D = self.mu, self.D
        H = np.block([[mu * np.eye(d), -mu * D],
                      [-mu * D.T, self.phi_Q + mu * D.T @ D]])
        h = np.concatenate([np.zeros(d), self.phi_c])
        return H, h

    def global_minimum(self):
        H, h = self.hessian_form()
        z, residual = solve_quadratic_form(H, h, np.eye(H.shape[0]))
        pair = self.unflatten(z)
        return pair, self.value(pair)


class CoupledCappedL1(CoupledModel):
    """g(x, y) = φ(y) + μ‖x − Dy‖₁."""
    variant = 'coupled-capped-l1'
    exact = False

    def coupling(self, x, y):
        return float(np.sum(np.abs(x - self.D @ y)))

    def global_minimum(self):
        raise UnsupportedModelError(
            "Le modèle coupled-capped-l1 se minimise par le solveur itératif "
            "(l0reg.solver.minimize_on_support)")


class BlackBox(SingleVariableModel):
    """
    Fonction g fournie par l'appelant.

    L'évaluateur doit être déterministe et à valeurs finies ;
    restricted_minimizer(S) renvoie un minimiseur revendiqué de g sur
    {x : (Mx)_i = 0, i ∉ S}. Les deux fonctions peuvent être appelées depuis
    plusieurs threads si l'énumération est parallélisée.
    """
    variant = 'black-box'
    exact = False

    def __init__(self, evaluator, dimension, restricted_minimizer=None):
        if dimension < 1:
            raise DimensionError(f"Dimension invalide : {dimension}")
        self.evaluator = evaluator
        self.restricted_minimizer = restricted_minimizer
        self._dimension = int(dimension)

    @property
    def dimension(self):
        return self._dimension

    def value(self, point):
        value = float(self.evaluator(self.check_point(point)))
        if not math.isfinite(value):
            raise EvaluatorError(f"L'évaluateur a renvoyé une valeur non finie : {value}")
        return value

    def global_minimum(self):
        if self.restricted_minimizer is None:
            raise UnsupportedModelError("Aucun restricted_minimizer fourni pour le modèle boîte noire")
        x = self.check_point(self.restricted_minimizer(SupportSet.full(self.dimension)))
        return x, self.value(x)


def solve_quadratic_form(H, h, basis):
    """
    Minimise zᵀHz + hᵀz sur z = basis·w ; H semi-définie positive.

    Retourne (z, résidu KKT). Lève SolverError si la forme n'est pas bornée
    inférieurement sur le sous-espace.
    """
    if basis.shape[1] == 0:
        return np.zeros(basis.shape[0]), 0.0
    reduced = basis.T @ H @ basis
    rhs = -basis.T @ h
    w, *_ = np.linalg.lstsq(2 * reduced, rhs, rcond=None)
    residual = float(np.linalg.norm(2 * reduced @ w - rhs))
    scale = 1.0 + float(np.linalg.norm(rhs)) + float(np.linalg.norm(reduced)) * float(np.linalg.norm(w))
    if residual > 1e-8 * scale:
        raise SolverError(f"Forme quadratique non bornée inférieurement (résidu {residual:.3e})")
    return basis @ w, residual


def eval_g(model, point):
    return model.value(point)


@dataclass(frozen=True, eq=False)
class RegularizedObjective:
    """f = g + λ‖M·‖₀ ; pour un modèle couplé la transformée agit sur x."""
    model: FidelityModel
    transform: Transform = None
    lam: float = 0.0

    def __post_init__(self):
        if self.transform is None:
            object.__setattr__(self, 'transform', identity_transform(self.model.dimension))
        if not self.lam >= 0:
            raise ArgumentError(f"lambda doit être positif ou nul, reçu {self.lam}")
        if self.transform.m != self.model.dimension:
            raise DimensionError(f"La transformée agit sur ℝ^{self.transform.m}, "
                                 f"le modèle sur ℝ^{self.model.dimension}")

    @property
    def d(self):
        return self.transform.d

    def level_of(self, point, tol=DEFAULT_TOLERANCE):
        point = self.model.check_point(point)
        x = point.x if self.model.coupled else point
        return classify_preimage(x, self.transform, tol)

    def with_lambda(self, lam):
        return RegularizedObjective(self.model, self.transform, lam)


def eval_f(objective, point, tol=DEFAULT_TOLERANCE):
    value = objective.model.value(point)
    if objective.lam == 0:
        return value
    return value + objective.lam * objective.level_of(point, tol)


def global_min_g(model):
    point, value = model.global_minimum()
    logger.debug(f"Minimum global de g ({model.variant}) : {value}")
    return point, value


def reduce_to_diagonal(model, transform):
    """
    Réécrit le problème en z = Vᵀx pour M = U·Λ·Vᵀ : retourne (modèle en z,
    transformée Λ de svd_reduce).

    Sur Λ, seules les r premières composantes de z sont régularisées ; x se
    retrouve par transformée.from_reduced(z). Seuls les modèles invariants par
    rotation de x ont une forme réduite dans leur propre famille.
    """
    reduced = svd_reduce(transform)
    V = transform.right_factor
    if isinstance(model, Quadratic):
        return Quadratic(model.A @ V, model.b), reduced
    if isinstance(model, CoupledQuadratic):
        return CoupledQuadratic(model.phi_Q, model.phi_c, model.mu, V.T @ model.D), reduced
    raise UnsupportedModelError(f"Pas de forme réduite pour le modèle {model.variant}")
