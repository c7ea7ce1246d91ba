"""
Matrice de transformation M : décomposition en valeurs singulières, rang,
norme spectrale, et classement de l'espace de départ ℝ^m selon les
ensembles B_j = {x : Mx ∈ A_j} et Γ_ℓ = ∪_{j ≤ ℓ} B_j.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from l0reg.config import Config
from l0reg.exceptions import (DegenerateTransformError, DimensionError, InputError,
                              PreconditionError, UnsupportedTransformError)
from l0reg.sparsity import DEFAULT_TOLERANCE, as_vector, check_level, l0_norm

logger = logging.getLogger(__name__)


def _is_rectangular_diagonal(matrix):
    off_diagonal = matrix.copy()
    k = min(matrix.shape)
    off_diagonal[np.arange(k), np.arange(k)] = 0.0
    return not np.any(off_diagonal)


@dataclass(frozen=True, eq=False)
class Transform:
    """Transformée M (d × m) et ses facteurs M = U·Λ·Vᵀ."""
    matrix: np.ndarray
    left_factor: np.ndarray
    singular_values: np.ndarray
    right_factor: np.ndarray
    rank_tol: float = Config.RANK_TOL
    diagonal: bool = False
    is_identity: bool = False
    # facteurs de changement de variable conservés par svd_reduce
    source: 'Transform' = field(default=None, repr=False)

    @property
    def d(self):
        return self.matrix.shape[0]

    @property
    def m(self):
        return self.matrix.shape[1]

    @property
    def spectral_norm(self):
        return float(self.singular_values[0]) if self.singular_values.size else 0.0

    @property
    def rank(self):
        top = self.spectral_norm
        if top == 0:
            return 0
        return int(np.count_nonzero(self.singular_values > self.rank_tol * top))

    @property
    def full_rank(self):
        return self.rank == self.d

    @property
    def supported(self):
        """Rang plein, ou matrice diagonale rectangulaire (réduction Λ)."""
        return self.full_rank or self.diagonal

    @property
    def sigma(self):
        """Λ sous forme de matrice d × m."""
        sigma = np.zeros((self.d, self.m))
        k = self.singular_values.size
        sigma[np.arange(k), np.arange(k)] = self.singular_values
        return sigma

    def reconstruction_error(self):
        return float(np.linalg.norm(self.matrix - self.left_factor @ self.sigma @ self.right_factor.T))

    def apply(self, x):
        x = as_vector(x)
        if x.size != self.m:
            raise DimensionError(f"Vecteur de dimension {x.size}, la transformée attend {self.m}")
        if self.is_identity:
            return x.copy()
        return self.matrix @ x

    def preimage(self, y):
        """Antécédent de moindre norme M⁺y."""
        y = as_vector(y, 'y')
        if y.size != self.d:
            raise DimensionError(f"Vecteur image de dimension {y.size}, attendu {self.d}")
        r = self.rank
        if r == 0:
            return np.zeros(self.m)
        u = self.left_factor[:, :r]
        v = self.right_factor[:, :r]
        return v @ ((u.T @ y) / self.singular_values[:r])

    def to_reduced(self, x):
        """Changement de variable z = Vᵀx vers la forme diagonale."""
        if self.source is None:
            return as_vector(x)
        return self.source.right_factor.T @ as_vector(x)

    def from_reduced(self, z):
        if self.source is None:
            return as_vector(z)
        return self.source.right_factor @ as_vector(z)

    def require_supported(self):
        if not self.supported:
            raise UnsupportedTransformError(
                f"Transformée de rang {self.rank} < d = {self.d} : seule la forme diagonale "
                f"obtenue par svd_reduce est prise en charge")


def build_transform(matrix, rank_tol=Config.RANK_TOL):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DimensionError(f"Matrice de forme invalide {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InputError("La matrice contient des valeurs non finies")
    if rank_tol < 0:
        raise InputError(f"Tolérance de rang négative : {rank_tol}")
    try:
        u, s, vt = np.linalg.svd(matrix, full_matrices=True)
    except np.linalg.LinAlgError as e:
        raise InputError(f"Décomposition SVD impossible : {e}") from e
    transform = Transform(matrix=matrix, left_factor=u, singular_values=s, right_factor=vt.T,
                          rank_tol=rank_tol, diagonal=_is_rectangular_diagonal(matrix),
                          is_identity=matrix.shape[0] == matrix.shape[1] and np.array_equal(
                              matrix, np.eye(matrix.shape[0])))
    logger.debug(f"Transformée {transform.d}x{transform.m} : rang {transform.rank}, "
                 f"norme spectrale {transform.spectral_norm}")
    return transform


class IdentityTransform(Transform):
    """Cas particulier M = I_d."""

    def __init__(self, d):
        eye = np.eye(d)
        super().__init__(matrix=eye, left_factor=eye, singular_values=np.ones(d),
                         right_factor=eye, diagonal=True, is_identity=True)


def identity_transform(d):
    if d < 1:
        raise DimensionError(f"Dimension invalide : {d}")
    return IdentityTransform(d)


def svd_reduce(transform):
    """
    Forme diagonale Λ de M avec les facteurs U, V du changement de variable.

    Sur Λ, seules les r premières composantes sont régularisées ; les m − r
    suivantes restent libres.
    """
    if transform.rank == 0:
        raise DegenerateTransformError("Transformée de rang nul : aucune composante à régulariser")
    r = transform.rank
    singular = transform.singular_values.copy()
    singular[r:] = 0.0
    sigma = np.zeros((transform.d, transform.m))
    sigma[np.arange(singular.size), np.arange(singular.size)] = singular
    reduced = Transform(matrix=sigma, left_factor=np.eye(transform.d), singular_values=singular,
                        right_factor=np.eye(transform.m), rank_tol=transform.rank_tol,
                        diagonal=True, is_identity=bool(np.array_equal(sigma, np.eye(*sigma.shape))
                                                        and transform.d == transform.m),
                        source=transform)
    logger.info(f"Réduction diagonale : rang {r}, {transform.m - r} composantes libres")
    return reduced


def classify_preimage(x, transform, tol=DEFAULT_TOLERANCE):
    """Retourne j tel que x ∈ B_j, c'est-à-dire ‖Mx‖₀."""
    transform.require_supported()
    return l0_norm(transform.apply(x), tol)


def in_gamma(x, level, transform, tol=DEFAULT_TOLERANCE):
    check_level(level, transform.d)
    return classify_preimage(x, transform, tol) <= level


def bd_openness_radius(x, transform, tol=DEFAULT_TOLERANCE):
    """Rayon min_i |(Mx)_i| / ‖M‖ autour d'un point de B_d, qui est ouvert."""
    transform.require_supported()
    image = transform.apply(x)
    if l0_norm(image, tol) != transform.d:
        raise PreconditionError(f"Le point n'appartient pas à B_{transform.d}")
    return float(np.min(np.abs(image))) / transform.spectral_norm


def load_matrix_csv(path):
    """Matrice réelle au format CSV (lignes séparées par des virgules, sans en-tête)."""
    try:
        frame = pd.read_csv(path, header=None, dtype=float)
    except (OSError, ValueError) as e:
        raise InputError(f"Lecture impossible de {path} : {e}") from e
    return frame.to_numpy()
