"""
Parcimonie au niveau des vecteurs : norme ℓ₀, supports, partition A_ℓ / Ω_ℓ
de ℝ^d et rayons de perturbation à l'intérieur desquels la parcimonie ne
peut pas diminuer.

Les indices exposés hors de ce module commencent à 1.
"""
from dataclasses import dataclass

import numpy as np

from l0reg.config import Config
from l0reg.exceptions import ArgumentError, DimensionError, InputError, UndefinedRadiusError

SparsityLevel = int


@dataclass(frozen=True)
class ZeroTolerance:
    """Seuil en dessous duquel une composante calculée est considérée nulle."""
    absolute: float = Config.ZERO_ABS
    relative: float = Config.ZERO_REL

    def __post_init__(self):
        if self.absolute < 0 or self.relative < 0:
            raise ArgumentError(f"Tolérances négatives : {self.absolute}, {self.relative}")

    @classmethod
    def exact(cls):
        return cls(0.0, 0.0)

    @property
    def is_exact(self):
        return self.absolute == 0 and self.relative == 0

    def threshold(self, x):
        if self.is_exact or x.size == 0:
            return 0.0
        return max(self.absolute, self.relative * float(np.max(np.abs(x))))

    def nonzero_mask(self, x):
        return np.abs(x) > self.threshold(x)


DEFAULT_TOLERANCE = ZeroTolerance()


@dataclass(frozen=True)
class SupportSet:
    """Indices strictement croissants de ℕ_d (à partir de 1)."""
    indices: tuple
    ambient_dim: int

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        object.__setattr__(self, 'indices', indices)
        if self.ambient_dim < 0:
            raise ArgumentError(f"Dimension ambiante invalide : {self.ambient_dim}")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ArgumentError(f"Indices non strictement croissants : {indices}")
        if indices and (indices[0] < 1 or indices[-1] > self.ambient_dim):
            raise ArgumentError(f"Indices hors de [1, {self.ambient_dim}] : {indices}")

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask, dtype=bool)
        return cls(tuple(int(i) + 1 for i in np.flatnonzero(mask)), mask.size)

    @classmethod
    def from_zero_based(cls, indices, ambient_dim):
        return cls(tuple(sorted(int(i) + 1 for i in indices)), ambient_dim)

    @classmethod
    def full(cls, ambient_dim):
        return cls(tuple(range(1, ambient_dim + 1)), ambient_dim)

    @classmethod
    def empty(cls, ambient_dim):
        return cls((), ambient_dim)

    @property
    def zero_based(self):
        return np.array([i - 1 for i in self.indices], dtype=int)

    def mask(self):
        mask = np.zeros(self.ambient_dim, dtype=bool)
        mask[self.zero_based] = True
        return mask

    def complement(self):
        return SupportSet.from_mask(~self.mask())

    def issubset(self, other):
        return set(self.indices) <= set(other.indices)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, index):
        return index in self.indices

    def __str__(self):
        return '{' + ', '.join(str(i) for i in self.indices) + '}'


def as_vector(x, name='x'):
    """Convertit en vecteur réel fini et non vide."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DimensionError(f"{name} doit être un vecteur non vide, forme reçue {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} contient des valeurs non finies")
    return x


def l0_norm(x, tol=DEFAULT_TOLERANCE):
    x = as_vector(x)
    return int(np.count_nonzero(tol.nonzero_mask(x)))


def support(x, tol=DEFAULT_TOLERANCE):
    x = as_vector(x)
    return SupportSet.from_mask(tol.nonzero_mask(x))


def classify_level(x, tol=DEFAULT_TOLERANCE):
    """Retourne l'unique ℓ tel que x ∈ A_ℓ."""
    return l0_norm(x, tol)


def check_level(level, dimension):
    if not 0 <= level <= dimension:
        raise ArgumentError(f"Niveau de parcimonie {level} hors de [0, {dimension}]")
    return int(level)


def in_level(x, level, tol=DEFAULT_TOLERANCE):
    x = as_vector(x)
    check_level(level, x.size)
    return l0_norm(x, tol) == level


def in_omega(x, level, tol=DEFAULT_TOLERANCE):
    x = as_vector(x)
    check_level(level, x.size)
    return l0_norm(x, tol) <= level


def in_cone(x, support_set, tol=DEFAULT_TOLERANCE):
    """x ∈ C_I : toutes les composantes non nulles de x sont dans I."""
    return support(x, tol).issubset(support_set)


def on_cone_boundary(x, support_set, tol=DEFAULT_TOLERANCE):
    """x ∈ ∂C_I : le support de x est exactement I."""
    return support(x, tol) == support_set


def _min_nonzero(x, tol):
    x = as_vector(x)
    mask = tol.nonzero_mask(x)
    if not mask.any():
        raise UndefinedRadiusError("Le vecteur nul n'a pas de composante non nulle à borner")
    return float(np.min(np.abs(x[mask])))


def sparsity_safety_radius(x, tol=DEFAULT_TOLERANCE):
    """
    Plus petit module non nul de x.

    Tout y tel que ‖y − x‖₂ soit inférieur à ce rayon garde les composantes non
    nulles de x, donc ‖y‖₀ ≥ ‖x‖₀, et ‖y‖₀ ≥ ‖x‖₀ + 1 dès que y sort de C_{S(x)}.
    """
    return _min_nonzero(x, tol)


def support_subset_radius(x, mu=0.5, tol=DEFAULT_TOLERANCE):
    """Rayon μ·min{|x_i| : i ∈ S(x)} : dedans, S(x) ⊆ S(y), avec égalité sur C_{S(x)}."""
    if not 0 < mu <= 0.5:
        raise ArgumentError(f"mu doit appartenir à ]0, 1/2], reçu {mu}")
    return mu * _min_nonzero(x, tol)
