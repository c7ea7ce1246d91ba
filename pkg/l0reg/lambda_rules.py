"""
Intervalles admissibles du paramètre de régularisation λ.

Chaque règle calcule des témoins par énumération (minimiseur global x* de g,
minimiseur x′ sur Γ_ℓ, minimiseurs x_j sur les niveaux inférieurs) puis les
bornes de l'intervalle fermé [lo, hi] sur lequel le point visé est un
minimiseur global de f.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from l0reg.exceptions import ArgumentError, PreconditionError, UnsupportedModelError
from l0reg.sparsity import DEFAULT_TOLERANCE, check_level
from l0reg.solver import (DEFAULT_BUDGET, Witness, global_minimizer_of_g, minimize_on_gamma,
                          minimize_on_level)
from l0reg.transform import identity_transform

logger = logging.getLogger(__name__)

LO_GUARD = 1e-12


class Rule(str, Enum):
    MAX_SPARSITY = 'max-sparsity'
    LEVEL = 'level'
    LEVEL_ONE = 'level-one'
    PRESERVE = 'preserve'
    COUPLED_MAX = 'coupled-max'
    COUPLED_LEVEL = 'coupled-level'


# inégalité vérifiée par λ pour chaque règle
CONDITIONS = {
    Rule.MAX_SPARSITY: 'λ ≥ g(x₀) − g(x*)',
    Rule.LEVEL: 'g(x′) − g(x*) ≤ λ ≤ min_{j<ℓ} (g(x_j) − g(x′))/(ℓ − j)',
    Rule.LEVEL_ONE: 'g(x′) − g(x*) ≤ λ ≤ g(x₀) − g(x′)',
    Rule.PRESERVE: '0 ≤ λ ≤ min_{j<ℓ} (g(x_j) − g(x*))/(ℓ − j), x_j ∈ B_j',
    Rule.COUPLED_MAX: 'λ ≥ g(0, y₀) − g(x*, y*)',
    Rule.COUPLED_LEVEL: 'g(x′, y′) − g(x*, y*) ≤ λ ≤ min_{j<ℓ} (g(x_j, y_j) − g(x′, y′))/(ℓ − j)',
}


@dataclass
class LambdaInterval:
    lo: float
    hi: float
    feasible: bool
    target_level: int
    rule: Rule
    witnesses: dict = field(default_factory=dict)
    # borne (g_j − g′)/(ℓ − j) pour chaque niveau j < ℓ
    bounds: dict = field(default_factory=dict)
    conservative: bool = False
    diagnostics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def condition(self):
        return CONDITIONS[Rule(self.rule)]

    @property
    def guarded_lo(self):
        """lo relevé de 1e-12·(1 + |lo|), sans dépasser hi."""
        return min(self.lo + LO_GUARD * (1.0 + abs(self.lo)), self.hi)

    def contains(self, lam):
        return self.feasible and self.lo <= lam <= self.hi

    def sample(self, count=5, span=1.0):
        """
        count valeurs de λ régulièrement espacées, extrémités comprises.
        Un intervalle non borné est échantillonné sur [lo, lo + span].
        """
        if not self.feasible:
            raise PreconditionError("Intervalle vide : aucun λ à échantillonner")
        if count < 1:
            raise ArgumentError(f"Nombre de valeurs invalide : {count}")
        lo = self.guarded_lo
        hi = self.hi if math.isfinite(self.hi) else lo + span
        if count == 1:
            return np.array([lo])
        return np.linspace(lo, hi, count)


def _tie(a, b):
    return 1e-12 * (1.0 + max(abs(a), abs(b)))


def _witness(report):
    return Witness(report.minimizer, report.value_g, report.attained)


def _transform_for(model, transform):
    return transform if transform is not None else identity_transform(model.dimension)


def _require_coupled(model):
    if not model.coupled:
        raise UnsupportedModelError(f"Règle réservée aux modèles couplés, modèle reçu : {model.variant}")


def _max_sparsity(model, transform, budget, tol, rule):
    star = global_minimizer_of_g(model, transform, tol)
    zero = minimize_on_gamma(model, transform, 0, budget, tol=tol)
    interval = LambdaInterval(lo=max(0.0, zero.value_g - star.value_g), hi=math.inf, feasible=True,
                              target_level=0, rule=rule,
                              witnesses={'g_star': _witness(star), 'g_0': _witness(zero)})
    logger.info(f"Règle {rule.value} : λ ≥ {interval.lo}")
    return interval


def _level_interval(model, transform, level, budget, tol, rule):
    level = check_level(level, transform.d)
    if level == 0:
        raise ArgumentError("Pour ℓ = 0, utiliser lambda_for_max_sparsity")
    star = global_minimizer_of_g(model, transform, tol)
    prime = minimize_on_gamma(model, transform, level, budget, tol=tol)
    g_star, g_prime = star.value_g, prime.value_g
    witnesses = {'g_star': _witness(star), 'g_prime': _witness(prime)}
    bounds, weighted = {}, {}
    for j in range(level):
        lower = minimize_on_gamma(model, transform, j, budget, tol=tol)
        witnesses[f'g_{j}'] = _witness(lower)
        bounds[j] = (lower.value_g - g_prime) / (level - j)
        average = (lower.value_g + (level - j) * g_star) / (level - j + 1)
        weighted[j] = g_prime <= average + _tie(g_prime, average)
    lo = max(0.0, g_prime - g_star)
    hi = min(bounds.values())
    feasible = all(weighted.values())
    ordered = lo <= hi + _tie(lo, hi)
    if ordered != feasible:
        logger.warning(f"Règle {rule.value} : lo ≤ hi ({ordered}) et moyenne pondérée ({feasible}) divergent")
    if feasible and lo > hi:
        hi = lo
    interval = LambdaInterval(lo=lo, hi=hi, feasible=feasible, target_level=level, rule=rule,
                              witnesses=witnesses, bounds=bounds,
                              diagnostics={'weighted_average': weighted, 'interval_ordered': ordered})
    if prime.achieved_level < level:
        interval.notes.append(f"x′ atteint le niveau {prime.achieved_level} < {level}")
    logger.info(f"Règle {rule.value} (ℓ = {level}) : [{lo}, {hi}], admissible = {feasible}")
    return interval


def _midpoint(interval):
    g_star = interval.witnesses['g_star'].value
    g_prime = interval.witnesses['g_prime'].value
    g_zero = interval.witnesses['g_0'].value
    average = (g_star + g_zero) / 2
    return g_prime <= average + _tie(g_prime, average)


def lambda_for_max_sparsity(model, transform, budget=DEFAULT_BUDGET, tol=DEFAULT_TOLERANCE):
    """[g(x₀) − g(x*), +∞) : x₀, minimiseur de g sur B₀, minimise alors f."""
    return _max_sparsity(model, transform, budget, tol, Rule.MAX_SPARSITY)


def lambda_interval_for_level(model, transform, level, budget=DEFAULT_BUDGET, tol=DEFAULT_TOLERANCE):
    """
    [g(x′) − g(x*), min_j (g(x_j) − g(x′))/(ℓ − j)] où x′ minimise g sur Γ_ℓ
    et x_j sur Γ_j, j < ℓ.

    L'intervalle est non vide si et seulement si, pour tout j,
    g(x′) ≤ (g(x_j) + (ℓ − j)·g(x*))/(ℓ − j + 1) ; les deux tests sont
    rapportés dans diagnostics.
    """
    return _level_interval(model, transform, level, budget, tol, Rule.LEVEL)


def lambda_interval_level_one(model, transform, budget=DEFAULT_BUDGET, tol=DEFAULT_TOLERANCE):
    interval = _level_interval(model, transform, 1, budget, tol, Rule.LEVEL_ONE)
    interval.diagnostics['midpoint'] = _midpoint(interval)
    return interval


def lambda_preserving_global_min(model, transform, budget=DEFAULT_BUDGET, tol=DEFAULT_TOLERANCE):
    """
    [0, min_j (g(x_j) − g(x*))/(ℓ − j)] : x*, de niveau ℓ, reste minimiseur
    global de f. Les x_j minimisent g sur B_j ; si un minimum n'est pas
    atteint, l'infimum est utilisé et l'intervalle est marqué conservative.
    """
    star = global_minimizer_of_g(model, transform, tol)
    level = star.achieved_level
    interval = LambdaInterval(lo=0.0, hi=math.inf, feasible=True, target_level=level,
                              rule=Rule.PRESERVE, witnesses={'g_star': _witness(star)})
    if level == 0:
        interval.notes.append('x* ∈ B₀ : minimiseur global de f pour tout λ ≥ 0')
        return interval
    for j in range(level):
        lower = minimize_on_level(model, transform, j, budget, tol=tol)
        interval.witnesses[f'g_{j}'] = _witness(lower)
        interval.bounds[j] = (lower.value_g - star.value_g) / (level - j)
        if not lower.attained:
            interval.conservative = True
            interval.notes.append(f"infimum utilisé sur B_{j}")
    interval.hi = max(0.0, min(interval.bounds.values()))
    logger.info(f"Règle preserve (ℓ = {level}) : [0, {interval.hi}], conservative = {interval.conservative}")
    return interval


def coupled_lambda_for_max_sparsity(model, budget=DEFAULT_BUDGET, transform=None, tol=DEFAULT_TOLERANCE):
    """[g(0, y₀) − g(x*, y*), +∞) pour un modèle couplé."""
    _require_coupled(model)
    interval = _max_sparsity(model, _transform_for(model, transform), budget, tol, Rule.COUPLED_MAX)
    interval.notes.append('pour λ > lo, (0, y₀) est le minimiseur global unique en x')
    return interval


def coupled_lambda_interval_for_level(model, level, budget=DEFAULT_BUDGET, transform=None,
                                      tol=DEFAULT_TOLERANCE):
    _require_coupled(model)
    interval = _level_interval(model, _transform_for(model, transform), level, budget, tol,
                               Rule.COUPLED_LEVEL)
    if interval.target_level == 1:
        interval.diagnostics['coupled_midpoint'] = _midpoint(interval)
    return interval
