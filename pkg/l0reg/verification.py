"""
Vérification des conditions nécessaires et des équivalences satisfaites par
les minimiseurs de f = g + λ‖M·‖₀.

Les tests d'optimalité globale sont exacts (énumération des motifs) ; les
tests d'optimalité locale sont échantillonnés et portent la confiance
'sampled', avec le rayon, le nombre de tirages et la graine utilisés.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

from l0reg.config import Config
from l0reg.exceptions import PreconditionError, UnsupportedModelError
from l0reg.models import RegularizedObjective, eval_f
from l0reg.solver import (DEFAULT_BUDGET, Witness, estimate_continuity_radius, global_minimize_f,
                          global_minimizer_of_g, local_min_probe, minimize_on_gamma,
                          minimize_on_level, minimize_on_support)
from l0reg.sparsity import DEFAULT_TOLERANCE, support, support_subset_radius
from l0reg.transform import bd_openness_radius

logger = logging.getLogger(__name__)


class Claim(str, Enum):
    GAMMA_MINIMALITY = 'gamma-minimality'
    GLOBAL_OPTIMALITY = 'global-optimality'
    SPARSITY_DICHOTOMY = 'sparsity-dichotomy'
    DENSE_LOCAL_NOT_GLOBAL = 'dense-local-not-global'
    SUPPORT_LOCAL_EQUIVALENCE = 'support-local-equivalence'


@dataclass
class VerificationVerdict:
    """Si holds est faux, witness réfute l'affirmation d'au moins tolerance_used."""
    claim: Claim
    holds: bool
    witness: Witness = None
    tolerance_used: float = Config.PROBE_SLACK
    confidence: str = 'exact'
    samples: int = 0
    radius: float = None
    seed: int = None
    details: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.holds


def _tolerance(*values):
    return Config.PROBE_SLACK * (1.0 + max(abs(v) for v in values))


def _confidence(model):
    return 'exact' if model.exact else 'numerical'


def _log(verdict):
    logger.info(f"Vérification {verdict.claim.value} : {'vérifiée' if verdict.holds else 'réfutée'}")
    return verdict


def check_necessary_minimizer_of_g_on_gamma(objective, x, budget=DEFAULT_BUDGET, tol=DEFAULT_TOLERANCE):
    """Un minimiseur global de f de niveau ℓ minimise g sur Γ_ℓ."""
    model = objective.model
    level = objective.level_of(x, tol)
    value = model.value(x)
    best = minimize_on_gamma(model, objective.transform, level, budget, tol=tol)
    tolerance = _tolerance(value, best.value_g)
    holds = value <= best.value_g + tolerance
    verdict = VerificationVerdict(claim=Claim.GAMMA_MINIMALITY, holds=holds, tolerance_used=tolerance,
                                  confidence=_confidence(model),
                                  details={'level': level, 'value_g': value, 'gamma_minimum': best.value_g})
    if not holds:
        verdict.witness = Witness(best.minimizer, best.value_g)
    return _log(verdict)


def check_global_optimality(objective, x, budget=DEFAULT_BUDGET, tol=DEFAULT_TOLERANCE):
    value = eval_f(objective, x, tol)
    best = global_minimize_f(objective, budget, tol)
    tolerance = _tolerance(value, best.value_f)
    holds = value <= best.value_f + tolerance
    verdict = VerificationVerdict(claim=Claim.GLOBAL_OPTIMALITY, holds=holds, tolerance_used=tolerance,
                                  confidence=_confidence(objective.model),
                                  details={'value_f': value, 'global_minimum': best.value_f})
    if not holds:
        verdict.witness = Witness(best.minimizer, best.value_f)
    return _log(verdict)


def check_sparsity_dichotomy(objective, x, budget=DEFAULT_BUDGET, tol=DEFAULT_TOLERANCE):
    """Un minimiseur global de f est dans Γ_{d−1} ou minimise g globalement."""
    model, d = objective.model, objective.d
    level = objective.level_of(x, tol)
    value = model.value(x)
    star = global_minimizer_of_g(model, objective.transform, tol)
    tolerance = _tolerance(value, star.value_g)
    sparse = level <= d - 1
    minimal = value <= star.value_g + tolerance
    verdict = VerificationVerdict(claim=Claim.SPARSITY_DICHOTOMY, holds=sparse or minimal,
                                  tolerance_used=tolerance, confidence=_confidence(model),
                                  details={'level': level, 'in_gamma_d_minus_1': sparse,
                                           'global_minimizer_of_g': minimal})
    if not verdict.holds:
        verdict.witness = Witness(star.minimizer, star.value_g)
    return _log(verdict)


def check_dense_local_not_global(objective, x, budget=DEFAULT_BUDGET, seed=None,
                                 samples=Config.PROBE_SAMPLES, tol=DEFAULT_TOLERANCE):
    """
    Pour x ∈ B_d minimiseur global de g : s'il existe x̃ ∈ B_j avec
    g(x) + λ(d − j) > g(x̃), alors x est un minimiseur local de f mais pas un
    minimiseur global, et les minimiseurs globaux de f sont dans Γ_{d−1}.
    """
    if seed is None:
        raise PreconditionError("Une graine est obligatoire pour les vérifications par échantillonnage")
    model, transform, lam, d = objective.model, objective.transform, objective.lam, objective.d
    point = model.check_point(x)
    x_part = point.x if model.coupled else point
    if objective.level_of(point, tol) != d:
        raise PreconditionError(f"Le point n'appartient pas à B_{d}")
    value = model.value(point)
    star = global_minimizer_of_g(model, transform, tol)
    tolerance = _tolerance(value, star.value_g)
    if value > star.value_g + tolerance:
        raise PreconditionError("Le point n'est pas un minimiseur global de g")

    sparse_witness = None
    for j in range(d):
        candidate = minimize_on_level(model, transform, j, budget, tol=tol)
        if value + lam * (d - candidate.achieved_level) > candidate.value_g + tolerance:
            sparse_witness = candidate
            break
    verdict = VerificationVerdict(claim=Claim.DENSE_LOCAL_NOT_GLOBAL, holds=True, tolerance_used=tolerance,
                                  confidence='sampled', seed=seed)
    if sparse_witness is None:
        verdict.details['applicable'] = False
        verdict.notes.append('aucun témoin x̃ : la conclusion ne s\'applique pas')
        return _log(verdict)

    radius = bd_openness_radius(x_part, transform, tol) / 2
    probe = local_min_probe(objective, point, radius, samples=samples, seed=seed, tol=tol)
    best = global_minimize_f(objective, budget, tol)
    f_value = eval_f(objective, point, tol)
    beaten = best.value_f < f_value - tolerance
    sparse = best.achieved_level <= d - 1
    verdict.holds = probe.holds and beaten and sparse
    verdict.radius, verdict.samples = radius, samples
    verdict.details = {'applicable': True, 'witness_level': sparse_witness.achieved_level,
                       'witness_value_g': sparse_witness.value_g, 'local_minimizer': probe.holds,
                       'not_global': beaten, 'global_in_gamma_d_minus_1': sparse,
                       'value_f': f_value, 'global_minimum': best.value_f}
    verdict.notes.append('les minimiseurs globaux sont testés dans Γ_{d−1} (niveau au plus d − 1)')
    if not probe.holds:
        verdict.witness = Witness(probe.best_point, probe.best_value)
    else:
        verdict.witness = Witness(best.minimizer, best.value_f)
    return _log(verdict)


def check_support_local_equivalence(model, lam, pair, probe_samples=Config.PROBE_SAMPLES, seed=None,
                                    transform=None, tol=DEFAULT_TOLERANCE):
    """
    (x, y) minimise g sur C_{S(Mx)} × ℝ^{d′} si et seulement si (x, y) est un
    minimiseur local de f.

    Le premier membre est décidé par une minimisation restreinte, le second
    par échantillonnage dans un rayon où aucun indice du support ne s'annule
    et où g ne baisse pas de plus de λ, complété par le segment qui mène au
    minimiseur restreint (il reste dans C_{S(Mx)}). Le verdict est leur accord.
    """
    if not model.coupled:
        raise UnsupportedModelError(f"Vérification réservée aux modèles couplés, modèle reçu : {model.variant}")
    if not lam > 0:
        raise PreconditionError(f"λ doit être strictement positif, reçu {lam}")
    if seed is None:
        raise PreconditionError("Une graine est obligatoire pour les vérifications par échantillonnage")
    objective = RegularizedObjective(model, transform, lam)
    transform = objective.transform
    pair = model.check_point(pair)
    image = transform.apply(pair.x)
    pattern = support(image, tol)

    restricted = minimize_on_support(model, transform, pattern, tol=tol)
    value = model.value(pair)
    tolerance = max(Config.PROBE_SLACK, restricted.solver_tol * (1.0 + abs(value)))
    restricted_minimizer = value <= restricted.value_g + tolerance

    if len(pattern):
        subset_radius = support_subset_radius(image, tol=tol) / transform.spectral_norm
        start = subset_radius
    else:
        subset_radius, start = math.inf, 1.0
    continuity_radius = estimate_continuity_radius(model, pair, lam, start, seed=seed, steps=20)
    radius = 0.5 * min(subset_radius, continuity_radius)
    if not radius > 0:
        raise PreconditionError("Rayon de continuité nul : la sonde locale est impossible")
    probe = local_min_probe(objective, pair, radius, samples=probe_samples, seed=seed, slack=tolerance,
                            tol=tol, targets=(restricted.minimizer,))

    verdict = VerificationVerdict(claim=Claim.SUPPORT_LOCAL_EQUIVALENCE,
                                  holds=restricted_minimizer == probe.holds, tolerance_used=tolerance,
                                  confidence='sampled', samples=probe_samples, radius=radius, seed=seed,
                                  details={'support': str(pattern), 'restricted_minimizer': restricted_minimizer,
                                           'local_minimizer': probe.holds, 'value_g': value,
                                           'restricted_minimum': restricted.value_g,
                                           'continuity_radius': continuity_radius})
    if restricted_minimizer and not probe.holds:
        verdict.witness = Witness(probe.best_point, probe.best_value)
    elif probe.holds and not restricted_minimizer:
        verdict.witness = Witness(restricted.minimizer, restricted.value_g)
    return _log(verdict)
