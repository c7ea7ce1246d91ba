"""
Minimisation de g restreinte aux motifs de support et minimisation globale de
f par énumération exhaustive des motifs.

Un motif S ⊆ ℕ_d désigne le sous-espace {x : (Mx)_i = 0 pour i ∉ S}. Γ_ℓ est la
réunion des motifs de taille ℓ, et tout x appartient au motif de son propre
support : l'énumération des 2^d motifs est donc exacte.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
import scipy.linalg

from l0reg.config import Config
from l0reg.exceptions import (ArgumentError, BudgetExceededError, ConvergenceError,
                              DimensionError, LinearAlgebraError, UnsupportedModelError)
from l0reg.models import (BlackBox, CoupledCappedL1, CoupledQuadratic, Quadratic, SpikedCone,
                          eval_f, global_min_g, solve_quadratic_form)
from l0reg.sparsity import DEFAULT_TOLERANCE, SupportSet, check_level, support

logger = logging.getLogger(__name__)

ADMM_MAX_ITERATIONS = 100_000
ADMM_TOLERANCE = 1e-9
KKT_TOLERANCE = 1e-8
SAMPLE_SCALES = 8
# segments maintenus strictement dans la boule ouverte
SEGMENT_SHRINK = 0.999


@dataclass(frozen=True)
class EnumerationBudget:
    max_dimension: int = Config.MAX_DIMENSION
    max_patterns: int = Config.MAX_PATTERNS
    parallel_width: int = Config.PARALLEL_WIDTH

    def __post_init__(self):
        if self.max_dimension < 1 or self.max_patterns < 1 or self.parallel_width < 1:
            raise ArgumentError(f"Budget d'énumération invalide : {self}")

    def check(self, dimension, patterns, label):
        if dimension > self.max_dimension:
            raise BudgetExceededError(
                f"Dimension {dimension} supérieure à max_dimension = {self.max_dimension}",
                patterns=patterns, limit=self.max_patterns)
        if patterns > self.max_patterns:
            logger.error(f"Budget dépassé : {label} = {patterns} motifs > {self.max_patterns}")
            raise BudgetExceededError(f"{label} = {patterns} motifs dépasse max_patterns = "
                                      f"{self.max_patterns}", patterns=patterns, limit=self.max_patterns)


DEFAULT_BUDGET = EnumerationBudget()


@dataclass(frozen=True)
class RequestedSet:
    """Ensemble sur lequel g a été minimisée."""
    kind: str
    level: int = None
    support: SupportSet = None

    def __str__(self):
        if self.kind == 'support':
            return f"C_{self.support}"
        if self.kind == 'gamma':
            return f"Γ_{self.level}"
        if self.kind == 'level':
            return f"B_{self.level}"
        return 'all'


@dataclass(frozen=True, eq=False)
class Witness:
    """Point témoin et valeur associée."""
    point: object
    value: float
    attained: bool = True


@dataclass
class SolveReport:
    minimizer: object
    value_g: float
    value_f: float
    requested: RequestedSet
    achieved_level: int
    achieved_support: SupportSet
    pattern: SupportSet
    attained: bool = True
    lam: float = 0.0
    solver_tol: float = KKT_TOLERANCE
    iterations: int = 0
    kkt_residual: float = 0.0
    claimed: bool = False
    ties: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def _check_inputs(model, transform):
    transform.require_supported()
    if transform.m != model.dimension:
        raise DimensionError(f"La transformée agit sur ℝ^{transform.m}, le modèle sur ℝ^{model.dimension}")


def restricted_basis(transform, support_set):
    """Base orthonormée de {x : (Mx)_i = 0 pour tout i ∉ S}."""
    if support_set.ambient_dim != transform.d:
        raise DimensionError(f"Motif dans ℕ_{support_set.ambient_dim}, transformée à {transform.d} lignes")
    rows = support_set.complement().zero_based
    m = transform.m
    if rows.size == 0:
        return np.eye(m)
    if transform.diagonal:
        diagonal = np.zeros(transform.d)
        k = min(transform.d, m)
        diagonal[:k] = np.diag(transform.matrix)[:k]
        constrained = rows[(rows < m) & (diagonal[rows] != 0)]
        free = np.setdiff1d(np.arange(m), constrained)
        return np.eye(m)[:, free]
    try:
        return scipy.linalg.null_space(transform.matrix[rows, :])
    except (np.linalg.LinAlgError, ValueError) as e:
        raise LinearAlgebraError(f"Noyau introuvable pour le motif {support_set} : {e}") from e


def _soft_threshold(a, t):
    return np.sign(a) * np.maximum(np.abs(a) - t, 0.0)


def _solve_coupled_l1(model, basis, max_iterations=ADMM_MAX_ITERATIONS, tol=ADMM_TOLERANCE):
    """
    ADMM sur min φ(y) + μ‖u‖₁ sous u = N·w − D·y, avec x = N·w.

    Retourne (couple, itérations). Lève ConvergenceError avec le meilleur
    itéré si la tolérance n'est pas atteinte.
    """
    d, k, dp = model.dimension, basis.shape[1], model.d_prime
    K = np.hstack([basis, -model.D])
    Q = np.zeros((k + dp, k + dp))
    Q[k:, k:] = model.phi_Q
    c = np.concatenate([np.zeros(k), model.phi_c])
    rho = model.mu
    solve = np.linalg.pinv(2 * Q + rho * K.T @ K)

    def objective(v):
        y = v[k:]
        return model.phi(y) + model.mu * float(np.sum(np.abs(K @ v)))

    v = np.zeros(k + dp)
    u = np.zeros(d)
    w = np.zeros(d)
    best, best_value = v, objective(v)
    for iteration in range(1, max_iterations + 1):
        v = solve @ (-c + rho * K.T @ (u - w))
        Kv = K @ v
        u_previous = u
        u = _soft_threshold(Kv + w, model.mu / rho)
        w = w + Kv - u
        value = objective(v)
        if value < best_value:
            best, best_value = v, value
        primal = np.linalg.norm(Kv - u)
        dual = rho * np.linalg.norm(K.T @ (u - u_previous))
        scale = 1.0 + max(np.linalg.norm(Kv), np.linalg.norm(u))
        if primal <= tol * scale and dual <= tol * (1.0 + rho * np.linalg.norm(K.T @ w)):
            v = best if best_value < value else v
            return model.unflatten(np.concatenate([basis @ v[:k], v[k:]])), iteration
    pair = model.unflatten(np.concatenate([basis @ best[:k], best[k:]]))
    logger.error(f"ADMM sans convergence après {max_iterations} itérations")
    raise ConvergenceError(f"Pas de convergence en {max_iterations} itérations",
                           best_iterate=pair, iterations=max_iterations)


def _solve_pattern(model, transform, pattern):
    """Minimiseur brut de g sur le motif : (point, itérations, résidu KKT, revendiqué)."""
    basis = restricted_basis(transform, pattern)
    if isinstance(model, Quadratic):
        if basis.shape[1] == 0:
            x = np.zeros(model.dimension)
        else:
            z, *_ = np.linalg.lstsq(model.A @ basis, model.b, rcond=None)
            x = basis @ z
        kkt = float(np.linalg.norm(2 * basis.T @ model.A.T @ (model.A @ x - model.b)))
        return x, 1, kkt, False
    if isinstance(model, SpikedCone):
        x = basis @ (basis.T @ model.center)
        candidates = [x]
        rows = pattern.complement().zero_based
        if np.linalg.norm(transform.apply(model.spike)[rows]) <= 1e-12:
            candidates.append(model.spike.copy())
        return min(candidates, key=model.value), 1, 0.0, False
    if isinstance(model, CoupledQuadratic):
        H, h = model.hessian_form()
        z, kkt = solve_quadratic_form(H, h, scipy.linalg.block_diag(basis, np.eye(model.d_prime)))
        return model.unflatten(z), 1, kkt, False
    if isinstance(model, CoupledCappedL1):
        pair, iterations = _solve_coupled_l1(model, basis)
        return pair, iterations, 0.0, False
    if isinstance(model, BlackBox):
        if model.restricted_minimizer is None:
            raise ArgumentError("Le modèle boîte noire n'a pas de restricted_minimizer")
        return model.check_point(model.restricted_minimizer(pattern)), 0, 0.0, True
    raise ArgumentError(f"Modèle non pris en charge : {type(model).__name__}")


def _report(model, transform, pattern, requested, lam=0.0, tol=DEFAULT_TOLERANCE, solved=None):
    point, iterations, kkt, claimed = solved or _solve_pattern(model, transform, pattern)
    value_g = model.value(point)
    x = point.x if model.coupled else point
    achieved = support(transform.apply(x), tol)
    report = SolveReport(minimizer=point, value_g=value_g, value_f=value_g + lam * len(achieved),
                         requested=requested, achieved_level=len(achieved),
                         achieved_support=achieved, pattern=pattern, lam=lam,
                         iterations=iterations, kkt_residual=kkt, claimed=claimed,
                         solver_tol=KKT_TOLERANCE if model.exact else ADMM_TOLERANCE)
    if claimed:
        report.notes.append('minimiseur revendiqué par le modèle boîte noire')
    return report


def minimize_on_support(model, transform, support_set, lam=0.0, tol=DEFAULT_TOLERANCE):
    """min g(x) sous (Mx)_i = 0 pour i ∉ S ; le point obtenu peut être de niveau < |S|."""
    _check_inputs(model, transform)
    return _report(model, transform, support_set, RequestedSet('support', support=support_set), lam, tol)


def _patterns(d, size):
    for indices in itertools.combinations(range(d), size):
        yield SupportSet.from_zero_based(indices, d)


def _solve_all(model, transform, patterns, requested, budget, lam, tol):
    solve = partial(_report, model, transform, requested=requested, lam=lam, tol=tol)
    if budget.parallel_width > 1:
        with ThreadPoolExecutor(max_workers=budget.parallel_width) as executor:
            yield from executor.map(solve, patterns)
    else:
        yield from map(solve, patterns)


def _tie_tolerance(a, b):
    return 1e-12 * (1.0 + max(abs(a), abs(b)))


class _Incumbent:
    """Meilleur rapport courant, départagé par (niveau atteint, support, motif)."""

    def __init__(self, score, tie_key):
        self.score = score
        self.tie_key = tie_key
        self.best = None
        self.ties = []

    def offer(self, report):
        if self.best is None:
            self.best, self.ties = report, [report.achieved_support]
            return
        a, b = self.score(report), self.score(self.best)
        tie = _tie_tolerance(a, b)
        if a < b - tie:
            self.best, self.ties = report, [report.achieved_support]
        elif a <= b + tie:
            if report.achieved_support not in self.ties:
                self.ties.append(report.achieved_support)
            if self.tie_key(report) < self.tie_key(self.best):
                self.best = report

    def result(self):
        self.best.ties = sorted(self.ties, key=lambda s: (len(s), s.indices))
        return self.best


def _default_tie_key(report):
    return report.achieved_level, report.achieved_support.indices, report.pattern.indices


def minimize_on_gamma(model, transform, level, budget=DEFAULT_BUDGET, lam=0.0, tol=DEFAULT_TOLERANCE):
    """Minimiseur de g sur Γ_ℓ, réunion des motifs de taille ℓ."""
    _check_inputs(model, transform)
    d = transform.d
    level = check_level(level, d)
    budget.check(d, math.comb(d, level), f"C({d}, {level})")
    incumbent = _Incumbent(lambda r: r.value_g, _default_tie_key)
    requested = RequestedSet('gamma', level=level)
    for report in _solve_all(model, transform, _patterns(d, level), requested, budget, lam, tol):
        incumbent.offer(report)
    best = incumbent.result()
    logger.debug(f"Minimum de g sur Γ_{level} : {best.value_g} en {best.achieved_support}")
    return best


def minimize_on_level(model, transform, level, budget=DEFAULT_BUDGET, lam=0.0, tol=DEFAULT_TOLERANCE):
    """
    Minimum (ou infimum) de g sur B_j.

    B_j n'est pas fermé : si le meilleur point des motifs de taille j tombe
    dans une strate inférieure, le rapport porte attained = False et la valeur
    est celle de l'infimum.
    """
    _check_inputs(model, transform)
    d = transform.d
    level = check_level(level, d)
    budget.check(d, math.comb(d, level), f"C({d}, {level})")
    incumbent = _Incumbent(lambda r: r.value_g,
                           lambda r: (r.achieved_level != level,) + _default_tie_key(r))
    requested = RequestedSet('level', level=level)
    for report in _solve_all(model, transform, _patterns(d, level), requested, budget, lam, tol):
        incumbent.offer(report)
    best = incumbent.result()
    best.attained = best.achieved_level == level
    if not best.attained:
        best.notes.append(f"infimum de g sur B_{level} non atteint : meilleur point dans B_{best.achieved_level}")
        logger.info(f"Infimum non atteint sur B_{level}")
    return best


def global_minimize_f(objective, budget=DEFAULT_BUDGET, tol=DEFAULT_TOLERANCE):
    """
    Minimiseur global de f = g + λ‖M·‖₀ par énumération des 2^d motifs.

    Les motifs sont parcourus par taille croissante. Un motif dont le
    minimiseur tombe dans une strate inférieure est dominé par le motif de son
    propre support ; les tailles k telles que g* + λk dépasse le meilleur f
    courant sont donc écartées (modèles résolus exactement uniquement).
    """
    model, transform, lam = objective.model, objective.transform, objective.lam
    _check_inputs(model, transform)
    d = transform.d
    budget.check(d, 2 ** d, f"2^{d}")
    requested = RequestedSet('all')
    g_star = None
    if lam > 0 and model.exact:
        g_star = _report(model, transform, SupportSet.full(d), requested, lam, tol).value_g
    incumbent = _Incumbent(lambda r: r.value_f, _default_tie_key)
    skipped = 0
    for size in range(d + 1):
        best = incumbent.best
        if g_star is not None and best is not None and \
                g_star + lam * size > best.value_f + 1e-9 * (1.0 + abs(best.value_f)):
            skipped = sum(math.comb(d, k) for k in range(size, d + 1))
            break
        for report in _solve_all(model, transform, _patterns(d, size), requested, budget, lam, tol):
            incumbent.offer(report)
    best = incumbent.result()
    logger.info(f"Minimum global de f (λ = {lam}) : {best.value_f} au niveau {best.achieved_level}, "
                f"{skipped} motifs écartés sur {2 ** d}")
    return best


def global_minimizer_of_g(model, transform, tol=DEFAULT_TOLERANCE):
    """
    Minimiseur global de g. Forme close du modèle si elle existe, sinon
    minimisation sur le motif plein (Γ_d = ℝ^m).
    """
    _check_inputs(model, transform)
    full = SupportSet.full(transform.d)
    try:
        point, _ = global_min_g(model)
    except UnsupportedModelError:
        solved = None
    else:
        solved = (point, 1, 0.0, isinstance(model, BlackBox))
    return _report(model, transform, full, RequestedSet('all'), 0.0, tol, solved=solved)


def sample_ball(rng, dimension, radius):
    """Point uniforme dans la boule ouverte de rayon donné."""
    if dimension == 0:
        return np.zeros(0)
    direction = rng.standard_normal(dimension)
    norm = np.linalg.norm(direction)
    if norm == 0:
        return np.zeros(dimension)
    return direction / norm * radius * rng.random() ** (1.0 / dimension)


def stratum_basis(objective, point, tol=DEFAULT_TOLERANCE):
    """Base du sous-espace des déplacements qui restent dans C_{S(Mx)}, y compris y."""
    model, transform = objective.model, objective.transform
    point = model.check_point(point)
    x = point.x if model.coupled else point
    basis = restricted_basis(transform, support(transform.apply(x), tol))
    if model.coupled:
        return scipy.linalg.block_diag(basis, np.eye(model.d_prime))
    return basis


@dataclass
class ProbeResult:
    holds: bool
    base_value: float
    best_value: float
    best_point: object
    radius: float
    samples: int
    seed: object = None

    def __bool__(self):
        return self.holds


def local_min_probe(objective, point, radius, samples=Config.PROBE_SAMPLES, seed=None,
                    slack=Config.PROBE_SLACK, tol=DEFAULT_TOLERANCE, targets=()):
    """
    Vérification par échantillonnage de f(point) ≤ f(point + δ) + slack, ‖δ‖ < rayon.

    La moitié des tirages est prise dans la strate du point : les strates de
    dimension inférieure sont de mesure nulle et jamais atteintes par un
    tirage dans la boule. Les rayons des tirages parcourent rayon·2^-k,
    k < SAMPLE_SCALES. Pour chaque point de targets, les points du segment
    [point, cible] à distance rayon·2^-k sont aussi évalués. Condition
    nécessaire seulement.
    """
    if not radius > 0:
        raise ArgumentError(f"Le rayon doit être strictement positif, reçu {radius}")
    if samples < 1:
        raise ArgumentError(f"Nombre d'échantillons invalide : {samples}")
    model = objective.model
    point = model.check_point(point)
    rng = np.random.default_rng(seed)
    base = eval_f(objective, point, tol)
    dimension = model.flatten(point).size
    basis = stratum_basis(objective, point, tol)
    best_value, best_point = base, point

    def offer(delta):
        nonlocal best_value, best_point
        candidate = model.perturb(point, delta)
        value = eval_f(objective, candidate, tol)
        if value < best_value:
            best_value, best_point = value, candidate

    for k in range(samples):
        scale = radius * 0.5 ** ((k // 2) % SAMPLE_SCALES)
        if k % 2 and basis.shape[1] < dimension:
            offer(basis @ sample_ball(rng, basis.shape[1], scale))
        else:
            offer(sample_ball(rng, dimension, scale))
    origin = model.flatten(point)
    for target in targets:
        direction = model.flatten(target) - origin
        length = float(np.linalg.norm(direction))
        if length == 0:
            continue
        step = min(1.0, SEGMENT_SHRINK * radius / length)
        for k in range(SAMPLE_SCALES):
            offer(direction * step * 0.5 ** k)
    holds = best_value >= base - slack
    logger.debug(f"Sonde locale (rayon {radius}, {samples} tirages) : {'ok' if holds else 'échec'}")
    return ProbeResult(holds=holds, base_value=base, best_value=best_value, best_point=best_point,
                       radius=radius, samples=samples, seed=seed)


def estimate_continuity_radius(model, point, lam, start, seed=None, samples=200, steps=30):
    """
    Plus grand rayon r ≤ start, trouvé par dichotomie, tel que la baisse
    maximale échantillonnée de g dans la boule de rayon r reste ≤ λ.
    """
    point = model.check_point(point)
    rng = np.random.default_rng(seed)
    base = model.value(point)
    dimension = model.flatten(point).size

    def max_drop(radius):
        return max(base - model.value(model.perturb(point, sample_ball(rng, dimension, radius)))
                   for _ in range(samples))

    if max_drop(start) <= lam:
        return start
    lo, hi = 0.0, start
    for _ in range(steps):
        middle = (lo + hi) / 2
        if max_drop(middle) <= lam:
            lo = middle
        else:
            hi = middle
    return lo
