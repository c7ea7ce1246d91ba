"""
Interface en ligne de commande : solve, lambda, classify, verify et landscape.

Chaque commande lit un fichier problème JSON, écrit un rapport JSON (ou une
grille CSV pour landscape) sur --out, et sort avec le code 0 (succès, y
compris un intervalle vide), 2 (usage), 3 (budget) ou 4 (solveur).
"""
import dataclasses
import itertools
import logging
import time

import click
import numpy as np
import pandas as pd

from l0reg import __version__
from l0reg.config import Config
from l0reg.exceptions import UndefinedRadiusError, UnsupportedModelError
from l0reg.lambda_rules import (Rule, coupled_lambda_for_max_sparsity, coupled_lambda_interval_for_level,
                                lambda_for_max_sparsity, lambda_interval_for_level, lambda_interval_level_one,
                                lambda_preserving_global_min)
from l0reg.models import RegularizedObjective, eval_f, reduce_to_diagonal
from l0reg.serializers import (LambdaIntervalSerializer, ProblemSerializer, SolveReportSerializer,
                               VerdictSerializer, dumps, encode, load_problem)
from l0reg.settings import configure_logging
from l0reg.solver import global_minimize_f
from l0reg.sparsity import sparsity_safety_radius, support
from l0reg.transform import bd_openness_radius, build_transform, identity_transform, load_matrix_csv
from l0reg.utils import exit_codes, parse_grid, parse_vector
from l0reg.verification import (Claim, check_dense_local_not_global, check_global_optimality,
                                check_necessary_minimizer_of_g_on_gamma, check_sparsity_dichotomy,
                                check_support_local_equivalence)

logger = logging.getLogger(__name__)

SAMPLED_CLAIMS = (Claim.DENSE_LOCAL_NOT_GLOBAL, Claim.SUPPORT_LOCAL_EQUIVALENCE)

problem_option = click.option('--problem', 'problem_path', required=True,
                              type=click.Path(exists=True, dir_okay=False), help='Fichier problème JSON.')
out_option = click.option('--out', type=click.File('w', encoding='utf-8'), default='-',
                          help='Fichier de sortie (sortie standard par défaut).')
lambda_option = click.option('--lambda', 'lam', type=click.FloatRange(min=0), default=None,
                             help='Paramètre de régularisation λ (remplace celui du problème).')
budget_option = click.option('--budget-max-patterns', type=click.IntRange(min=1), default=None,
                             help='Nombre maximal de motifs énumérés.')


def _load(problem_path, budget_max_patterns=None):
    problem = load_problem(problem_path)
    if budget_max_patterns is not None:
        problem.budget = dataclasses.replace(problem.budget, max_patterns=budget_max_patterns)
    return problem


def _require_lambda(problem, lam):
    lam = problem.lam if lam is None else lam
    if lam is None:
        raise click.UsageError("λ manquant : fournir --lambda ou le champ lambda du problème")
    return lam


def _point(model, text):
    vector = parse_vector(text)
    if model.coupled:
        return model.check_point(model.unflatten(vector))
    return model.check_point(vector)


def _write(out, command, problem, result, started):
    report = {
        'tool': 'l0reg',
        'version': __version__,
        'command': command,
        'problem': problem,
        'result': result,
        'timings': {'seconds': time.perf_counter() - started},
    }
    out.write(dumps(report) + '\n')


@click.group()
@click.version_option(__version__, prog_name='l0reg')
@click.option('--verbose', is_flag=True, help='Journalisation détaillée (DEBUG) sur la sortie d\'erreur.')
def main(verbose):
    """Régularisation ℓ₀ exacte : minimisation, intervalles de λ et vérifications."""
    configure_logging('DEBUG' if verbose else None)


@main.command()
@problem_option
@lambda_option
@click.option('--reduce', 'diagonal', is_flag=True,
              help='Résout en z = Vᵀx sur la forme diagonale Λ de M (M de rang quelconque).')
@budget_option
@out_option
@exit_codes
def solve(problem_path, lam, diagonal, budget_max_patterns, out):
    """Minimiseur global de f = g + λ‖M·‖₀ par énumération des motifs."""
    started = time.perf_counter()
    problem = _load(problem_path, budget_max_patterns)
    lam = _require_lambda(problem, lam)
    model, transform = problem.model, problem.transform
    if diagonal:
        model, transform = reduce_to_diagonal(model, transform)
    report = global_minimize_f(RegularizedObjective(model, transform, lam), problem.budget)
    result = SolveReportSerializer(report).data
    if diagonal:
        z = report.minimizer.x if model.coupled else report.minimizer
        result['original_x'] = encode(transform.from_reduced(z))
    _write(out, 'solve', ProblemSerializer(instance=problem).data, result, started)


@main.command('lambda')
@problem_option
@click.option('--rule', type=click.Choice([r.value for r in Rule]), required=True, help='Règle de calcul de λ.')
@click.option('--level', type=click.IntRange(min=0), default=None, help='Niveau de parcimonie visé ℓ.')
@budget_option
@out_option
@exit_codes
def lambda_command(problem_path, rule, level, budget_max_patterns, out):
    """Intervalle admissible de λ ; un intervalle vide est un résultat (feasible: false)."""
    started = time.perf_counter()
    problem = _load(problem_path, budget_max_patterns)
    model, transform, budget = problem.model, problem.transform, problem.budget
    rule = Rule(rule)
    level = problem.target_level if level is None else level
    if rule in (Rule.LEVEL, Rule.COUPLED_LEVEL) and level is None:
        raise click.UsageError(f"La règle {rule.value} exige --level ou target_level")
    if rule == Rule.MAX_SPARSITY:
        interval = lambda_for_max_sparsity(model, transform, budget)
    elif rule == Rule.LEVEL:
        interval = lambda_interval_for_level(model, transform, level, budget)
    elif rule == Rule.LEVEL_ONE:
        interval = lambda_interval_level_one(model, transform, budget)
    elif rule == Rule.PRESERVE:
        interval = lambda_preserving_global_min(model, transform, budget)
    elif rule == Rule.COUPLED_MAX:
        interval = coupled_lambda_for_max_sparsity(model, budget, transform=transform)
    else:
        interval = coupled_lambda_interval_for_level(model, level, budget, transform=transform)
    _write(out, 'lambda', ProblemSerializer(instance=problem).data, LambdaIntervalSerializer(interval).data,
           started)


@main.command()
@click.option('--point', required=True, help='Vecteur x en ligne ("1,0,2") ou chemin CSV.')
@click.option('--transform', 'transform_spec', default='identity', show_default=True,
              help='"identity" ou chemin CSV de la matrice M.')
@out_option
@exit_codes
def classify(point, transform_spec, out):
    """Niveau j tel que x ∈ B_j, support de Mx et rayons de sécurité."""
    started = time.perf_counter()
    x = parse_vector(point)
    if transform_spec == 'identity':
        transform = identity_transform(x.size)
    else:
        transform = build_transform(load_matrix_csv(transform_spec))
    transform.require_supported()
    image = transform.apply(x)
    pattern = support(image)
    result = {'level': len(pattern), 'support': encode(pattern), 'image': encode(image),
              'safety_radius': None, 'bd_openness_radius': None}
    try:
        result['safety_radius'] = sparsity_safety_radius(image)
    except UndefinedRadiusError:
        pass
    if len(pattern) == transform.d:
        result['bd_openness_radius'] = bd_openness_radius(x, transform)
    _write(out, 'classify', {'point': encode(x), 'transform': transform_spec}, result, started)


@main.command()
@problem_option
@click.option('--claim', type=click.Choice([c.value for c in Claim]), required=True,
              help='Affirmation à vérifier.')
@click.option('--point', required=True, help='Point candidat, aplati (x puis y pour un modèle couplé).')
@lambda_option
@click.option('--seed', type=click.IntRange(min=0), default=None, help='Graine des tirages aléatoires.')
@click.option('--samples', type=click.IntRange(min=1), default=Config.PROBE_SAMPLES, show_default=True,
              help='Nombre de tirages de la sonde locale.')
@budget_option
@out_option
@exit_codes
def verify(problem_path, claim, point, lam, seed, samples, budget_max_patterns, out):
    """Vérifie une condition nécessaire ou une équivalence sur un point candidat."""
    started = time.perf_counter()
    problem = _load(problem_path, budget_max_patterns)
    lam = _require_lambda(problem, lam)
    claim = Claim(claim)
    seed = problem.seed if seed is None else seed
    if claim in SAMPLED_CLAIMS and seed is None:
        raise click.UsageError(f"L'affirmation {claim.value} exige --seed ou le champ seed du problème")
    model, budget = problem.model, problem.budget
    candidate = _point(model, point)
    objective = RegularizedObjective(model, problem.transform, lam)
    if claim == Claim.GAMMA_MINIMALITY:
        verdict = check_necessary_minimizer_of_g_on_gamma(objective, candidate, budget)
    elif claim == Claim.GLOBAL_OPTIMALITY:
        verdict = check_global_optimality(objective, candidate, budget)
    elif claim == Claim.SPARSITY_DICHOTOMY:
        verdict = check_sparsity_dichotomy(objective, candidate, budget)
    elif claim == Claim.DENSE_LOCAL_NOT_GLOBAL:
        verdict = check_dense_local_not_global(objective, candidate, budget, seed=seed, samples=samples)
    else:
        verdict = check_support_local_equivalence(model, lam, candidate, probe_samples=samples, seed=seed,
                                                  transform=problem.transform)
    _write(out, 'verify', ProblemSerializer(instance=problem).data, VerdictSerializer(verdict).data, started)


def landscape_grid(xmin, xmax, ymin, ymax, steps):
    """Points de la grille, complétée par les droites x1 = 0, x2 = 0 et le point (0, 1)."""
    xs = np.union1d(np.linspace(xmin, xmax, steps), [0.0])
    ys = np.union1d(np.linspace(ymin, ymax, steps), [0.0])
    points = list(itertools.product(xs, ys))
    if (0.0, 1.0) not in points:
        points.append((0.0, 1.0))
    return points


@main.command()
@problem_option
@click.option('--grid', default='-1,3,-1,3,41', show_default=True, help='xmin,xmax,ymin,ymax,steps')
@lambda_option
@out_option
@exit_codes
def landscape(problem_path, grid, lam, out):
    """Grille CSV x1,x2,g,f,level de f sur ℝ² (données à tracer, pas d'image)."""
    problem = load_problem(problem_path)
    model = problem.model
    if model.coupled or model.dimension != 2:
        raise UnsupportedModelError("landscape exige un modèle non couplé sur ℝ²")
    lam = problem.lam if lam is None else lam
    objective = RegularizedObjective(model, problem.transform, lam or 0.0)
    rows = []
    for x1, x2 in landscape_grid(*parse_grid(grid)):
        x = np.array([x1, x2])
        rows.append({'x1': x1, 'x2': x2, 'g': model.value(x), 'f': eval_f(objective, x),
                     'level': objective.level_of(x)})
    frame = pd.DataFrame(rows, columns=['x1', 'x2', 'g', 'f', 'level'])
    frame.to_csv(out, index=False)
    logger.info(f"Grille de {len(frame)} points écrite")
