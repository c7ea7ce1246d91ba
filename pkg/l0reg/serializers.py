"""
Lecture des fichiers problème JSON et conversion des résultats en
dictionnaires prêts pour json.dumps.

Les réels sont écrits avec repr (au plus 17 chiffres significatifs, sans
perte) ; les bornes infinies sont écrites sous la forme "inf".
"""
import importlib
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from l0reg.exceptions import L0RegError, ProblemFileError
from l0reg.forms import MODEL_FORMS, BudgetForm, ProblemForm
from l0reg.models import (BlackBox, CoupledCappedL1, CoupledQuadratic, FidelityModel, Pair, Quadratic,
                          SpikedCone)
from l0reg.solver import DEFAULT_BUDGET, EnumerationBudget, Witness
from l0reg.sparsity import SupportSet
from l0reg.transform import Transform, build_transform, identity_transform, load_matrix_csv

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(eq=False)
class Problem:
    model: FidelityModel
    transform: Transform
    lam: float = None
    target_level: int = None
    budget: EnumerationBudget = DEFAULT_BUDGET
    seed: int = None
    # chemins "module:fonction" d'un modèle boîte noire
    import_paths: dict = field(default_factory=dict)


def encode(value):
    """Convertit récursivement un résultat en types JSON."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, Pair):
        return {'x': encode(value.x), 'y': encode(value.y)}
    if isinstance(value, np.ndarray):
        return [encode(v) for v in value.tolist()]
    if isinstance(value, SupportSet):
        return list(value.indices)
    if isinstance(value, Witness):
        return {'point': encode(value.point), 'value': encode(value.value), 'attained': value.attained}
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    return value


def dumps(data):
    return json.dumps(data, indent=2, ensure_ascii=False, allow_nan=False)


def _import(path):
    module_name, _, attribute = path.partition(':')
    try:
        return getattr(importlib.import_module(module_name), attribute)
    except (ImportError, AttributeError) as e:
        raise ProblemFileError(f"Import impossible de {path} : {e}") from e


def _form_errors(form):
    return '; '.join(f"{name} : {', '.join(str(m) for m in messages)}" for name, messages in form.errors.items())


class ProblemSerializer:
    """
    ProblemSerializer(data=dict, base_dir=...) valide un fichier problème ;
    ProblemSerializer(instance=Problem).data le réécrit au format JSON.
    """

    def __init__(self, instance=None, data=None, base_dir='.'):
        self.instance = instance
        self.initial_data = data
        self.base_dir = Path(base_dir)
        self.errors = {}
        self._validated_data = None

    @property
    def validated_data(self):
        if self._validated_data is None:
            raise AssertionError("Appeler is_valid() avant d'accéder à validated_data")
        return self._validated_data

    def is_valid(self, raise_exception=False):
        try:
            self._validated_data = self.validate(self.initial_data)
            self.instance = self._validated_data
        except L0RegError as e:
            self.errors = {'problem': str(e)}
            logger.error(f"Fichier problème invalide : {e}")
            if raise_exception:
                if isinstance(e, ProblemFileError):
                    raise
                raise ProblemFileError(str(e)) from e
            return False
        return True

    def _resolve(self, value):
        if isinstance(value, str) and value.lower().endswith('.csv'):
            return load_matrix_csv(self.base_dir / value)
        return value

    def validate(self, data):
        if not isinstance(data, dict):
            raise ProblemFileError("Le fichier problème doit contenir un objet JSON")
        problem_form = ProblemForm(data={'version': data.get('version'), 'lam': data.get('lambda'),
                                         'target_level': data.get('target_level'), 'seed': data.get('seed')})
        if not problem_form.validate():
            raise ProblemFileError(_form_errors(problem_form))
        model, import_paths = self.validate_model(data.get('model'))
        transform = self.validate_transform(data.get('transform', 'identity'), model)
        budget = self.validate_budget(data.get('budget') or {})
        target_level = problem_form.target_level.data
        if target_level is not None and target_level > transform.d:
            raise ProblemFileError(f"target_level {target_level} supérieur à d = {transform.d}")
        return Problem(model=model, transform=transform, lam=problem_form.lam.data, target_level=target_level,
                       budget=budget, seed=problem_form.seed.data, import_paths=import_paths)

    def validate_model(self, spec):
        if not isinstance(spec, dict):
            raise ProblemFileError("Champ model manquant ou invalide")
        variant = spec.get('variant')
        if variant not in MODEL_FORMS:
            raise ProblemFileError(f"Variante inconnue {variant!r}, attendu l'une de {sorted(MODEL_FORMS)}")
        form = MODEL_FORMS[variant](data={k: self._resolve(v) for k, v in spec.items() if k != 'variant'})
        if not form.validate():
            raise ProblemFileError(f"model ({variant}) : {_form_errors(form)}")
        values = form.data
        if variant == 'quadratic':
            return Quadratic(values['A'], values['b']), {}
        if variant == 'spiked-cone':
            return SpikedCone(), {}
        if variant in ('coupled-quadratic', 'coupled-capped-l1'):
            model_class = CoupledQuadratic if variant == 'coupled-quadratic' else CoupledCappedL1
            return model_class(values['phi_Q'], values['phi_c'], values['mu'], values['D']), {}
        paths = {'evaluator': values['evaluator']}
        minimizer = None
        if values['restricted_minimizer']:
            paths['restricted_minimizer'] = values['restricted_minimizer']
            minimizer = _import(values['restricted_minimizer'])
        return BlackBox(_import(values['evaluator']), values['dimension'], minimizer), paths

    def validate_transform(self, spec, model):
        if spec == 'identity':
            return identity_transform(model.dimension)
        matrix = self._resolve(spec)
        if isinstance(matrix, str):
            raise ProblemFileError(f"Transformée invalide {spec!r} : 'identity', matrice ou chemin CSV attendu")
        transform = build_transform(matrix)
        if transform.m != model.dimension:
            raise ProblemFileError(f"M a {transform.m} colonnes, le modèle agit sur ℝ^{model.dimension}")
        return transform

    def validate_budget(self, spec):
        if not isinstance(spec, dict):
            raise ProblemFileError("Le champ budget doit être un objet JSON")
        form = BudgetForm(data=spec)
        if not form.validate():
            raise ProblemFileError(f"budget : {_form_errors(form)}")
        overrides = {k: v for k, v in form.data.items() if v is not None}
        return EnumerationBudget(**{'max_dimension': DEFAULT_BUDGET.max_dimension,
                                    'max_patterns': DEFAULT_BUDGET.max_patterns,
                                    'parallel_width': DEFAULT_BUDGET.parallel_width, **overrides})

    @property
    def data(self):
        problem = self.instance
        data = {'version': FORMAT_VERSION, 'model': self.model_data(problem)}
        transform = problem.transform
        data['transform'] = 'identity' if transform.is_identity else encode(transform.matrix)
        if problem.lam is not None:
            data['lambda'] = problem.lam
        if problem.target_level is not None:
            data['target_level'] = problem.target_level
        data['budget'] = {'max_dimension': problem.budget.max_dimension,
                          'max_patterns': problem.budget.max_patterns,
                          'parallel_width': problem.budget.parallel_width}
        if problem.seed is not None:
            data['seed'] = problem.seed
        return data

    @staticmethod
    def model_data(problem):
        model = problem.model
        data = {'variant': model.variant}
        if isinstance(model, Quadratic):
            data.update(A=encode(model.A), b=encode(model.b))
        elif model.coupled:
            data.update(phi_Q=encode(model.phi_Q), phi_c=encode(model.phi_c), mu=model.mu, D=encode(model.D))
        elif isinstance(model, BlackBox):
            data.update(problem.import_paths, dimension=model.dimension)
        return data


def load_problem(path):
    path = Path(path)
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ProblemFileError(f"Lecture impossible de {path} : {e}") from e
    serializer = ProblemSerializer(data=data, base_dir=path.parent)
    serializer.is_valid(raise_exception=True)
    logger.info(f"Problème chargé depuis {path} : modèle {serializer.validated_data.model.variant}")
    return serializer.validated_data


class ResultSerializer:
    """Sérialise les attributs listés dans Meta.fields."""

    class Meta:
        fields = ()

    def __init__(self, instance):
        self.instance = instance

    @property
    def data(self):
        return {name: encode(getattr(self.instance, name)) for name in self.Meta.fields}


class SolveReportSerializer(ResultSerializer):
    class Meta:
        fields = ('minimizer', 'value_g', 'value_f', 'achieved_level', 'achieved_support', 'pattern',
                  'attained', 'lam', 'solver_tol', 'iterations', 'kkt_residual', 'claimed', 'ties', 'notes')

    @property
    def data(self):
        data = super().data
        data['requested'] = str(self.instance.requested)
        return data


class LambdaIntervalSerializer(ResultSerializer):
    class Meta:
        fields = ('rule', 'condition', 'lo', 'hi', 'feasible', 'target_level', 'witnesses', 'bounds',
                  'conservative', 'diagnostics', 'notes')


class VerdictSerializer(ResultSerializer):
    class Meta:
        fields = ('claim', 'holds', 'witness', 'tolerance_used', 'confidence', 'samples', 'radius', 'seed',
                  'details', 'notes')
