"""
Formulaires de validation des fichiers problème (format JSON version 1).

Les formulaires sont construits avec data= : les champs reçoivent des objets
Python déjà décodés, jamais des chaînes de formulaire HTML.
"""
import math

import numpy as np
from wtforms import Field, FloatField, Form, IntegerField, StringField
from wtforms.validators import AnyOf, NumberRange, Regexp, StopValidation, ValidationError

IMPORT_PATH = r'^[A-Za-z_][\w.]*:[A-Za-z_]\w*$'


def required(form, field):
    if field.data is None:
        raise StopValidation(None if field.process_errors else 'Champ obligatoire')


def if_present(form, field):
    """Interrompt la validation d'un champ absent (équivalent de Optional pour data=)."""
    if field.data is None:
        raise StopValidation()


def finite(form, field):
    if field.data is not None and not math.isfinite(field.data):
        raise ValidationError('Valeur finie attendue')


class ArrayField(Field):
    """Vecteur (ndim=1) ou matrice (ndim=2) de réels finis."""

    def __init__(self, label=None, validators=None, ndim=1, **kwargs):
        super().__init__(label, validators, **kwargs)
        self.ndim = ndim

    def process_data(self, value):
        self.data = None
        if value is None:
            return
        try:
            array = np.asarray(value, dtype=float)
        except (TypeError, ValueError):
            raise ValueError('Tableau numérique attendu')
        if self.ndim == 1 and array.ndim == 2 and 1 in array.shape:
            array = array.ravel()
        if array.ndim != self.ndim or array.size == 0:
            raise ValueError(f'Tableau de dimension {self.ndim} attendu, forme reçue {array.shape}')
        if not np.all(np.isfinite(array)):
            raise ValueError('Le tableau contient des valeurs non finies')
        self.data = array


class ProblemForm(Form):
    version = IntegerField('Version', validators=[AnyOf([1], message='Seule la version 1 est prise en charge')])
    lam = FloatField('Lambda', validators=[if_present, finite, NumberRange(min=0)])
    target_level = IntegerField('Niveau cible', validators=[if_present, NumberRange(min=0)])
    seed = IntegerField('Graine', validators=[if_present, NumberRange(min=0)])


class BudgetForm(Form):
    max_dimension = IntegerField('Dimension maximale', validators=[if_present, NumberRange(min=1)])
    max_patterns = IntegerField('Nombre maximal de motifs', validators=[if_present, NumberRange(min=1)])
    parallel_width = IntegerField('Largeur parallèle', validators=[if_present, NumberRange(min=1)])


class QuadraticForm(Form):
    A = ArrayField('A', validators=[required], ndim=2)
    b = ArrayField('b', validators=[required], ndim=1)

    def validate_b(self, field):
        if self.A.data is not None and self.A.data.shape[0] != field.data.size:
            raise ValidationError(f'A a {self.A.data.shape[0]} lignes mais b a {field.data.size} composantes')


class CoupledForm(Form):
    phi_Q = ArrayField('phi_Q', validators=[required], ndim=2)
    phi_c = ArrayField('phi_c', validators=[required], ndim=1)
    mu = FloatField('mu', validators=[required, finite])
    D = ArrayField('D', validators=[required], ndim=2)

    def validate_mu(self, field):
        if field.data <= 0:
            raise ValidationError('mu doit être strictement positif')

    def validate_D(self, field):
        if self.phi_Q.data is not None and field.data.shape[1] != self.phi_Q.data.shape[0]:
            raise ValidationError(f"D a {field.data.shape[1]} colonnes, attendu d' = {self.phi_Q.data.shape[0]}")


class BlackBoxForm(Form):
    evaluator = StringField('Évaluateur', validators=[required, Regexp(IMPORT_PATH)])
    restricted_minimizer = StringField('Minimiseur restreint', validators=[if_present, Regexp(IMPORT_PATH)])
    dimension = IntegerField('Dimension', validators=[required, NumberRange(min=1)])


class SpikedConeForm(Form):
    pass


MODEL_FORMS = {
    'quadratic': QuadraticForm,
    'spiked-cone': SpikedConeForm,
    'coupled-quadratic': CoupledForm,
    'coupled-capped-l1': CoupledForm,
    'black-box': BlackBoxForm,
}
