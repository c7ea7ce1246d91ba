import logging
import sys
from functools import wraps
from pathlib import Path

import click
import numpy as np

from l0reg.exceptions import BudgetExceededError, InputError, L0RegError, SolverError
from l0reg.transform import load_matrix_csv

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_SOLVER = 4


def exit_codes(command):
    """Traduit les erreurs de la boîte à outils en codes de sortie : 2 usage, 3 budget, 4 solveur."""
    @wraps(command)
    def _wrapped_command(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except BudgetExceededError as e:
            code = EXIT_BUDGET
            error = e
        except SolverError as e:
            code = EXIT_SOLVER
            error = e
        except L0RegError as e:
            code = EXIT_USAGE
            error = e
        logger.error(f"{type(error).__name__} : {error}")
        click.echo(f"Erreur : {error}", err=True)
        sys.exit(code)
    return _wrapped_command


def parse_vector(text):
    """Vecteur écrit en ligne ("1,0,2") ou chemin d'un fichier CSV."""
    if text.lower().endswith('.csv') and Path(text).exists():
        return load_matrix_csv(text).ravel()
    try:
        values = [float(v) for v in text.replace(';', ',').split(',') if v.strip()]
    except ValueError as e:
        raise InputError(f"Vecteur illisible {text!r} : {e}") from e
    if not values:
        raise InputError("Vecteur vide")
    return np.array(values)


def parse_grid(text):
    """Grille "xmin,xmax,ymin,ymax,steps"."""
    parts = text.split(',')
    if len(parts) != 5:
        raise InputError(f"Grille {text!r} : cinq valeurs attendues (xmin,xmax,ymin,ymax,steps)")
    try:
        xmin, xmax, ymin, ymax = (float(p) for p in parts[:4])
        steps = int(parts[4])
    except ValueError as e:
        raise InputError(f"Grille illisible {text!r} : {e}") from e
    if steps < 2 or not (xmin < xmax and ymin < ymax):
        raise InputError(f"Grille {text!r} : bornes croissantes et au moins 2 pas attendus")
    return xmin, xmax, ymin, ymax, steps
