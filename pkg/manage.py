#!/usr/bin/env python
"""Point d'entrée en ligne de commande de l0reg."""
import sys


def main():
    """Lance l'interface en ligne de commande."""
    try:
        from l0reg.cli import main as cli
    except ImportError as exc:
        raise ImportError(
            "Impossible d'importer l0reg. Les dépendances de requirements.txt "
            "sont-elles installées dans l'environnement virtuel actif ?"
        ) from exc
    cli(args=sys.argv[1:], prog_name='l0reg')


if __name__ == '__main__':
    main()
