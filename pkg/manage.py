#!/usr/bin/env python
"""
Command-line entry point for the TCQ toolkit.

    python manage.py quantize IN OUT --rate R
    python manage.py rd_sweep --rates 1,2,3,4 --csv rd.csv
    python manage.py test tcq
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the toolkit requirements "
            "(pip install -r requirements.txt) into the active environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
