#!/usr/bin/env python
"""Management entry point; `manage.py gablab --help` lists the subcommands."""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django, which gablab runs on. Install the "
            "packages in requirements.txt first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
