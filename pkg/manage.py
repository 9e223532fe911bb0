#!/usr/bin/env python
"""Entry point for the simulator commands: run, sweep, topology (plus Django's own)."""
import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "eonroute.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError("Django is missing from this environment - run `uv sync` first.") from exc

    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
