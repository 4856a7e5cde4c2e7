#!/usr/bin/env python
"""
Command-line entry point: migrations, the API server and the experiment
commands (run_campaign, convergence, rsi_sweep, outage, ablation,
validate_closed_forms, lp_dump, list_campaigns).
"""
import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages in requirements.txt "
            "into the active environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
