from argparse import ArgumentParser

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from rmsa.exceptions import SimulationError
from rmsa.sweeps import SUMMARY_FILE, sweep


class Command(BaseCommand):
    help = (
        "Run a base config once per combination of a hyperparameter grid. Every "
        "combination gets its own run-NNN directory; sweep.csv ranks them by "
        "final-window blocking probability and lists the failed ones."
    )

    def add_arguments(self, parser: ArgumentParser):
        parser.add_argument("--config", required=True, help="Base `key = value` experiment config.")
        parser.add_argument(
            "--grid",
            required=True,
            help="Grid file, one `key = value, value, ...` line per swept key.",
        )
        parser.add_argument("--out", required=True, help="Output directory.")
        parser.add_argument(
            "--workers",
            type=int,
            default=settings.SWEEP_WORKERS,
            help="Runs executing at once (default: SWEEP_WORKERS).",
        )
        parser.add_argument(
            "--final-window",
            type=int,
            default=None,
            help="Episodes averaged for the ranking (default: the config's final_window).",
        )

    def handle(self, **options):
        if options["workers"] < 1:
            raise CommandError("--workers must be at least 1")

        try:
            rows = sweep(
                options["config"],
                options["grid"],
                options["out"],
                workers=options["workers"],
                final_window=options["final_window"],
            )
        except SimulationError as e:
            raise CommandError(str(e)) from e

        failed = [row for row in rows if row.error]
        self.stdout.write(f"{len(rows) - len(failed)} run(s) succeeded, {len(failed)} failed.")
        if len(failed) < len(rows):
            best = min((row for row in rows if not row.error), key=lambda row: (row.final_window_bp, row.run))
            self.stdout.write(f"Best: {best.run} ({best.described_overrides}), BP {best.final_window_bp:.4f}")
        self.stdout.write(f"Summary written to {options['out']}/{SUMMARY_FILE}")
