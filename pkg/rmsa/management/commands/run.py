from argparse import ArgumentParser
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from rmsa.config import ExperimentConfig, expand_algorithms, merge_sources
from rmsa.exceptions import SimulationError
from rmsa.results import load_manifest, run


class Command(BaseCommand):
    help = (
        "Run one or more routing experiments and write results.csv, seeds.csv, "
        "summary.csv and manifest.json into the output directory. Flags override "
        "whatever the presets and the config file say."
    )

    def add_arguments(self, parser: ArgumentParser):
        parser.add_argument(
            "--config",
            help="Flat `key = value` experiment config file.",
        )
        parser.add_argument(
            "--preset",
            action="append",
            default=[],
            help="Named preset bundle, e.g. erlang750-qlearning. Repeat to compare several in one run.",
        )
        parser.add_argument(
            "--manifest",
            help="Replay the configs and seeds of an earlier run's manifest.json. Other config flags are ignored.",
        )
        parser.add_argument("--erlang", help="Offered load in Erlang.")
        parser.add_argument(
            "--algorithm",
            help="Algorithm, or a comma-separated list to run side by side: "
            "egreedy, ucb, qlearning, spf_ff, ksp_ff, ksp_inf.",
        )
        parser.add_argument("--k", help="Candidate paths per pair: a positive integer or 'inf'.")
        parser.add_argument("--episodes", help="Episodes per seed.")
        parser.add_argument("--seeds", help="Comma-separated seed list.")
        parser.add_argument("--out", required=True, help="Output directory.")
        parser.add_argument("--xlsx", action="store_true", help="Also write results.xlsx.")
        parser.add_argument("--profile", action="store_true", help="Profile the run into profile.html.")
        parser.add_argument(
            "--checkpoint",
            action="store_true",
            help="Write every learning agent's final table per seed into checkpoints/.",
        )

    def build_configs(self, options: dict) -> list[ExperimentConfig]:
        if options["manifest"]:
            manifest = load_manifest(options["manifest"])
            self.stderr.write(f"Replaying {len(manifest.configs)} config(s) from {options['manifest']}")
            return manifest.configs

        presets = options["preset"] or [None]
        if presets == [None] and not options["config"]:
            raise CommandError("Nothing to run: pass --config, --preset or --manifest")

        overrides = {key: options[key] for key in ("erlang", "k", "episodes", "seeds")}
        algorithms = [a.strip() for a in (options["algorithm"] or "").split(",") if a.strip()]

        configs = []
        for preset in presets:
            flat = merge_sources(options["config"], preset, overrides)
            # Several presets side by side are told apart by name.
            prefix = preset if len(presets) > 1 else None
            configs += expand_algorithms(flat, algorithms, label_prefix=prefix)
        return configs

    def handle(self, **options):
        try:
            configs = self.build_configs(options)
            for config in configs:
                self.stderr.write(f"{config.label}: {config.describe()}, seeds {config.seeds}")

            manifest = run(
                configs,
                Path(options["out"]),
                xlsx=options["xlsx"],
                profile=options["profile"],
                checkpoint=options["checkpoint"],
            )
        except SimulationError as e:
            raise CommandError(str(e)) from e

        self.stdout.write(f"Done in {manifest.duration_seconds:.1f}s, results in {options['out']}")
