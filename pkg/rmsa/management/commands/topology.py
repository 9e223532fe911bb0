from argparse import ArgumentParser

import networkx as nx
from django.core.management.base import BaseCommand, CommandError

from rmsa.exceptions import SimulationError
from rmsa.grid import DEFAULT_CORES_PER_LINK, DEFAULT_SLOTS_PER_CORE, SpectrumGrid
from rmsa.topology import Topology, build_candidate_paths, resolve_topology


class Command(BaseCommand):
    help = "Check a topology file (or the built-in `nsfnet`) and list the candidate paths computed for it."

    def add_arguments(self, parser: ArgumentParser):
        parser.add_argument("action", choices=["validate", "paths"])
        parser.add_argument("file", help="Topology file with `<node_a> <node_b> <length_km>` lines, or `nsfnet`.")
        parser.add_argument("--k", default="3", help="Candidate paths per pair for `paths`: integer or 'inf'.")
        parser.add_argument(
            "--snapshot",
            action="store_true",
            help="With `validate`, also print the empty spectrum grid the simulator would build.",
        )
        parser.add_argument("--cores", type=int, default=DEFAULT_CORES_PER_LINK)
        parser.add_argument("--slots", type=int, default=DEFAULT_SLOTS_PER_CORE)

    def validate(self, topology: Topology, options: dict):
        lengths = [length for _a, _b, length in topology.links]
        self.stdout.write(f"{len(topology.nodes)} nodes, {len(topology.links)} links, connected")
        self.stdout.write(
            f"Link lengths: {min(lengths):g}-{max(lengths):g} km, "
            f"diameter {nx.diameter(topology.graph)} hops"
        )

        if options["snapshot"]:
            grid = SpectrumGrid(topology, options["cores"], options["slots"])
            self.stdout.write(grid.snapshot(), ending="")

    def paths(self, topology: Topology, options: dict):
        k = options["k"]
        if k != "inf":
            try:
                k = int(k)
            except ValueError as e:
                raise CommandError(f"--k must be an integer or 'inf', got {k!r}") from e
            if k < 1:
                raise CommandError("--k must be positive")

        candidates = build_candidate_paths(topology, k)
        for (source, destination), paths in candidates.items():
            listed = " | ".join(str(path) for path in paths)
            self.stdout.write(f"{source}->{destination}: {listed}")

    def handle(self, **options):
        try:
            topology = resolve_topology(options["file"])
            getattr(self, options["action"])(topology, options)
        except SimulationError as e:
            raise CommandError(str(e)) from e
