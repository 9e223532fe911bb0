import heapq
import logging
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import pairwise
from pathlib import Path as FsPath
from typing import Literal

import networkx as nx

from rmsa.exceptions import (
    DisconnectedTopologyError,
    DuplicateLinkError,
    NonPositiveLengthError,
    SamePairError,
    SelfLoopError,
    TopologyFormatError,
    UnknownNodeError,
)

logger = logging.getLogger(__name__)

type Node = int | str
type Pair = tuple[Node, Node]
type PathLimit = int | Literal["inf"]

DATA_DIR = FsPath(__file__).resolve().parent / "data"
NSFNET_FILE = DATA_DIR / "nsfnet.txt"


def parse_node(token: str) -> Node:
    """Numeric tokens become ints so `2 < 10` sorts the way people expect."""
    return int(token) if token.isdigit() else token


def node_sort_key(node: Node) -> tuple[int, int | str]:
    # Ints first, then strings; mixed topologies still get a total order.
    return (0, node) if isinstance(node, int) else (1, node)


@dataclass(frozen=True)
class Path:
    nodes: tuple[Node, ...]
    length_km: float
    links: tuple[Pair, ...] = field(repr=False)

    @property
    def source(self) -> Node:
        return self.nodes[0]

    @property
    def destination(self) -> Node:
        return self.nodes[-1]

    @property
    def hops(self) -> int:
        return len(self.links)

    def __str__(self):
        return "-".join(str(n) for n in self.nodes) + f" ({self.length_km:g} km)"


class Topology:
    """An undirected, weighted, connected graph of fiber links.

    Node identifiers are kept as given; internally every node also gets a
    dense index following the node sort order, which is what path ordering
    ties are broken on. Instances are never mutated after construction."""

    def __init__(self, graph: nx.Graph):
        self.graph = graph
        self.nodes: list[Node] = sorted(graph.nodes, key=node_sort_key)
        self.index: dict[Node, int] = {node: i for i, node in enumerate(self.nodes)}
        self.links: list[tuple[Node, Node, float]] = [
            (a, b, float(data["length_km"])) for a, b, data in graph.edges(data=True)
        ]
        self._adjacency: dict[Node, list[tuple[Node, float]]] = {
            node: sorted(
                ((nbr, float(data["length_km"])) for nbr, data in graph[node].items()),
                key=lambda item: self.index[item[0]],
            )
            for node in self.nodes
        }

    def __repr__(self):
        return f"<Topology nodes={len(self.nodes)} links={len(self.links)}>"

    def __contains__(self, node: Node) -> bool:
        return node in self.index

    def neighbors(self, node: Node) -> list[tuple[Node, float]]:
        return self._adjacency[node]

    def length(self, a: Node, b: Node) -> float:
        try:
            return float(self.graph.edges[a, b]["length_km"])
        except KeyError as e:
            raise UnknownNodeError(f"No link between {a} and {b}") from e

    def ordered_pairs(self) -> Iterator[Pair]:
        for source in self.nodes:
            for destination in self.nodes:
                if source != destination:
                    yield source, destination

    def path(self, nodes: Sequence[Node]) -> Path:
        """Builds a Path from a node sequence, summing link lengths in travel order."""
        nodes = tuple(nodes)
        links = tuple(pairwise(nodes))
        length = 0.0
        for a, b in links:
            length += self.length(a, b)
        return Path(nodes=nodes, length_km=length, links=links)

    def sort_key(self, path: Path) -> tuple[float, tuple[int, ...]]:
        """Ascending length, ties broken by the lexicographic node sequence."""
        return path.length_km, tuple(self.index[n] for n in path.nodes)

    def check_pair(self, source: Node, destination: Node) -> None:
        for node in (source, destination):
            if node not in self.index:
                raise UnknownNodeError(f"Node {node!r} is not part of this topology")

        if source == destination:
            raise SamePairError(f"Source and destination are both {source!r}")


def load_topology(edge_list: Iterable[tuple[Node, Node, float]], nodes: Iterable[Node] = ()) -> Topology:
    graph = nx.Graph()
    graph.add_nodes_from(nodes)

    for a, b, length_km in edge_list:
        if a == b:
            raise SelfLoopError(f"Self-loop on node {a!r}")
        if graph.has_edge(a, b):
            raise DuplicateLinkError(f"Link {a!r}-{b!r} is listed more than once")
        if not length_km > 0:
            raise NonPositiveLengthError(f"Link {a!r}-{b!r} has non-positive length {length_km}")

        graph.add_edge(a, b, length_km=float(length_km))

    if graph.number_of_nodes() == 0:
        raise TopologyFormatError("Topology has no links")

    if not nx.is_connected(graph):
        parts = nx.number_connected_components(graph)
        raise DisconnectedTopologyError(f"Topology is split into {parts} disconnected parts")

    return Topology(graph)


def parse_topology_text(text: str, source: str = "<string>") -> list[tuple[Node, Node, float]]:
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        parts = line.split()
        if len(parts) != 3:
            raise TopologyFormatError(f"{source}:{lineno}: expected `<node_a> <node_b> <length_km>`, got {raw!r}")

        try:
            length = float(parts[2])
        except ValueError as e:
            raise TopologyFormatError(f"{source}:{lineno}: link length {parts[2]!r} is not a number") from e

        edges.append((parse_node(parts[0]), parse_node(parts[1]), length))

    return edges


def read_topology_file(path: str | FsPath) -> Topology:
    path = FsPath(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise TopologyFormatError(f"Cannot read topology file {path}: {e}") from e

    return load_topology(parse_topology_text(text, str(path)))


def nsfnet_preset() -> Topology:
    return read_topology_file(NSFNET_FILE)


def resolve_topology(source: str) -> Topology:
    """Config values name either the built-in preset or a topology file."""
    if source.lower() == "nsfnet":
        return nsfnet_preset()

    return read_topology_file(source)


def _shortest_path(
    topology: Topology,
    source: Node,
    target: Node,
    removed_nodes: frozenset[Node] = frozenset(),
    removed_links: frozenset[frozenset[Node]] = frozenset(),
) -> tuple[Node, ...] | None:
    """Dijkstra over (distance, index sequence) labels: among equal-length
    paths the lexicographically smallest one is found, which Yen's loop
    below needs to reproduce the global tie-break order exactly."""
    index = topology.index
    heap: list[tuple[float, tuple[int, ...], tuple[Node, ...]]] = [(0.0, (index[source],), (source,))]
    settled: set[Node] = set()

    while heap:
        dist, key, nodes = heapq.heappop(heap)
        node = nodes[-1]
        if node in settled:
            continue

        settled.add(node)
        if node == target:
            return nodes

        for nbr, length in topology.neighbors(node):
            if nbr in settled or nbr in removed_nodes:
                continue
            if frozenset((node, nbr)) in removed_links:
                continue

            heapq.heappush(heap, (dist + length, key + (index[nbr],), nodes + (nbr,)))

    return None


def dijkstra_path(topology: Topology, source: Node, destination: Node) -> Path:
    topology.check_pair(source, destination)
    return topology.path(_shortest_path(topology, source, destination))


def yen_k_shortest(topology: Topology, source: Node, destination: Node, k: int) -> list[Path]:
    topology.check_pair(source, destination)
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")

    found = [topology.path(_shortest_path(topology, source, destination))]
    seen = {found[0].nodes}
    candidates: list[tuple[tuple[float, tuple[int, ...]], Path]] = []

    while len(found) < k:
        last = found[-1]
        for i, spur in enumerate(last.nodes[:-1]):
            root = last.nodes[: i + 1]
            removed_links = frozenset(
                frozenset(p.nodes[i : i + 2]) for p in found if len(p.nodes) > i + 1 and p.nodes[: i + 1] == root
            )
            spur_nodes = _shortest_path(topology, spur, destination, frozenset(root[:-1]), removed_links)
            if spur_nodes is None:
                continue

            nodes = root[:-1] + spur_nodes
            if nodes in seen:
                continue

            seen.add(nodes)
            path = topology.path(nodes)
            heapq.heappush(candidates, (topology.sort_key(path), path))

        if not candidates:
            break

        found.append(heapq.heappop(candidates)[1])

    return found


def all_paths_sorted(topology: Topology, source: Node, destination: Node) -> list[Path]:
    topology.check_pair(source, destination)
    paths = [topology.path(nodes) for nodes in nx.all_simple_paths(topology.graph, source, destination)]
    return sorted(paths, key=topology.sort_key)


class CandidatePaths(Mapping[Pair, list[Path]]):
    """Length-sorted candidate paths for every ordered node pair. This is
    the action space the agents choose from: index i means "the i-th
    shortest candidate for this pair"."""

    def __init__(self, topology: Topology, k: PathLimit, paths: dict[Pair, list[Path]]):
        self.topology = topology
        self.k = k
        self._paths = paths

    def __getitem__(self, pair: Pair) -> list[Path]:
        return self._paths[pair]

    def __iter__(self) -> Iterator[Pair]:
        return iter(self._paths)

    def __len__(self) -> int:
        return len(self._paths)

    def __repr__(self):
        return f"<CandidatePaths k={self.k} pairs={len(self)}>"

    @property
    def max_paths(self) -> int:
        return max((len(p) for p in self._paths.values()), default=0)


def build_candidate_paths(topology: Topology, k: PathLimit) -> CandidatePaths:
    paths: dict[Pair, list[Path]] = {}
    for source, destination in topology.ordered_pairs():
        if k == "inf":
            paths[source, destination] = all_paths_sorted(topology, source, destination)
        else:
            paths[source, destination] = yen_k_shortest(topology, source, destination, k)

    candidates = CandidatePaths(topology, k, paths)
    logger.info(f"Computed candidate paths: {candidates!r}, up to {candidates.max_paths} per pair")
    return candidates
