import logging
from dataclasses import dataclass
from enum import IntEnum
from itertools import pairwise

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from rmsa.exceptions import CongestionRangeError, GridConsistencyError, UnknownAllocationError
from rmsa.topology import Pair, Path, Topology

logger = logging.getLogger(__name__)

DEFAULT_CORES_PER_LINK = 4
DEFAULT_SLOTS_PER_CORE = 128
CONGESTION_THRESHOLD = 0.3


class CongestionLevel(IntEnum):
    LEVEL1 = 0
    LEVEL2 = 1

    def __str__(self):
        return str(self.value + 1)


def congestion_level(fraction: float, threshold: float = CONGESTION_THRESHOLD) -> CongestionLevel:
    if not 0.0 <= fraction <= 1.0:
        raise CongestionRangeError(f"Congestion fraction must lie in [0, 1], got {fraction}")

    return CongestionLevel.LEVEL1 if fraction < threshold else CongestionLevel.LEVEL2


@dataclass(frozen=True)
class Allocation:
    request_id: int
    path: Path
    core_index: int
    start_slot: int
    width: int

    @property
    def slot_range(self) -> range:
        return range(self.start_slot, self.start_slot + self.width)

    @property
    def end_slot(self) -> int:
        return self.start_slot + self.width


class SpectrumGrid:
    """Slot occupancy for every directed link and core.

    Each undirected topology link becomes two directed links; a lightpath
    only occupies the links it travels along. Allocations keep the same
    core and slot range end to end."""

    def __init__(
        self,
        topology: Topology,
        cores_per_link: int = DEFAULT_CORES_PER_LINK,
        slots_per_core: int = DEFAULT_SLOTS_PER_CORE,
    ):
        if cores_per_link < 1:
            raise ValueError(f"Need at least one core per link, got {cores_per_link}")
        if slots_per_core < 0:
            raise ValueError(f"Slots per core cannot be negative, got {slots_per_core}")

        self.topology = topology
        self.cores_per_link = cores_per_link
        self.slots_per_core = slots_per_core

        self.directed_links: list[Pair] = []
        for a, b, _length in topology.links:
            self.directed_links += [(a, b), (b, a)]
        self.link_index: dict[Pair, int] = {link: i for i, link in enumerate(self.directed_links)}

        self.occupancy = np.zeros((len(self.directed_links), cores_per_link, slots_per_core), dtype=bool)
        self.allocations: dict[int, Allocation] = {}
        self._path_links: dict[tuple, np.ndarray] = {}

    def __repr__(self):
        return (
            f"<SpectrumGrid links={len(self.directed_links)} cores={self.cores_per_link} "
            f"slots={self.slots_per_core} active={len(self.allocations)}>"
        )

    def link_ids(self, path: Path) -> np.ndarray:
        ids = self._path_links.get(path.nodes)
        if ids is None:
            try:
                ids = np.array([self.link_index[link] for link in path.links], dtype=np.intp)
            except KeyError as e:
                raise GridConsistencyError(f"Path {path} uses a link the topology does not have: {e}") from e
            self._path_links[path.nodes] = ids
        return ids

    def first_fit_search(self, path: Path, width: int) -> tuple[int, int] | None:
        """Lowest core, then lowest start slot, where `width` contiguous slots
        are free on every link of the path. None means the request blocks."""
        if width < 1:
            raise ValueError(f"Width must be positive, got {width}")
        if width > self.slots_per_core:
            return None

        busy = self.occupancy[self.link_ids(path)].any(axis=0)
        fits = sliding_window_view(~busy, width, axis=1).all(axis=2)
        feasible = np.flatnonzero(fits)
        if feasible.size == 0:
            return None

        core, start = divmod(int(feasible[0]), fits.shape[1])
        return core, start

    def allocate(self, allocation: Allocation) -> None:
        if allocation.request_id in self.allocations:
            raise GridConsistencyError(f"Request {allocation.request_id} already holds an allocation")
        if not 0 <= allocation.core_index < self.cores_per_link:
            raise GridConsistencyError(f"Core {allocation.core_index} is out of range")
        if allocation.width < 1 or allocation.start_slot < 0 or allocation.end_slot > self.slots_per_core:
            raise GridConsistencyError(f"Slot range {allocation.slot_range} is out of bounds")

        ids = self.link_ids(allocation.path)
        block = self.occupancy[ids, allocation.core_index, allocation.start_slot : allocation.end_slot]
        if block.any():
            raise GridConsistencyError(
                f"Allocation for request {allocation.request_id} overlaps occupied slots "
                f"on core {allocation.core_index}, range {allocation.slot_range}"
            )

        self.occupancy[ids, allocation.core_index, allocation.start_slot : allocation.end_slot] = True
        self.allocations[allocation.request_id] = allocation

    def release(self, request_id: int) -> Allocation:
        try:
            allocation = self.allocations.pop(request_id)
        except KeyError as e:
            raise UnknownAllocationError(f"Request {request_id} has no active allocation") from e

        ids = self.link_ids(allocation.path)
        block = self.occupancy[ids, allocation.core_index, allocation.start_slot : allocation.end_slot]
        if not block.all():
            raise GridConsistencyError(f"Slots of request {request_id} were freed by someone else")

        self.occupancy[ids, allocation.core_index, allocation.start_slot : allocation.end_slot] = False
        return allocation

    def path_congestion(self, path: Path) -> float:
        """Mean occupied fraction over every (link on the path, core) pair."""
        if self.slots_per_core == 0:
            return 1.0

        return float(self.occupancy[self.link_ids(path)].mean())

    def network_congestion(self) -> float:
        if self.occupancy.size == 0:
            return 1.0

        return float(self.occupancy.mean())

    def occupied_slots(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    def is_empty(self) -> bool:
        return not self.allocations and not self.occupancy.any()

    def reset(self) -> None:
        self.occupancy[:] = False
        self.allocations.clear()

    def snapshot(self) -> str:
        """Run-length encoded occupancy, one line per directed link and core:
        `1->2 core 0: 3U 125F` reads "3 used slots, then 125 free"."""
        lines = []
        for link, link_id in self.link_index.items():
            for core in range(self.cores_per_link):
                runs = []
                row = self.occupancy[link_id, core]
                if row.size:
                    edges = np.flatnonzero(np.diff(row.astype(np.int8))) + 1
                    bounds = [0, *edges.tolist(), row.size]
                    for start, end in pairwise(bounds):
                        runs.append(f"{end - start}{'U' if row[start] else 'F'}")
                lines.append(f"{link[0]}->{link[1]} core {core}: {' '.join(runs) or '-'}")

        return "\n".join(lines) + "\n"
