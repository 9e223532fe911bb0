from rmsa.controller import Controller, ModulationTable
from rmsa.grid import SpectrumGrid
from rmsa.topology import Topology, load_topology
from rmsa.traffic import Request


def two_node_topology(length_km: float = 1000) -> Topology:
    return load_topology([(1, 2, length_km)], nodes=[1, 2])


def exhaustive_first_fit(grid: SpectrumGrid, path, width: int):
    """Scans every (core, start) pair in order, no numpy tricks."""
    links = [grid.link_index[link] for link in path.links]
    for core in range(grid.cores_per_link):
        for start in range(grid.slots_per_core - width + 1):
            if all(not grid.occupancy[link, core, slot] for link in links for slot in range(start, start + width)):
                return core, start
    return None


def make_controller(
    topology: Topology,
    cores: int = 4,
    slots: int = 128,
    guard_band_slots: int = 1,
    table: ModulationTable | None = None,
) -> Controller:
    grid = SpectrumGrid(topology, cores_per_link=cores, slots_per_core=slots)
    return Controller(grid, table or ModulationTable.default(), guard_band_slots=guard_band_slots)


def make_request(request_id: int, source=1, destination=2, bit_rate_gbps: int = 100, arrival_time: float = 0.0):
    return Request(
        id=request_id,
        source=source,
        destination=destination,
        bit_rate_gbps=bit_rate_gbps,
        arrival_time=arrival_time,
        holding_time=1.0,
    )
