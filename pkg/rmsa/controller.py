import logging
from collections import defaultdict
from dataclasses import dataclass
from enum import StrEnum
from itertools import pairwise
from pathlib import Path as FsPath
from typing import TYPE_CHECKING

from rmsa.exceptions import ModulationTableError, UnsupportedBitRateError
from rmsa.grid import Allocation, SpectrumGrid
from rmsa.topology import DATA_DIR, Path

if TYPE_CHECKING:
    from rmsa.traffic import Request

logger = logging.getLogger(__name__)

DEFAULT_MODULATION_FILE = DATA_DIR / "modulations.txt"
DEFAULT_GUARD_BAND_SLOTS = 1


@dataclass(frozen=True)
class ModulationFormat:
    name: str
    bit_rate_gbps: int
    slots_required: int
    max_reach_km: float


class ModulationTable:
    """Modulation formats per bit rate, with the slots each needs (guard band
    excluded) and the longest distance it still works over."""

    def __init__(self, rows: list[ModulationFormat]):
        if not rows:
            raise ModulationTableError("Modulation table is empty")

        by_rate: dict[int, list[ModulationFormat]] = defaultdict(list)
        for row in rows:
            if row.slots_required < 1 or row.max_reach_km <= 0:
                raise ModulationTableError(f"Row {row} needs positive slots and reach")
            by_rate[row.bit_rate_gbps].append(row)

        for rate, rate_rows in by_rate.items():
            # Walking from the longest reach down, formats get more efficient:
            # never more slots, always strictly shorter reach.
            rate_rows.sort(key=lambda r: r.max_reach_km, reverse=True)
            for lower, higher in pairwise(rate_rows):
                if higher.max_reach_km == lower.max_reach_km:
                    raise ModulationTableError(f"{lower.name} and {higher.name} share a reach at {rate} Gbps")
                if higher.slots_required > lower.slots_required:
                    raise ModulationTableError(
                        f"{higher.name} reaches less than {lower.name} at {rate} Gbps but needs more slots"
                    )

        self.rows = list(rows)
        self._by_rate = dict(by_rate)

    def __repr__(self):
        return f"<ModulationTable rows={len(self.rows)} bit_rates={self.bit_rates}>"

    @property
    def bit_rates(self) -> list[int]:
        return sorted(self._by_rate)

    def candidates(self, bit_rate_gbps: int, path_length_km: float) -> list[ModulationFormat]:
        """Formats that reach the distance (inclusive), most preferred first:
        fewest slots, then shortest reach (the higher-order format)."""
        try:
            rows = self._by_rate[bit_rate_gbps]
        except KeyError as e:
            raise UnsupportedBitRateError(
                f"No modulation format carries {bit_rate_gbps} Gbps (known: {self.bit_rates})"
            ) from e

        reachable = [row for row in rows if row.max_reach_km >= path_length_km]
        return sorted(reachable, key=lambda r: (r.slots_required, r.max_reach_km))

    @classmethod
    def from_text(cls, text: str, source: str = "<string>") -> "ModulationTable":
        rows = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue

            parts = line.split()
            if len(parts) != 4:
                raise ModulationTableError(
                    f"{source}:{lineno}: expected `<format> <bit_rate_gbps> <slots> <reach_km>`, got {raw!r}"
                )

            try:
                rows.append(ModulationFormat(parts[0], int(parts[1]), int(parts[2]), float(parts[3])))
            except ValueError as e:
                raise ModulationTableError(f"{source}:{lineno}: {e}") from e

        return cls(rows)

    @classmethod
    def from_file(cls, path: str | FsPath) -> "ModulationTable":
        path = FsPath(path)
        try:
            return cls.from_text(path.read_text(), str(path))
        except OSError as e:
            raise ModulationTableError(f"Cannot read modulation table {path}: {e}") from e

    @classmethod
    def default(cls) -> "ModulationTable":
        return cls.from_file(DEFAULT_MODULATION_FILE)


def resolve_modulation_table(source: str) -> ModulationTable:
    if source.lower() == "default":
        return ModulationTable.default()

    return ModulationTable.from_file(source)


def select_modulation(table: ModulationTable, bit_rate_gbps: int, path_length_km: float) -> tuple[str, int] | None:
    if candidates := table.candidates(bit_rate_gbps, path_length_km):
        return candidates[0].name, candidates[0].slots_required

    return None


class ProvisionStatus(StrEnum):
    ROUTED = "routed"
    BLOCKED = "blocked"


class BlockReason(StrEnum):
    NO_MODULATION_REACH = "no_modulation_reach"
    NO_SPECTRUM = "no_spectrum"


class ModulationPolicy(StrEnum):
    TRY_ALL = "try_all"
    PREFERRED_ONLY = "preferred_only"


@dataclass(frozen=True)
class ProvisionOutcome:
    status: ProvisionStatus
    allocation: Allocation | None = None
    modulation: ModulationFormat | None = None
    reason: BlockReason | None = None

    def __post_init__(self):
        routed_payload = self.allocation is not None and self.modulation is not None
        if self.status == ProvisionStatus.ROUTED and not (routed_payload and self.reason is None):
            raise ValueError("A routed outcome carries an allocation and a modulation, and no block reason")
        if self.status == ProvisionStatus.BLOCKED and (self.reason is None or self.allocation is not None):
            raise ValueError("A blocked outcome carries a block reason and nothing else")

    @property
    def routed(self) -> bool:
        return self.status == ProvisionStatus.ROUTED

    @classmethod
    def blocked(cls, reason: BlockReason) -> "ProvisionOutcome":
        return cls(status=ProvisionStatus.BLOCKED, reason=reason)


@dataclass(frozen=True)
class Placement:
    modulation: ModulationFormat
    core_index: int
    start_slot: int
    width: int


class Controller:
    """The SDN controller: takes the path an agent picked, finds a modulation
    format that reaches and a first-fit core/slot block, and allocates it."""

    def __init__(
        self,
        grid: SpectrumGrid,
        table: ModulationTable,
        guard_band_slots: int = DEFAULT_GUARD_BAND_SLOTS,
        policy: ModulationPolicy = ModulationPolicy.TRY_ALL,
    ):
        if guard_band_slots < 0:
            raise ValueError(f"Guard band cannot be negative, got {guard_band_slots}")

        self.grid = grid
        self.table = table
        self.guard_band_slots = guard_band_slots
        self.policy = ModulationPolicy(policy)

    def place(self, request: "Request", path: Path) -> Placement | BlockReason:
        """Works out where the request would go on this path, without allocating."""
        candidates = self.table.candidates(request.bit_rate_gbps, path.length_km)
        if not candidates:
            return BlockReason.NO_MODULATION_REACH

        if self.policy == ModulationPolicy.PREFERRED_ONLY:
            candidates = candidates[:1]

        for modulation in candidates:
            width = modulation.slots_required + self.guard_band_slots
            if found := self.grid.first_fit_search(path, width):
                core, start = found
                return Placement(modulation, core, start, width)

        return BlockReason.NO_SPECTRUM

    def can_provision(self, request: "Request", path: Path) -> bool:
        return isinstance(self.place(request, path), Placement)

    def provision(self, request: "Request", path: Path) -> ProvisionOutcome:
        placement = self.place(request, path)
        if isinstance(placement, BlockReason):
            return ProvisionOutcome.blocked(placement)

        allocation = Allocation(
            request_id=request.id,
            path=path,
            core_index=placement.core_index,
            start_slot=placement.start_slot,
            width=placement.width,
        )
        self.grid.allocate(allocation)
        return ProvisionOutcome(status=ProvisionStatus.ROUTED, allocation=allocation, modulation=placement.modulation)

    def teardown(self, request_id: int) -> Allocation:
        return self.grid.release(request_id)
