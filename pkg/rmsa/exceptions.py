class SimulationError(Exception):
    """Base for everything the simulator raises on purpose."""


class TopologyError(SimulationError, ValueError):
    pass


class TopologyFormatError(TopologyError):
    pass


class SelfLoopError(TopologyError):
    pass


class DuplicateLinkError(TopologyError):
    pass


class NonPositiveLengthError(TopologyError):
    pass


class DisconnectedTopologyError(TopologyError):
    pass


class UnknownNodeError(TopologyError):
    pass


class SamePairError(TopologyError):
    pass


class GridConsistencyError(SimulationError, RuntimeError):
    """The spectrum grid ended up in (or was asked to enter) a state that
    normal operation can never produce. Always a bug, never a block."""


class UnknownAllocationError(SimulationError, KeyError):
    pass


class ModulationTableError(SimulationError, ValueError):
    pass


class UnsupportedBitRateError(ModulationTableError):
    pass


class CongestionRangeError(SimulationError, ValueError):
    pass


class ConfigError(SimulationError, ValueError):
    pass
