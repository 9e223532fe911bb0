from abc import ABC, abstractmethod
from collections.abc import Iterator
from dataclasses import dataclass
from enum import StrEnum
from typing import TYPE_CHECKING, ClassVar

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from rmsa.grid import CongestionLevel
from rmsa.topology import CandidatePaths, Pair, Path

if TYPE_CHECKING:
    from rmsa.controller import Controller
    from rmsa.traffic import Request


class Algorithm(StrEnum):
    EGREEDY = "egreedy"
    UCB = "ucb"
    QLEARNING = "qlearning"
    SPF_FF = "spf_ff"
    KSP_FF = "ksp_ff"
    KSP_INF = "ksp_inf"

    @property
    def learns(self) -> bool:
        return self in (Algorithm.EGREEDY, Algorithm.UCB, Algorithm.QLEARNING)


class RewardPolicy(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    routed_reward: float
    blocked_reward: float

    @model_validator(mode="after")
    def check_signs(self):
        if not self.routed_reward >= 0 > self.blocked_reward:
            raise ValueError(
                f"Routed reward must be non-negative and blocked reward negative, "
                f"got {self.routed_reward} / {self.blocked_reward}"
            )
        return self


@dataclass(frozen=True)
class Decision:
    request: "Request"
    path_index: int
    path: Path
    level_before: CongestionLevel | None = None
    explored: bool = False


# (sd_pair, congestion level or None for level-less tables, path index, Q, N)
type TableRow = tuple[Pair, CongestionLevel | None, int, float, int]


def explore(rng: np.random.Generator, epsilon: float) -> bool:
    # Always draws, so the agent stream advances the same way whatever epsilon is.
    return bool(rng.random() < epsilon)


class RoutingAgent(ABC):
    """Picks one of the candidate paths for every arriving request, and
    learns from the reward the controller's outcome earned."""

    algorithm: ClassVar[Algorithm]

    def __init__(self, candidates: CandidatePaths, rng: np.random.Generator):
        self.candidates = candidates
        self.rng = rng

    def __repr__(self):
        return f"<{type(self).__name__} {self.candidates!r}>"

    @abstractmethod
    def choose(self, request: "Request", controller: "Controller", epsilon: float) -> Decision: ...

    def learn(self, decision: Decision, reward: float, controller: "Controller") -> None:
        """Baselines have nothing to learn."""

    def table_rows(self) -> Iterator[TableRow]:
        yield from ()

    def restore_row(self, row: TableRow) -> None:
        raise NotImplementedError(f"{type(self).__name__} keeps no value table")
