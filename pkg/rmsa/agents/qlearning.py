from collections.abc import Iterator, Sequence
from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np

from rmsa.agents.base import Algorithm, Decision, RoutingAgent, TableRow, explore
from rmsa.grid import CONGESTION_THRESHOLD, CongestionLevel, SpectrumGrid, congestion_level
from rmsa.topology import CandidatePaths, Pair, Path

if TYPE_CHECKING:
    from rmsa.controller import Controller
    from rmsa.traffic import Request


class CongestionScope(StrEnum):
    PER_PATH = "per_path"
    NETWORK = "network"


class QLearnState:
    """Q-values and visit counts shaped (congestion level, path index) for
    every sd-pair, zero-initialized."""

    def __init__(self, actions: dict[Pair, int], alpha: float, gamma: float):
        if not 0 < alpha <= 1:
            raise ValueError(f"Learning rate must lie in (0, 1], got {alpha}")
        if not 0 <= gamma <= 1:
            raise ValueError(f"Discount factor must lie in [0, 1], got {gamma}")

        levels = len(CongestionLevel)
        self.alpha = alpha
        self.gamma = gamma
        self.q: dict[Pair, np.ndarray] = {pair: np.zeros((levels, n), dtype=np.float64) for pair, n in actions.items()}
        self.n: dict[Pair, np.ndarray] = {pair: np.zeros((levels, n), dtype=np.int64) for pair, n in actions.items()}


def qlearn_select(
    state: QLearnState,
    pair: Pair,
    levels: Sequence[CongestionLevel],
    epsilon: float,
    rng: np.random.Generator,
) -> int:
    """Each candidate path is valued at its own congestion level."""
    q = state.q[pair]
    if len(levels) != q.shape[1]:
        raise ValueError(f"Got {len(levels)} congestion levels for {q.shape[1]} candidate paths")

    if explore(rng, epsilon):
        return int(rng.integers(q.shape[1]))

    values = q[np.asarray(levels, dtype=np.intp), np.arange(q.shape[1])]
    return int(np.argmax(values))


def qlearn_update(
    state: QLearnState,
    pair: Pair,
    level_before: CongestionLevel,
    path_index: int,
    reward: float,
    level_after: CongestionLevel,
) -> None:
    q = state.q[pair]
    target = reward + state.gamma * q[level_after].max()
    # Written as a blend so alpha=1 lands exactly on the target.
    q[level_before, path_index] = (1 - state.alpha) * q[level_before, path_index] + state.alpha * target
    state.n[pair][level_before, path_index] += 1


class QLearningAgent(RoutingAgent):
    algorithm = Algorithm.QLEARNING

    def __init__(
        self,
        candidates: CandidatePaths,
        rng: np.random.Generator,
        alpha: float,
        gamma: float,
        scope: CongestionScope = CongestionScope.PER_PATH,
        threshold: float = CONGESTION_THRESHOLD,
    ):
        super().__init__(candidates, rng)
        self.state = QLearnState({pair: len(paths) for pair, paths in candidates.items()}, alpha, gamma)
        self.scope = CongestionScope(scope)
        self.threshold = threshold

    def level(self, grid: SpectrumGrid, path: Path) -> CongestionLevel:
        if self.scope == CongestionScope.NETWORK:
            return congestion_level(grid.network_congestion(), self.threshold)
        return congestion_level(grid.path_congestion(path), self.threshold)

    def choose(self, request: "Request", controller: "Controller", epsilon: float) -> Decision:
        paths = self.candidates[request.pair]
        if self.scope == CongestionScope.NETWORK:
            levels = [self.level(controller.grid, paths[0])] * len(paths)
        else:
            levels = [self.level(controller.grid, path) for path in paths]

        index = qlearn_select(self.state, request.pair, levels, epsilon, self.rng)
        return Decision(request=request, path_index=index, path=paths[index], level_before=levels[index])

    def learn(self, decision: Decision, reward: float, controller: "Controller") -> None:
        level_after = self.level(controller.grid, decision.path)
        qlearn_update(
            self.state, decision.request.pair, decision.level_before, decision.path_index, reward, level_after
        )

    def table_rows(self) -> Iterator[TableRow]:
        for pair, q in self.state.q.items():
            n = self.state.n[pair]
            for level in CongestionLevel:
                for index in range(q.shape[1]):
                    yield pair, level, index, float(q[level, index]), int(n[level, index])

    def restore_row(self, row: TableRow) -> None:
        pair, level, index, q, n = row
        if level is None:
            raise ValueError("Q-learning tables are indexed by congestion level")
        self.state.q[pair][level, index] = q
        self.state.n[pair][level, index] = n
