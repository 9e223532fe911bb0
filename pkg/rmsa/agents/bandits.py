import math
from abc import abstractmethod
from collections.abc import Iterator
from typing import TYPE_CHECKING

import numpy as np

from rmsa.agents.base import Algorithm, Decision, RoutingAgent, TableRow, explore
from rmsa.topology import CandidatePaths, Pair

if TYPE_CHECKING:
    from rmsa.controller import Controller
    from rmsa.traffic import Request


class BanditState:
    """Per sd-pair value estimates and visit counts, one entry per candidate
    path. The selection count `t` UCB needs is kept per sd-pair too."""

    def __init__(self, actions: dict[Pair, int]):
        self.q: dict[Pair, np.ndarray] = {pair: np.zeros(n, dtype=np.float64) for pair, n in actions.items()}
        self.n: dict[Pair, np.ndarray] = {pair: np.zeros(n, dtype=np.int64) for pair, n in actions.items()}

    @classmethod
    def for_candidates(cls, candidates: CandidatePaths) -> "BanditState":
        return cls({pair: len(paths) for pair, paths in candidates.items()})

    def selections(self, pair: Pair) -> int:
        return int(self.n[pair].sum())


def egreedy_select(state: BanditState, pair: Pair, epsilon: float, rng: np.random.Generator) -> int:
    q = state.q[pair]
    if explore(rng, epsilon):
        return int(rng.integers(q.size))

    # argmax returns the first maximum: ties go to the shortest path.
    return int(np.argmax(q))


def ucb_select(state: BanditState, pair: Pair, epsilon: float, c: float, rng: np.random.Generator) -> int:
    q = state.q[pair]
    if explore(rng, epsilon):
        return int(rng.integers(q.size))

    n = state.n[pair]
    untried = np.flatnonzero(n == 0)
    if untried.size:
        return int(untried[0])

    bonus = c * np.sqrt(math.log(state.selections(pair)) / n)
    return int(np.argmax(q + bonus))


def bandit_update(state: BanditState, pair: Pair, path_index: int, reward: float) -> None:
    # Count first, so Q stays the exact running mean of everything seen.
    state.n[pair][path_index] += 1
    q = state.q[pair]
    q[path_index] += (reward - q[path_index]) / state.n[pair][path_index]


class BanditAgent(RoutingAgent):
    def __init__(self, candidates: CandidatePaths, rng: np.random.Generator):
        super().__init__(candidates, rng)
        self.state = BanditState.for_candidates(candidates)

    @abstractmethod
    def select(self, pair: Pair, epsilon: float) -> int: ...

    def choose(self, request: "Request", controller: "Controller", epsilon: float) -> Decision:
        index = self.select(request.pair, epsilon)
        return Decision(request=request, path_index=index, path=self.candidates[request.pair][index])

    def learn(self, decision: Decision, reward: float, controller: "Controller") -> None:
        bandit_update(self.state, decision.request.pair, decision.path_index, reward)

    def table_rows(self) -> Iterator[TableRow]:
        for pair, q in self.state.q.items():
            n = self.state.n[pair]
            for index in range(q.size):
                yield pair, None, index, float(q[index]), int(n[index])

    def restore_row(self, row: TableRow) -> None:
        pair, level, index, q, n = row
        if level is not None:
            raise ValueError("Bandit tables have no congestion levels")
        self.state.q[pair][index] = q
        self.state.n[pair][index] = n


class EpsilonGreedyAgent(BanditAgent):
    algorithm = Algorithm.EGREEDY

    def select(self, pair: Pair, epsilon: float) -> int:
        return egreedy_select(self.state, pair, epsilon, self.rng)


class UcbAgent(BanditAgent):
    algorithm = Algorithm.UCB

    def __init__(self, candidates: CandidatePaths, rng: np.random.Generator, c: float):
        super().__init__(candidates, rng)
        self.c = c

    def select(self, pair: Pair, epsilon: float) -> int:
        return ucb_select(self.state, pair, epsilon, self.c, self.rng)
