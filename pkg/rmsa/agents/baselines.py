from collections.abc import Callable, Sequence
from typing import TYPE_CHECKING

import numpy as np

from rmsa.agents.base import Algorithm, Decision, RoutingAgent
from rmsa.topology import CandidatePaths, Path

if TYPE_CHECKING:
    from rmsa.controller import Controller
    from rmsa.traffic import Request


BASELINES = (Algorithm.SPF_FF, Algorithm.KSP_FF, Algorithm.KSP_INF)


def baseline_select(
    policy: Algorithm,
    candidates: Sequence[Path],
    fits: Callable[[Path], bool],
) -> Path | None:
    """Shortest-first routing. SPF-FF only ever considers the shortest path;
    the KSP variants take the first one first-fit can place. None means
    the request is blocked."""
    if policy not in BASELINES:
        raise ValueError(f"{policy} is not a baseline policy")

    if policy == Algorithm.SPF_FF:
        shortest = candidates[0]
        return shortest if fits(shortest) else None

    for path in candidates:
        if fits(path):
            return path

    return None


class BaselineAgent(RoutingAgent):
    def __init__(self, candidates: CandidatePaths, rng: np.random.Generator, policy: Algorithm):
        super().__init__(candidates, rng)
        if policy not in BASELINES:
            raise ValueError(f"{policy} is not a baseline policy")
        self.policy = policy

    @property
    def algorithm(self) -> Algorithm:
        return self.policy

    def choose(self, request: "Request", controller: "Controller", epsilon: float) -> Decision:
        paths = self.candidates[request.pair]
        if self.policy == Algorithm.SPF_FF:
            # Only one option; the controller tells us whether it blocks.
            return Decision(request=request, path_index=0, path=paths[0])

        picked = baseline_select(self.policy, paths, lambda path: controller.can_provision(request, path))
        # Blocked requests are still sent down the shortest path, so the
        # block reason is the one that path produced.
        index = 0 if picked is None else paths.index(picked)
        return Decision(request=request, path_index=index, path=paths[index])
