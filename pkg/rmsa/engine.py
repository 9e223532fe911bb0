import functools
import logging
import time
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from rmsa.agents import (
    Algorithm,
    BaselineAgent,
    EpsilonGreedyAgent,
    QLearningAgent,
    RewardPolicy,
    RoutingAgent,
    UcbAgent,
    epsilon_at,
    load_checkpoint,
)
from rmsa.config import ExperimentConfig
from rmsa.controller import BlockReason, Controller, ModulationTable, ProvisionOutcome, resolve_modulation_table
from rmsa.exceptions import GridConsistencyError
from rmsa.grid import SpectrumGrid
from rmsa.topology import CandidatePaths, PathLimit, Topology, build_candidate_paths, resolve_topology
from rmsa.traffic import EventQueue, Request, generate_episode, run_events

logger = logging.getLogger(__name__)


@dataclass
class EpisodeStats:
    episode_index: int
    total: int = 0
    blocked: int = 0
    reasons: Counter = field(default_factory=Counter)
    requested_gbps: int = 0
    provisioned_gbps: int = 0

    @property
    def routed(self) -> int:
        return self.total - self.blocked

    @property
    def blocking_probability(self) -> float:
        return self.blocked / self.total if self.total else 0.0

    @property
    def bandwidth_blocking_probability(self) -> float:
        if not self.requested_gbps:
            return 0.0
        return 1.0 - self.provisioned_gbps / self.requested_gbps

    def record(self, request: Request, outcome: ProvisionOutcome) -> None:
        self.total += 1
        self.requested_gbps += request.bit_rate_gbps
        if outcome.routed:
            self.provisioned_gbps += request.bit_rate_gbps
        else:
            self.blocked += 1
            self.reasons[outcome.reason] += 1


@dataclass
class SeedResult:
    seed: int
    episodes: list[EpisodeStats]
    agent: RoutingAgent = field(repr=False)

    @property
    def series(self) -> list[float]:
        return [stats.blocking_probability for stats in self.episodes]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    seeds: list[SeedResult]

    @property
    def label(self) -> str:
        return self.config.label

    def mean_series(self) -> list[float]:
        """Blocking probability per episode, averaged over seeds."""
        matrix = np.array([seed.series for seed in self.seeds], dtype=np.float64)
        return matrix.mean(axis=0).tolist()

    def final_window_mean(self, window: int | None = None) -> float:
        window = window or self.config.final_window
        series = self.mean_series()
        return float(np.mean(series[-window:]))


def reward_for(outcome: ProvisionOutcome, policy: RewardPolicy) -> float:
    return policy.routed_reward if outcome.routed else policy.blocked_reward


@functools.cache
def cached_topology(source: str) -> Topology:
    return resolve_topology(source)


@functools.cache
def cached_candidate_paths(source: str, k: PathLimit) -> CandidatePaths:
    return build_candidate_paths(cached_topology(source), k)


@functools.cache
def cached_modulation_table(source: str) -> ModulationTable:
    return resolve_modulation_table(source)


def build_agent(config: ExperimentConfig, candidates: CandidatePaths, rng: np.random.Generator) -> RoutingAgent:
    match config.algorithm:
        case Algorithm.EGREEDY:
            agent = EpsilonGreedyAgent(candidates, rng)
        case Algorithm.UCB:
            agent = UcbAgent(candidates, rng, c=config.c)
        case Algorithm.QLEARNING:
            agent = QLearningAgent(
                candidates,
                rng,
                alpha=config.alpha,
                gamma=config.gamma,
                scope=config.congestion_scope,
                threshold=config.congestion_threshold,
            )
        case _:
            agent = BaselineAgent(candidates, rng, policy=config.algorithm)

    if config.warm_start:
        load_checkpoint(agent, config.warm_start)

    return agent


def run_episode(
    config: ExperimentConfig,
    agent: RoutingAgent,
    controller: Controller,
    episode_index: int,
    requests: Sequence[Request],
    epsilon: float = 0.0,
    warmup: int = 0,
) -> EpisodeStats:
    """The first `warmup` requests are routed and learned from like any
    other, but only the rest count towards the episode's statistics."""
    grid = controller.grid
    if not grid.is_empty():
        raise GridConsistencyError(f"Episode {episode_index} must start on an empty grid, got {grid!r}")

    stats = EpisodeStats(episode_index)
    learns = config.algorithm.learns
    measured = {request.id for request in requests[warmup:]}

    def on_arrival(request: Request) -> bool:
        decision = agent.choose(request, controller, epsilon)
        outcome = controller.provision(request, decision.path)
        if learns:
            agent.learn(decision, reward_for(outcome, config.rewards), controller)
        if request.id in measured:
            stats.record(request, outcome)
        return outcome.routed

    def on_departure(request: Request) -> None:
        controller.teardown(request.id)

    run_events(EventQueue(requests), on_arrival, on_departure)

    if not grid.is_empty():
        raise GridConsistencyError(f"Episode {episode_index} left {grid.occupied_slots()} slots behind")

    logger.debug(
        f"[{config.label}] episode {episode_index}: BP {stats.blocking_probability:.4f} "
        f"({stats.blocked}/{stats.total}, {stats.reasons[BlockReason.NO_SPECTRUM]} without spectrum, "
        f"{stats.reasons[BlockReason.NO_MODULATION_REACH]} out of reach)"
    )
    return stats


def run_seed(config: ExperimentConfig, seed: int) -> SeedResult:
    topology = cached_topology(config.topology)
    candidates = cached_candidate_paths(config.topology, config.candidate_limit)

    # Traffic and exploration draw from separate streams, so every
    # algorithm faces the same requests for a given seed.
    traffic_seq, agent_seq = np.random.SeedSequence(seed).spawn(2)
    traffic_rng = np.random.default_rng(traffic_seq)
    agent = build_agent(config, candidates, np.random.default_rng(agent_seq))

    grid = SpectrumGrid(topology, config.traffic.cores_per_link, config.slots_per_core)
    controller = Controller(
        grid,
        cached_modulation_table(config.modulation_table),
        guard_band_slots=config.guard_band_slots,
        policy=config.modulation_policy,
    )

    warmup = config.traffic.warmup_requests
    per_episode = warmup + config.traffic.requests_per_episode
    episodes = []
    for episode_index in range(config.episodes):
        grid.reset()
        epsilon = epsilon_at(config.epsilon, episode_index, config.episodes) if config.algorithm.learns else 0.0
        requests = generate_episode(
            config.traffic,
            topology.nodes,
            traffic_rng,
            first_id=episode_index * per_episode,
            count=per_episode,
        )
        episodes.append(run_episode(config, agent, controller, episode_index, requests, epsilon, warmup))

    return SeedResult(seed=seed, episodes=episodes, agent=agent)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    logger.info(f"[{config.label}] Starting {config.describe()}, {config.episodes} episodes, seeds {config.seeds}")
    started = time.monotonic()

    seeds = []
    for seed in config.seeds:
        result = run_seed(config, seed)
        window = result.series[-config.final_window :]
        logger.info(f"[{config.label}] seed {seed} done, final-window BP {np.mean(window):.4f}")
        seeds.append(result)

    experiment = ExperimentResult(config=config, seeds=seeds)
    logger.info(
        f"[{config.label}] Finished in {time.monotonic() - started:.1f}s, "
        f"final-window BP {experiment.final_window_mean():.4f}"
    )
    return experiment
