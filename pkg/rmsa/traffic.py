import heapq
import itertools
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat, PositiveInt, field_validator

from rmsa.topology import Node

logger = logging.getLogger(__name__)

DEFAULT_BIT_RATE_WEIGHTS = {25: 3.0, 50: 5.0, 100: 2.0}


class TrafficConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    erlang: PositiveFloat
    mean_holding: PositiveFloat = 5.0
    cores_per_link: PositiveInt = 4
    requests_per_episode: PositiveInt = 2000
    bit_rate_weights: dict[int, PositiveFloat] = DEFAULT_BIT_RATE_WEIGHTS
    # "multiply": lambda = erlang * cores / holding, so offered load grows with spatial capacity.
    arrival_normalization: Literal["multiply", "divide"] = "multiply"
    # Unmeasured traffic loading the grid ahead of each episode, in mean holding times.
    warmup_holding_times: NonNegativeFloat = 0.0
    rng_seed: int = 0

    @field_validator("bit_rate_weights")
    @classmethod
    def validate_weights(cls, v: dict[int, float]):
        if not v:
            raise ValueError("at least one bit rate needs a weight")
        return dict(sorted(v.items()))

    @property
    def arrival_rate(self) -> float:
        if self.arrival_normalization == "multiply":
            return self.erlang * self.cores_per_link / self.mean_holding
        return self.erlang / (self.cores_per_link * self.mean_holding)

    @property
    def warmup_requests(self) -> int:
        return round(self.arrival_rate * self.mean_holding * self.warmup_holding_times)

    @property
    def bit_rate_probabilities(self) -> dict[int, float]:
        total = sum(self.bit_rate_weights.values())
        return {rate: weight / total for rate, weight in self.bit_rate_weights.items()}


@dataclass(frozen=True, slots=True)
class Request:
    id: int
    source: Node
    destination: Node
    bit_rate_gbps: int
    arrival_time: float
    holding_time: float

    @property
    def pair(self) -> tuple[Node, Node]:
        return self.source, self.destination

    @property
    def departure_time(self) -> float:
        return self.arrival_time + self.holding_time


def generate_episode(
    config: TrafficConfig,
    nodes: Sequence[Node],
    rng: np.random.Generator | None = None,
    first_id: int = 0,
    count: int | None = None,
) -> list[Request]:
    """Poisson arrivals (exponential gaps), exponential holding times, bit
    rates drawn by weight and source/destination uniform over ordered pairs.
    Without an explicit generator the stream is seeded from the config.
    `count` overrides requests_per_episode."""
    if len(nodes) < 2:
        raise ValueError("Traffic needs at least two nodes")

    rng = rng if rng is not None else np.random.default_rng(config.rng_seed)
    count = config.requests_per_episode if count is None else count

    arrivals = np.cumsum(rng.exponential(1.0 / config.arrival_rate, count))
    holding = rng.exponential(config.mean_holding, count)

    probabilities = config.bit_rate_probabilities
    rates = rng.choice(list(probabilities), size=count, p=list(probabilities.values()))

    # Destination offset in [1, n) keeps source != destination with every ordered pair equally likely.
    sources = rng.integers(0, len(nodes), count)
    destinations = (sources + rng.integers(1, len(nodes), count)) % len(nodes)

    return [
        Request(
            id=first_id + i,
            source=nodes[sources[i]],
            destination=nodes[destinations[i]],
            bit_rate_gbps=int(rates[i]),
            arrival_time=float(arrivals[i]),
            holding_time=float(holding[i]),
        )
        for i in range(count)
    ]


class EventKind(IntEnum):
    # Departures sort first so capacity is freed before a simultaneous arrival contends for it.
    DEPARTURE = 0
    ARRIVAL = 1


@dataclass(order=True, frozen=True, slots=True)
class Event:
    time: float
    kind: EventKind
    sequence: int
    request: Request = field(compare=False)


class EventQueue:
    def __init__(self, requests: Sequence[Request] = ()):
        self._heap: list[Event] = []
        self._sequence = itertools.count()
        for request in requests:
            self.push_arrival(request)

    def __len__(self):
        return len(self._heap)

    def push_arrival(self, request: Request) -> None:
        heapq.heappush(self._heap, Event(request.arrival_time, EventKind.ARRIVAL, next(self._sequence), request))

    def push_departure(self, request: Request) -> None:
        heapq.heappush(self._heap, Event(request.departure_time, EventKind.DEPARTURE, next(self._sequence), request))

    def pop(self) -> Event:
        return heapq.heappop(self._heap)


def run_events(
    queue: EventQueue,
    on_arrival: Callable[[Request], bool],
    on_departure: Callable[[Request], None],
) -> int:
    """Drains the queue in time order. `on_arrival` returns whether the
    request was routed; only routed requests get a departure scheduled."""
    processed = 0
    while queue:
        event = queue.pop()
        processed += 1

        if event.kind == EventKind.ARRIVAL:
            if on_arrival(event.request):
                queue.push_departure(event.request)
        else:
            on_departure(event.request)

    return processed
