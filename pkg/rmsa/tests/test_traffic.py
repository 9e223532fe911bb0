from collections import Counter

import numpy as np
from django.test import SimpleTestCase
from pydantic import ValidationError

from rmsa.tests.utils import make_request
from rmsa.traffic import EventKind, EventQueue, TrafficConfig, generate_episode, run_events

NODES = list(range(1, 15))


class TrafficConfigTests(SimpleTestCase):
    def test_arrival_rate_scales_with_cores(self):
        config = TrafficConfig(erlang=1000, mean_holding=5, cores_per_link=4)
        self.assertEqual(config.arrival_rate, 800)

    def test_divide_normalization(self):
        config = TrafficConfig(erlang=1000, mean_holding=5, cores_per_link=4, arrival_normalization="divide")
        self.assertEqual(config.arrival_rate, 50)

    def test_warmup_in_holding_times(self):
        self.assertEqual(TrafficConfig(erlang=750).warmup_requests, 0)
        self.assertEqual(TrafficConfig(erlang=750, warmup_holding_times=3).warmup_requests, 9000)
        config = TrafficConfig(erlang=1000, warmup_holding_times=2, arrival_normalization="divide")
        self.assertEqual(config.warmup_requests, 500)

    def test_weights_become_probabilities(self):
        config = TrafficConfig(erlang=1)
        self.assertEqual(config.bit_rate_probabilities, {25: 0.3, 50: 0.5, 100: 0.2})

    def test_validation(self):
        with self.assertRaises(ValidationError):
            TrafficConfig(erlang=0)
        with self.assertRaises(ValidationError):
            TrafficConfig(erlang=1, bit_rate_weights={25: 0})
        with self.assertRaises(ValidationError):
            TrafficConfig(erlang=1, bit_rate_weights={})


class GenerateEpisodeTests(SimpleTestCase):
    def test_count_and_ordering(self):
        config = TrafficConfig(erlang=500, requests_per_episode=2000)
        requests = generate_episode(config, NODES, np.random.default_rng(1))

        self.assertEqual(len(requests), 2000)
        self.assertEqual([r.id for r in requests], list(range(2000)))
        arrivals = [r.arrival_time for r in requests]
        self.assertTrue(all(a < b for a, b in zip(arrivals, arrivals[1:], strict=False)))
        self.assertTrue(all(r.source != r.destination for r in requests))
        self.assertTrue(all(r.holding_time > 0 for r in requests))

    def test_same_seed_same_stream(self):
        config = TrafficConfig(erlang=750, rng_seed=9)
        self.assertEqual(generate_episode(config, NODES), generate_episode(config, NODES))
        self.assertNotEqual(
            generate_episode(config, NODES), generate_episode(config.model_copy(update={"rng_seed": 10}), NODES)
        )

    def test_first_id(self):
        config = TrafficConfig(erlang=10, requests_per_episode=5)
        requests = generate_episode(config, NODES, np.random.default_rng(0), first_id=100)
        self.assertEqual([r.id for r in requests], [100, 101, 102, 103, 104])

    def test_count_overrides_the_episode_length(self):
        config = TrafficConfig(erlang=10, requests_per_episode=5)
        requests = generate_episode(config, NODES, np.random.default_rng(0), count=8)
        self.assertEqual(len(requests), 8)
        self.assertTrue(all(a.arrival_time < b.arrival_time for a, b in zip(requests, requests[1:])))

    def test_statistics(self):
        config = TrafficConfig(erlang=1000, requests_per_episode=200_000)
        requests = generate_episode(config, NODES, np.random.default_rng(42))

        gaps = np.diff([0.0] + [r.arrival_time for r in requests])
        self.assertAlmostEqual(gaps.mean(), 1.25e-3, delta=1.25e-3 * 0.02)
        holding = np.array([r.holding_time for r in requests])
        self.assertAlmostEqual(holding.mean(), 5.0, delta=0.1)
        # Offered load, erlang x cores.
        self.assertAlmostEqual(holding.mean() / gaps.mean(), 4000, delta=4000 * 0.03)

        rates = Counter(r.bit_rate_gbps for r in requests)
        for rate, share in {25: 0.3, 50: 0.5, 100: 0.2}.items():
            self.assertAlmostEqual(rates[rate] / len(requests), share, delta=0.01)

        pairs = Counter((r.source, r.destination) for r in requests)
        self.assertEqual(len(pairs), 14 * 13)
        expected = len(requests) / (14 * 13)
        self.assertTrue(all(abs(count - expected) < expected * 0.15 for count in pairs.values()))

    def test_needs_two_nodes(self):
        with self.assertRaises(ValueError):
            generate_episode(TrafficConfig(erlang=1), [1])


class EventLoopTests(SimpleTestCase):
    def test_empty_queue(self):
        calls = []
        processed = run_events(EventQueue(), calls.append, calls.append)
        self.assertEqual(processed, 0)
        self.assertEqual(calls, [])

    def test_routed_request_departs_once(self):
        log = []
        request = make_request(1, arrival_time=2.0)
        run_events(
            EventQueue([request]),
            lambda r: log.append(("in", r.id)) or True,
            lambda r: log.append(("out", r.id)),
        )
        self.assertEqual(log, [("in", 1), ("out", 1)])

    def test_blocked_request_never_departs(self):
        departures = []
        run_events(EventQueue([make_request(1)]), lambda r: False, departures.append)
        self.assertEqual(departures, [])

    def test_departures_go_before_simultaneous_arrivals(self):
        first = make_request(1, arrival_time=0.0)  # holds for 1.0, so leaves at 1.0
        second = make_request(2, arrival_time=1.0)
        order = []
        run_events(
            EventQueue([second, first]),
            lambda r: order.append(("arrival", r.id)) or True,
            lambda r: order.append(("departure", r.id)),
        )
        self.assertEqual(order, [("arrival", 1), ("departure", 1), ("arrival", 2), ("departure", 2)])

    def test_time_order_and_counts(self):
        config = TrafficConfig(erlang=300, requests_per_episode=2000)
        requests = generate_episode(config, NODES, np.random.default_rng(3))
        queue = EventQueue(requests)
        times = []
        routed = []
        departed = []

        def on_arrival(request):
            times.append(request.arrival_time)
            routed.append(request.id % 3 != 0)
            return routed[-1]

        def on_departure(request):
            times.append(request.departure_time)
            departed.append(request.id)

        processed = run_events(queue, on_arrival, on_departure)
        self.assertEqual(times, sorted(times))
        self.assertEqual(len(departed), sum(routed))
        self.assertEqual(processed, 2000 + sum(routed))
        self.assertEqual(len(queue), 0)

    def test_event_kinds_sort_departure_first(self):
        self.assertLess(EventKind.DEPARTURE, EventKind.ARRIVAL)
