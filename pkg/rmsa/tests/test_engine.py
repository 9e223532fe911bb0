import numpy as np
from django.test import SimpleTestCase

from rmsa.agents import RewardPolicy
from rmsa.config import build_config
from rmsa.controller import BlockReason, ProvisionOutcome
from rmsa.engine import (
    EpisodeStats,
    build_agent,
    cached_candidate_paths,
    reward_for,
    run_episode,
    run_experiment,
    run_seed,
)
from rmsa.exceptions import GridConsistencyError
from rmsa.grid import Allocation
from rmsa.tests.utils import make_controller, make_request
from rmsa.topology import nsfnet_preset

SMALL = {"erlang": "500", "requests_per_episode": "200", "episodes": "3", "seeds": "1"}
LEARNING = {
    "epsilon": "0.1",
    "routed_reward": "1",
    "blocked_reward": "-100",
    "alpha": "0.05",
    "gamma": "0.01",
    "c": "2",
}


class EpisodeStatsTests(SimpleTestCase):
    def test_ratio(self):
        self.assertEqual(EpisodeStats(0, total=2000, blocked=100).blocking_probability, 0.05)

    def test_empty_episode(self):
        stats = EpisodeStats(0)
        self.assertEqual((stats.blocking_probability, stats.bandwidth_blocking_probability), (0.0, 0.0))

    def test_record(self):
        stats = EpisodeStats(0)
        stats.record(make_request(1, bit_rate_gbps=100), ProvisionOutcome.blocked(BlockReason.NO_SPECTRUM))
        stats.record(make_request(2, bit_rate_gbps=25), ProvisionOutcome.blocked(BlockReason.NO_MODULATION_REACH))
        self.assertEqual((stats.total, stats.blocked, stats.routed), (2, 2, 0))
        self.assertEqual(stats.reasons, {BlockReason.NO_SPECTRUM: 1, BlockReason.NO_MODULATION_REACH: 1})
        self.assertEqual(stats.bandwidth_blocking_probability, 1.0)


class RewardTests(SimpleTestCase):
    def test_reward_for(self):
        topology = nsfnet_preset()
        controller = make_controller(topology)
        routed = controller.provision(make_request(1, 12, 14, 100), topology.path((12, 14)))
        blocked = ProvisionOutcome.blocked(BlockReason.NO_SPECTRUM)

        self.assertEqual(reward_for(routed, RewardPolicy(routed_reward=1, blocked_reward=-100)), 1)
        self.assertEqual(reward_for(blocked, RewardPolicy(routed_reward=1, blocked_reward=-100)), -100)
        self.assertEqual(reward_for(routed, RewardPolicy(routed_reward=0, blocked_reward=-10)), 0)


class RunEpisodeTests(SimpleTestCase):
    def setUp(self):
        self.topology = nsfnet_preset()
        self.config = build_config(SMALL | {"algorithm": "ksp_ff"})
        self.candidates = cached_candidate_paths("nsfnet", 3)
        self.agent = build_agent(self.config, self.candidates, np.random.default_rng(0))

    def test_single_request_on_an_empty_network(self):
        controller = make_controller(self.topology)
        stats = run_episode(self.config, self.agent, controller, 0, [make_request(0, 1, 14, 100)])
        self.assertEqual((stats.total, stats.blocked, stats.blocking_probability), (1, 0, 0.0))
        self.assertTrue(controller.grid.is_empty())

    def test_no_spectrum_blocks_everything(self):
        controller = make_controller(self.topology, slots=0)
        requests = [make_request(i, 1, 14, 25, arrival_time=float(i)) for i in range(10)]
        stats = run_episode(self.config, self.agent, controller, 0, requests)
        self.assertEqual(stats.blocking_probability, 1.0)
        self.assertEqual(stats.reasons, {BlockReason.NO_SPECTRUM: 10})

    def test_refuses_a_dirty_grid(self):
        controller = make_controller(self.topology)
        controller.grid.allocate(Allocation(99, self.topology.path((12, 14)), 0, 0, 3))
        with self.assertRaises(GridConsistencyError):
            run_episode(self.config, self.agent, controller, 0, [make_request(0)])


    def test_warmup_loads_the_network_without_counting(self):
        config = build_config(SMALL | {"algorithm": "spf_ff"})
        agent = build_agent(config, self.candidates, np.random.default_rng(0))
        requests = [make_request(i, 12, 14, 25, arrival_time=i / 10) for i in range(3)]

        stats = run_episode(config, agent, make_controller(self.topology, cores=1, slots=2), 0, requests)
        self.assertEqual((stats.total, stats.blocked), (3, 2))

        stats = run_episode(config, agent, make_controller(self.topology, cores=1, slots=2), 0, requests, warmup=1)
        self.assertEqual((stats.total, stats.blocked, stats.blocking_probability), (2, 2, 1.0))


class RunSeedTests(SimpleTestCase):
    def test_zero_slots(self):
        for algorithm in ("spf_ff", "ksp_ff", "egreedy", "qlearning"):
            config = build_config(SMALL | LEARNING | {"algorithm": algorithm, "slots_per_core": "0"})
            result = run_seed(config, 1)
            self.assertEqual(result.series, [1.0, 1.0, 1.0], algorithm)

    def test_episode_shape(self):
        config = build_config(SMALL | {"algorithm": "ksp_ff"})
        result = run_seed(config, 3)
        self.assertEqual([stats.episode_index for stats in result.episodes], [0, 1, 2])
        self.assertTrue(all(stats.total == 200 for stats in result.episodes))
        self.assertTrue(all(0.0 <= bp <= 1.0 for bp in result.series))

    def test_same_traffic_for_every_algorithm(self):
        totals = {}
        for algorithm in ("spf_ff", "ksp_ff", "ucb"):
            config = build_config(SMALL | LEARNING | {"algorithm": algorithm})
            result = run_seed(config, 5)
            totals[algorithm] = [stats.requested_gbps for stats in result.episodes]
        self.assertEqual(totals["spf_ff"], totals["ksp_ff"])
        self.assertEqual(totals["spf_ff"], totals["ucb"])

    def test_spf_equals_ksp_with_one_candidate(self):
        heavy = SMALL | {"erlang": "2000", "requests_per_episode": "3000"}
        spf = run_seed(build_config(heavy | {"algorithm": "spf_ff"}), 2)
        ksp = run_seed(build_config(heavy | {"algorithm": "ksp_ff", "k": "1"}), 2)
        self.assertEqual(spf.series, ksp.series)
        self.assertGreater(spf.series[-1], 0.0)

    def test_learning_changes_the_table(self):
        config = build_config(SMALL | LEARNING | {"algorithm": "egreedy"})
        result = run_seed(config, 1)
        visited = sum(int(n.sum()) for n in result.agent.state.n.values())
        self.assertEqual(visited, 3 * 200)

    def test_warmup_requests_train_but_do_not_count(self):
        config = build_config(SMALL | LEARNING | {"algorithm": "egreedy", "warmup_holding_times": "0.5"})
        self.assertEqual(config.traffic.warmup_requests, 1000)

        result = run_seed(config, 1)
        self.assertTrue(all(stats.total == 200 for stats in result.episodes))
        visited = sum(int(n.sum()) for n in result.agent.state.n.values())
        self.assertEqual(visited, 3 * 1200)


class RunExperimentTests(SimpleTestCase):
    def test_repeated_seed_repeats_the_series(self):
        for algorithm in ("egreedy", "ucb", "qlearning"):
            config = build_config(SMALL | LEARNING | {"algorithm": algorithm, "seeds": "7, 7"})
            result = run_experiment(config)
            self.assertEqual(result.seeds[0].series, result.seeds[1].series, algorithm)
            self.assertEqual(result.mean_series(), result.seeds[0].series)

    def test_final_window_mean(self):
        config = build_config(SMALL | {"algorithm": "ksp_ff", "episodes": "4", "seeds": "1, 2", "final_window": "2"})
        result = run_experiment(config)
        series = result.mean_series()
        self.assertEqual(len(series), 4)
        self.assertAlmostEqual(result.final_window_mean(), (series[2] + series[3]) / 2)
        self.assertAlmostEqual(result.final_window_mean(1), series[3])
