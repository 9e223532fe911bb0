import random

import numpy as np
from django.test import SimpleTestCase

from rmsa.controller import (
    BlockReason,
    ModulationFormat,
    ModulationPolicy,
    ModulationTable,
    ProvisionOutcome,
    ProvisionStatus,
    select_modulation,
)
from rmsa.exceptions import ModulationTableError, UnknownAllocationError, UnsupportedBitRateError
from rmsa.tests.utils import exhaustive_first_fit, make_controller, make_request, two_node_topology
from rmsa.topology import build_candidate_paths, nsfnet_preset


class ModulationTableTests(SimpleTestCase):
    def setUp(self):
        self.table = ModulationTable.default()

    def test_default_rows(self):
        self.assertEqual(len(self.table.rows), 9)
        self.assertEqual(self.table.bit_rates, [25, 50, 100])

    def test_examples(self):
        self.assertEqual(select_modulation(self.table, 100, 900), ("64-QAM", 2))
        self.assertEqual(select_modulation(self.table, 100, 5540), ("QPSK", 4))
        self.assertIsNone(select_modulation(self.table, 25, 23000))

    def test_reach_is_inclusive(self):
        self.assertEqual(select_modulation(self.table, 50, 1832), ("64-QAM", 1))
        self.assertEqual(select_modulation(self.table, 50, 1832.5), ("16-QAM", 1))
        self.assertEqual(select_modulation(self.table, 25, 22160), ("QPSK", 1))

    def test_fewest_slots_across_regimes(self):
        for rate in self.table.bit_rates:
            rows = [row for row in self.table.rows if row.bit_rate_gbps == rate]
            for length in (1, 900, 916, 917, 1900, 2375, 2400, 3664, 4000, 4750, 5540, 9500, 11080, 22160, 30000):
                reachable = [row for row in rows if row.max_reach_km >= length]
                picked = select_modulation(self.table, rate, length)
                if not reachable:
                    self.assertIsNone(picked)
                    continue
                fewest = min(row.slots_required for row in reachable)
                shortest = min(row.max_reach_km for row in reachable if row.slots_required == fewest)
                expected = next(r for r in reachable if r.slots_required == fewest and r.max_reach_km == shortest)
                self.assertEqual(picked, (expected.name, expected.slots_required), f"{rate} Gbps over {length} km")

    def test_unsupported_bit_rate(self):
        with self.assertRaises(UnsupportedBitRateError):
            select_modulation(self.table, 40, 100)

    def test_inconsistent_tables_are_rejected(self):
        with self.assertRaises(ModulationTableError):
            ModulationTable([])
        with self.assertRaises(ModulationTableError):
            ModulationTable([ModulationFormat("A", 100, 2, 1000), ModulationFormat("B", 100, 3, 500)])
        with self.assertRaises(ModulationTableError):
            ModulationTable([ModulationFormat("A", 100, 2, 1000), ModulationFormat("B", 100, 1, 1000)])

    def test_from_text(self):
        table = ModulationTable.from_text("# name rate slots reach\nBPSK 10 1 5000\n")
        self.assertEqual(table.rows, [ModulationFormat("BPSK", 10, 1, 5000.0)])
        with self.assertRaises(ModulationTableError):
            ModulationTable.from_text("BPSK 10 1\n")


class ProvisionOutcomeTests(SimpleTestCase):
    def test_payloads_are_exclusive(self):
        with self.assertRaises(ValueError):
            ProvisionOutcome(status=ProvisionStatus.ROUTED)
        with self.assertRaises(ValueError):
            ProvisionOutcome(status=ProvisionStatus.BLOCKED)
        self.assertFalse(ProvisionOutcome.blocked(BlockReason.NO_SPECTRUM).routed)


class ProvisionTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.nsfnet = nsfnet_preset()

    def test_short_link_uses_64qam(self):
        controller = make_controller(self.nsfnet)
        outcome = controller.provision(make_request(1, 12, 14, 100), self.nsfnet.path((12, 14)))

        self.assertEqual(outcome.status, ProvisionStatus.ROUTED)
        self.assertEqual(outcome.modulation.name, "64-QAM")
        self.assertEqual(outcome.allocation.width, 3)
        self.assertEqual(outcome.allocation.core_index, 0)
        self.assertEqual(outcome.allocation.slot_range, range(0, 3))

    def test_width_includes_guard_band(self):
        controller = make_controller(self.nsfnet, guard_band_slots=2)
        outcome = controller.provision(make_request(1, 1, 8, 50), self.nsfnet.path((1, 8)))
        self.assertEqual(outcome.modulation.name, "16-QAM")
        self.assertEqual(outcome.allocation.width, 1 + 2)

    def test_saturated_link_blocks(self):
        controller = make_controller(self.nsfnet)
        path = self.nsfnet.path((12, 14))
        controller.grid.occupancy[controller.grid.link_index[12, 14]] = True
        before = controller.grid.occupied_slots()

        outcome = controller.provision(make_request(1, 12, 14, 25), path)
        self.assertEqual(outcome.reason, BlockReason.NO_SPECTRUM)
        self.assertIsNone(outcome.allocation)
        self.assertEqual(controller.grid.occupied_slots(), before)

    def test_out_of_reach_blocks(self):
        topology = two_node_topology(23000)
        controller = make_controller(topology)
        outcome = controller.provision(make_request(1, 1, 2, 25), topology.path((1, 2)))
        self.assertEqual(outcome.reason, BlockReason.NO_MODULATION_REACH)
        self.assertTrue(controller.grid.is_empty())

    def test_preferred_only_policy(self):
        controller = make_controller(self.nsfnet)
        controller.policy = ModulationPolicy.PREFERRED_ONLY
        outcome = controller.provision(make_request(1, 12, 14, 100), self.nsfnet.path((12, 14)))
        self.assertEqual(outcome.modulation.name, "64-QAM")

    def test_teardown(self):
        controller = make_controller(self.nsfnet)
        controller.provision(make_request(1, 12, 14, 100), self.nsfnet.path((12, 14)))
        controller.teardown(1)
        self.assertTrue(controller.grid.is_empty())

    def test_teardown_of_blocked_request(self):
        topology = two_node_topology(23000)
        controller = make_controller(topology)
        controller.provision(make_request(1, 1, 2, 25), topology.path((1, 2)))
        with self.assertRaises(UnknownAllocationError):
            controller.teardown(1)

    def test_random_cycles_respect_grid_invariants(self):
        """Reference-counts every slot independently of the grid and checks
        non-overlap and conservation after each step. Every arrival lands
        where an exhaustive first-fit scan says it should."""
        controller = make_controller(self.nsfnet, cores=2, slots=16)
        grid = controller.grid
        candidates = build_candidate_paths(self.nsfnet, 3)
        pairs = list(candidates)
        refcount = np.zeros(grid.occupancy.shape, dtype=np.int64)
        active: dict[int, tuple] = {}
        rng = random.Random(2024)

        for request_id in range(12000):
            if active and rng.random() < 0.45:
                victim = rng.choice(sorted(active))
                allocation = controller.teardown(victim)
                ids, core, span = active.pop(victim)
                self.assertEqual(allocation.request_id, victim)
                refcount[ids, core, span] -= 1
            else:
                source, destination = rng.choice(pairs)
                path = rng.choice(candidates[source, destination])
                request = make_request(request_id, source, destination, rng.choice([25, 50, 100]))
                expected = None
                for modulation in controller.table.candidates(request.bit_rate_gbps, path.length_km):
                    if expected := exhaustive_first_fit(grid, path, modulation.slots_required + 1):
                        break

                outcome = controller.provision(request, path)
                self.assertEqual(outcome.routed, expected is not None)
                if outcome.routed:
                    self.assertEqual((outcome.allocation.core_index, outcome.allocation.start_slot), expected)
                    allocation = outcome.allocation
                    self.assertEqual(allocation.width, outcome.modulation.slots_required + 1)
                    span = slice(allocation.start_slot, allocation.end_slot)
                    ids = grid.link_ids(path)
                    refcount[ids, allocation.core_index, span] += 1
                    active[request_id] = (ids, allocation.core_index, span)

            self.assertLessEqual(int(refcount.max(initial=0)), 1)
            self.assertEqual(grid.occupied_slots(), int(refcount.sum()))
            np.testing.assert_array_equal(grid.occupancy, refcount > 0)

        for request_id in list(active):
            controller.teardown(request_id)
        self.assertTrue(grid.is_empty())
