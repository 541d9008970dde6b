import random
from fractions import Fraction

import numpy as np
import pytest

from confsched.core import (
    Instance,
    Schedule,
    StructuralError,
    check_feasible,
    check_feasible_scanline,
    metrics,
    total_flow_time,
)
from confsched.decoders import decode

from conftest import make_instance, random_instance


def brute_force_overlap_scan(inst, sched):
    """Independent oracle: rasterize busy intervals over integer time."""
    if np.any(sched.start_of < 0):
        return False
    horizon = int((sched.start_of + inst.proc).max(initial=0)) + 1
    for t in range(horizon):
        running = [
            j
            for j in range(inst.n)
            if inst.proc[j] > 0 and sched.start_of[j] <= t < sched.start_of[j] + inst.proc[j]
        ]
        machines = [int(sched.machine_of[j]) for j in running]
        if len(set(machines)) != len(machines):
            return False
        for i, j in enumerate(running):
            for k in running[i + 1 :]:
                if inst.conflicts[j, k]:
                    return False
    return True


class TestCheckFeasible:
    def test_e1_valid_schedule(self, e1):
        sched = Schedule(machine_of=[0, 0, 1], start_of=[1, 0, 0])
        assert check_feasible(e1, sched) is True
        assert brute_force_overlap_scan(e1, sched) is True

    def test_e1_conflict_overlap(self, e1):
        sched = Schedule(machine_of=[0, 1, 1], start_of=[0, 0, 3])
        assert check_feasible(e1, sched) is False

    def test_same_machine_same_start(self):
        inst = make_instance(2, [3, 4])
        sched = Schedule(machine_of=[0, 0], start_of=[0, 0])
        assert check_feasible(inst, sched) is False

    def test_zero_length_jobs_never_violate(self):
        inst = make_instance(1, [0, 0, 5], [(0, 1), (0, 2)])
        sched = Schedule(machine_of=[0, 0, 0], start_of=[2, 2, 0])
        assert check_feasible(inst, sched) is True

    def test_negative_start_infeasible(self, e1):
        sched = Schedule(machine_of=[0, 1, 1], start_of=[-1, 0, 5])
        assert check_feasible(e1, sched) is False

    def test_dimension_mismatch_raises(self, e1):
        with pytest.raises(StructuralError):
            check_feasible(e1, Schedule(machine_of=[0, 1], start_of=[0, 0]))
        with pytest.raises(StructuralError):
            check_feasible(e1, Schedule(machine_of=[0, 1, 5], start_of=[0, 0, 0]))

    def test_butt_joined_conflicting_jobs_ok(self):
        inst = make_instance(2, [2, 2], [(0, 1)])
        sched = Schedule(machine_of=[0, 1], start_of=[0, 2])
        assert check_feasible(inst, sched) is True

    def test_agrees_with_scanline_and_oracle_on_random_schedules(self):
        rng = random.Random(42)
        for _ in range(300):
            inst = random_instance(rng, p_max=5)
            # Mix of decoder outputs (feasible) and random perturbations.
            perm = list(range(inst.n))
            rng.shuffle(perm)
            sched, _ = decode(inst, perm, rng.choice(["fifo", "gt", "ectf", "nd"]))
            if rng.random() < 0.6:
                j = rng.randrange(inst.n)
                sched.start_of[j] = max(0, sched.start_of[j] + rng.randint(-4, 4))
            expected = brute_force_overlap_scan(inst, sched)
            assert check_feasible(inst, sched) == expected
            assert check_feasible_scanline(inst, sched) == expected


class TestRightShiftMonotonicity:
    def test_delaying_past_all_blockers_keeps_feasibility(self):
        rng = random.Random(7)
        for _ in range(100):
            inst = random_instance(rng, p_max=5)
            perm = list(range(inst.n))
            rng.shuffle(perm)
            sched, _ = decode(inst, perm, "nd")
            j = rng.randrange(inst.n)
            comps = sched.start_of + inst.proc
            machine_horizon = max(
                (int(comps[q]) for q in range(inst.n) if q != j and sched.machine_of[q] == sched.machine_of[j]),
                default=0,
            )
            conflict_horizon = max(
                (int(comps[q]) for q in range(inst.n) if inst.conflicts[j, q]), default=0
            )
            sched.start_of[j] = max(machine_horizon, conflict_horizon, int(sched.start_of[j]))
            assert check_feasible(inst, sched)


class TestTotalFlowTime:
    def test_e1_example(self, e1):
        sched = Schedule(machine_of=[0, 0, 1], start_of=[1, 0, 0])
        assert total_flow_time(e1, sched) == 7

    def test_single_job(self):
        inst = make_instance(1, [5])
        assert total_flow_time(inst, Schedule(machine_of=[0], start_of=[0])) == 5

    def test_all_zero_lengths(self):
        inst = make_instance(2, [0, 0, 0])
        sched = Schedule(machine_of=[0, 1, 0], start_of=[0, 0, 0])
        assert total_flow_time(inst, sched) == 0

    def test_relabeling_invariance(self):
        rng = random.Random(13)
        for _ in range(50):
            inst = random_instance(rng)
            perm = list(range(inst.n))
            rng.shuffle(perm)
            sched, value = decode(inst, perm, "ectf")
            sigma = list(range(inst.n))
            rng.shuffle(sigma)
            relabeled = Instance(
                m=inst.m,
                proc=inst.proc[sigma],
                conflicts=inst.conflicts[np.ix_(sigma, sigma)],
            )
            resched = Schedule(
                machine_of=sched.machine_of[sigma], start_of=sched.start_of[sigma]
            )
            assert check_feasible(relabeled, resched)
            assert total_flow_time(relabeled, resched) == value


class TestMetrics:
    def test_coincident_bounds(self):
        rep = metrics(7, 7, 7)
        assert rep.deviation_from_lb == 0 and rep.gap == 0

    def test_arithmetic(self):
        rep = metrics(10, 12, 12)
        assert rep.deviation_from_lb == Fraction(1, 5)
        assert rep.gap == Fraction(1, 6)

    def test_zero_lb_signals_undefined(self):
        rep = metrics(0, 5, 5)
        assert rep.deviation_from_lb is None
        assert rep.gap == 1

    def test_lb_above_ub_rejected(self):
        with pytest.raises(StructuralError):
            metrics(8, 7, 7)


class TestInstanceValidation:
    def test_asymmetric_conflicts_rejected(self):
        conf = np.zeros((2, 2), dtype=bool)
        conf[0, 1] = True
        with pytest.raises(StructuralError):
            Instance(m=1, proc=np.array([1, 1]), conflicts=conf)

    def test_diagonal_rejected(self):
        conf = np.eye(2, dtype=bool)
        with pytest.raises(StructuralError):
            Instance(m=1, proc=np.array([1, 1]), conflicts=conf)

    def test_negative_proc_rejected(self):
        with pytest.raises(StructuralError):
            make_instance(1, [1, -2])

    def test_zero_machines_rejected(self):
        with pytest.raises(StructuralError):
            make_instance(0, [1])

    def test_empty_rejected(self):
        with pytest.raises(StructuralError):
            Instance(m=1, proc=np.array([], dtype=np.int64), conflicts=np.zeros((0, 0), bool))

    def test_equality_and_conflict_pairs(self, e1):
        twin = make_instance(2, [2, 1, 3], [(0, 1)], id="E1")
        assert twin == e1
        assert e1.conflict_pairs() == [(0, 1)]
        assert list(e1.conflict_degrees()) == [1, 1, 0]
