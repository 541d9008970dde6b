import random

import numpy as np
import pytest

from confsched.bounds import lb_spt, sequential_spt
from confsched.core import check_feasible, total_flow_time
from confsched.polycases import (
    CLIQUE,
    COMPLEMENT_OF_STAR,
    EDGELESS,
    GENERAL,
    TWO_MACHINE_UNIT,
    StructureMismatchError,
    detect_structure,
    p2_unit_closed_form,
    solve_clique,
    solve_edgeless,
    solve_p2_unit,
    solve_special,
    solve_star_complement,
)
from confsched import exact

from conftest import hp_reduction_instance, make_instance, pit_reduction_instance


def clique_edges(n):
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


def star_complement_instance(center_p, leaf_ps, m=2):
    # center = job 0 with no conflicts; leaves pairwise conflicting
    n = 1 + len(leaf_ps)
    edges = [(a, b) for a in range(1, n) for b in range(a + 1, n)]
    return make_instance(m, [center_p] + list(leaf_ps), edges)


class TestDetectStructure:
    def test_edgeless(self):
        assert detect_structure(make_instance(2, [1, 2])) == EDGELESS

    def test_clique(self):
        inst = make_instance(2, [1, 2, 3], clique_edges(3))
        assert detect_structure(inst) == CLIQUE

    def test_two_machine_unit(self, u1):
        assert detect_structure(u1) == TWO_MACHINE_UNIT

    def test_star_complement(self):
        inst = star_complement_instance(5, [2, 3])
        assert detect_structure(inst) == COMPLEMENT_OF_STAR

    def test_degenerate_two_job_star_routes_to_edgeless(self):
        # complement of the 2-vertex star is edgeless; precedence order matters
        inst = make_instance(2, [3, 4])
        assert detect_structure(inst) == EDGELESS

    def test_single_job_is_edgeless(self):
        assert detect_structure(make_instance(2, [5])) == EDGELESS

    def test_e1_is_a_star_complement(self, e1):
        # conflicts {(0,1)} on three jobs: job 2 agrees with both others
        assert detect_structure(e1) == COMPLEMENT_OF_STAR

    def test_general(self):
        inst = make_instance(2, [2, 3, 4, 2], [(1, 2)])
        assert detect_structure(inst) == GENERAL

    def test_unit_clique_prefers_clique_label(self):
        inst = make_instance(2, [1, 1, 1], clique_edges(3))
        assert detect_structure(inst) == CLIQUE


class TestSolveEdgeless:
    def test_three_jobs_two_machines(self):
        inst = make_instance(2, [1, 2, 3])
        sched, value = solve_edgeless(inst)
        assert value == 7
        assert check_feasible(inst, sched)

    def test_fewer_jobs_than_machines(self):
        inst = make_instance(4, [5, 6, 7])
        sched, value = solve_edgeless(inst)
        assert value == 18
        assert not sched.start_of.any()

    def test_single_machine(self):
        inst = make_instance(1, [2, 1])
        _, value = solve_edgeless(inst)
        assert value == 1 + 3

    def test_mismatch_refused(self, e1):
        with pytest.raises(StructureMismatchError):
            solve_edgeless(e1)


class TestSolveClique:
    def test_spec_example(self):
        inst = make_instance(2, [1, 2, 3], clique_edges(3))
        _, value = solve_clique(inst)
        assert value == 10

    def test_single_job(self):
        inst = make_instance(1, [4])
        assert solve_clique(inst)[1] == 4

    def test_equal_jobs_arithmetic_series(self):
        c, n = 3, 5
        inst = make_instance(2, [c] * n, clique_edges(n))
        assert solve_clique(inst)[1] == c * n * (n + 1) // 2

    def test_mismatch_refused(self, e1):
        with pytest.raises(StructureMismatchError):
            solve_clique(e1)


class TestSolveStarComplement:
    def test_center_five_leaves_two_three(self):
        inst = star_complement_instance(5, [2, 3])
        sched, value = solve_star_complement(inst)
        assert value == 12
        assert check_feasible(inst, sched)

    def test_center_one(self):
        inst = star_complement_instance(1, [2, 3])
        assert solve_star_complement(inst)[1] == 8

    def test_mismatch_refused(self):
        with pytest.raises(StructureMismatchError):
            solve_star_complement(make_instance(2, [2, 3, 4, 2], [(1, 2)]))

    def test_single_machine_not_claimed(self):
        inst = star_complement_instance(5, [2, 3], m=1)
        assert detect_structure(inst) != COMPLEMENT_OF_STAR
        with pytest.raises(StructureMismatchError):
            solve_star_complement(inst)


class TestSolveP2Unit:
    def test_u1(self, u1):
        sched, value = solve_p2_unit(u1)
        assert value == 6 == p2_unit_closed_form(4, 2)
        assert check_feasible(u1, sched)

    def test_all_conflicting_unit_jobs_run_sequentially(self):
        n = 5
        inst = make_instance(2, [1] * n, clique_edges(n))
        assert solve_p2_unit(inst)[1] == n * (n + 1) // 2

    def test_single_unit_job(self):
        inst = make_instance(2, [1])
        assert solve_p2_unit(inst)[1] == 1

    def test_mismatch_refused(self, e1):
        with pytest.raises(StructureMismatchError):
            solve_p2_unit(e1)


class TestOptimality:
    def test_each_solver_matches_oracle_on_random_structured_instances(self):
        rng = random.Random(61)
        for _ in range(30):
            n = rng.randint(1, 7)
            ps = [rng.randint(1, 6) for _ in range(n)]
            edgeless = make_instance(rng.randint(1, 3), ps)
            assert solve_edgeless(edgeless)[1] == exact.exact_gt_enum(edgeless)[1]
            cl = make_instance(rng.randint(1, 3), ps, clique_edges(n))
            assert solve_clique(cl)[1] == exact.exact_gt_enum(cl)[1]
        for _ in range(30):
            n = rng.randint(3, 7)
            star = star_complement_instance(
                rng.randint(1, 6), [rng.randint(1, 6) for _ in range(n - 1)], m=rng.randint(2, 3)
            )
            assert solve_star_complement(star)[1] == exact.exact_gt_enum(star)[1]
        for _ in range(30):
            n = rng.randint(1, 8)
            edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.5]
            unit = make_instance(2, [1] * n, edges)
            assert solve_p2_unit(unit)[1] == exact.exact_gt_enum(unit)[1]

    def test_router_dispatch(self, e1, u1):
        assert solve_special(e1) is None
        structure, sched, value = solve_special(u1)
        assert structure == TWO_MACHINE_UNIT and value == 6


class TestReductionFixtures:
    def test_hp_even_closed_form(self):
        # even path: (n+2)/2 * (n/2 * b + a)
        inst = hp_reduction_instance(4, a=1, b=2)
        expected = (4 + 2) // 2 * ((4 // 2) * 2 + 1)
        assert expected == 15
        assert exact.exact_gt_enum(inst)[1] == 15

    def test_hp_odd_closed_form(self):
        # odd path: (n+1)/2 * ((n+1)/2 * b + a)
        inst = hp_reduction_instance(3, a=1, b=2)
        expected = (3 + 1) // 2 * ((3 + 1) // 2 * 2 + 1)
        assert expected == 10
        assert exact.exact_gt_enum(inst)[1] == 10

    def test_pit_closed_form(self):
        inst = pit_reduction_instance(3)
        assert exact.exact_gt_enum(inst)[1] == 3 * 3 * (3 + 1) // 2 == 18

    def test_complement_of_bipartite_routes_to_two_machine_solver(self):
        # Three machines, unit jobs, bipartite agreement graph: no three jobs
        # can run in parallel, so the m=2 unit solver value is the optimum.
        rng = random.Random(67)
        for _ in range(20):
            left = rng.randint(1, 3)
            right = rng.randint(1, 3)
            n = left + right
            agree = np.zeros((n, n), dtype=bool)
            for a in range(left):
                for b in range(left, n):
                    if rng.random() < 0.7:
                        agree[a, b] = agree[b, a] = True
            conf = ~agree & ~np.eye(n, dtype=bool)
            inst3 = make_instance(3, [1] * n, [])
            inst3 = inst3.__class__(m=3, proc=inst3.proc, conflicts=conf)
            inst2 = inst3.__class__(m=2, proc=inst3.proc, conflicts=conf)
            assert solve_p2_unit(inst2)[1] == exact.exact_gt_enum(inst3)[1]
