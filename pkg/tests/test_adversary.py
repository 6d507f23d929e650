import math

import pytest

from blindgap import (
    ArrivalOrder,
    DiscreteDistribution,
    EMPTY_TRAIL,
    Instance,
    MAX_PROB,
    SizeLimitError,
    ThresholdPolicy,
    adaptive_adversary,
    bernoulli_ladder,
    gap_optimal_policy,
    ladder_orders,
    max_cdf,
    maxexp_hardness,
    opt_order_aware_maxexp,
    point_mass_instances,
    random_instance,
    three_box_example,
)
from blindgap import max_point_mass
from blindgap.adversary import ladder_pivot
from blindgap.constants import solve_lambda_rho_gamma
from blindgap.policies import GreedyPositivePolicy, Policy


class TestThreeBoxExample:
    def test_layout(self):
        inst, orders = three_box_example(0.5, 0.01)
        assert inst.boxes[0].is_zero()
        assert inst.boxes[1].atoms == ((0.5, 1.0),)
        assert inst.boxes[2].atoms == ((0.0, 0.99), (100.0, 0.01))
        assert [o.perm for o in orders] == [(1, 2, 3), (3, 2, 1)]

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            three_box_example(0.5, 0.0)
        with pytest.raises(ValueError):
            three_box_example(1.5, 0.01)


class TestBernoulliLadder:
    def test_atoms(self):
        inst = bernoulli_ladder(3, 0.5)
        assert inst.boxes[0].atoms == ((0.0, 0.5), (1.0, 0.5))
        assert inst.boxes[2].atoms == ((0.0, 0.5), (3.0, 0.5))

    def test_max_distribution_corners(self):
        inst = bernoulli_ladder(3, 0.5)
        # top box realizes with probability epsilon
        assert 1.0 - max_cdf(inst, 3.0, strict=True) == pytest.approx(0.5)
        # all boxes silent with probability (1 - eps)^n
        assert max_cdf(inst, 0.0, strict=False) == pytest.approx(0.125)

    def test_silence_matches_solved_level(self):
        lam = solve_lambda_rho_gamma().lambda_star
        n = 100
        eps = 1.0 - lam ** (1.0 / n)
        inst = bernoulli_ladder(n, eps)
        assert max_cdf(inst, 1.0, strict=True) == pytest.approx(lam, abs=1e-9)


class TestLadderOrders:
    def test_descending(self):
        orders = ladder_orders(6, 0.1, 4)
        assert orders.descending.perm == (6, 5, 4, 3, 2, 1)

    def test_up_then_down_layout(self):
        # threshold-and-above blocks arrive first ascending, the skipped
        # prefix afterwards descending
        orders = ladder_orders(6, 0.1, 4)
        assert orders.up_then_down.perm == (4, 5, 6, 3, 2, 1)

    def test_mid_then_down_degenerates_at_pivot(self):
        n, eps = 200, 0.01
        consts = solve_lambda_rho_gamma()
        pivot = ladder_pivot(n, eps, consts.lambda_star / consts.rho_star)
        orders = ladder_orders(n, eps, pivot)
        assert orders.pivot_main == pivot
        if orders.mid_then_down is not None:
            assert orders.mid_then_down.perm == orders.up_then_down.perm

    def test_all_orders_are_permutations(self):
        for t in (1, 3, 5):
            orders = ladder_orders(5, 0.2, t)
            for o in (orders.descending, orders.up_then_down):
                assert sorted(o.perm) == [1, 2, 3, 4, 5]


class TestMaxexpHardness:
    def test_prior_size_and_uniformity(self):
        inst, prior = maxexp_hardness(2, 0.1)
        assert inst.n == 6
        assert len(prior.orders) == 4
        assert all(p == pytest.approx(0.25) for p in prior.probs)

    def test_box_types(self):
        inst, _ = maxexp_hardness(2, 0.1)
        assert inst.boxes[0].is_zero() and inst.boxes[1].is_zero()
        assert inst.boxes[2].atoms == ((0.0, 0.5), (1.0, 0.5))
        assert inst.boxes[3].atoms == ((0.0, 0.5), (1.0, 0.5))
        assert inst.boxes[4].atoms == ((0.0, 0.9), (10.0, pytest.approx(0.1)))
        assert inst.boxes[5].atoms == ((1.0, 1.0),)

    def test_every_order_has_the_same_order_aware_value(self):
        inst, prior = maxexp_hardness(2, 0.1)
        for order in prior.orders:
            _, opt = opt_order_aware_maxexp(inst, order)
            assert opt == pytest.approx(1.9, abs=1e-12)

    def test_size_cap(self):
        with pytest.raises(SizeLimitError):
            maxexp_hardness(13, 0.1)

    def test_subsampling(self):
        inst, prior = maxexp_hardness(4, 0.1, subsample=5, seed=3)
        # duplicate draws collapse, so the support may be smaller
        assert 1 <= len(prior.orders) <= 5
        assert len(set(prior.orders)) == len(prior.orders)
        assert sum(prior.probs) == pytest.approx(1.0)


class AcceptAnyPositive(Policy):
    value_only = True
    rejects_zeros = True

    def accept_prob(self, t, value, trail):
        return 1.0 if value > 0.0 else 0.0


class RejectBelow(Policy):
    value_only = True
    rejects_zeros = True

    def __init__(self, floor):
        self.floor = floor

    def accept_prob(self, t, value, trail):
        return 1.0 if value >= self.floor else 0.0


class TestAdaptiveAdversary:
    def test_transcript_interval_halves(self):
        inst, order, transcript = adaptive_adversary(RejectBelow(9), 12, 0.05)
        lo, hi = 0, 2**12
        for time, _value, _accepted in transcript.queries:
            assert lo < time <= hi
            assert time == (lo + hi) // 2
            # the probe answer steers which half survives
            if _accepted:
                hi = time
            else:
                lo = time

    def test_eager_policy_fills_accept_block(self):
        inst, order, transcript = adaptive_adversary(AcceptAnyPositive(), 12, 0.05)
        assert not transcript.few_accepts_branch or transcript.clamped
        values = list(transcript.accepted_values)
        assert values == sorted(values)

    def test_reluctant_policy_fills_reject_block(self):
        inst, order, transcript = adaptive_adversary(RejectBelow(11), 12, 0.05)
        rejected = list(transcript.rejected_values)
        assert rejected == sorted(rejected, reverse=True)

    def test_probe_determinism_required(self):
        randomized = ThresholdPolicy(tau=1.0, xi=0.5, objective=MAX_PROB)
        with pytest.raises(ValueError):
            adaptive_adversary(randomized, 8, 0.25)

    def test_order_covers_all_positions(self):
        inst, order, _ = adaptive_adversary(GreedyPositivePolicy(), 8, 0.25)
        assert inst.n == 2**8
        assert sorted(order.perm) == list(range(1, 2**8 + 1))

    def test_size_cap(self):
        with pytest.raises(SizeLimitError):
            adaptive_adversary(GreedyPositivePolicy(), 20, 0.05)


class TestPointMassInstances:
    def test_layouts(self):
        table = point_mass_instances(4, 0.2)
        det_inst, det_orders = table["det_claim"]
        thr_inst, thr_orders = table["threshold_claim"]
        assert det_inst.n_explicit == 5 and det_inst.n == 9
        assert det_inst.boxes[4].atoms == ((0.5, 1.0),)
        assert thr_inst.n == 6
        assert thr_inst.boxes[4].atoms == ((0.5, 1.0),)
        assert thr_inst.boxes[5].atoms == ((0.5, 1.0),)
        for _, orders in table.values():
            assert len(orders) == 2

    def test_threshold_claim_orders_sandwich_the_ladder(self):
        _, (ascending, descending) = point_mass_instances(3, 0.2)["threshold_claim"]
        assert ascending.perm[0] == 4 and ascending.perm[-1] == 5
        assert descending.perm[0] == 4 and descending.perm[-1] == 5
        assert list(ascending.perm[1:-1]) == [1, 2, 3]
        assert list(descending.perm[1:-1]) == [3, 2, 1]


class TestRandomInstance:
    def test_reproducible(self):
        a = random_instance(4, seed=9, max_atoms=4)
        b = random_instance(4, seed=9, max_atoms=4)
        assert a == b

    def test_point_mass_cap_respected(self):
        inst = random_instance(8, seed=1, max_atoms=48, max_point_mass=0.05)
        assert max_point_mass(inst) <= 0.05

    def test_values_are_dyadic(self):
        inst = random_instance(5, seed=2, max_atoms=4)
        for box in inst.boxes:
            for v in box.values:
                assert v * 256.0 == int(v * 256.0)
