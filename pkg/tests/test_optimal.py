import itertools
import math

import pytest

from blindgap import (
    ThresholdPolicy,
    ArrivalOrder,
    DiscreteDistribution,
    Instance,
    MAX_EXP,
    MAX_PROB,
    OrderPrior,
    SizeLimitError,
    bernoulli_ladder,
    evaluate_exact,
    opt_identity_blind,
    opt_order_aware_maxexp,
    opt_order_aware_maxprob,
)
from blindgap.repro import random_orders, random_suite

COIN = DiscreteDistribution.bernoulli(1.0, 0.5)
TWO_COINS = Instance((COIN, COIN))

THREE_BOX = Instance(
    (
        DiscreteDistribution.point(0.0),
        DiscreteDistribution.point(0.5),
        DiscreteDistribution.bernoulli(100.0, 0.01),
    )
)


class TestOrderAwareMaxExp:
    def test_three_box_forward(self):
        _, value = opt_order_aware_maxexp(THREE_BOX, ArrivalOrder.identity(3))
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_three_box_reverse(self):
        _, value = opt_order_aware_maxexp(THREE_BOX, ArrivalOrder.descending(3))
        assert value == pytest.approx(1.495, abs=1e-12)

    def test_single_box_gives_mean(self):
        inst = Instance((DiscreteDistribution.of([(1.0, 0.5), (3.0, 0.5)]),))
        _, value = opt_order_aware_maxexp(inst, Arrival := ArrivalOrder.identity(1))
        assert value == pytest.approx(2.0, abs=1e-14)

    def test_two_box_hand_computed_thresholds(self):
        # box 1 then a coin paying 2 w.p. 1/2: continuation after box 1 is 1,
        # so accept the first box iff its value is at least 1
        inst = Instance(
            (
                DiscreteDistribution.of([(0.5, 0.5), (1.5, 0.5)]),
                DiscreteDistribution.bernoulli(2.0, 0.5),
            )
        )
        pol, value = opt_order_aware_maxexp(inst, ArrivalOrder.identity(2))
        assert pol.continuations[0] == pytest.approx(1.0)
        assert pol.continuations[1] == 0.0
        # value = 1/2 * 1.5 + 1/2 * 1.0
        assert value == pytest.approx(1.25, abs=1e-12)

    def test_replay_matches_reported_value(self):
        for idx, inst in enumerate(random_suite(count=15, seed=21)):
            order = random_orders(inst.n, 1, idx)[0]
            pol, value = opt_order_aware_maxexp(inst, order)
            replay = evaluate_exact(inst, order, pol, MAX_EXP).value
            assert replay == pytest.approx(value, abs=1e-10)

    def test_dominates_every_policy(self):
        from blindgap.policies import GreedyPositivePolicy, ThresholdPolicy

        for idx, inst in enumerate(random_suite(count=10, seed=33)):
            order = random_orders(inst.n, 1, 50 + idx)[0]
            _, opt = opt_order_aware_maxexp(inst, order)
            for pol in (
                GreedyPositivePolicy(),
                ThresholdPolicy(tau=0.5, xi=1.0, objective=MAX_EXP),
                ThresholdPolicy(tau=2.0, xi=0.25, objective=MAX_EXP),
            ):
                alg = evaluate_exact(inst, order, pol, MAX_EXP).value
                assert alg <= opt + 1e-10


class TestOrderAwareMaxProb:
    def test_single_box_always_wins(self):
        inst = Instance((DiscreteDistribution.of([(1.0, 0.5), (3.0, 0.5)]),))
        _, value = opt_order_aware_maxprob(inst, ArrivalOrder.identity(1))
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_two_coins(self):
        # reject a first-box zero, accept whatever arrives second: wins the
        # (1, .) and (0, 1) worlds outright and ties the all-zero world,
        # where accepting the final 0 equals the maximum of 0
        _, value = opt_order_aware_maxprob(TWO_COINS, ArrivalOrder.identity(2))
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_two_coins_zero_rejecting_benchmark(self):
        # a policy that never accepts zeros caps out at 3/4
        pol = ThresholdPolicy(tau=1.0, xi=1.0, objective=MAX_PROB)
        value = evaluate_exact(TWO_COINS, ArrivalOrder.identity(2), pol, MAX_PROB)
        assert value.value == pytest.approx(0.75, abs=1e-12)

    def test_descending_ladder_is_a_sure_win(self):
        # highest value arrives first: accept the first realized value; if
        # nothing realizes, the final zero ties the maximum of zero
        inst = bernoulli_ladder(20, 0.1)
        _, value = opt_order_aware_maxprob(inst, ArrivalOrder.descending(20))
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_replay_matches_reported_value(self):
        for idx, inst in enumerate(random_suite(count=15, seed=22)):
            order = random_orders(inst.n, 1, idx)[0]
            pol, value = opt_order_aware_maxprob(inst, order)
            replay = evaluate_exact(inst, order, pol, MAX_PROB).value
            assert replay == pytest.approx(value, abs=1e-10)

    def test_dominates_every_policy(self):
        from blindgap.policies import GreedyPositivePolicy, ThresholdPolicy

        for idx, inst in enumerate(random_suite(count=10, seed=34)):
            order = random_orders(inst.n, 1, 70 + idx)[0]
            _, opt = opt_order_aware_maxprob(inst, order)
            for pol in (
                GreedyPositivePolicy(),
                ThresholdPolicy(tau=0.5, xi=1.0, objective=MAX_PROB),
                ThresholdPolicy(tau=1.0, xi=0.5, objective=MAX_PROB),
            ):
                alg = evaluate_exact(inst, order, pol, MAX_PROB).value
                assert alg <= opt + 1e-10


class TestIdentityBlind:
    def test_singleton_prior_matches_order_aware(self):
        for idx, inst in enumerate(random_suite(count=8, seed=55, max_n=4)):
            order = random_orders(inst.n, 1, idx)[0]
            prior = OrderPrior.singleton(order)
            for objective, solver in (
                (MAX_EXP, opt_order_aware_maxexp),
                (MAX_PROB, opt_order_aware_maxprob),
            ):
                _, blind = opt_identity_blind(inst, prior, objective)
                _, aware = solver(inst, order)
                assert blind == pytest.approx(aware, abs=1e-12)

    def test_blind_value_is_prior_average_of_replays(self):
        inst = THREE_BOX
        orders = [ArrivalOrder.identity(3), ArrivalOrder.descending(3)]
        prior = OrderPrior.uniform(orders)
        pol, value = opt_identity_blind(inst, prior, MAX_EXP)
        avg = sum(
            0.5 * evaluate_exact(inst, o, pol, MAX_EXP).value for o in orders
        )
        assert avg == pytest.approx(value, abs=1e-12)

    def test_blind_at_most_min_order_aware(self):
        inst = THREE_BOX
        orders = [ArrivalOrder.identity(3), ArrivalOrder.descending(3)]
        prior = OrderPrior.uniform(orders)
        _, value = opt_identity_blind(inst, prior, MAX_EXP)
        opts = [opt_order_aware_maxexp(inst, o)[1] for o in orders]
        assert value <= sum(opts) / 2.0 + 1e-12

    def test_size_limit(self):
        inst = Instance(tuple(COIN for _ in range(12)))
        prior = OrderPrior.singleton(ArrivalOrder.identity(12))
        with pytest.raises(SizeLimitError):
            opt_identity_blind(inst, prior, MAX_EXP, limit=10)

    def test_forced_decisions_pin_the_policy(self):
        inst = TWO_COINS
        prior = OrderPrior.singleton(ArrivalOrder.identity(2))
        # forcing rejection everywhere yields value 0
        _, value = opt_identity_blind(
            inst, prior, MAX_EXP, forced=lambda t, v: False
        )
        assert value == 0.0

    def test_history_policy_is_identity_blind(self):
        # the dumped decision map keys only on observed value prefixes
        inst = TWO_COINS
        prior = OrderPrior.singleton(ArrivalOrder.identity(2))
        pol, _ = opt_identity_blind(inst, prior, MAX_PROB)
        assert all(isinstance(k, tuple) for k in pol.decisions)
