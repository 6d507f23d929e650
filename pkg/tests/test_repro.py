import math

import pytest

from blindgap import (
    ArrivalOrder,
    MAX_EXP,
    MAX_PROB,
    ThresholdPolicy,
    bernoulli_ladder,
    evaluate_exact,
    ladder_orders,
    maxexp_hardness,
    opt_identity_blind,
)
from blindgap.constants import solve_lambda_rho_gamma
from blindgap.policies import SkipThenGreedyPolicy
from blindgap.repro import (
    REPRO_TARGETS,
    CheckRow,
    ladder_threshold_ratios,
    skip_greedy_ladder_value,
    structured_hardness_oracle,
)


class TestCheckRow:
    def test_line_format(self):
        row = CheckRow(
            name="x", expected="1 ± 0.1", computed=1.05, tol=0.1, passed=True
        )
        assert row.line().startswith("[PASS] x: ")
        row = CheckRow(
            name="x", expected="1 ± 0.1", computed=2.0, tol=0.1, passed=False
        )
        assert row.line().startswith("[FAIL] x: ")


class TestReproTargets:
    def test_registry_complete(self):
        assert set(REPRO_TARGETS) == {
            "constants",
            "three-box",
            "maxexp-hardness",
            "ladder",
            "adaptive",
            "point-mass",
            "threshold-floor",
            "gap-guarantee",
        }
        assert all(callable(fn) for fn in REPRO_TARGETS.values())


class TestStructuredOracle:
    @pytest.mark.parametrize("n", [1, 2])
    def test_matches_history_dp(self, n):
        eps = 0.1
        inst, prior = maxexp_hardness(n, eps)
        _, blind = opt_identity_blind(inst, prior, MAX_EXP)
        oracle = structured_hardness_oracle(n, eps)
        # the exhaustive search over structured policies attains the DP
        # optimum, so neither pruning loses value
        assert oracle == pytest.approx(blind, abs=1e-10)


class TestLadderClosedForms:
    @pytest.mark.parametrize(
        "skip,accept_last", [(0, False), (4, False), (4, True), (9, True)]
    )
    def test_skip_greedy_value_matches_evaluator(self, skip, accept_last):
        n, eps = 14, 0.1
        inst = bernoulli_ladder(n, eps)
        order = ladder_orders(n, eps, 5).up_then_down
        pol = SkipThenGreedyPolicy(skip=skip, horizon=n, accept_last=accept_last)
        exact = evaluate_exact(inst, order, pol, MAX_PROB).value
        position_values = [float(order.perm[i]) for i in range(n)]
        closed = skip_greedy_ladder_value(
            position_values, eps, skip=skip, accept_last=accept_last
        )
        assert closed == pytest.approx(exact, abs=1e-12)

    @pytest.mark.parametrize("T", [6, 20, 45])
    def test_threshold_win_closed_form_matches_evaluator(self, T):
        n = 60
        consts = solve_lambda_rho_gamma()
        eps = -math.log(consts.lambda_star) / n
        inst = bernoulli_ladder(n, eps)
        order = ladder_orders(n, eps, T).up_then_down
        pol = ThresholdPolicy(tau=float(T), xi=1.0, objective=MAX_PROB)
        alg = evaluate_exact(inst, order, pol, MAX_PROB).value
        closed = (n - T + 1) * eps * (1.0 - eps) ** (n - T)
        assert closed == pytest.approx(alg, abs=1e-9)

    def test_ratio_alt_uses_the_closed_forms(self):
        n = 60
        consts = solve_lambda_rho_gamma()
        eps = -math.log(consts.lambda_star) / n
        T = 20
        ratios = ladder_threshold_ratios(n, eps, T)
        assert 0.0 < ratios.min_ratio <= min(
            ratios.ratio_primary, ratios.ratio_alt
        )
        assert ratios.T == T
