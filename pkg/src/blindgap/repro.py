"""Reproduction experiments.

Each function runs one headline experiment and returns check rows (name,
expected, computed, tolerance, pass). The CLI prints them as a table; the
acceptance tests assert them. Published reference values are recomputed
from scratch here, never baked into the checks as magic thresholds beyond
the quoted decimals themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import adversary, constants, optimal
from .core import ArrivalOrder, Instance, Trail, expected_max
from .evaluation import evaluate_exact, evaluate_mc, gap, accept_position_probs
from .policies import (
    MAX_EXP,
    MAX_PROB,
    GreedyPositivePolicy,
    Policy,
    SkipThenGreedyPolicy,
    ThresholdPolicy,
    effective_lambda,
    find_threshold,
    gap_optimal_policy,
    one_over_e_policy,
    prophet_half_policy,
)


@dataclass(frozen=True)
class CheckRow:
    name: str
    expected: str
    computed: float
    tol: float
    passed: bool

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: computed {self.computed:.10g} vs {self.expected} (tol {self.tol:g})"


def _row(name: str, computed: float, target: float, tol: float) -> CheckRow:
    return CheckRow(
        name=name,
        expected=f"{target:g} ± {tol:g}",
        computed=float(computed),
        tol=tol,
        passed=abs(computed - target) <= tol,
    )


def _bound_row(name: str, computed: float, bound: float, upper: bool = True) -> CheckRow:
    ok = computed <= bound if upper else computed >= bound
    sign = "<=" if upper else ">="
    return CheckRow(
        name=name,
        expected=f"{sign} {bound:g}",
        computed=float(computed),
        tol=0.0,
        passed=ok,
    )


# ---------------------------------------------------------------------------
# constants


def constants_checks() -> list[CheckRow]:
    c = constants.solve_lambda_rho_gamma()
    mu_det, bound = constants.solve_mu_deterministic()
    mu_st = constants.solve_mu_single_threshold()
    return [
        _row("lambda_star", c.lambda_star, 0.245, 1e-3),
        _row("rho_star", c.rho_star, 0.513, 1e-3),
        _row("gamma_star", c.gamma_star, 0.562, 1e-3),
        _row("mu_deterministic", mu_det, 0.341, 1e-3),
        _row("mu_deterministic_bound", bound, 0.517, 1e-3),
        _row("mu_single_threshold", mu_st, 0.4464, 1e-3),
        _row("golden_bound", constants.golden_bound(), 0.618034, 1e-6),
    ]


# ---------------------------------------------------------------------------
# three-box example


def three_box_checks(epsilon: float = 0.01) -> list[CheckRow]:
    rows: list[CheckRow] = []
    for mid, bound in ((0.5, 2.0 / 3.0 + 0.02), (constants.golden_bound(), 0.638)):
        inst, orders = adversary.three_box_example(mid, epsilon)
        _, opt_fwd = optimal.opt_order_aware_maxexp(inst, orders[0])
        _, opt_rev = optimal.opt_order_aware_maxexp(inst, orders[1])
        if mid == 0.5:
            rows.append(_row("opt_forward", opt_fwd, 1.0, 1e-12))
            rows.append(_row("opt_reverse", opt_rev, 1.5 - epsilon / 2.0, 1e-12))
        # a blind policy either takes the sure mid after a zero or holds out
        take_mid = ThresholdPolicy(tau=mid, xi=1.0, objective=MAX_EXP)
        hold_out = ThresholdPolicy(tau=1.0, xi=1.0, objective=MAX_EXP)
        best = max(
            gap(inst, orders, take_mid, MAX_EXP).ratio,
            gap(inst, orders, hold_out, MAX_EXP).ratio,
        )
        rows.append(_bound_row(f"best_branch_ratio_mid_{mid:.4g}", best, bound))
    return rows


# ---------------------------------------------------------------------------
# max-expectation hardness family


def _sure_one_position(order: ArrivalOrder, n: int) -> int:
    return order.perm.index(2 * n + 2) + 1


def maxexp_hardness_checks(
    ns: Sequence[int] = (1, 2, 3), epsilon: float = 0.1
) -> list[CheckRow]:
    rows: list[CheckRow] = []
    prev_ratio = math.inf
    for n in ns:
        inst, prior = adversary.maxexp_hardness(n, epsilon)
        worst_opt = math.inf
        for order in prior.orders:
            _, v = optimal.opt_order_aware_maxexp(inst, order)
            worst_opt = min(worst_opt, v)
            if abs(v - (2.0 - epsilon)) > 1e-9:
                rows.append(_row(f"n={n}_per_order_opt", v, 2.0 - epsilon, 1e-9))
        rows.append(_row(f"n={n}_worst_order_opt", worst_opt, 2.0 - epsilon, 1e-9))

        policy, blind = optimal.opt_identity_blind(inst, prior, MAX_EXP)
        # decomposition: value = 1 + Pr[the sure-1 box is accepted]
        p_sure = 0.0
        for order, prob in prior.support:
            profile = accept_position_probs(inst, order, policy)
            p_sure += prob * profile.get(_sure_one_position(order, n), 0.0)
        rows.append(
            _row(f"n={n}_decomposition", blind, 1.0 + p_sure, 1e-10)
        )

        # pinning "always take the jackpot, never take zeros" is lossless
        jackpot = 1.0 / epsilon

        def pins(t: int, v: float) -> Optional[bool]:
            if v == jackpot:
                return True
            if v == 0.0:
                return False
            return None

        _, pinned = optimal.opt_identity_blind(inst, prior, MAX_EXP, forced=pins)
        rows.append(_row(f"n={n}_pinned_value", pinned, blind, 1e-10))

        ratio = blind / worst_opt
        rows.append(
            _bound_row(f"n={n}_ratio_nonincreasing", ratio, prev_ratio + 1e-12)
        )
        prev_ratio = ratio
    return rows


def structured_hardness_oracle(n: int, epsilon: float) -> float:
    """Independent oracle for the hardness family at small n.

    Enumerates the structured policies: always take the jackpot, never take
    zeros or any 1 up to time n+1 or a 1 right after another 1; otherwise
    accept a 1 at time t > n+1 with silent predecessor iff t >= cut(d),
    where d is the number of 1s among the first n values. Each map
    cut: {0..n} -> {n+2..2n+2, never} is tried exhaustively.
    """
    inst, prior = adversary.maxexp_hardness(n, epsilon)
    jackpot = 1.0 / epsilon
    cut_choices = list(range(n + 2, 2 * n + 3)) + [None]

    class _Structured(Policy):
        value_only = False
        rejects_zeros = True
        objective = MAX_EXP

        def __init__(self, cuts: tuple[Optional[int], ...]):
            self.cuts = cuts

        def accept_prob(self, t: int, value: float, trail: Trail) -> float:
            if value == jackpot:
                return 1.0
            if value != 1.0:
                return 0.0
            if t <= n + 1 or trail.last() == 1.0:
                return 0.0
            d = trail.count_nonzero_upto(n)
            cut = self.cuts[d]
            return 1.0 if cut is not None and t >= cut else 0.0

    best = 0.0
    n_cuts = n + 1
    total = len(cut_choices) ** n_cuts
    for code in range(total):
        c = code
        cuts = []
        for _ in range(n_cuts):
            cuts.append(cut_choices[c % len(cut_choices)])
            c //= len(cut_choices)
        pol = _Structured(tuple(cuts))
        val = 0.0
        for order, prob in prior.support:
            val += prob * evaluate_exact(inst, order, pol, MAX_EXP).value
        best = max(best, val)
    return best


# ---------------------------------------------------------------------------
# ladder closed forms


@dataclass(frozen=True)
class LadderRatios:
    T: int
    ratio_primary: float  # mid-then-down order if applicable, else descending
    ratio_alt: float  # up-then-down order
    used_descending: bool

    @property
    def min_ratio(self) -> float:
        return min(self.ratio_primary, self.ratio_alt)


def ladder_threshold_ratios(n: int, epsilon: float, T: int) -> LadderRatios:
    """Closed-form win ratios of the threshold-at-T rule on the two
    adversarial ladder orders, against the skip-policy benchmark."""
    consts = constants.solve_lambda_rho_gamma()
    q = 1.0 - epsilon
    pivot = adversary.ladder_pivot(n, epsilon, consts.lambda_star / consts.rho_star)
    pivot_alt = adversary.ladder_pivot(n, epsilon, math.exp(-1.0))

    if T < pivot <= n:
        alg = (pivot - T) * epsilon * q ** (n - T) + q ** (pivot - T) * (
            1.0 - q ** (n - pivot + 1)
        )
        opt = (1.0 - q ** (n - pivot + 1)) + (1.0 - q ** (T - 1)) * q ** (n - T + 1)
        ratio_primary = alg / opt
        used_descending = False
    else:
        # descending order: the benchmark always wins, the rule wins iff the
        # maximum clears T
        ratio_primary = 1.0 - q ** (n - T + 1)
        used_descending = True

    T2 = max(T, min(pivot_alt, n))
    alg2 = (n - T + 1) * epsilon * q ** (n - T)
    opt2 = (n - T2 + 1) * epsilon * q ** (n - T2) + q ** (n - T + 1)
    ratio_alt = alg2 / opt2
    return LadderRatios(
        T=T,
        ratio_primary=ratio_primary,
        ratio_alt=ratio_alt,
        used_descending=used_descending,
    )


def skip_greedy_ladder_value(
    position_values: Sequence[float],
    epsilon: float,
    skip: int,
    accept_last: bool,
) -> float:
    """Exact win probability of skip-then-greedy on a permuted ladder.

    `position_values[j-1]` is the value of the j-th arrival (0 for a sure
    zero). Requires distinct positive values with probability epsilon each.
    """
    pv = np.asarray(position_values, dtype=float)
    positions = np.nonzero(pv)[0] + 1  # 1-based arrival times of real boxes
    values = pv[positions - 1]
    n_real = len(positions)
    q = 1.0 - epsilon
    win = 0.0
    for pos, v in zip(positions, values):
        if pos <= skip:
            continue
        in_window = (positions > skip) & (positions < pos)
        blockers = int(np.count_nonzero(in_window))
        higher = (values > v) & ~in_window
        higher_outside = int(np.count_nonzero(higher))
        win += epsilon * q ** (blockers + higher_outside)
    if accept_last:
        win += q**n_real
    return win


def ladder_checks(
    n: int = 2000, thresholds: int = 40, cross_checks: int = 3
) -> list[CheckRow]:
    consts = constants.solve_lambda_rho_gamma()
    epsilon = -math.log(consts.lambda_star) / n
    rows: list[CheckRow] = []
    bound = consts.gamma_star + 0.02
    grid = np.unique(np.linspace(1, n, thresholds).round().astype(int))
    worst = 0.0
    for T in grid:
        r = ladder_threshold_ratios(n, epsilon, int(T))
        worst = max(worst, r.min_ratio)
    rows.append(_bound_row("max_over_T_of_min_order_ratio", worst, bound))

    pivot = adversary.ladder_pivot(n, epsilon, consts.lambda_star / consts.rho_star)
    at_pivot = ladder_threshold_ratios(n, epsilon, pivot)
    rows.append(
        _row(
            "descending_ratio_at_pivot",
            at_pivot.ratio_primary,
            1.0 - consts.lambda_star / consts.rho_star,
            0.01,
        )
    )

    # cross-check the closed forms against the generic evaluators at a few T
    inst = adversary.bernoulli_ladder(n, epsilon)
    for T in np.linspace(2, min(pivot - 1, n), cross_checks).round().astype(int):
        T = int(T)
        orders = adversary.ladder_orders(n, epsilon, T)
        pol = ThresholdPolicy(tau=float(T), xi=1.0, objective=MAX_PROB)
        r = ladder_threshold_ratios(n, epsilon, T)
        order = orders.mid_then_down
        assert order is not None
        alg_eval = evaluate_exact(inst, order, pol, MAX_PROB).value
        alg_formula = r.ratio_primary * (
            (1.0 - (1 - epsilon) ** (n - pivot + 1))
            + (1.0 - (1 - epsilon) ** (T - 1)) * (1 - epsilon) ** (n - T + 1)
        )
        rows.append(_row(f"T={T}_alg_closed_form", alg_eval, alg_formula, 1e-9))
        pos_vals = [float(order.perm[i]) for i in range(n)]
        skip_val = skip_greedy_ladder_value(pos_vals, epsilon, pivot - T, False)
        opt_formula = alg_formula / r.ratio_primary
        rows.append(_row(f"T={T}_opt_skip_closed_form", skip_val, opt_formula, 1e-9))
    return rows


# ---------------------------------------------------------------------------
# adaptive interrogation


class AcceptSecondPositivePolicy(Policy):
    """Hand-written history rule: skip the first positive value, take the
    next one."""

    value_only = False
    rejects_zeros = True
    objective = MAX_PROB

    def accept_prob(self, t: int, value: float, trail: Trail) -> float:
        if value <= 0.0:
            return 0.0
        return 1.0 if trail.count_nonzero_upto(t) >= 1 else 0.0

    def describe(self) -> dict:
        return {"kind": "accept_second_positive"}


def adaptive_checks(n: int = 12, epsilon: float = 0.05, seed: int = 0) -> list[CheckRow]:
    consts = constants.solve_lambda_rho_gamma()
    bound = consts.gamma_star + 0.03
    reference = Instance(
        adversary.bernoulli_ladder(n, epsilon).boxes,
        name="adaptive_reference",
        zero_runs=(adversary.ZeroRun(after_box=n, count=2**n - n),),
    )
    # the interrogation covers deterministic rules only; take the
    # deterministic (tie-accepting) variant of each solved threshold
    gap_tau = gap_optimal_policy(reference).tau
    e_tau = one_over_e_policy(reference).tau
    named: list[tuple[str, Policy]] = [
        ("gap_optimal", ThresholdPolicy(tau=gap_tau, xi=1.0, objective=MAX_PROB)),
        ("one_over_e", ThresholdPolicy(tau=e_tau, xi=1.0, objective=MAX_PROB)),
        ("greedy_positive", GreedyPositivePolicy()),
        (
            "skip_half_then_greedy",
            SkipThenGreedyPolicy(skip=2 ** (n - 1), horizon=2**n),
        ),
        ("accept_second_positive", AcceptSecondPositivePolicy()),
    ]
    rows: list[CheckRow] = []
    for label, pol in named:
        inst, order, transcript = adversary.adaptive_adversary(pol, n, epsilon)
        alg = evaluate_exact(inst, order, pol, MAX_PROB).value
        _, opt = optimal.opt_order_aware_maxprob(inst, order)
        ratio = alg / opt
        rows.append(_bound_row(f"adaptive_ratio_{label}", ratio, bound))
    return rows


# ---------------------------------------------------------------------------
# point-mass counterexamples


def point_mass_checks(n: int = 400) -> list[CheckRow]:
    rows: list[CheckRow] = []
    mu_det, det_bound = constants.solve_mu_deterministic()
    mu_st = constants.solve_mu_single_threshold()

    eps_det = 1.0 - mu_det ** (1.0 / n)
    bundle = adversary.point_mass_instances(n, eps_det)
    inst, (accept_punisher, reject_punisher) = bundle["det_claim"]
    take_half = ThresholdPolicy(tau=0.5, xi=1.0, objective=MAX_PROB)
    hold_out = ThresholdPolicy(tau=1.0, xi=1.0, objective=MAX_PROB)
    alg1 = evaluate_exact(inst, accept_punisher, take_half, MAX_PROB).value
    _, opt1 = optimal.opt_order_aware_maxprob(inst, accept_punisher)
    alg2 = evaluate_exact(inst, reject_punisher, hold_out, MAX_PROB).value
    _, opt2 = optimal.opt_order_aware_maxprob(inst, reject_punisher)
    rows.append(_row("det_accept_branch_ratio", alg1 / opt1, det_bound, 0.02))
    rows.append(_row("det_reject_branch_ratio", alg2 / opt2, det_bound, 0.02))

    eps_st = 1.0 - mu_st ** (1.0 / n)
    bundle = adversary.point_mass_instances(n, eps_st)
    inst, (ascending, descending) = bundle["threshold_claim"]
    alg_take = evaluate_exact(inst, descending, take_half, MAX_PROB).value
    _, opt_desc = optimal.opt_order_aware_maxprob(inst, descending)
    alg_hold = evaluate_exact(inst, ascending, hold_out, MAX_PROB).value
    _, opt_asc = optimal.opt_order_aware_maxprob(inst, ascending)
    rows.append(_row("threshold_accept_branch_ratio", alg_take / opt_desc, mu_st, 0.02))
    rows.append(_row("threshold_reject_branch_ratio", alg_hold / opt_asc, mu_st, 0.02))
    return rows


# ---------------------------------------------------------------------------
# threshold floor (win-probability guarantee) and prophet half


def random_suite(
    count: int = 200, seed: int = 1234, max_n: int = 8, max_atoms: int = 4
) -> list[Instance]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(2, max_n + 1))
        out.append(adversary.random_instance(n, seed=seed + 7 * i + 1, max_atoms=max_atoms))
    return out


def random_orders(n: int, count: int, seed: int) -> list[ArrivalOrder]:
    rng = np.random.default_rng(seed)
    return [
        ArrivalOrder(tuple(int(x) for x in rng.permutation(n) + 1))
        for _ in range(count)
    ]


def threshold_floor_checks(
    count: int = 200,
    seed: int = 1234,
    lambdas: Sequence[float] = (0.1, math.exp(-1.0), None, 0.5),
    orders_per_instance: int = 5,
) -> list[CheckRow]:
    consts = constants.solve_lambda_rho_gamma()
    lam_list = [consts.lambda_star if l is None else l for l in lambdas]
    worst_slack = math.inf
    worst_half_slack = math.inf
    suite = random_suite(count=count, seed=seed)
    for idx, inst in enumerate(suite):
        orders = random_orders(inst.n, orders_per_instance, seed + 1000 + idx)
        half = prophet_half_policy(inst)
        target_half = expected_max(inst) / 2.0
        for order in orders:
            v = evaluate_exact(inst, order, half, MAX_EXP).value
            worst_half_slack = min(worst_half_slack, v - target_half)
            for lam in lam_list:
                pol = find_threshold(inst, lam, MAX_PROB)
                eff = effective_lambda(inst, pol)
                floor = eff * math.log(1.0 / eff)
                win = evaluate_exact(inst, order, pol, MAX_PROB).value
                worst_slack = min(worst_slack, win - floor)
    return [
        _bound_row("min_win_minus_floor", worst_slack, -1e-9, upper=False),
        _bound_row("min_half_slack", worst_half_slack, -1e-9, upper=False),
    ]


def gap_guarantee_checks(
    count: int = 100,
    seed: int = 77,
    orders_per_instance: int = 5,
    point_mass_cap: float = 0.05,
    exact_cap: int = 200_000,
    mc_samples: int = 200_000,
) -> list[CheckRow]:
    """Worst observed ratio of the solved threshold rule to the order-aware
    optimum on instances whose maximum has only small atoms; Monte Carlo
    results are penalized by three confidence radii."""
    consts = constants.solve_lambda_rho_gamma()
    rng = np.random.default_rng(seed)
    worst = math.inf
    n_mc = 0
    for i in range(count):
        n = int(rng.integers(6, 11))
        inst = adversary.random_instance(
            n,
            seed=seed + 31 * i + 5,
            max_atoms=48,
            max_point_mass=point_mass_cap,
        )
        pol = gap_optimal_policy(inst)
        for j, order in enumerate(random_orders(n, orders_per_instance, seed + i)):
            if inst.product_support_size() <= exact_cap:
                res = evaluate_exact(inst, order, pol, MAX_PROB, cap=exact_cap)
                penalized = res.value
            else:
                res = evaluate_mc(
                    inst, order, pol, MAX_PROB, mc_samples, seed + 997 * i + j
                )
                penalized = res.value - 3.0 * res.ci_radius
                n_mc += 1
            _, opt = optimal.opt_order_aware_maxprob(inst, order)
            worst = min(worst, penalized / opt)
    return [
        _bound_row(
            "min_threshold_ratio_small_atoms",
            worst,
            consts.gamma_star - 0.05,
            upper=False,
        )
    ]


REPRO_TARGETS = {
    "constants": constants_checks,
    "three-box": three_box_checks,
    "maxexp-hardness": maxexp_hardness_checks,
    "ladder": ladder_checks,
    "adaptive": adaptive_checks,
    "point-mass": point_mass_checks,
    "threshold-floor": threshold_floor_checks,
    "gap-guarantee": gap_guarantee_checks,
}
