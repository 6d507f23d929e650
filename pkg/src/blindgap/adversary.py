"""Hard-instance generators.

Every construction that separates identity-blind policies from the
order-aware optimum lives here: the three-box warm-up, the paired-order
prior that pins max-expectation at one half, the value ladder with its
threshold-breaking orders, the adaptive interrogator that tailors an order
to a deterministic policy, and the point-mass counterexamples for
deterministic rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    ArrivalOrder,
    DiscreteDistribution,
    Instance,
    OrderPrior,
    SizeLimitError,
    Trail,
    ZeroRun,
    EMPTY_TRAIL,
)
from .policies import Policy
from .constants import solve_lambda_rho_gamma

MAX_HARDNESS_N = 12
MAX_ADAPTIVE_N = 16


def three_box_example(mid: float = 0.5, epsilon: float = 0.01):
    """A zero box, a sure `mid`, and a long-shot worth 1/epsilon.

    Returns the instance and the two orders (long-shot last / long-shot
    first) whose order-aware optima pull a blind policy in opposite
    directions.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if not (0.0 < mid < 1.0):
        raise ValueError("mid must lie in (0, 1)")
    inst = Instance(
        (
            DiscreteDistribution.point(0.0),
            DiscreteDistribution.point(mid),
            DiscreteDistribution.bernoulli(1.0 / epsilon, epsilon),
        ),
        name=f"three_box_mid{mid}_eps{epsilon}",
    )
    orders = (ArrivalOrder((1, 2, 3)), ArrivalOrder((3, 2, 1)))
    return inst, orders


def maxexp_hardness(
    n: int,
    epsilon: float,
    subsample: Optional[int] = None,
    seed: int = 0,
) -> tuple[Instance, OrderPrior]:
    """2n+2 boxes and a uniform prior over 2^n orders under which no blind
    policy beats half of the order-aware optimum (as n grows).

    Boxes: n sure zeros, n fair coins worth 1, one long-shot worth
    1/epsilon, one sure 1. Order pi_x interleaves coins and zeros in the
    first n slots per the bits of x, then spends the remaining coins, the
    long-shot, the sure 1, and finally the leftover zeros. Boxes of equal
    type are matched to slots in index order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if subsample is None and n > MAX_HARDNESS_N:
        raise SizeLimitError(
            f"full prior has 2^{n} orders; pass subsample= to go above n={MAX_HARDNESS_N}"
        )
    zeros = tuple(DiscreteDistribution.point(0.0) for _ in range(n))
    coins = tuple(DiscreteDistribution.bernoulli(1.0, 0.5) for _ in range(n))
    long_shot = DiscreteDistribution.bernoulli(1.0 / epsilon, epsilon)
    sure_one = DiscreteDistribution.point(1.0)
    inst = Instance(
        zeros + coins + (long_shot, sure_one),
        name=f"maxexp_hardness_n{n}_eps{epsilon}",
    )

    def order_for(bits: tuple[int, ...]) -> ArrivalOrder:
        k = sum(bits)
        next_zero = 1  # zero boxes are 1..n
        next_coin = n + 1  # coin boxes are n+1..2n
        perm = []
        for b in bits:
            if b:
                perm.append(next_coin)
                next_coin += 1
            else:
                perm.append(next_zero)
                next_zero += 1
        while next_coin <= 2 * n:  # slots n+1 .. 2n-k
            perm.append(next_coin)
            next_coin += 1
        perm.append(2 * n + 1)  # slot 2n+1-k: the long-shot
        perm.append(2 * n + 2)  # slot 2n+2-k: the sure 1
        while next_zero <= n:  # trailing zeros
            perm.append(next_zero)
            next_zero += 1
        return ArrivalOrder(tuple(perm))

    if subsample is not None and 2**n > subsample:
        rng = np.random.default_rng(seed)
        picks = {
            tuple(int(b) for b in rng.integers(0, 2, size=n))
            for _ in range(subsample)
        }
        all_bits = sorted(picks)
    else:
        all_bits = [
            tuple((i >> j) & 1 for j in range(n)) for i in range(2**n)
        ]
    prior = OrderPrior.uniform([order_for(bits) for bits in all_bits])
    return inst, prior


def bernoulli_ladder(n: int, epsilon: float) -> Instance:
    """Box i is worth i with probability epsilon, else 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    return Instance(
        tuple(DiscreteDistribution.bernoulli(float(i), epsilon) for i in range(1, n + 1)),
        name=f"ladder_n{n}_eps{epsilon}",
    )


@dataclass(frozen=True)
class LadderOrders:
    """The three orders that break a value-threshold rule on the ladder.

    `mid_then_down` (needs T < pivot): values T..pivot-1 ascending, then
    n..pivot descending, then T-1..1 descending. `descending` is the plain
    reverse order. `up_then_down`: values T..n ascending then T-1..1
    descending, with its own pivot at survival mass 1/e.
    """

    mid_then_down: Optional[ArrivalOrder]
    descending: ArrivalOrder
    up_then_down: ArrivalOrder
    pivot_main: int
    pivot_alt: int


def ladder_pivot(n: int, epsilon: float, target_ratio: float) -> int:
    """Nearest integer to n + 1 - log_{1-eps}(target_ratio)."""
    return round(n + 1 - math.log(target_ratio) / math.log(1.0 - epsilon))


def ladder_orders(n: int, epsilon: float, T: int) -> LadderOrders:
    """Adversarial orders against the threshold-at-T rule on the ladder."""
    if not (1 <= T <= n):
        raise ValueError("T must lie in [1, n]")
    consts = solve_lambda_rho_gamma()
    pivot_main = ladder_pivot(n, epsilon, consts.lambda_star / consts.rho_star)
    pivot_alt = ladder_pivot(n, epsilon, math.exp(-1.0))

    mid_then_down = None
    if T < pivot_main <= n:
        perm = []
        for i in range(1, pivot_main - T + 1):
            perm.append(T + i - 1)
        for i in range(pivot_main - T + 1, n - T + 2):
            perm.append(n + pivot_main - T + 1 - i)
        for i in range(n - T + 2, n + 1):
            perm.append(n + 1 - i)
        mid_then_down = ArrivalOrder(tuple(perm))

    descending = ArrivalOrder.descending(n)

    perm2 = []
    for i in range(1, n - T + 2):
        perm2.append(T + i - 1)
    for i in range(n - T + 2, n + 1):
        perm2.append(n + 1 - i)
    up_then_down = ArrivalOrder(tuple(perm2))

    return LadderOrders(
        mid_then_down=mid_then_down,
        descending=descending,
        up_then_down=up_then_down,
        pivot_main=pivot_main,
        pivot_alt=pivot_alt,
    )


@dataclass(frozen=True)
class AdversaryTranscript:
    """Record of the black-box interrogation that built an order."""

    queries: tuple[tuple[int, int, bool], ...]  # (arrival time, value, accepted)
    accepted_values: tuple[int, ...]  # A: placed early, ascending
    rejected_values: tuple[int, ...]  # R: placed late, descending
    bulk_values: tuple[int, ...]  # B: the unprobed block in between
    few_accepts_branch: bool
    a: int
    t1: int
    t2: int
    clamped: bool


def _probe(policy: Policy, time: int, value: float) -> bool:
    trail = EMPTY_TRAIL.extend_zeros(time - 1)
    first = policy.accept_prob(time, value, trail)
    second = policy.accept_prob(time, value, trail)
    for p in (first, second):
        if p not in (0.0, 1.0):
            raise ValueError(
                "adaptive construction needs a deterministic policy; "
                f"got acceptance probability {p} at time {time}"
            )
    if first != second:
        raise ValueError("policy answered the same probe inconsistently")
    return first == 1.0


def adaptive_adversary(
    policy: Policy, n: int, epsilon: float
) -> tuple[Instance, ArrivalOrder, AdversaryTranscript]:
    """Tailor a ladder-plus-dummies order to a deterministic policy.

    Real box k sits among 2^n - n sure zeros; a bisection on the arrival
    position probes whether the policy accepts value k after a silent
    prefix. Accepted values are pushed early (ascending), rejected values
    late (descending), and an unprobed block fills the middle, so a policy
    that accepts eagerly wastes its pick on a low value and one that waits
    lets the maximum slip by.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > MAX_ADAPTIVE_N:
        raise SizeLimitError(f"2^{n} positions; capped at n={MAX_ADAPTIVE_N}")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    consts = solve_lambda_rho_gamma()
    lam, rho = consts.lambda_star, consts.rho_star
    a = math.floor((1.0 / epsilon) * (math.log(1.0 / lam) - 1.0))
    t1 = math.floor(1.0 / epsilon)
    t2 = math.floor((1.0 / epsilon) * math.log(rho / lam))
    clamped = (n - t1 < 1) or (n - t2 < 1)

    total = 2**n
    lo_pos, hi_pos = 0, total
    queries: list[tuple[int, int, bool]] = []
    accepted: list[int] = []
    rejected: list[int] = []
    placed: dict[int, int] = {}  # value -> arrival time

    def probe_round(k: int) -> None:
        nonlocal lo_pos, hi_pos
        i_k = (lo_pos + hi_pos) // 2
        take = _probe(policy, i_k, float(k))
        queries.append((i_k, k, take))
        placed[k] = i_k
        if take:
            lo_pos = i_k
            accepted.append(k)
        else:
            hi_pos = i_k
            rejected.append(k)

    stage1_end = max(0, n - t1)
    for k in range(1, stage1_end + 1):
        probe_round(k)

    few_accepts = len(accepted) < a
    if few_accepts:
        stage2_end = max(stage1_end, n - t2)
        for k in range(stage1_end + 1, stage2_end + 1):
            probe_round(k)
        bulk = list(range(n, stage2_end, -1))  # descending n .. stage2_end+1
    else:
        bulk = list(range(stage1_end + 1, n + 1))  # ascending

    if queries:
        bulk_start = queries[-1][0] + 1
    else:
        bulk_start = (lo_pos + hi_pos) // 2
    for j, k in enumerate(bulk):
        placed[k] = bulk_start + j

    times = sorted(placed.values())
    if len(set(times)) != n or (times and times[-1] > total):
        raise ValueError("internal error: probe positions collide")

    # assemble the full order: real box k (expanded index k) at placed[k],
    # dummies (expanded indices n+1 .. 2^n) fill the rest in index order
    perm = [0] * total
    for k, pos in placed.items():
        perm[pos - 1] = k
    next_dummy = n + 1
    for i in range(total):
        if perm[i] == 0:
            perm[i] = next_dummy
            next_dummy += 1
    instance = Instance(
        tuple(DiscreteDistribution.bernoulli(float(i), epsilon) for i in range(1, n + 1)),
        name=f"adaptive_n{n}_eps{epsilon}",
        zero_runs=(ZeroRun(after_box=n, count=total - n),),
    )
    order = ArrivalOrder(tuple(perm))
    transcript = AdversaryTranscript(
        queries=tuple(queries),
        accepted_values=tuple(accepted),
        rejected_values=tuple(sorted(rejected, reverse=True)),
        bulk_values=tuple(bulk),
        few_accepts_branch=few_accepts,
        a=a,
        t1=t1,
        t2=t2,
        clamped=clamped,
    )
    return instance, order, transcript


def point_mass_instances(n: int, epsilon: float) -> dict:
    """Counterexamples for deterministic rules when the maximum carries a
    point mass.

    `det_claim`: ladder + one sure 0.5 + n zero dummies, with the order
    that punishes accepting 0.5 after a silent prefix and the order that
    punishes rejecting it. `threshold_claim`: ladder flanked by two sure
    0.5 boxes, in ascending and descending ladder order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    ladder = tuple(
        DiscreteDistribution.bernoulli(float(i), epsilon) for i in range(1, n + 1)
    )
    half = DiscreteDistribution.point(0.5)

    det_inst = Instance(
        ladder + (half,),
        name=f"det_claim_n{n}_eps{epsilon}",
        zero_runs=(ZeroRun(after_box=n + 1, count=n),),
    )
    # expanded indices: 1..n ladder, n+1 the 0.5 box, n+2..2n+1 dummies
    dummies = tuple(range(n + 2, 2 * n + 2))
    accept_punisher = ArrivalOrder(
        dummies + (n + 1,) + tuple(range(n, 0, -1))
    )
    reject_punisher = ArrivalOrder(
        tuple(range(1, n + 1)) + (n + 1,) + dummies
    )

    thr_inst = Instance(
        ladder + (half, half), name=f"threshold_claim_n{n}_eps{epsilon}"
    )
    ascending = ArrivalOrder((n + 1,) + tuple(range(1, n + 1)) + (n + 2,))
    descending = ArrivalOrder((n + 1,) + tuple(range(n, 0, -1)) + (n + 2,))

    return {
        "det_claim": (det_inst, (accept_punisher, reject_punisher)),
        "threshold_claim": (thr_inst, (ascending, descending)),
    }


def random_instance(
    n: int,
    seed: int,
    max_atoms: int = 3,
    max_point_mass: Optional[float] = None,
    max_tries: int = 1000,
) -> Instance:
    """Random small instance on dyadic values; optionally resamples until
    the largest atom of the maximum's distribution is below a cap."""
    rng = np.random.default_rng(seed)
    from .core import max_point_mass as mpm

    if max_point_mass is not None:
        # an atom of prob p held by a single box contributes a jump of at
        # most p to the max-CDF; two boxes sharing a near-top value add
        # their atoms, so keep every atom under half the cap
        atom_cap = 0.45 * max_point_mass
        k_floor = int(math.ceil(1.0 / atom_cap)) + 2
        pool, denom = 1024, 256.0
    else:
        atom_cap = None
        k_floor = 1
        pool, denom = 64, 16.0

    for _ in range(max_tries):
        boxes = []
        for _ in range(n):
            k = int(rng.integers(k_floor, max(k_floor, max_atoms) + 1))
            values = sorted(
                float(v) / denom for v in rng.choice(pool, size=k, replace=False)
            )
            raw = rng.random(k) + 0.1
            probs = raw / raw.sum()
            if atom_cap is not None:
                for _clip in range(50):
                    over = probs > atom_cap
                    if not over.any():
                        break
                    excess = (probs[over] - atom_cap).sum()
                    probs[over] = atom_cap
                    under = ~over
                    probs[under] += excess * probs[under] / probs[under].sum()
            boxes.append(
                DiscreteDistribution(
                    tuple((v, float(p)) for v, p in zip(values, probs))
                )
            )
        inst = Instance(tuple(boxes), name=f"random_n{n}_seed{seed}")
        if max_point_mass is None or mpm(inst) <= max_point_mass:
            return inst
    raise ValueError("could not sample an instance under the point-mass cap")
