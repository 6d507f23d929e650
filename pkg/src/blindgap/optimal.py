"""Optimal benchmarks.

Order-aware optima know the arrival permutation and solve a backward
induction; the identity-blind optimum only sees the sequence of observed
values and maintains a posterior over a prior on orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    ArrivalOrder,
    Instance,
    OrderPrior,
    SizeLimitError,
    Trail,
)
from .evaluation import Entry, arrival_entries
from .policies import MAX_EXP, MAX_PROB, Policy


def _entry_starts(entries: list[Entry]) -> list[int]:
    return [e.t_start for e in entries]


def _entry_index_at(starts: tuple[int, ...], t: int) -> int:
    """Index of the entry containing arrival time t."""
    lo, hi = 0, len(starts) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if starts[mid] <= t:
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass(frozen=True)
class OrderAwareMaxExpPolicy(Policy):
    """Accept iff the value meets the continuation value of the remaining
    sequence, which the backward induction precomputes per position."""

    starts: tuple[int, ...]
    continuations: tuple[float, ...]  # V after finishing entry e
    objective: str = MAX_EXP
    value_only = False
    rejects_zeros = False

    def accept_prob(self, t: int, value: float, trail: Trail) -> float:
        e = _entry_index_at(self.starts, t)
        return 1.0 if value >= self.continuations[e] else 0.0

    def describe(self) -> dict:
        return {
            "kind": "order_aware_max_exp",
            "starts": list(self.starts),
            "continuations": list(self.continuations),
        }


def opt_order_aware_maxexp(
    instance: Instance, order: ArrivalOrder
) -> tuple[Policy, float]:
    """Backward induction for expected accepted value with a known order."""
    entries = arrival_entries(instance, order)
    m = len(entries)
    cont = [0.0] * m  # value of continuing past entry e
    v_next = 0.0
    for e in range(m - 1, -1, -1):
        cont[e] = v_next
        if entries[e].is_run:
            # a zero never beats a nonnegative continuation
            continue
        v_next = sum(p * max(v, v_next) for v, p in entries[e].dist.atoms)
    policy = OrderAwareMaxExpPolicy(
        starts=tuple(_entry_starts(entries)), continuations=tuple(cont)
    )
    return policy, v_next


@dataclass(frozen=True)
class OrderAwareMaxProbPolicy(Policy):
    """Accept a value iff (a) it is a running maximum and (b) the chance it
    survives the remaining boxes beats the optimal continuation given the
    current running maximum."""

    starts: tuple[int, ...]
    grid: tuple[float, ...]
    survive: tuple[tuple[float, ...], ...]  # per entry: win prob of value g
    continue_win: tuple[tuple[float, ...], ...]  # per entry: W after e at theta g
    objective: str = MAX_PROB
    value_only = False
    rejects_zeros = False

    def _gidx(self, v: float) -> int:
        i = int(np.searchsorted(np.array(self.grid), v))
        if i >= len(self.grid) or self.grid[i] != v:
            raise ValueError(f"value {v} not on the plan's support grid")
        return i

    def accept_prob(self, t: int, value: float, trail: Trail) -> float:
        theta = trail.max_value()
        if value < theta:
            return 0.0
        e = _entry_index_at(self.starts, t)
        gi = self._gidx(value)
        return 1.0 if self.survive[e][gi] >= self.continue_win[e][gi] else 0.0

    def describe(self) -> dict:
        return {
            "kind": "order_aware_max_prob",
            "starts": list(self.starts),
            "grid": list(self.grid),
            "survive": [list(r) for r in self.survive],
            "continue_win": [list(r) for r in self.continue_win],
        }


def opt_order_aware_maxprob(
    instance: Instance, order: ArrivalOrder
) -> tuple[Policy, float]:
    """Backward induction on the running maximum for the probability of
    accepting the overall maximum."""
    entries = arrival_entries(instance, order)
    m = len(entries)
    grid_set = {0.0}
    for e in entries:
        if not e.is_run:
            grid_set.update(e.dist.values)
    grid = np.array(sorted(grid_set))
    g = len(grid)
    # survive[e][i]: probability all boxes after entry e are <= grid[i]
    survive = np.ones((m, g))
    acc = np.ones(g)
    for e in range(m - 1, -1, -1):
        survive[e] = acc
        if not entries[e].is_run:
            acc = acc * entries[e].dist.weak_cdf_grid(grid)
    # W[i]: optimal win probability from here given running max grid[i]
    W = np.zeros(g)
    cont = np.zeros((m, g))
    for e in range(m - 1, -1, -1):
        cont[e] = W
        entry = entries[e]
        if entry.is_run:
            # the only decision is whether a zero (at theta = 0) is worth
            # taking now; taking it later in the run is never better
            W = W.copy()
            W[0] = max(W[0], float(survive[e][0]) if grid[0] == 0.0 else 0.0)
            continue
        Wnew = np.zeros(g)
        idx = np.arange(g)
        for v, p in entry.dist.atoms:
            vi = int(np.searchsorted(grid, v))
            # new running max if we reject: max(theta, v)
            reject = W[np.maximum(idx, vi)]
            accept = np.where(idx <= vi, survive[e][vi], 0.0)
            Wnew += p * np.maximum(accept, reject)
        W = Wnew
    value = float(W[0])
    policy = OrderAwareMaxProbPolicy(
        starts=tuple(_entry_starts(entries)),
        grid=tuple(float(x) for x in grid),
        survive=tuple(tuple(float(x) for x in row) for row in survive),
        continue_win=tuple(tuple(float(x) for x in row) for row in cont),
    )
    return policy, value


@dataclass(frozen=True)
class HistoryPolicy(Policy):
    """Deterministic map from observed value-prefixes to accept/reject."""

    decisions: dict
    objective: str = MAX_PROB
    value_only = False
    rejects_zeros = False

    def accept_prob(self, t: int, value: float, trail: Trail) -> float:
        key = trail.values() + (value,)
        return 1.0 if self.decisions.get(key, False) else 0.0

    def describe(self) -> dict:
        return {
            "kind": "history",
            "objective": self.objective,
            "decisions": [
                {"prefix": list(k), "accept": bool(v)}
                for k, v in sorted(self.decisions.items())
            ],
        }


def opt_identity_blind(
    instance: Instance,
    prior: OrderPrior,
    objective: str = MAX_PROB,
    limit: int = 2_000_000,
    forced: Optional[Callable[[int, float], Optional[bool]]] = None,
) -> tuple[HistoryPolicy, float]:
    """Optimal policy that observes only the value sequence.

    The state is the observed value prefix; the posterior over orders is
    carried as unnormalized weights. `forced(t, value)` may pin the decision
    at specific (time, value) pairs to True/False; return None to leave it
    free. Raises SizeLimitError when the reachable prefix tree would exceed
    `limit` nodes.
    """
    if instance.zero_runs:
        instance = instance.expand()
    n = instance.n
    orders = prior.orders
    weights0 = np.array(prior.probs)
    # per order, per time: the distribution arriving at that time
    dists = [[instance.boxes[o.perm[t] - 1] for t in range(n)] for o in orders]
    grid = np.array(sorted({0.0} | set(instance.support_union())))
    # survive[k][t][i]: P(all boxes of order k after time t are <= grid[i])
    survive = []
    for k in range(len(orders)):
        s = np.ones((n + 1, len(grid)))
        for t in range(n - 1, -1, -1):
            s[t] = s[t + 1] * dists[k][t].weak_cdf_grid(grid)
        survive.append(s)

    decisions: dict = {}
    nodes = [0]

    memo: dict = {}

    def best(prefix: tuple, weights: np.ndarray) -> float:
        """Unnormalized optimal objective mass from time len(prefix)+1 on."""
        t = len(prefix)  # 0-based index of the next arrival
        if t == n:
            return 0.0
        key = prefix
        if key in memo:
            return memo[key][1]
        nodes[0] += 1
        if nodes[0] > limit:
            raise SizeLimitError(f"history tree exceeds {limit} nodes")
        total = 0.0
        choice: dict = {}
        # group orders by the value observed at time t
        support = sorted({v for k in range(len(orders)) for v in dists[k][t].values})
        pref_max = max(prefix) if prefix else 0.0
        for v in support:
            w_here = np.array(
                [weights[k] * dists[k][t].mass_at(v) for k in range(len(orders))]
            )
            mass = float(w_here.sum())
            if mass <= 0.0:
                continue
            if objective == MAX_EXP:
                accept_mass = mass * v
            else:
                if v >= pref_max:
                    gi = int(np.searchsorted(grid, v))
                    accept_mass = float(
                        sum(
                            w_here[k] * survive[k][t + 1][gi]
                            for k in range(len(orders))
                        )
                    )
                else:
                    accept_mass = 0.0
            reject_mass = best(prefix + (v,), w_here)
            pin = forced(t + 1, v) if forced is not None else None
            if pin is True:
                take = True
            elif pin is False:
                take = False
            else:
                take = accept_mass > reject_mass
            choice[v] = take
            total += accept_mass if take else reject_mass
        memo[key] = (choice, total)
        return total

    value = best((), weights0)

    # harvest decisions for every memoized reachable prefix
    for prefix, (choice, _) in memo.items():
        for v, take in choice.items():
            decisions[prefix + (v,)] = take

    policy = HistoryPolicy(decisions=decisions, objective=objective)
    return policy, float(value)
