"""Exact and Monte Carlo evaluation of policies on (instance, order) pairs.

The exact evaluator enumerates the product outcome space in arrival order
with early termination on acceptance; tie randomness and compressed runs of
zero boxes are folded analytically. Monotone value-threshold policies get a
closed-form path that handles thousands of boxes.

Win convention for the max-probability objective: the policy wins iff the
accepted value equals the maximum realized value (weak comparison on both
sides). A run that never accepts scores zero for both objectives.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    ArrivalOrder,
    DegenerateInstanceError,
    Instance,
    SizeLimitError,
    Trail,
    EMPTY_TRAIL,
    ZERO_BOX,
)
from .policies import MAX_EXP, MAX_PROB, Policy, ThresholdPolicy

Z99 = 2.5758293035489004  # two-sided 99% normal quantile
DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class EvalResult:
    value: float
    method: str  # "exact" | "closed_form" | "mc"
    ci_radius: float = 0.0
    samples: int = 0
    seed: Optional[int] = None

    def to_row(self) -> dict:
        return {
            "method": self.method,
            "value": self.value,
            "ci": self.ci_radius,
            "samples": self.samples,
            "seed": self.seed if self.seed is not None else "",
        }


@dataclass(frozen=True)
class Entry:
    """One step of the arrival sequence: a box, or a run of zero dummies."""

    dist: object  # DiscreteDistribution for boxes; None for runs
    count: int  # 1 for boxes, run length otherwise
    t_start: int  # 1-based arrival time of the first position

    @property
    def is_run(self) -> bool:
        return self.dist is None


def arrival_entries(instance: Instance, order: ArrivalOrder) -> list[Entry]:
    """Arrival sequence with consecutive zero boxes grouped into runs."""
    if order.n != instance.n:
        raise ValueError(
            f"order over {order.n} boxes but instance has {instance.n}"
        )
    if instance.zero_runs:
        layout = instance._expanded_layout()
        dists = [None if k == 0 else instance.boxes[k - 1] for k in layout]
    else:
        dists = list(instance.boxes)
    entries: list[Entry] = []
    t = 1
    pending_zeros = 0
    for idx in order.perm:
        d = dists[idx - 1]
        if d is None or d.is_zero():
            pending_zeros += 1
            continue
        if pending_zeros:
            entries.append(Entry(None, pending_zeros, t))
            t += pending_zeros
            pending_zeros = 0
        entries.append(Entry(d, 1, t))
        t += 1
    if pending_zeros:
        entries.append(Entry(None, pending_zeros, t))
    return entries


def _grid_and_suffix(entries: Sequence[Entry]) -> tuple[np.ndarray, np.ndarray]:
    """Sorted value grid and suffix win products.

    suffix[e][g] = prod over box entries with index >= e of Pr[v <= grid[g]];
    the win factor for a value accepted at entry e is suffix[e + 1]. Zero
    runs contribute factor one since grid values are nonnegative.
    """
    vals = {0.0}
    for e in entries:
        if not e.is_run:
            vals.update(e.dist.values)
    grid = np.array(sorted(vals))
    m = len(entries)
    suffix = np.ones((m + 1, len(grid)))
    for e in range(m - 1, -1, -1):
        if entries[e].is_run:
            suffix[e] = suffix[e + 1]
        else:
            suffix[e] = suffix[e + 1] * entries[e].dist.weak_cdf_grid(grid)
    return grid, suffix


def _value_accept_fn(policy: Policy):
    return lambda v: policy.accept_prob(1, v, EMPTY_TRAIL)


def _is_monotone_value_policy(policy: Policy, values: Sequence[float]) -> bool:
    """True when rejected values can never exceed an accepted one: the
    acceptance probability is 0/1 except possibly at the lowest accepted
    value."""
    if not policy.value_only:
        return False
    a = _value_accept_fn(policy)
    probs = [a(v) for v in sorted(values)]
    first_pos = next((i for i, p in enumerate(probs) if p > 0.0), None)
    if first_pos is None:
        return True
    return all(p == 1.0 for p in probs[first_pos + 1 :])


def _closed_form_value_policy(
    entries: Sequence[Entry], policy: Policy, objective: str
) -> float:
    grid, suffix = _grid_and_suffix(entries)
    gidx = {v: i for i, v in enumerate(grid)}
    a = _value_accept_fn(policy)
    reach = 1.0
    acc = 0.0
    for e, entry in enumerate(entries):
        if reach == 0.0:
            break
        if entry.is_run:
            a0 = a(0.0)
            if a0 > 0.0:
                stop = 1.0 - (1.0 - a0) ** entry.count
                if objective == MAX_PROB:
                    acc += reach * stop * suffix[e + 1][gidx[0.0]]
                reach *= (1.0 - a0) ** entry.count
            continue
        passed = 0.0
        for v, p in entry.dist.atoms:
            av = a(v)
            if av > 0.0:
                if objective == MAX_EXP:
                    acc += reach * p * av * v
                else:
                    acc += reach * p * av * suffix[e + 1][gidx[v]]
            passed += p * (1.0 - av)
        reach *= passed
    return acc


def _dfs_exact(
    entries: Sequence[Entry], policy: Policy, objective: str, cap: int
) -> float:
    size = 1
    for e in entries:
        if not e.is_run:
            size *= len(e.dist.atoms)
            if size > cap:
                raise SizeLimitError(
                    f"product support {size}+ exceeds cap {cap}"
                )
    worklist = [e for e in entries if e.is_run]
    if worklist and not policy.rejects_zeros:
        total = sum(e.count for e in worklist)
        if total + len(entries) > 200_000:
            raise SizeLimitError(
                "policy does not reject zeros and zero runs are too long to expand"
            )
        expanded: list[Entry] = []
        for e in entries:
            if e.is_run:
                expanded.extend(
                    Entry(ZERO_BOX, 1, e.t_start + i) for i in range(e.count)
                )
            else:
                expanded.append(e)
        entries = expanded
    grid, suffix = _grid_and_suffix(entries)
    gidx = {v: i for i, v in enumerate(grid)}
    m = len(entries)
    if m + 10 > sys.getrecursionlimit() // 3:
        sys.setrecursionlimit(3 * m + 100)

    def go(e: int, prob: float, trail: Trail) -> float:
        if e == m or prob == 0.0:
            return 0.0
        entry = entries[e]
        if entry.is_run:  # only reached when policy rejects zeros
            return go(e + 1, prob, trail.extend_zeros(entry.count))
        acc = 0.0
        t = entry.t_start
        for v, p in entry.dist.atoms:
            branch = prob * p
            if branch == 0.0:
                continue
            av = policy.accept_prob(t, v, trail)
            if av > 0.0:
                if objective == MAX_EXP:
                    acc += branch * av * v
                elif v >= trail.max_value():
                    acc += branch * av * suffix[e + 1][gidx[v]]
            if av < 1.0:
                acc += go(e + 1, branch * (1.0 - av), trail.extend(v))
        return acc

    return go(0, 1.0, EMPTY_TRAIL)


def evaluate_exact(
    instance: Instance,
    order: ArrivalOrder,
    policy: Policy,
    objective: str,
    cap: int = DEFAULT_CAP,
) -> EvalResult:
    """Exact objective value; analytic over tie randomness."""
    entries = arrival_entries(instance, order)
    values = set()
    for e in entries:
        if not e.is_run:
            values.update(e.dist.values)
    values.add(0.0)
    if _is_monotone_value_policy(policy, sorted(values)):
        return EvalResult(
            _closed_form_value_policy(entries, policy, objective), "closed_form"
        )
    return EvalResult(_dfs_exact(entries, policy, objective, cap), "exact")


def accept_position_probs(
    instance: Instance,
    order: ArrivalOrder,
    policy: Policy,
    cap: int = DEFAULT_CAP,
) -> dict[int, float]:
    """Probability that the policy accepts at each arrival time."""
    entries = arrival_entries(instance, order)
    out: dict[int, float] = {}

    def go(e: int, prob: float, trail: Trail) -> None:
        if e == len(entries) or prob == 0.0:
            return
        entry = entries[e]
        if entry.is_run:
            a0 = policy.accept_prob(entry.t_start, 0.0, trail) if not policy.rejects_zeros else 0.0
            if a0 > 0.0:
                raise SizeLimitError("per-position profile over zero runs not supported")
            go(e + 1, prob, trail.extend_zeros(entry.count))
            return
        t = entry.t_start
        for v, p in entry.dist.atoms:
            branch = prob * p
            av = policy.accept_prob(t, v, trail)
            if av > 0.0:
                out[t] = out.get(t, 0.0) + branch * av
            if av < 1.0:
                go(e + 1, branch * (1.0 - av), trail.extend(v))

    size = 1
    for e in entries:
        if not e.is_run:
            size *= len(e.dist.atoms)
    if size > cap:
        raise SizeLimitError(f"product support {size} exceeds cap {cap}")
    go(0, 1.0, EMPTY_TRAIL)
    return out


def _mc_value_policy(
    entries: Sequence[Entry],
    policy: Policy,
    objective: str,
    samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Stopping-time sampling for monotone value policies.

    Draws the stopping entry by inverse transform over the survival curve,
    then the accepted value; the win probability given the accepted value is
    folded analytically (conditional expectation keeps the estimate
    unbiased and cuts variance).
    """
    grid, suffix = _grid_and_suffix(entries)
    gidx = {v: i for i, v in enumerate(grid)}
    a = _value_accept_fn(policy)
    m = len(entries)
    survival = np.ones(m)
    atom_tables = []
    run = 1.0
    for e, entry in enumerate(entries):
        if entry.is_run:
            a0 = a(0.0)
            pass_p = (1.0 - a0) ** entry.count
            atoms = [(0.0, 1.0 - pass_p)]
        else:
            pass_p = 0.0
            atoms = []
            for v, p in entry.dist.atoms:
                av = a(v)
                pass_p += p * (1.0 - av)
                if av > 0.0:
                    atoms.append((v, p * av))
        stop_mass = 1.0 - pass_p
        if stop_mass > 0:
            w = np.array([p for _, p in atoms])
            cum = np.cumsum(w) / stop_mass
            vals = np.array([v for v, _ in atoms])
            wins = np.array([suffix[e + 1][gidx[v]] for v, _ in atoms])
        else:
            cum, vals, wins = np.array([1.0]), np.array([0.0]), np.array([0.0])
        atom_tables.append((cum, vals, wins))
        run *= pass_p
        survival[e] = run
    stop_cdf = 1.0 - survival  # nondecreasing
    u = rng.random(samples)
    stop_at = np.searchsorted(stop_cdf, u, side="left")
    payoff = np.zeros(samples)
    u2 = rng.random(samples)
    for e in range(m):
        mask = stop_at == e
        if not mask.any():
            continue
        cum, vals, wins = atom_tables[e]
        pick = np.searchsorted(cum, u2[mask], side="left")
        pick = np.minimum(pick, len(vals) - 1)
        payoff[mask] = vals[pick] if objective == MAX_EXP else wins[pick]
    return payoff


def _mc_generic(
    entries: Sequence[Entry],
    policy: Policy,
    objective: str,
    samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    if any(e.is_run for e in entries) and not policy.rejects_zeros:
        raise SizeLimitError(
            "generic MC over zero runs needs a zero-rejecting policy"
        )
    payoffs = np.zeros(samples)
    box_entries = [(i, e) for i, e in enumerate(entries) if not e.is_run]
    vals = [np.array(e.dist.values) for _, e in box_entries]
    cums = [np.cumsum(np.array(e.dist.probs)) for _, e in box_entries]
    for s in range(samples):
        trail = EMPTY_TRAIL
        accepted = None
        overall_max = 0.0
        prev_end = 0
        for (i, e), v_arr, c_arr in zip(box_entries, vals, cums):
            if e.t_start - 1 > prev_end:
                trail = trail.extend_zeros(e.t_start - 1 - prev_end)
            prev_end = e.t_start
            v = float(v_arr[np.searchsorted(c_arr, rng.random(), side="left")])
            overall_max = max(overall_max, v)
            if accepted is None:
                if policy.decide(e.t_start, v, trail, rng):
                    accepted = v
                else:
                    trail = trail.extend(v)
            # keep sampling remaining boxes so the stream length is
            # realization-independent for the max bookkeeping
        if accepted is None:
            payoffs[s] = 0.0
        elif objective == MAX_EXP:
            payoffs[s] = accepted
        else:
            payoffs[s] = 1.0 if accepted >= overall_max else 0.0
    return payoffs


def evaluate_mc(
    instance: Instance,
    order: ArrivalOrder,
    policy: Policy,
    objective: str,
    samples: int,
    seed: int,
) -> EvalResult:
    """Unbiased Monte Carlo estimate with a 99% confidence radius."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    entries = arrival_entries(instance, order)
    values = {0.0}
    for e in entries:
        if not e.is_run:
            values.update(e.dist.values)
    rng = np.random.default_rng(seed)
    if _is_monotone_value_policy(policy, sorted(values)):
        payoffs = _mc_value_policy(entries, policy, objective, samples, rng)
    else:
        payoffs = _mc_generic(entries, policy, objective, samples, rng)
    mean = float(payoffs.mean())
    std = float(payoffs.std(ddof=1)) if samples > 1 else 0.0
    ci = Z99 * std / math.sqrt(samples)
    return EvalResult(mean, "mc", ci_radius=ci, samples=samples, seed=seed)


def evaluate(
    instance: Instance,
    order: ArrivalOrder,
    policy: Policy,
    objective: str,
    cap: int = DEFAULT_CAP,
    samples: int = 200_000,
    seed: int = 0,
) -> EvalResult:
    """Exact when feasible under `cap`, Monte Carlo otherwise."""
    try:
        return evaluate_exact(instance, order, policy, objective, cap=cap)
    except SizeLimitError:
        return evaluate_mc(instance, order, policy, objective, samples, seed)


@dataclass(frozen=True)
class GapReport:
    ratio: float
    per_order: tuple[dict, ...]
    argmin_index: int


def gap(
    instance: Instance,
    orders: Sequence[ArrivalOrder],
    policy: Policy,
    objective: str,
    cap: int = DEFAULT_CAP,
    samples: int = 200_000,
    seed: int = 0,
) -> GapReport:
    """min over orders of ALG / OPT for the given objective."""
    from . import optimal

    if not orders:
        raise ValueError("need at least one order")
    rows = []
    best = math.inf
    best_i = 0
    for i, order in enumerate(orders):
        if objective == MAX_EXP:
            _, opt_value = optimal.opt_order_aware_maxexp(instance, order)
        else:
            _, opt_value = optimal.opt_order_aware_maxprob(instance, order)
        res = evaluate(instance, order, policy, objective, cap=cap, samples=samples, seed=seed + i)
        if opt_value <= 0.0:
            if res.value <= 0.0:
                ratio = 1.0
            else:
                raise DegenerateInstanceError(
                    "policy outscores a zero-valued order-aware optimum"
                )
        else:
            ratio = res.value / opt_value
        rows.append(
            {
                "order_index": i,
                "alg": res.value,
                "opt": opt_value,
                "ratio": ratio,
                "method": res.method,
                "ci": res.ci_radius,
            }
        )
        if ratio < best:
            best, best_i = ratio, i
    return GapReport(ratio=best, per_order=tuple(rows), argmin_index=best_i)
