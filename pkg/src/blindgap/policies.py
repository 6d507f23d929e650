"""Identity-blind selection policies.

A policy sees only the arrival time, the revealed value, and the trail of
earlier values; it never sees which box produced a value. Randomized
policies expose their acceptance probability so exact evaluators can fold
the randomness analytically instead of sampling it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Instance, Trail
from . import constants

MAX_EXP = "max_exp"
MAX_PROB = "max_prob"


class Policy:
    """Decision rule interface.

    `value_only` marks policies whose acceptance probability depends on the
    revealed value alone (enables closed-form evaluation and run
    compression); `rejects_zeros` marks policies that never accept a zero.
    """

    value_only: bool = False
    rejects_zeros: bool = False
    objective: str = MAX_PROB

    def accept_prob(self, t: int, value: float, trail: Trail) -> float:
        raise NotImplementedError

    def decide(
        self, t: int, value: float, trail: Trail, rng: Optional[np.random.Generator] = None
    ) -> bool:
        p = self.accept_prob(t, value, trail)
        if p >= 1.0:
            return True
        if p <= 0.0:
            return False
        if rng is None:
            raise ValueError("randomized decision needs an rng")
        return bool(rng.random() < p)

    @property
    def is_deterministic(self) -> bool:
        return False

    def describe(self) -> dict:
        return {"kind": type(self).__name__}


@dataclass(frozen=True)
class ThresholdPolicy(Policy):
    """Accept the first value above `tau`; accept exact ties with prob `xi`."""

    tau: float
    xi: float = 1.0
    objective: str = MAX_PROB

    value_only = True

    def __post_init__(self) -> None:
        if not (0.0 <= self.xi <= 1.0):
            raise ValueError("xi must lie in [0, 1]")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")

    @property
    def rejects_zeros(self) -> bool:  # type: ignore[override]
        return self.value_accept_prob(0.0) == 0.0

    def value_accept_prob(self, value: float) -> float:
        if value > self.tau:
            return 1.0
        if value == self.tau:
            return self.xi
        return 0.0

    def accept_prob(self, t: int, value: float, trail: Trail) -> float:
        return self.value_accept_prob(value)

    @property
    def is_deterministic(self) -> bool:
        return self.xi in (0.0, 1.0)

    def describe(self) -> dict:
        return {
            "kind": "threshold",
            "tau": self.tau,
            "xi": self.xi,
            "objective": self.objective,
        }


@dataclass(frozen=True)
class GreedyPositivePolicy(Policy):
    """Accept the first strictly positive value."""

    objective: str = MAX_PROB
    value_only = True
    rejects_zeros = True

    def accept_prob(self, t: int, value: float, trail: Trail) -> float:
        return 1.0 if value > 0.0 else 0.0

    @property
    def is_deterministic(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"kind": "greedy_positive"}


@dataclass(frozen=True)
class SkipThenGreedyPolicy(Policy):
    """Reject the first `skip` arrivals, then accept the first positive
    value; optionally accept whatever arrives at the final position."""

    skip: int
    horizon: int = 0  # needed only when accept_last is set
    accept_last: bool = False
    objective: str = MAX_PROB

    @property
    def rejects_zeros(self) -> bool:  # type: ignore[override]
        return not self.accept_last

    def accept_prob(self, t: int, value: float, trail: Trail) -> float:
        if self.accept_last and self.horizon and t == self.horizon:
            return 1.0
        if t <= self.skip:
            return 0.0
        return 1.0 if value > 0.0 else 0.0

    @property
    def is_deterministic(self) -> bool:
        return True

    def describe(self) -> dict:
        return {
            "kind": "skip_then_greedy",
            "skip": self.skip,
            "horizon": self.horizon,
            "accept_last": self.accept_last,
        }


def _log_tie_product(
    terms: list[tuple[float, float, int]], xi: float
) -> float:
    """prod (p + xi*q)^mult over boxes, evaluated in log space."""
    acc = 0.0
    for p, q, mult in terms:
        base = p + xi * q
        if base <= 0.0:
            return 0.0
        acc += mult * math.log(base)
    return math.exp(acc)


def find_threshold(
    instance: Instance, lambda_target: float, objective: str = MAX_PROB
) -> ThresholdPolicy:
    """Threshold whose effective below-or-tied mass is exactly lambda_target.

    Picks the unique support value tau with
    Pr[max < tau] <= lambda <= Pr[max <= tau] and then bisects the tie
    acceptance xi so that prod_i Pr[v_i < tau or tie rejected] = lambda.
    """
    if not (0.0 < lambda_target < 1.0):
        raise ValueError("lambda_target must lie strictly inside (0, 1)")
    support = instance.support_union()
    tau = None
    for v in support:
        weak = 1.0
        for box, mult in instance.box_multiplicities():
            weak *= box.cdf_weak(v) ** mult
            if weak == 0.0:
                break
        if weak >= lambda_target:
            tau = v
            break
    if tau is None:  # lambda < 1 while weak cdf at the top is 1
        tau = support[-1]
    terms = [
        (box.cdf_strict(tau), box.mass_at(tau), mult)
        for box, mult in instance.box_multiplicities()
    ]
    if all(q == 0.0 for _, q, _ in terms):
        return ThresholdPolicy(tau=tau, xi=1.0, objective=objective)
    # bisect the tie pass share s so prod (p + s*q) = lambda; the tie
    # acceptance probability is its complement
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _log_tie_product(terms, mid) < lambda_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-18:
            break
    xi = 1.0 - 0.5 * (lo + hi)
    return ThresholdPolicy(tau=tau, xi=xi, objective=objective)


def effective_lambda(instance: Instance, policy: ThresholdPolicy) -> float:
    """Probability the policy never accepts:
    prod_i (Pr[v_i < tau] + (1 - xi) * Pr[v_i = tau])."""
    terms = [
        (box.cdf_strict(policy.tau), box.mass_at(policy.tau), mult)
        for box, mult in instance.box_multiplicities()
    ]
    return _log_tie_product(terms, 1.0 - policy.xi)


def gap_optimal_policy(instance: Instance) -> ThresholdPolicy:
    """Threshold at the solved worst-case-optimal acceptance level."""
    lam = constants.solve_lambda_rho_gamma().lambda_star
    return find_threshold(instance, lam, objective=MAX_PROB)


def prophet_half_policy(instance: Instance) -> ThresholdPolicy:
    """Median-of-the-maximum rule; the classic half guarantee."""
    return find_threshold(instance, 0.5, objective=MAX_EXP)


def one_over_e_policy(instance: Instance) -> ThresholdPolicy:
    """Acceptance level 1/e; the classic win-probability rule."""
    return find_threshold(instance, math.exp(-1.0), objective=MAX_PROB)


def policy_from_descriptor(doc: dict, instance: Optional[Instance] = None) -> Policy:
    """Rebuild a policy from its JSON descriptor."""
    kind = doc["kind"]
    if kind == "threshold":
        return ThresholdPolicy(
            tau=float(doc["tau"]),
            xi=float(doc.get("xi", 1.0)),
            objective=doc.get("objective", MAX_PROB),
        )
    if kind == "greedy_positive":
        return GreedyPositivePolicy()
    if kind == "skip_then_greedy":
        return SkipThenGreedyPolicy(
            skip=int(doc["skip"]),
            horizon=int(doc.get("horizon", 0)),
            accept_last=bool(doc.get("accept_last", False)),
        )
    if kind in ("gap_optimal", "prophet_half", "one_over_e"):
        if instance is None:
            raise ValueError(f"policy kind {kind!r} needs an instance")
        maker = {
            "gap_optimal": gap_optimal_policy,
            "prophet_half": prophet_half_policy,
            "one_over_e": one_over_e_policy,
        }[kind]
        return maker(instance)
    raise ValueError(f"unknown policy kind {kind!r}")
