"""Transcendental constants behind the identity-blindness gap bounds.

All roots are found by plain bisection to 1e-10 with sign-change and
monotonicity guards; the inner minimization uses golden-section search.
Nothing here is hard-coded beyond machine representations of e and phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

_INV_E = math.exp(-1.0)
_GOLDEN_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    check_monotone: bool = True,
) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    if check_monotone:
        # Uniqueness guard: a single sign change over a coarse scan.
        changes = 0
        prev = flo
        for i in range(1, 1000):
            x = lo + (hi - lo) * i / 1000.0
            fx = f(x)
            if prev * fx < 0:
                changes += 1
            if fx != 0.0:
                prev = fx
        if changes != 1:
            raise ValueError(f"objective changes sign {changes} times on bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _golden_min(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12
) -> tuple[float, float]:
    """Golden-section minimizer on [lo, hi]; assumes unimodality there."""
    a, b = lo, hi
    c = b - _GOLDEN_INVPHI * (b - a)
    d = a + _GOLDEN_INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN_INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN_INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class GapConstants:
    lambda_star: float
    rho_star: float
    gamma_star: float


def _ratio_at(lam: float, rho: float) -> float:
    """(lam*ln(1/rho) + rho - lam) / (lam + 1 - lam/rho)."""
    return (lam * math.log(1.0 / rho) + rho - lam) / (lam + 1.0 - lam / rho)


def inner_rho_min(lam: float) -> tuple[float, float]:
    """Minimize the two-threshold ratio over rho in [lam, 1].

    Returns (minimizer, minimum value).
    """
    if not (0.0 < lam < 1.0):
        raise ValueError("lambda must lie in (0, 1)")
    # Coarse scan brackets the valley before golden-section refines it.
    m = 200
    xs = [lam + (1.0 - lam) * i / m for i in range(m + 1)]
    fs = [_ratio_at(lam, x) for x in xs]
    k = min(range(len(fs)), key=fs.__getitem__)
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, m)]
    return _golden_min(lambda r: _ratio_at(lam, r), lo, hi)


@lru_cache(maxsize=1)
def solve_lambda_rho_gamma() -> GapConstants:
    """The acceptance level, its worst-case minimizer, and the gap value."""

    def g(lam: float) -> float:
        return inner_rho_min(lam)[1] - lam * math.log(1.0 / lam) / (lam + _INV_E)

    lam = _bisect(g, 1e-4, _INV_E - 1e-6)
    rho, _ = inner_rho_min(lam)
    gamma = lam * math.log(1.0 / lam) / (lam + _INV_E)
    return GapConstants(lambda_star=lam, rho_star=rho, gamma_star=gamma)


@lru_cache(maxsize=1)
def solve_mu_deterministic() -> tuple[float, float]:
    """Crossover mass for the deterministic upper bound; returns (mu, mu/(1-mu))."""

    def g(mu: float) -> float:
        l = math.log(1.0 / mu)
        return mu / (1.0 - mu) - l / (l + 1.0)

    mu = _bisect(g, 1e-6, 1.0 - 1e-9)
    return mu, mu / (1.0 - mu)


@lru_cache(maxsize=1)
def solve_mu_single_threshold() -> float:
    """Crossover mass where mu equals ln(1/mu)/(1+ln(1/mu))."""

    def g(mu: float) -> float:
        l = math.log(1.0 / mu)
        return mu - l / (1.0 + l)

    return _bisect(g, 1e-6, 1.0 - 1e-9)


def golden_bound() -> float:
    """1/phi = 2/(1+sqrt(5)), the three-box deterministic bound."""
    return 2.0 / (1.0 + math.sqrt(5.0))


def constants_report() -> dict:
    """All constants with achieved residuals, for the CLI."""
    gc = solve_lambda_rho_gamma()
    mu_det, det_bound = solve_mu_deterministic()
    mu_st = solve_mu_single_threshold()
    lam, rho = gc.lambda_star, gc.rho_star
    l_det = math.log(1.0 / mu_det)
    l_st = math.log(1.0 / mu_st)
    return {
        "lambda_star": lam,
        "rho_star": rho,
        "gamma_star": gc.gamma_star,
        "mu_deterministic": mu_det,
        "deterministic_bound": det_bound,
        "mu_single_threshold": mu_st,
        "inverse_golden": golden_bound(),
        "residuals": {
            "gap_equation": _ratio_at(lam, rho)
            - lam * math.log(1.0 / lam) / (lam + _INV_E),
            "mu_deterministic_equation": mu_det / (1.0 - mu_det)
            - l_det / (l_det + 1.0),
            "mu_single_threshold_equation": mu_st - l_st / (1.0 + l_st),
            "golden_identity": golden_bound() ** 2 + golden_bound() - 1.0,
        },
    }
