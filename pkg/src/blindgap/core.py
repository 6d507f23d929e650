"""Finite discrete distributions, box instances, arrival orders, and
statistics of the running maximum.

Everything here is immutable and pure; instances may carry compressed runs
of deterministic zero-value boxes so that constructions with huge numbers
of dummy boxes stay tractable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

PROB_TOL = 1e-12


class BlindGapError(Exception):
    """Base error for this package."""


class SizeLimitError(BlindGapError):
    """Raised when an exact computation would exceed its configured cap."""


class DegenerateInstanceError(BlindGapError):
    """Raised when a ratio is requested against a zero-valued benchmark."""


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution over nonnegative values.

    Atoms are (value, prob) pairs sorted by value, values distinct, probs in
    (0, 1] summing to one.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("distribution needs at least one atom")
        total = 0.0
        prev = -1.0
        for v, p in self.atoms:
            if v < 0:
                raise ValueError(f"negative value {v}")
            if v <= prev:
                raise ValueError("values must be strictly increasing")
            if not (0.0 < p <= 1.0):
                raise ValueError(f"atom probability {p} outside (0, 1]")
            prev = v
            total += p
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @classmethod
    def of(cls, pairs: Iterable[tuple[float, float]]) -> "DiscreteDistribution":
        return cls(tuple(sorted((float(v), float(p)) for v, p in pairs if p > 0.0)))

    @classmethod
    def point(cls, value: float) -> "DiscreteDistribution":
        return cls(((float(value), 1.0),))

    @classmethod
    def bernoulli(cls, value: float, prob: float) -> "DiscreteDistribution":
        """Value `value` with probability `prob`, zero otherwise."""
        if prob >= 1.0:
            return cls.point(value)
        if value == 0.0:
            return cls.point(0.0)
        return cls(((0.0, 1.0 - prob), (float(value), float(prob))))

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for v, _ in self.atoms)

    @property
    def probs(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.atoms)

    def cdf_strict(self, x: float) -> float:
        """Pr[V < x]."""
        return math.fsum(p for v, p in self.atoms if v < x)

    def cdf_weak(self, x: float) -> float:
        """Pr[V <= x]."""
        return math.fsum(p for v, p in self.atoms if v <= x)

    def mass_at(self, x: float) -> float:
        for v, p in self.atoms:
            if v == x:
                return p
        return 0.0

    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.atoms)

    def weak_cdf_grid(self, grid: np.ndarray) -> np.ndarray:
        """Pr[V <= g] for every g in a sorted grid."""
        vals = np.fromiter((v for v, _ in self.atoms), dtype=float)
        cum = np.cumsum(np.fromiter((p for _, p in self.atoms), dtype=float))
        idx = np.searchsorted(vals, grid, side="right")
        return np.where(idx > 0, cum[np.minimum(idx, len(cum)) - 1], 0.0)

    def is_zero(self) -> bool:
        return self.atoms == ((0.0, 1.0),)


ZERO_BOX = DiscreteDistribution.point(0.0)


@dataclass(frozen=True)
class ZeroRun:
    after_box: int  # 1-based box index the run follows; 0 means before box 1
    count: int

    def __post_init__(self) -> None:
        if self.count < 1 or self.after_box < 0:
            raise ValueError("bad zero run")


@dataclass(frozen=True)
class Instance:
    """An ordered collection of boxes, optionally padded with compressed
    runs of deterministic zero boxes."""

    boxes: tuple[DiscreteDistribution, ...]
    name: str = ""
    zero_runs: tuple[ZeroRun, ...] = ()

    def __post_init__(self) -> None:
        if not self.boxes:
            raise ValueError("instance needs at least one box")
        for run in self.zero_runs:
            if run.after_box > len(self.boxes):
                raise ValueError("zero run anchored past the last box")

    @property
    def n(self) -> int:
        """Number of boxes including compressed zero dummies."""
        return len(self.boxes) + sum(r.count for r in self.zero_runs)

    @property
    def n_explicit(self) -> int:
        return len(self.boxes)

    def _expanded_layout(self) -> list[int]:
        """Expanded box list as indices: k>=1 is boxes[k-1], 0 is a dummy."""
        runs: dict[int, int] = {}
        for r in self.zero_runs:
            runs[r.after_box] = runs.get(r.after_box, 0) + r.count
        layout: list[int] = [0] * runs.get(0, 0)
        for k in range(1, len(self.boxes) + 1):
            layout.append(k)
            layout.extend([0] * runs.get(k, 0))
        return layout

    def box(self, index: int) -> DiscreteDistribution:
        """Distribution of the expanded box at 1-based `index`."""
        if not self.zero_runs:
            return self.boxes[index - 1]
        k = self._expanded_layout()[index - 1]
        return ZERO_BOX if k == 0 else self.boxes[k - 1]

    def expand(self) -> "Instance":
        if not self.zero_runs:
            return self
        dists = tuple(
            ZERO_BOX if k == 0 else self.boxes[k - 1] for k in self._expanded_layout()
        )
        return Instance(dists, name=self.name)

    def box_multiplicities(self) -> Iterator[tuple[DiscreteDistribution, int]]:
        """Each distinct stored box once, plus one grouped zero entry."""
        for b in self.boxes:
            yield b, 1
        dummy = sum(r.count for r in self.zero_runs)
        if dummy:
            yield ZERO_BOX, dummy

    def support_union(self) -> list[float]:
        vals: set[float] = set()
        for b, _ in self.box_multiplicities():
            vals.update(b.values)
        return sorted(vals)

    def product_support_size(self) -> int:
        size = 1
        for b in self.boxes:
            size *= len(b.atoms)
        return size

    def to_json(self) -> dict:
        doc: dict = {
            "name": self.name,
            "boxes": [
                [{"value": v, "prob": p} for v, p in b.atoms] for b in self.boxes
            ],
        }
        if self.zero_runs:
            doc["zero_runs"] = [
                {"after_box": r.after_box, "count": r.count} for r in self.zero_runs
            ]
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Instance":
        boxes = tuple(
            DiscreteDistribution.of((a["value"], a["prob"]) for a in box)
            for box in doc["boxes"]
        )
        runs = tuple(
            ZeroRun(r["after_box"], r["count"]) for r in doc.get("zero_runs", [])
        )
        return cls(boxes, name=doc.get("name", ""), zero_runs=runs)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class ArrivalOrder:
    """perm[i] is the 1-based identity of the (i+1)-th arriving box."""

    perm: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.perm)
        if sorted(self.perm) != list(range(1, n + 1)):
            raise ValueError("not a permutation of 1..n")

    @property
    def n(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "ArrivalOrder":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def descending(cls, n: int) -> "ArrivalOrder":
        return cls(tuple(range(n, 0, -1)))

    def to_json(self) -> list[int]:
        return list(self.perm)

    @classmethod
    def from_json(cls, doc: Sequence[int]) -> "ArrivalOrder":
        return cls(tuple(int(i) for i in doc))


@dataclass(frozen=True)
class OrderPrior:
    """Finitely supported distribution over arrival orders."""

    support: tuple[tuple[ArrivalOrder, float], ...]

    def __post_init__(self) -> None:
        if not self.support:
            raise ValueError("empty prior")
        n = self.support[0][0].n
        total = 0.0
        for order, p in self.support:
            if order.n != n:
                raise ValueError("orders of mixed length in prior")
            if p <= 0:
                raise ValueError("prior probabilities must be positive")
            total += p
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"prior sums to {total}")

    @property
    def orders(self) -> tuple[ArrivalOrder, ...]:
        return tuple(o for o, _ in self.support)

    @property
    def probs(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.support)

    @classmethod
    def uniform(cls, orders: Sequence[ArrivalOrder]) -> "OrderPrior":
        p = 1.0 / len(orders)
        return cls(tuple((o, p) for o in orders))

    @classmethod
    def singleton(cls, order: ArrivalOrder) -> "OrderPrior":
        return cls(((order, 1.0),))

    def to_json(self) -> list[dict]:
        return [{"order": list(o.perm), "prob": p} for o, p in self.support]

    @classmethod
    def from_json(cls, doc: Sequence[dict]) -> "OrderPrior":
        return cls(
            tuple(
                (ArrivalOrder.from_json(e["order"]), float(e["prob"])) for e in doc
            )
        )


class Trail:
    """Immutable record of the values observed so far.

    Stored sparsely (length plus nonzero positions) so that instances padded
    with millions of zero boxes never materialize dense histories.
    """

    __slots__ = ("length", "nonzero")

    def __init__(self, length: int = 0, nonzero: tuple[tuple[int, float], ...] = ()):
        self.length = length
        self.nonzero = nonzero

    def extend(self, value: float) -> "Trail":
        pos = self.length + 1
        if value != 0.0:
            return Trail(pos, self.nonzero + ((pos, value),))
        return Trail(pos, self.nonzero)

    def extend_zeros(self, count: int) -> "Trail":
        return Trail(self.length + count, self.nonzero)

    def max_value(self) -> float:
        """Largest observed value; zero when nothing positive was seen."""
        return max((v for _, v in self.nonzero), default=0.0)

    def values(self) -> tuple[float, ...]:
        dense = [0.0] * self.length
        for pos, v in self.nonzero:
            dense[pos - 1] = v
        return tuple(dense)

    def count_nonzero_upto(self, t: int) -> int:
        return sum(1 for pos, _ in self.nonzero if pos <= t)

    def last(self) -> float:
        if self.nonzero and self.nonzero[-1][0] == self.length:
            return self.nonzero[-1][1]
        return 0.0

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Trail)
            and self.length == other.length
            and self.nonzero == other.nonzero
        )

    def __hash__(self) -> int:
        return hash((self.length, self.nonzero))

    def __repr__(self) -> str:
        return f"Trail(len={self.length}, nonzero={self.nonzero})"


EMPTY_TRAIL = Trail()


def max_cdf(instance: Instance, tau: float, strict: bool = True) -> float:
    """Pr[max_i v_i < tau] (strict) or Pr[max_i v_i <= tau]."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    out = 1.0
    for box, mult in instance.box_multiplicities():
        f = box.cdf_strict(tau) if strict else box.cdf_weak(tau)
        if f == 0.0:
            return 0.0
        out *= f**mult
    return out


def _max_cdf_jumps(instance: Instance) -> list[tuple[float, float]]:
    """(value, Pr[max = value]) over the union of supports."""
    out = []
    for v in instance.support_union():
        jump = max_cdf(instance, v, strict=False) - max_cdf(instance, v, strict=True)
        out.append((v, jump))
    return out


def expected_max(instance: Instance) -> float:
    """Exact E[max_i v_i] via the max-CDF over the union of supports."""
    return math.fsum(v * p for v, p in _max_cdf_jumps(instance))


def max_point_mass(instance: Instance) -> float:
    """Largest point mass of the distribution of the maximum value."""
    return max(p for _, p in _max_cdf_jumps(instance))
