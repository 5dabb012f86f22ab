"""The two expectation engines and the statistical comparison policy.

``oracle_expectation`` enumerates the truncated Poisson law exactly and
carries a certified tail bound; ``mc_expectation`` averages seeded
replicates and reports a standard error.  Every verification suite
funnels its verdicts through :func:`compare`.

Determinism contract: replicate i draws from stream ``base + i`` and
partial results are combined in fixed batch order, so estimates are
bit-identical across runs and across worker counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BudgetError, ContractViolationError, EvaluationError
from .patterns import _poisson_cdf, sample_poisson_counts
from .space import MeasureSpace

BATCH_SIZE = 1 << 15

THREAD_ENV_VAR = "POISSON_CHAOS_THREADS"


def worker_count() -> int:
    """Worker cap from the environment; affects speed only, never results."""
    raw = os.environ.get(THREAD_ENV_VAR, "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(4, os.cpu_count() or 1)
    return max(1, n)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class McPlan:
    """Replicate count plus the stream coordinates that seed them."""

    replicates: int
    seed: int
    stream_base: int = 0

    def __post_init__(self):
        if self.replicates < 1:
            raise ContractViolationError("replicates must be >= 1")

    def with_replicates(self, n: int) -> "McPlan":
        return McPlan(n, self.seed, self.stream_base)


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error."""

    mean: float
    se: float
    replicates: int


def _batch_ranges(n: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + BATCH_SIZE, n)) for lo in range(0, n, BATCH_SIZE)]


def mc_estimate(plan: McPlan,
                batch_values: Callable[[np.ndarray, int], np.ndarray]) -> Estimate:
    """Average ``batch_values(streams, start)`` over all replicates.

    The callable receives the stream indices of one replicate batch and
    must return one value per stream; it is called with fixed batch
    boundaries regardless of the worker count.
    """
    ranges = _batch_ranges(plan.replicates)

    def run(rng: tuple[int, int]) -> np.ndarray:
        lo, hi = rng
        streams = np.arange(plan.stream_base + lo, plan.stream_base + hi,
                            dtype=np.uint64)
        vals = np.asarray(batch_values(streams, lo), dtype=np.float64)
        if vals.shape != (hi - lo,):
            raise RuntimeError("batch evaluator returned a wrong shape")
        return vals

    workers = worker_count()
    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(run, ranges))
    else:
        batches = [run(r) for r in ranges]

    for (lo, _), vals in zip(ranges, batches):
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise EvaluationError(f"non-finite value at replicate {lo + int(bad[0])}")

    n = plan.replicates
    total = 0.0
    lowest, highest = math.inf, -math.inf
    for vals in batches:
        total += float(np.sum(vals))
        lowest = min(lowest, float(vals.min()))
        highest = max(highest, float(vals.max()))
    mean = total / n
    if lowest == highest:
        return Estimate(mean=lowest, se=0.0, replicates=n)
    m2 = 0.0
    for vals in batches:
        m2 += float(np.sum((vals - mean) ** 2))
    se = math.sqrt(m2 / (n - 1) / n) if n > 1 else math.inf
    return Estimate(mean=mean, se=se, replicates=n)


def mc_expectation(space: MeasureSpace, G, plan: McPlan) -> Estimate:
    """Monte Carlo mean of a functional under the Poisson law."""

    def batch(streams: np.ndarray, _start: int) -> np.ndarray:
        counts = sample_poisson_counts(space, plan.seed, streams)
        return G.evaluate_counts(counts)

    return mc_estimate(plan, batch)


# ---------------------------------------------------------------------------
# exact enumeration


def poisson_tail(mass: float, cutoff: int,
                 growth: Callable[[int], float] | None = None) -> float:
    """Sum of growth(n) * P(N = n) over n > cutoff for N Poisson(mass)."""
    pmf = math.exp(-mass) * mass**cutoff / math.factorial(cutoff)
    total = 0.0
    n = cutoff
    while True:
        n += 1
        pmf *= mass / n
        term = pmf * (growth(n) if growth else 1.0)
        total += term
        if n > mass + 1 and term < 1e-30 * max(total, 1e-300):
            break
        if n > 100_000:
            break
    return total


@dataclass(frozen=True)
class OracleBudget:
    """Total-count truncation with its certified tail mass.

    ``tail_bound`` bounds the enumeration error of the expectation of
    any functional bounded by one (scale by the functional's bound, or
    build the budget with the matching growth envelope).
    """

    max_total: int
    tail_bound: float

    @staticmethod
    def for_space(space: MeasureSpace, tol: float = 1e-10,
                  growth: Callable[[int], float] | None = None,
                  max_states: int = 2_000_000) -> "OracleBudget":
        mass = space.total_mass
        for cutoff in range(1, 400):
            tail = poisson_tail(mass, cutoff, growth)
            if tail <= tol:
                if math.comb(cutoff + space.size, space.size) > max_states:
                    raise BudgetError("enumeration would exceed the state budget")
                # slack absorbs rounding differences between the two ways
                # of accumulating the same tail mass
                return OracleBudget(cutoff, tail * (1.0 + 1e-6) + 1e-15)
        raise BudgetError("no truncation point reaches the requested tail bound")


def _count_vectors(d: int, cap: int) -> np.ndarray:
    if d == 1:
        return np.arange(cap + 1, dtype=np.int64)[:, None]
    sub = _count_vectors(d - 1, cap)
    sums = sub.sum(axis=1)
    rows = []
    for first in range(cap + 1):
        tail = sub[sums <= cap - first]
        rows.append(np.column_stack([np.full(len(tail), first, dtype=np.int64), tail]))
    return np.vstack(rows)


class PoissonEnumeration:
    """All count vectors with total below the budget, with their probabilities."""

    _cache: dict = {}

    def __init__(self, space: MeasureSpace, budget: OracleBudget):
        n_states = math.comb(budget.max_total + space.size, space.size)
        if n_states > 2_000_000:
            raise BudgetError(f"{n_states} states exceed the enumeration budget")
        self.space = space
        self.budget = budget
        self.counts = _count_vectors(space.size, budget.max_total)
        probs = np.ones(len(self.counts))
        for j in range(space.size):
            cdf = _poisson_cdf(float(space.weights[j]))
            pmf = np.diff(cdf, prepend=0.0)
            if len(pmf) < budget.max_total + 1:
                pmf = np.concatenate([pmf, np.zeros(budget.max_total + 1 - len(pmf))])
            probs *= pmf[self.counts[:, j]]
        self.probs = probs

    @classmethod
    def get(cls, space: MeasureSpace, budget: OracleBudget) -> "PoissonEnumeration":
        key = (space.cache_key(), budget.max_total)
        found = cls._cache.get(key)
        if found is None:
            found = cls(space, budget)
            cls._cache[key] = found
        return found

    def expectation_of(self, G) -> float:
        return self.expectation_of_values(G.evaluate_counts(self.counts))

    def expectation_of_values(self, values: np.ndarray) -> float:
        return float(np.dot(values, self.probs))


def oracle_expectation(space: MeasureSpace, G, budget: OracleBudget) -> float:
    """Exact truncated expectation of a functional under the Poisson law."""
    return PoissonEnumeration.get(space, budget).expectation_of(G)


# ---------------------------------------------------------------------------
# comparison policy


@dataclass(frozen=True)
class TolerancePolicy:
    """Pass threshold: z standard errors plus an absolute floor."""

    z: float = 4.0
    abs_tol: float = 1e-6
    exact_tol: float = 1e-9


@dataclass(frozen=True)
class Verdict:
    passed: bool
    diff: float
    tolerance: float
    se_combined: float
    margin: float


def _mean_se(x) -> tuple[float, float]:
    if isinstance(x, Estimate):
        return x.mean, x.se
    return float(x), 0.0


def compare(lhs, rhs, policy: TolerancePolicy = TolerancePolicy()) -> Verdict:
    """PASS iff the two values agree within the policy's threshold.

    Each side is either exact or an :class:`Estimate`; with two exact
    sides the threshold collapses to the exact tolerance.
    """
    lm, ls = _mean_se(lhs)
    rm, rs = _mean_se(rhs)
    se = math.hypot(ls, rs)
    floor = policy.abs_tol if (ls or rs) else policy.exact_tol
    tolerance = policy.z * se + floor
    diff = abs(lm - rm)
    return Verdict(passed=diff <= tolerance, diff=diff, tolerance=tolerance,
                   se_combined=se, margin=tolerance - diff)
