"""Functionals of point patterns and their chaos-level descriptions.

The structured variants (exponential family, polynomials in the counts)
carry closed forms for means, difference operators and chaos
coefficients, so every sampled or enumerated estimate in the test
suites can be held against an independent exact value.  Arbitrary
callables are supported through :class:`Opaque` but only get the
sampled treatment.

All functionals evaluate both on a single pattern and, vectorized, on a
``(replicates, atoms)`` count matrix; the vectorized path is what keeps
the Monte Carlo engine fast.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ContractViolationError, EvaluationError, UnsupportedArityError
from .patterns import PointPattern
from .space import Kernel, MeasureSpace, integrate, symmetrize, tensor_power

ITERATED_DIFFERENCE_CAP = 6
CHAOS_ORDER_CAP = 4


# ---------------------------------------------------------------------------
# combinatorial helpers


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Number of partitions of an n-set into k blocks."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def poisson_raw_moment(mean: float, m: int) -> float:
    """E[X^m] for X Poisson(mean), via the Stirling expansion."""
    return float(sum(stirling2(m, k) * mean**k for k in range(m + 1)))


@lru_cache(maxsize=None)
def falling_factorial_coeffs(k: int) -> tuple[float, ...]:
    """Coefficients of n(n-1)...(n-k+1) in the power basis 1, n, n^2, ..."""
    coeffs = np.array([1.0])
    for j in range(k):
        shifted = np.concatenate([[0.0], coeffs])
        coeffs = shifted - j * np.concatenate([coeffs, [0.0]])
    return tuple(coeffs)


# ---------------------------------------------------------------------------
# functional variants


class Functional:
    """A map from point patterns on a fixed space to reals."""

    def __init__(self, space: MeasureSpace):
        self.space = space

    def evaluate_counts(self, counts: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on a (replicates, atoms) count matrix."""
        raise NotImplementedError

    def evaluate(self, pattern: PointPattern) -> float:
        if not pattern.space.same_as(self.space):
            raise ContractViolationError("pattern lives on a different space")
        value = float(self.evaluate_counts(pattern.counts[None, :])[0])
        if not math.isfinite(value):
            raise EvaluationError(f"functional evaluated to {value!r}")
        return value

    def closed_form_mean(self) -> float | None:
        """Exact expectation under the Poisson law, when one is known."""
        return None

    def shifted_by_point(self, atom_index: int) -> "Functional":
        """The functional of the pattern with one extra point at the atom."""
        shift = np.zeros(self.space.size, dtype=np.int64)
        shift[atom_index] = 1
        return Opaque(self.space,
                      counts_fn=lambda c, s=shift, f=self: f.evaluate_counts(c + s))

    # -- algebra ------------------------------------------------------------

    def __add__(self, other):
        other = _coerce(self.space, other)
        return Opaque(self.space, counts_fn=lambda c, a=self, b=other:
                      a.evaluate_counts(c) + b.evaluate_counts(c))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * _coerce(self.space, other)

    def __rsub__(self, other):
        return _coerce(self.space, other) + (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Opaque(self.space, counts_fn=lambda c, a=self, k=float(other):
                          k * a.evaluate_counts(c))
        other = _coerce(self.space, other)
        return Opaque(self.space, counts_fn=lambda c, a=self, b=other:
                      a.evaluate_counts(c) * b.evaluate_counts(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)


def _coerce(space: MeasureSpace, value) -> Functional:
    if isinstance(value, Functional):
        return value
    if isinstance(value, (int, float)):
        return CountPolynomial(space, [(float(value), (0,) * space.size)])
    raise TypeError(f"cannot combine a functional with {type(value)!r}")


class Exponential(Functional):
    """exp(-chi(v)) for a nonnegative arity-1 kernel v."""

    def __init__(self, space: MeasureSpace, v: Kernel | Sequence[float]):
        super().__init__(space)
        if not isinstance(v, Kernel):
            v = Kernel(space, v)
        if v.arity != 1:
            raise ContractViolationError("exponent kernel must have arity 1")
        if np.any(v.values < 0):
            raise ContractViolationError("exponent kernel must be nonnegative")
        self.v = v

    def evaluate_counts(self, counts: np.ndarray) -> np.ndarray:
        return np.exp(-(counts @ self.v.values))

    def closed_form_mean(self) -> float:
        w = self.space.weights
        return float(np.exp(-np.sum(w * (1.0 - np.exp(-self.v.values)))))

    def difference_factor(self) -> np.ndarray:
        """Per-atom multiplier picked up by one added point: exp(-v) - 1."""
        return np.exp(-self.v.values) - 1.0

    def terms(self) -> tuple[tuple[float, "Exponential"], ...]:
        return ((1.0, self),)

    def __mul__(self, other):
        if isinstance(other, Exponential) and other.space.same_as(self.space):
            return Exponential(self.space, self.v + other.v)
        if isinstance(other, LinearCombo):
            return other * self
        if isinstance(other, (int, float)):
            return LinearCombo(self.space, [(float(other), self)])
        return super().__mul__(other)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, Exponential):
            return LinearCombo(self.space, [(1.0, self), (1.0, other)])
        if isinstance(other, LinearCombo):
            return LinearCombo(self.space, [(1.0, self), *other.terms()])
        if isinstance(other, (int, float)):
            return LinearCombo(self.space, [(1.0, self),
                                            (float(other), Exponential.one(self.space))])
        return super().__add__(other)

    __radd__ = __add__

    @staticmethod
    def one(space: MeasureSpace) -> "Exponential":
        return Exponential(space, Kernel.constant(space, 1, 0.0))

    def __repr__(self) -> str:
        return f"Exponential(v={self.v.values.tolist()})"


class LinearCombo(Functional):
    """Finite linear combination of exponentials; closed under products."""

    def __init__(self, space: MeasureSpace, terms: Sequence[tuple[float, Exponential]]):
        super().__init__(space)
        cleaned = []
        for coef, e in terms:
            if not isinstance(e, Exponential) or not e.space.same_as(space):
                raise ContractViolationError("terms must be exponentials on the space")
            if not math.isfinite(coef):
                raise ContractViolationError("coefficients must be finite")
            cleaned.append((float(coef), e))
        self._terms = tuple(cleaned)

    def terms(self) -> tuple[tuple[float, Exponential], ...]:
        return self._terms

    def evaluate_counts(self, counts: np.ndarray) -> np.ndarray:
        out = np.zeros(counts.shape[0])
        for coef, e in self._terms:
            out += coef * e.evaluate_counts(counts)
        return out

    def closed_form_mean(self) -> float:
        return float(sum(coef * e.closed_form_mean() for coef, e in self._terms))

    def __add__(self, other):
        if isinstance(other, (Exponential, LinearCombo)):
            return LinearCombo(self.space, [*self._terms, *other.terms()])
        if isinstance(other, (int, float)):
            return LinearCombo(self.space,
                               [*self._terms, (float(other), Exponential.one(self.space))])
        return super().__add__(other)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return LinearCombo(self.space, [(c * float(other), e) for c, e in self._terms])
        if isinstance(other, (Exponential, LinearCombo)):
            prod = []
            for c1, e1 in self._terms:
                for c2, e2 in other.terms():
                    prod.append((c1 * c2, e1 * e2))
            return LinearCombo(self.space, prod)
        return super().__mul__(other)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"LinearCombo({len(self._terms)} terms)"


class CountPolynomial(Functional):
    """Polynomial in the per-atom counts.

    Terms are (coefficient, exponent-per-atom) pairs; the family is
    closed under sums, products and one-point shifts, and its Poisson
    moments are exact through the Stirling expansion.
    """

    def __init__(self, space: MeasureSpace, terms):
        super().__init__(space)
        merged: dict[tuple[int, ...], float] = {}
        if isinstance(terms, dict):
            pairs = [(c, e) for e, c in terms.items()]
        else:
            pairs = [(c, e) for c, e in terms]
        for coef, exps in pairs:
            exps = tuple(int(x) for x in exps)
            if len(exps) != space.size or any(x < 0 for x in exps):
                raise ContractViolationError("bad exponent vector")
            if not math.isfinite(coef):
                raise ContractViolationError("coefficients must be finite")
            merged[exps] = merged.get(exps, 0.0) + float(coef)
        self._terms = {e: c for e, c in merged.items() if c != 0.0}

    @staticmethod
    def total_count(space: MeasureSpace) -> "CountPolynomial":
        terms = []
        for j in range(space.size):
            e = [0] * space.size
            e[j] = 1
            terms.append((1.0, tuple(e)))
        return CountPolynomial(space, terms)

    @staticmethod
    def atom_count(space: MeasureSpace, atom_index: int) -> "CountPolynomial":
        e = [0] * space.size
        e[atom_index] = 1
        return CountPolynomial(space, [(1.0, tuple(e))])

    def term_items(self):
        return self._terms.items()

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def evaluate_counts(self, counts: np.ndarray) -> np.ndarray:
        out = np.zeros(counts.shape[0])
        c = counts.astype(np.float64)
        for exps, coef in self._terms.items():
            term = np.full(counts.shape[0], coef)
            for j, e in enumerate(exps):
                if e:
                    term = term * c[:, j] ** e
            out += term
        return out

    def closed_form_mean(self) -> float:
        total = 0.0
        for exps, coef in self._terms.items():
            prod = coef
            for j, e in enumerate(exps):
                if e:
                    prod *= poisson_raw_moment(float(self.space.weights[j]), e)
            total += prod
        return float(total)

    def shifted_by_point(self, atom_index: int) -> "CountPolynomial":
        out: list[tuple[float, tuple[int, ...]]] = []
        for exps, coef in self._terms.items():
            e = exps[atom_index]
            if e == 0:
                out.append((coef, exps))
                continue
            for i in range(e + 1):
                new = list(exps)
                new[atom_index] = i
                out.append((coef * math.comb(e, i), tuple(new)))
        return CountPolynomial(self.space, out)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = _coerce(self.space, other)
        if isinstance(other, CountPolynomial):
            return CountPolynomial(self.space,
                                   [(c, e) for e, c in self._terms.items()]
                                   + [(c, e) for e, c in other._terms.items()])
        return super().__add__(other)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return CountPolynomial(self.space,
                                   [(c * float(other), e) for e, c in self._terms.items()])
        if isinstance(other, CountPolynomial):
            prod = []
            for e1, c1 in self._terms.items():
                for e2, c2 in other._terms.items():
                    prod.append((c1 * c2, tuple(a + b for a, b in zip(e1, e2))))
            return CountPolynomial(self.space, prod)
        return super().__mul__(other)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"CountPolynomial({len(self._terms)} terms, degree {self.degree()})"


class Opaque(Functional):
    """Arbitrary callable functional; library-only, never serialized."""

    def __init__(self, space: MeasureSpace,
                 fn: Callable[[PointPattern], float] | None = None,
                 counts_fn: Callable[[np.ndarray], np.ndarray] | None = None):
        super().__init__(space)
        if fn is None and counts_fn is None:
            raise ContractViolationError("an evaluation callback is required")
        self._fn = fn
        self._counts_fn = counts_fn

    def evaluate_counts(self, counts: np.ndarray) -> np.ndarray:
        if self._counts_fn is not None:
            return np.asarray(self._counts_fn(counts), dtype=np.float64)
        return np.array([self._fn(PointPattern(self.space, row)) for row in counts])


# ---------------------------------------------------------------------------
# difference operators


def difference(F: Functional, atom_index: int, pattern: PointPattern) -> float:
    """One-point increment: F with the point added minus F as is."""
    plus = pattern.add_point(atom_index)
    return F.evaluate(plus) - F.evaluate(pattern)


def difference_counts(F: Functional, atom_index: int, counts: np.ndarray) -> np.ndarray:
    shift = np.zeros(counts.shape[1], dtype=np.int64)
    shift[atom_index] = 1
    return F.evaluate_counts(counts + shift) - F.evaluate_counts(counts)


def iterated_difference(F: Functional, atom_indices: Sequence[int],
                        pattern: PointPattern) -> float:
    """n-th order add-point difference via the signed subset sum."""
    return float(iterated_difference_counts(F, atom_indices, pattern.counts[None, :])[0])


def iterated_difference_counts(F: Functional, atom_indices: Sequence[int],
                               counts: np.ndarray) -> np.ndarray:
    n = len(atom_indices)
    if n == 0:
        return F.evaluate_counts(counts)
    if n > ITERATED_DIFFERENCE_CAP:
        raise UnsupportedArityError(
            f"iterated difference order capped at {ITERATED_DIFFERENCE_CAP}")
    out = np.zeros(counts.shape[0])
    d = counts.shape[1]
    for bits in itertools.product((0, 1), repeat=n):
        shift = np.zeros(d, dtype=np.int64)
        for j, bit in enumerate(bits):
            if bit:
                shift[atom_indices[j]] += 1
        sign = (-1.0) ** (n - sum(bits))
        out += sign * F.evaluate_counts(counts + shift)
    return out


# ---------------------------------------------------------------------------
# chaos vectors


class ChaosVector:
    """Truncated sequence of symmetric kernels describing a functional.

    Entry 0 is the expectation; entry n is the order-n coefficient
    kernel, already carrying its 1/n! normalization, so reconstruction
    is a plain sum of stochastic integrals of the stored kernels.
    """

    def __init__(self, space: MeasureSpace, coefficients: Sequence, tol: float = 1e-12):
        self.space = space
        coeffs: list = [float(coefficients[0]) if not isinstance(coefficients[0], Kernel)
                        else float(coefficients[0].values)]
        for n, k in enumerate(coefficients[1:], start=1):
            if not isinstance(k, Kernel):
                k = Kernel(space, k)
            if k.arity != n:
                raise ContractViolationError(f"coefficient {n} must have arity {n}")
            if not k.space.same_as(space):
                raise ContractViolationError("coefficient on a different space")
            if n >= 2 and np.max(np.abs(k.values - symmetrize(k).values)) > tol:
                raise ContractViolationError(f"coefficient {n} is not symmetric")
            coeffs.append(k)
        self.coefficients = tuple(coeffs)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, n: int) -> Kernel | float:
        if n == 0:
            return self.coefficients[0]
        if n <= self.order:
            return self.coefficients[n]
        return Kernel.constant(self.space, n, 0.0)

    def weighted_norm_squared(self) -> float:
        """Second moment of the represented functional: sum of n! |f_n|^2."""
        total = self.coefficients[0] ** 2
        for n in range(1, self.order + 1):
            k = self.coefficients[n]
            total += math.factorial(n) * integrate(self.space, k.pointwise(k))
        return float(total)

    def map_levels(self, factor: Callable[[int], float]) -> "ChaosVector":
        out = [self.coefficients[0] * factor(0)]
        for n in range(1, self.order + 1):
            out.append(self.coefficients[n] * factor(n))
        return ChaosVector(self.space, out)

    def __add__(self, other: "ChaosVector") -> "ChaosVector":
        order = max(self.order, other.order)
        out = [self.coefficients[0] + other.coefficients[0]]
        for n in range(1, order + 1):
            a, b = self.coefficient(n), other.coefficient(n)
            out.append(a + b)
        return ChaosVector(self.space, out)

    def __mul__(self, c: float) -> "ChaosVector":
        return self.map_levels(lambda n: float(c))

    __rmul__ = __mul__

    def allclose(self, other: "ChaosVector", tol: float = 1e-12) -> bool:
        return self.max_abs_difference(other) <= tol

    def max_abs_difference(self, other: "ChaosVector") -> float:
        worst = abs(self.coefficients[0] - other.coefficients[0])
        for n in range(1, max(self.order, other.order) + 1):
            a, b = self.coefficient(n), other.coefficient(n)
            worst = max(worst, float(np.max(np.abs(a.values - b.values))))
        return worst


def chaos_of_exponential(F: Exponential | LinearCombo, order: int) -> ChaosVector:
    """Exact chaos coefficients of an exponential-family functional.

    Level n is mean * (exp(-v) - 1) tensored n times over n factorial;
    linear combinations add coefficientwise.
    """
    if order > CHAOS_ORDER_CAP:
        raise UnsupportedArityError(f"chaos order capped at {CHAOS_ORDER_CAP}")
    space = F.space
    total = [0.0] + [Kernel.constant(space, n, 0.0) for n in range(1, order + 1)]
    for coef, e in F.terms():
        f0 = e.closed_form_mean()
        base = Kernel(space, e.difference_factor())
        total[0] += coef * f0
        for n in range(1, order + 1):
            total[n] = total[n] + tensor_power(base, n) * (coef * f0 / math.factorial(n))
    return ChaosVector(space, total)


class KernelEstimate:
    """A kernel of Monte Carlo means with per-entry standard errors."""

    def __init__(self, values: Kernel, se: Kernel, replicates: int):
        self.values = values
        self.se = se
        self.replicates = replicates


def t_coefficient_mc(F: Functional, n: int, plan) -> KernelEstimate:
    """Monte Carlo estimate of the order-n difference-moment kernel.

    Entry (x1..xn) is the replicate average of the order-n difference
    of F at those atoms; one shared pool of sampled patterns serves all
    entries (common random numbers).  Order zero estimates the mean.
    """
    from .estimation import Estimate, mc_estimate, sample_poisson_counts

    if n > CHAOS_ORDER_CAP:
        raise UnsupportedArityError(f"difference-moment order capped at {CHAOS_ORDER_CAP}")
    space = F.space
    d = space.size
    tuples = list(itertools.product(range(d), repeat=n))

    estimates: dict[tuple[int, ...], Estimate] = {}
    for tup in tuples:
        def batch(streams, _start, tup=tup):
            counts = sample_poisson_counts(space, plan.seed, streams)
            if n == 0:
                return F.evaluate_counts(counts)
            return iterated_difference_counts(F, tup, counts)

        estimates[tup] = mc_estimate(plan, batch)

    if n == 0:
        est = estimates[()]
        return KernelEstimate(Kernel.scalar(space, est.mean),
                              Kernel.scalar(space, est.se), plan.replicates)
    means = np.zeros((d,) * n)
    ses = np.zeros((d,) * n)
    for tup, est in estimates.items():
        means[tup] = est.mean
        ses[tup] = est.se
    return KernelEstimate(Kernel(space, means), Kernel(space, ses), plan.replicates)


def chaos_by_enumeration(F: Functional, order: int, budget) -> ChaosVector:
    """Chaos coefficients from exact enumeration of the difference moments.

    Level n entry at an atom tuple is the enumerated expectation of the
    order-n difference of F there, divided by n factorial.  Exact (up to
    the enumeration tail) for any functional the budget covers.
    """
    from .estimation import PoissonEnumeration

    if order > CHAOS_ORDER_CAP:
        raise UnsupportedArityError(f"chaos order capped at {CHAOS_ORDER_CAP}")
    space = F.space
    enum = PoissonEnumeration.get(space, budget)
    coeffs: list = [float(enum.expectation_of(F))]
    d = space.size
    for n in range(1, order + 1):
        vals = np.zeros((d,) * n)
        for tup in itertools.product(range(d), repeat=n):
            diff = iterated_difference_counts(F, tup, enum.counts)
            vals[tup] = enum.expectation_of_values(diff) / math.factorial(n)
        coeffs.append(Kernel(space, vals))
    return ChaosVector(space, coeffs)
