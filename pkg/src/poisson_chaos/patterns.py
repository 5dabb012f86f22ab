"""Point patterns and the stochastic primitives built on them.

A pattern is one multiplicity per atom.  Sampling goes through inverse
CDF lookups driven by the counter-based streams in :mod:`.rng`, so every
draw is reproducible and batches of replicates vectorize: the functions
ending in ``_counts`` operate on whole ``(replicates, atoms)`` count
matrices and are exactly the per-pattern operations applied rowwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractViolationError, UnsupportedArityError
from .rng import RngStream, stream_uniforms
from .space import Kernel, MeasureSpace

FACTORIAL_ARITY_CAP = 4


@dataclass(frozen=True, eq=False)
class PointPattern:
    """A realization of the point process: one count per atom."""

    space: MeasureSpace
    counts: np.ndarray

    def __init__(self, space: MeasureSpace, counts):
        c = np.asarray(counts, dtype=np.int64).copy()
        if c.shape != (space.size,):
            raise ContractViolationError("one count per atom is required")
        if np.any(c < 0):
            raise ContractViolationError("counts must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "counts", c)

    @staticmethod
    def empty(space: MeasureSpace) -> "PointPattern":
        return PointPattern(space, np.zeros(space.size, dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def count_of(self, atom: str) -> int:
        return int(self.counts[self.space.index(atom)])

    def add_point(self, atom_index: int) -> "PointPattern":
        c = self.counts.copy()
        c[atom_index] += 1
        return PointPattern(self.space, c)

    def remove_point(self, atom_index: int) -> "PointPattern":
        if self.counts[atom_index] < 1:
            raise ContractViolationError("cannot remove a point from an empty atom")
        c = self.counts.copy()
        c[atom_index] -= 1
        return PointPattern(self.space, c)

    def point_atoms(self) -> np.ndarray:
        """Atom index of every point instance, multiplicity respected."""
        return np.repeat(np.arange(self.space.size), self.counts)

    def measure_of(self, f: Kernel) -> float:
        """Integral of an arity-1 kernel against the counting measure."""
        if f.arity != 1:
            raise ContractViolationError("counting-measure integral needs arity 1")
        return float(self.counts @ f.values)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PointPattern)
                and self.space.same_as(other.space)
                and np.array_equal(self.counts, other.counts))

    def __hash__(self) -> int:
        return hash((self.space.cache_key(), self.counts.tobytes()))

    def __repr__(self) -> str:
        return f"PointPattern({self.counts.tolist()})"


# ---------------------------------------------------------------------------
# inverse-CDF tables


@lru_cache(maxsize=512)
def _poisson_cdf(mean: float) -> np.ndarray:
    """CDF values of a Poisson law, extended until the tail is below 1e-18."""
    if mean < 0:
        raise ContractViolationError("Poisson mean must be >= 0")
    if mean == 0.0:
        return np.array([1.0])
    pmf = [math.exp(-mean)]
    k = 0
    while k < mean + 1 or pmf[-1] > 1e-18:
        k += 1
        pmf.append(pmf[-1] * mean / k)
        if k > 10_000:
            break
    cdf = np.cumsum(pmf)
    cdf[-1] = max(cdf[-1], 1.0)
    return cdf


@lru_cache(maxsize=512)
def _binomial_cdf_rows(n_max: int, s: float) -> np.ndarray:
    """Row n holds the Binomial(n, s) CDF at k = 0..n, padded with ones."""
    rows = np.ones((n_max + 1, n_max + 2))
    for n in range(n_max + 1):
        pmf = np.array([math.comb(n, k) * s**k * (1.0 - s) ** (n - k)
                        for k in range(n + 1)])
        rows[n, : n + 1] = np.minimum(np.cumsum(pmf), 1.0)
    return rows


def _invert_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Smallest k with cdf[k] > u, vectorized over u."""
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


# ---------------------------------------------------------------------------
# sampling, vectorized across replicate streams


def poisson_counts_with_uniforms(space: MeasureSpace, scale: float,
                                 u: np.ndarray) -> np.ndarray:
    """Poisson(weight * scale) counts by CDF inversion of given uniforms.

    Inversion is monotone in each uniform, which is what couples draws
    across nearby intensities when uniforms are reused.
    """
    counts = np.empty(u.shape, dtype=np.int64)
    for j in range(space.size):
        counts[:, j] = _invert_cdf(_poisson_cdf(float(space.weights[j] * scale)), u[:, j])
    return counts


def thin_counts_with_uniforms(counts: np.ndarray, s: float, u: np.ndarray) -> np.ndarray:
    """Binomial(count, s) survivors per atom from given uniforms."""
    if not 0.0 <= s <= 1.0:
        raise ContractViolationError("retention probability must lie in [0, 1]")
    n_max = int(counts.max(initial=0))
    rows = _binomial_cdf_rows(n_max, float(s))
    kept = np.empty_like(counts)
    for j in range(counts.shape[1]):
        kept[:, j] = np.sum(rows[counts[:, j], :] <= u[:, j, None], axis=1)
    return kept


def sample_poisson_counts(space: MeasureSpace, seed: int, streams: np.ndarray,
                          scale: float = 1.0, sub1: int = 0, sub2: int = 0) -> np.ndarray:
    """Count matrix with row i drawn from stream ``streams[i]``.

    Each atom's count is Poisson with the atom weight times ``scale``,
    obtained by CDF inversion of one uniform per atom.
    """
    u = stream_uniforms(seed, streams, space.size, sub1, sub2)
    return poisson_counts_with_uniforms(space, scale, u)


def thin_counts(counts: np.ndarray, s: float, seed: int, streams: np.ndarray,
                sub1: int = 0, sub2: int = 0) -> np.ndarray:
    """Binomial(count, s) survivors per atom; one uniform per atom."""
    u = stream_uniforms(seed, streams, counts.shape[1], sub1, sub2)
    return thin_counts_with_uniforms(counts, s, u)


def sample_poisson(space: MeasureSpace, rng: RngStream) -> PointPattern:
    """One Poisson pattern: independent Poisson(weight) count per atom."""
    streams = np.array([rng.stream], dtype=np.uint64)
    counts = sample_poisson_counts(space, rng.seed, streams, 1.0, rng.sub1, rng.sub2)
    return PointPattern(space, counts[0])


def thin(pattern: PointPattern, s: float, rng: RngStream) -> PointPattern:
    """Independent retention of each point with probability s."""
    streams = np.array([rng.stream], dtype=np.uint64)
    kept = thin_counts(pattern.counts[None, :], s, rng.seed, streams, rng.sub1, rng.sub2)
    return PointPattern(pattern.space, kept[0])


def superpose(p: PointPattern, q: PointPattern) -> PointPattern:
    """Sum of two counting measures on the same space."""
    if not p.space.same_as(q.space):
        raise ContractViolationError("patterns live on different spaces")
    return PointPattern(p.space, p.counts + q.counts)


# ---------------------------------------------------------------------------
# factorial measures


def distinct_tuples(pattern: PointPattern, m: int) -> np.ndarray:
    """Atom labels of all ordered m-tuples of pairwise distinct points.

    Distinctness is at the level of point instances, so an atom with
    multiplicity c contributes up to c entries to a tuple.
    """
    pts = pattern.point_atoms()
    if m > pts.size:
        return np.empty((0, m), dtype=np.int64)
    tuples = np.array(list(itertools.permutations(range(pts.size), m)), dtype=np.int64)
    return pts[tuples]


def factorial_apply(pattern: PointPattern, f: Kernel) -> float:
    """Sum of f over ordered tuples of pairwise distinct points.

    For the constant kernel this is the falling factorial of the total
    point count; the empty tuple convention makes arity 0 return the
    kernel's scalar unchanged.
    """
    m = f.arity
    if m == 0:
        return float(f.values)
    if m > FACTORIAL_ARITY_CAP:
        raise UnsupportedArityError(f"factorial measure arity capped at {FACTORIAL_ARITY_CAP}")
    if not f.space.same_as(pattern.space):
        raise ContractViolationError("kernel defined on a different space")
    labels = distinct_tuples(pattern, m)
    if labels.shape[0] == 0:
        return 0.0
    return float(f.values[tuple(labels[:, i] for i in range(m))].sum())


def _falling_factorial_table(counts: np.ndarray, m: int) -> np.ndarray:
    """table[..., j] = counts * (counts-1) * ... * (counts-j+1), j = 0..m."""
    table = np.ones(counts.shape + (m + 1,))
    c = counts.astype(np.float64)
    for j in range(1, m + 1):
        table[..., j] = table[..., j - 1] * (c - (j - 1))
    return table


def factorial_counts(counts: np.ndarray, f: Kernel) -> np.ndarray:
    """Rowwise factorial-measure integral over a count matrix.

    Equivalent to ``factorial_apply`` applied to each row: a tuple of
    atoms visiting atom a with multiplicity m_a carries the falling
    factorial (c_a)(c_a - 1)...(c_a - m_a + 1) many instance tuples.
    """
    m = f.arity
    if m == 0:
        return np.full(counts.shape[0], float(f.values))
    if m > FACTORIAL_ARITY_CAP:
        raise UnsupportedArityError(f"factorial measure arity capped at {FACTORIAL_ARITY_CAP}")
    d = counts.shape[1]
    table = _falling_factorial_table(counts, m)
    out = np.zeros(counts.shape[0])
    for tup in itertools.product(range(d), repeat=m):
        coeff = float(f.values[tup])
        if coeff == 0.0:
            continue
        mult = np.bincount(np.asarray(tup), minlength=d)
        term = np.full(counts.shape[0], coeff)
        for a in np.nonzero(mult)[0]:
            term = term * table[:, a, mult[a]]
        out += term
    return out


def factorial_tensor_power(pattern: PointPattern, values: np.ndarray, k: int) -> float:
    """Factorial-measure integral of a k-fold tensor power of an arity-1 table.

    Ordered distinct tuples of a product kernel reduce to k! times the
    k-th elementary symmetric polynomial of the per-point values, which
    the standard one-row recurrence builds without any arity cap.
    """
    if k == 0:
        return 1.0
    pts = pattern.point_atoms()
    if k > pts.size:
        return 0.0
    x = np.asarray(values, dtype=np.float64)[pts]
    e = np.zeros(k + 1)
    e[0] = 1.0
    for i, xi in enumerate(x):
        for j in range(min(k, i + 1), 0, -1):
            e[j] += xi * e[j - 1]
    return float(e[k] * math.factorial(k))
