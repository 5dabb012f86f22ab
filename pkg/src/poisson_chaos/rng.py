"""Counter-based random number streams.

Every stream is a Philox-4x64-10 generator keyed by a ``(seed, stream)``
pair, so draws are pure functions of (key, counter) with no sequential
state.  That gives three properties the estimation engine relies on:

* distinct ``(seed, stream)`` pairs are statistically independent;
* any replicate's numbers can be produced out of order, which makes
  results independent of how work is split across workers;
* whole batches of streams can be generated in one vectorized pass.

The block function matches the Philox implementation shipped with NumPy
bit for bit (see ``tests/test_rng.py``), but is evaluated with NumPy
uint64 arithmetic over arrays of keys and counters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_ROUNDS = 10

_MASK32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_SH11 = np.uint64(11)
_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)
# 2**-53; doubles are built from the top 53 bits of each 64-bit word.
_DOUBLE_SCALE = 1.0 / 9007199254740992.0


def _mulhilo(a: np.ndarray, m: np.uint64) -> tuple[np.ndarray, np.ndarray]:
    """Full 64x64 -> 128 bit product via 32-bit limbs (wrapping uint64)."""
    lo = a * m
    a_lo = a & _MASK32
    a_hi = a >> _SH32
    m_lo = m & _MASK32
    m_hi = m >> _SH32
    carry = ((a_lo * m_lo) >> _SH32) + ((a_hi * m_lo) & _MASK32) + ((a_lo * m_hi) & _MASK32)
    hi = a_hi * m_hi + ((a_hi * m_lo) >> _SH32) + ((a_lo * m_hi) >> _SH32) + (carry >> _SH32)
    return hi, lo


def _philox4x64(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds over broadcastable uint64 arrays; returns 4 words."""
    # at least 1-d so the key bumps stay on the (silent) array overflow path
    k0 = np.atleast_1d(np.asarray(k0, dtype=np.uint64))
    k1 = np.atleast_1d(np.asarray(k1, dtype=np.uint64))
    for r in range(_ROUNDS):
        if r:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(c0, _M0)
        hi1, lo1 = _mulhilo(c2, _M1)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def _as_u64(x) -> np.uint64:
    return np.uint64(int(x) & 0xFFFFFFFFFFFFFFFF)


def raw_blocks(seed: int, streams: np.ndarray, n_blocks: int,
               sub1: int = 0, sub2: int = 0) -> np.ndarray:
    """Raw 64-bit words for a batch of streams.

    Returns a uint64 array of shape ``(len(streams), 4 * n_blocks)``; row i
    holds the words of stream ``streams[i]`` in counter order.  ``sub1`` and
    ``sub2`` select a substream by occupying the third and fourth counter
    words (the block index occupies the first).
    """
    streams = np.asarray(streams, dtype=np.uint64)
    # NumPy's Philox advances the counter before producing a block, so the
    # first emitted block sits at counter word 1; match that exactly.
    blocks = np.arange(1, n_blocks + 1, dtype=np.uint64)
    c0 = np.broadcast_to(blocks, (streams.size, n_blocks))
    zero = np.zeros((streams.size, n_blocks), dtype=np.uint64)
    c2 = zero + _as_u64(sub1)
    c3 = zero + _as_u64(sub2)
    k0 = np.asarray(_as_u64(seed))
    k1 = streams[:, None]
    v0, v1, v2, v3 = _philox4x64(c0, zero, c2, c3, k0, k1)
    out = np.empty((streams.size, n_blocks, 4), dtype=np.uint64)
    out[..., 0] = v0
    out[..., 1] = v1
    out[..., 2] = v2
    out[..., 3] = v3
    return out.reshape(streams.size, 4 * n_blocks)


def stream_uniforms(seed: int, streams: np.ndarray, n: int,
                    sub1: int = 0, sub2: int = 0) -> np.ndarray:
    """Uniform [0,1) doubles, one row per stream, ``n`` per row."""
    if n == 0:
        return np.zeros((np.asarray(streams).size, 0))
    n_blocks = -(-n // 4)
    words = raw_blocks(seed, streams, n_blocks, sub1, sub2)
    return (words[:, :n] >> _SH11).astype(np.float64) * _DOUBLE_SCALE


@dataclass(frozen=True)
class RngStream:
    """Handle for one reproducible substream.

    ``seed`` is shared by a whole run; ``stream`` separates independent
    consumers (e.g. Monte Carlo replicates).  ``substream`` carves out
    further lanes for operations that need several independent sources
    from the same stream (thinning draws vs. fresh Poisson fields, say).
    """

    seed: int
    stream: int = 0
    sub1: int = 0
    sub2: int = 0

    def substream(self, a: int, b: int = 0) -> "RngStream":
        # +1 keeps every substream distinct from the root lane (0, 0).
        return RngStream(self.seed, self.stream, a + 1, b + 1)

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` uniform [0,1) doubles from this stream's lane."""
        return stream_uniforms(self.seed, np.array([self.stream], dtype=np.uint64),
                               n, self.sub1, self.sub2)[0]
