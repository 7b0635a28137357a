"""Counter-based random streams for numba kernels.

Each simulated path reads its own Philox4x32-10 stream.  The 64-bit seed is
the cipher key and the counter is ``(block, path)`` with both halves 64 bits
wide, so draws depend only on ``(seed, path, position)``.  Splitting paths
across workers therefore cannot change any result.

Normals come from a 256-layer ziggurat; uniforms lie strictly inside (0, 1).
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

__all__ = [
    "philox4x32",
    "stream_init",
    "next_u64",
    "next_uniform",
    "next_normal",
    "next_exponential",
    "ZIG_X",
    "ZIG_F",
]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_S8 = np.uint64(8)
_ONE = np.uint64(1)
_B8 = np.uint64(0xFF)
_TWO_M53 = 2.0**-53

# state layout: key words, counter words, two buffered outputs, buffer position
_K0, _K1, _C0, _C1, _C2, _C3, _BUF, _POS = 0, 1, 2, 3, 4, 5, 6, 8
STATE_SIZE = 9


@nb.njit(inline="always")
def _rounds(c0, c1, c2, c3, k0, k1):
    for r in range(10):
        if r > 0:
            k0 = (k0 + _W0) & _LO32
            k1 = (k1 + _W1) & _LO32
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (p1 >> _S32) ^ c1 ^ k0, p1 & _LO32, (p0 >> _S32) ^ c3 ^ k1, p0 & _LO32
    return c0, c1, c2, c3


@nb.njit(cache=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32-10 on 32-bit words (passed and returned as uint64)."""
    return _rounds(c0 & _LO32, c1 & _LO32, c2 & _LO32, c3 & _LO32, k0 & _LO32, k1 & _LO32)


@nb.njit(cache=True)
def stream_init(seed, path):
    st = np.zeros(STATE_SIZE, dtype=np.uint64)
    s = np.uint64(seed)
    p = np.uint64(path)
    st[_K0] = s & _LO32
    st[_K1] = s >> _S32
    st[_C2] = p & _LO32
    st[_C3] = p >> _S32
    st[_POS] = np.uint64(2)
    return st


@nb.njit(inline="always")
def next_u64(st):
    if st[_POS] == _ONE + _ONE:
        b0, b1, b2, b3 = _rounds(st[_C0], st[_C1], st[_C2], st[_C3], st[_K0], st[_K1])
        st[_BUF] = b0 | (b1 << _S32)
        st[_BUF + 1] = b2 | (b3 << _S32)
        st[_POS] = np.uint64(0)
        # 64-bit block counter split over two words
        st[_C0] = (st[_C0] + _ONE) & _LO32
        if st[_C0] == np.uint64(0):
            st[_C1] = (st[_C1] + _ONE) & _LO32
    if st[_POS] == np.uint64(0):
        st[_POS] = _ONE
        return st[_BUF]
    st[_POS] = _ONE + _ONE
    return st[_BUF + 1]


@nb.njit(inline="always")
def next_uniform(st):
    return (float(np.int64(next_u64(st) >> _S11)) + 0.5) * _TWO_M53


@nb.njit(inline="always")
def next_exponential(st):
    return -math.log(next_uniform(st))


def _ziggurat_tables(n=256, r=3.6541528853610088):
    f = lambda x: math.exp(-0.5 * x * x)  # noqa: E731
    v = r * f(r) + math.sqrt(math.pi / 2) * math.erfc(r / math.sqrt(2))
    x = np.empty(n + 1)
    x[0] = v / f(r)
    x[1] = r
    for i in range(2, n):
        x[i] = math.sqrt(-2.0 * math.log(v / x[i - 1] + f(x[i - 1])))
    x[n] = 0.0
    return x, np.exp(-0.5 * x * x)


ZIG_X, ZIG_F = _ziggurat_tables()
_ZIG_R = float(ZIG_X[1])


@nb.njit(inline="always")
def _normal_slow(st, i, z, neg):
    """Tail and wedge handling; loops until a draw is accepted."""
    while True:
        if i == 0:
            # base layer overflow: sample the tail beyond r
            while True:
                a = -math.log(next_uniform(st)) / _ZIG_R
                b = -math.log(next_uniform(st))
                if 2.0 * b > a * a:
                    z = _ZIG_R + a
                    return -z if neg else z
        y = ZIG_F[i] + next_uniform(st) * (ZIG_F[i + 1] - ZIG_F[i])
        if y < math.exp(-0.5 * z * z):
            return -z if neg else z
        u = next_u64(st)
        i = np.intp(u & _B8)
        neg = ((u >> _S8) & _ONE) == _ONE
        z = float(np.int64(u >> _S11)) * _TWO_M53 * ZIG_X[i]
        if z < ZIG_X[i + 1]:
            return -z if neg else z


@nb.njit(inline="always")
def next_normal(st):
    u = next_u64(st)
    i = np.intp(u & _B8)
    neg = ((u >> _S8) & _ONE) == _ONE
    z = float(np.int64(u >> _S11)) * _TWO_M53 * ZIG_X[i]
    if z < ZIG_X[i + 1]:
        return -z if neg else z
    return _normal_slow(st, i, z, neg)
